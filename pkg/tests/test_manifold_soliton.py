import dataclasses

import numpy as np
import pytest

from warpsoliton.config import SolverConfig
from warpsoliton.geometry import WarpingFunction
from warpsoliton.ground_state import ConvergenceError, mass
from warpsoliton.linearized import low_spectrum
from warpsoliton.manifold_soliton import (
    fixed_point_rho,
    linearized_pair,
    manifold_mass,
    mass_derivative,
    profile_residual,
    strauss_check,
    vk_sign,
)

W1 = WarpingFunction.polynomial(1.0, 0.0)
ALPHAS = (8.0, 16.0, 32.0, 64.0)


@pytest.fixture(scope="module")
def solitons(gs60, grid):
    return {a: fixed_point_rho(a, W1, gs60, grid=grid) for a in ALPHAS}


def test_flat_gives_zero_correction(gs60, grid):
    cs = fixed_point_rho(16.0, WarpingFunction.flat(), gs60, grid=grid)
    assert cs.iterations == 1 and np.all(cs.rho == 0)
    assert manifold_mass(cs) == pytest.approx(mass(gs60), rel=1e-14)
    assert strauss_check(cs).passed


def test_contraction_and_monotone_decay(solitons):
    sups = [solitons[a].sup_norm for a in ALPHAS]
    assert np.all(np.diff(sups) < 0)
    for cs in solitons.values():
        assert 0 <= cs.contraction_factor < 1
        inc = np.array(cs.increments)
        assert np.all(inc[1:] < inc[:-1])
        assert inc[-1] < 1e-10


def test_profile_equation_residual(solitons):
    for cs in solitons.values():
        res = profile_residual(cs)
        assert np.max(np.abs(res[cs.grid.r <= 10])) < 1e-6


def test_leading_order_correction(solitons, profiles):
    # rho ~ alpha^-2 c1 Qhat1 for A = r + c1 r^3
    for a in (32.0, 64.0):
        cs = solitons[a]
        diff = cs.rho - profiles.Qhat1 / a**2
        assert np.max(np.abs(diff)) < 0.1 * np.max(np.abs(cs.rho))


def test_kernel_of_curved_L_minus(solitons):
    for cs in solitons.values():
        _, Lm = linearized_pair(cs)
        R = cs.profile
        assert cs.grid.norm(Lm.apply(R, 4)) / cs.grid.norm(R) < 5e-4


def test_curved_L_plus_invertible_uniformly(solitons):
    gaps = []
    for cs in solitons.values():
        Lp, Lm = linearized_pair(cs)
        sp = low_spectrum(Lp, 3)
        assert sp.neg_count == 1
        gaps.append(np.min(np.abs(sp.eigenvalues)))
        assert low_spectrum(Lm, 3).neg_count == 0
    assert min(gaps) > 0.5


def test_strauss_bound(solitons):
    chk = strauss_check(solitons[16.0])
    assert chk.passed and chk.constant < 10


def test_strauss_negative_control(solitons):
    cs = solitons[16.0]
    bad = dataclasses.replace(cs, rho=cs.rho + 1e-3 * cs.grid.r)
    assert not strauss_check(bad).passed


def test_mass_expansion_order(solitons, gs60):
    base = mass(gs60)
    dev = np.array([manifold_mass(solitons[a]) - base for a in ALPHAS])
    assert np.all(dev > 0)
    slope = np.polyfit(np.log(ALPHAS), np.log(dev), 1)[0]
    assert slope == pytest.approx(-4.0, abs=0.3)
    # positive kappa: mass decreases in alpha
    assert manifold_mass(solitons[16.0]) > manifold_mass(solitons[32.0])


def test_assembled_profile_finite_at_origin(solitons):
    cs = solitons[16.0]
    q = cs.manifold_profile(np.array([0.0, 1e-6, 0.1]))
    assert np.all(np.isfinite(q))
    assert q[0] == pytest.approx(16.0 * cs.profile[0], rel=1e-3)


def test_vk_classification(gs60, grid):
    assert vk_sign(WarpingFunction.flat(), (15.2, 16.8), gs60, grid=grid).classification == "indeterminate"
    assert mass_derivative(W1, 32.0, gs60, grid=grid).classification == "unstable"
    assert mass_derivative(WarpingFunction.polynomial(0.0, 1.0), 16.0, gs60, grid=grid).classification == "stable_candidate"


def test_small_alpha_rejected(gs60):
    with pytest.raises(ValueError):
        fixed_point_rho(2.0, W1, gs60)


def test_non_contraction_reported(gs60, grid):
    cfg = SolverConfig(alpha_min=0.1)
    with pytest.raises(ConvergenceError):
        fixed_point_rho(0.5, W1, gs60, config=cfg, grid=grid)


def test_manifold_mass_requires_critical_case(solitons):
    with pytest.raises(ValueError):
        manifold_mass(dataclasses.replace(solitons[8.0], p=5.0))
