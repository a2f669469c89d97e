import csv
import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from warpsoliton.config import SolverConfig
from warpsoliton.quadrature import inner_product
from warpsoliton.stability import (
    classify,
    compute_b1,
    compute_b2,
    compute_Q2,
    cross_validate_kappa,
    kappa,
    scan,
    scan_csv,
    stability_boundary,
)
from warpsoliton.tables import S1_COEFFS

finite = st.floats(-5, 5, allow_nan=False)


def _cos(f, g):
    return inner_product(f, g) / np.sqrt(inner_product(f, f) * inner_product(g, g))


def test_S0_values(profiles, shot):
    assert profiles.S0_func(np.array([0.0]))[0] == pytest.approx(shot.amplitude, abs=1e-7)
    assert profiles.residuals["L+S0+2Q"] < 1e-4


def test_pohozaev_identities(profiles):
    gs = profiles.ground_state
    assert abs(_cos(profiles.S0_func, gs)) < 1e-6
    assert abs(_cos(profiles.S0_func, lambda r: r**2 * gs(r) ** 3)) < 1e-6


def test_Qhat1_identities(profiles):
    res = profiles.residuals
    assert res["L+Qhat1+2Q+r^2Q^3"] < 1e-6
    assert res["Qhat1-direct"] < 1e-6
    assert abs(_cos(profiles.ground_state, profiles.Qhat1_func)) < 1e-6
    assert np.allclose(profiles.Qhat1, profiles.S0 + profiles.S1, rtol=0, atol=1e-15)


def test_S1_table(profiles):
    from warpsoliton.ground_state import solve_ground_state
    from warpsoliton.stability import solve_S1

    s1 = solve_S1(solve_ground_state(n_max=25), 40)
    assert np.max(np.abs(s1.coeffs - S1_COEFFS)) < 1e-3


def test_b1(constants, profiles):
    assert constants.b1 / (2 * np.pi) == pytest.approx(7.39, abs=0.05)
    assert constants.b1 >= 14 * np.pi
    assert abs(constants.b1 - constants.b1_grid) / constants.b1 < 1e-3
    b1, _ = compute_b1(profiles)
    assert b1 == pytest.approx(constants.b1, rel=1e-12)


def test_b2(constants, profiles):
    direct, ibp = compute_b2(profiles)
    assert ibp < 0
    assert abs(direct - ibp) / abs(ibp) < 1e-4
    gs = profiles.ground_state
    assert inner_product(gs, gs, 2) > 0
    assert inner_product(gs, lambda r: gs(r) ** 3, 4) > 0


def test_Q2(profiles, constants):
    zero, res0 = compute_Q2(profiles, 0.0, 0.0)
    assert np.all(zero == 0) and res0 == 0
    q2, res = compute_Q2(profiles, 1.0, 0.0)
    assert res < 1e-6
    g = profiles.grid
    expect = (constants.b1 - g.inner(profiles.Qhat1, profiles.Qhat1)) / 2
    assert g.inner(profiles.Q, q2) == pytest.approx(expect, rel=1e-6)


def test_Q2_polynomial_structure(profiles):
    # Q2(c1, 0) = c1 X + c1^2 Y + c1^3 Z: the cubic fit through four values is exact
    vals = np.array([compute_Q2(profiles, c, 0.0)[0] for c in (1.0, 2.0, -1.0, 0.5)])
    cs = np.array([1.0, 2.0, -1.0, 0.5])
    V = np.column_stack([cs, cs**2, cs**3])
    coef, *_ = np.linalg.lstsq(V, vals, rcond=None)
    assert np.max(np.abs(V @ coef - vals)) < 1e-10 * np.max(np.abs(vals))
    # and linear in c2 at fixed c1
    a, b, c = (compute_Q2(profiles, 1.0, t)[0] for t in (0.0, 1.0, 2.0))
    assert np.max(np.abs(a - 2 * b + c)) < 1e-10 * np.max(np.abs(a))


@given(finite, finite, st.floats(-3, 3, allow_nan=False))
def test_kappa_quadratic_linear(c1, c2, lam):
    base = kappa(lam * c1, c2)
    assert base.kappa == pytest.approx(lam**2 * c1**2 * base.b1 + c2 * base.b2_ibp, rel=1e-12, abs=1e-12)
    assert base.classification == classify(base.kappa, base.b1)


def test_kappa_examples(constants):
    assert kappa(0, 0).classification == "degenerate"
    r = kappa(1, 0)
    assert r.kappa == pytest.approx(constants.b1) and r.classification == "unstable"
    s = kappa(1 / 6, 1 / 120)
    assert s.kappa == pytest.approx(constants.b1 / 36 + constants.b2 / 120)
    assert s.classification == "unstable"


def test_scan_and_boundary(constants):
    rows = scan((0.0, 1.0), (-0.5, 0.5), 11, jobs=2)
    assert len(rows) == 121
    for rep in rows:
        c1, c2 = rep.warp_params
        if c2 == 0 and c1 != 0:
            assert rep.classification == "unstable"
    assert any(r.classification == "stable_candidate" and r.warp_params[0] < 0.2 and r.warp_params[1] > 0 for r in rows)
    text = scan_csv(rows)
    parsed = list(csv.reader(io.StringIO(text)))
    assert parsed[0] == ["c1", "c2", "kappa", "classification"] and len(parsed) == 122
    c1 = np.linspace(0.1, 2, 5)
    kb = [kappa(a, b).kappa for a, b in zip(c1, stability_boundary(c1, constants))]
    assert np.allclose(kb, 0, atol=1e-12 * constants.b1)
    assert scan((0, 1), (0, 1), 3, jobs=1) == scan((0, 1), (0, 1), 3, jobs=3)
    with pytest.raises(ValueError):
        scan((0, 1), (0, 1), 1)


def test_classification_stable_under_refinement(constants):
    fine = SolverConfig(grid_points=8000, quad_panels=128, n_max_refined=70)
    from warpsoliton.stability import expansion_constants

    k2 = expansion_constants(fine)
    assert k2.b1 == pytest.approx(constants.b1, rel=1e-6)
    for c1, c2 in [(1, 0), (0.1, 0.4), (1 / 6, 1 / 120), (0.3, 0.036)]:
        assert kappa(c1, c2, constants=k2).classification == kappa(c1, c2).classification


def test_cross_validation():
    flat = cross_validate_kappa((0.0, 0.0), (16.0,))[0]
    assert flat.predicted == 0 and flat.measured == 0 and flat.indeterminate
    rows = cross_validate_kappa((1.0, 0.0), (16.0, 32.0, 64.0))
    assert all(r.sign_agrees for r in rows)
    assert rows[1].rel_error < 0.2
    assert rows[2].rel_error < rows[0].rel_error
