"""Small-curvature expansion of the soliton mass and the constants b1, b2, kappa.

For A(r) = r + c1 r^3 + c2 r^5 the mass of the curved soliton behaves like

    ||Q_alpha||^2 = ||Q||^2 + kappa alpha^-4 + O(alpha^-6),
    kappa = c1^2 b1 + c2 b2,

so kappa > 0 makes the mass decrease in alpha (linear instability).  The
profiles entering b1 and b2 are

    S0    = r Q' + Q                 L+ S0    = -2 Q
    S1                               L+ S1    = -r^2 Q^3
    Qhat1 = S0 + S1                  L+ Qhat1 = -2 Q - r^2 Q^3

with L+ = -Delta + 1 - 3 Q^2 in d = 2.
"""
from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .cheb_basis import SpectralFunction
from .config import DEFAULT_CONFIG, SolverConfig
from .geometry import WarpingFunction
from .ground_state import GroundState, solve_compact_linear, solve_ground_state
from .linearized import RadialGrid, build_L
from .manifold_soliton import MASS_NOISE_FLOOR, mass_derivative
from .quadrature import QuadratureRule, inner_product

log = logging.getLogger(__name__)

CLASSES = ("unstable", "stable_candidate", "degenerate")


@lru_cache(maxsize=8)
def reference_ground_state(n_max: int) -> GroundState:
    """Cached Townes profile at the given basis size."""
    return solve_ground_state(n_max=n_max)


def _decay(x):
    # exp(-2 r) in the compactified variable, zero at x = 1
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        return np.where(x < 1.0, np.exp(-2.0 * (1.0 + x) / np.where(x < 1.0, 1.0 - x, 1.0)), 0.0)


def solve_S1(gs: GroundState, n_max: int) -> SpectralFunction:
    """Spectral solution of L+ S1 = -r^2 Q^3 in the compactified variable."""
    g0 = gs.profile.eval

    def potential(x):
        return 6.0 * _decay(x) * g0(x) ** 2 / (1.0 - x) ** 3

    def rhs(x):
        return 2.0 * (1.0 + x) ** 2 / (1.0 - x) ** 5 * _decay(x) * g0(x) ** 3

    return solve_compact_linear(n_max, potential, rhs)


def compute_S0(gs: GroundState, grid: RadialGrid) -> np.ndarray:
    """S0 = r Q' + Q sampled on the grid."""
    return gs.S0(grid.r)


@dataclass(frozen=True)
class ExpansionProfiles:
    """Expansion profiles on the radial grid plus their spectral forms."""

    grid: RadialGrid = field(repr=False)
    ground_state: GroundState = field(repr=False)
    S1_spectral: SpectralFunction = field(repr=False)
    Q: np.ndarray = field(repr=False)
    S0: np.ndarray = field(repr=False)
    S1: np.ndarray = field(repr=False)
    Qhat1: np.ndarray = field(repr=False)
    Qhat1_direct: np.ndarray = field(repr=False)
    residuals: dict = field(default_factory=dict)

    def S0_func(self, r):
        return self.ground_state.S0(r)

    def Qhat1_func(self, r):
        return self.ground_state.S0(r) + self.S1_spectral(r)

    def L_plus(self):
        return build_L("plus", np.inf, None, 2, 3.0, self.Q, self.grid)


def _rel(vec, ref, grid):
    return grid.norm(vec) / grid.norm(ref)


def compute_Qhat1(config: SolverConfig = DEFAULT_CONFIG, n_max: int | None = None, n_max_s1: int | None = None) -> ExpansionProfiles:
    """Qhat1 as S0 + S1 (spectral) and by a direct grid solve of its equation."""
    n_max = config.n_max_refined if n_max is None else n_max
    n_max_s1 = max(config.n_max_s1, n_max) if n_max_s1 is None else n_max_s1
    gs = reference_ground_state(n_max)
    grid = RadialGrid.from_config(config)
    r = grid.r
    Q = grid.sample(gs)
    s1 = solve_S1(gs, n_max_s1)
    S0 = compute_S0(gs, grid)
    S1 = grid.sample(s1)
    Qhat1 = S0 + S1
    Lp = build_L("plus", np.inf, None, 2, 3.0, Q, grid)
    direct = Lp.solve(-2.0 * Q - r**2 * Q**3)
    res = {
        "L+S0+2Q": _rel(Lp.apply(S0, 4) + 2.0 * Q, Q, grid),
        "L+S1+r^2Q^3": _rel(Lp.apply(S1, 4) + r**2 * Q**3, r**2 * Q**3, grid),
        "L+Qhat1+2Q+r^2Q^3": _rel(Lp.apply(Qhat1, 4) + 2.0 * Q + r**2 * Q**3, 2.0 * Q + r**2 * Q**3, grid),
        "Qhat1-direct": float(np.max(np.abs(Qhat1 - direct)) / np.max(np.abs(Qhat1))),
    }
    return ExpansionProfiles(grid, gs, s1, Q, S0, S1, Qhat1, direct, res)


def compute_Q2(profiles: ExpansionProfiles, c1: float, c2: float) -> tuple[np.ndarray, float]:
    """Solve the alpha^-4 equation for Q2; returns (Q2, relative residual).

    L+ Q2 = -2 c1 Q1 + (3 c1^2 - 8 c2) r^2 Q - 3 c1 r^2 Q^2 Q1 + 3 Q Q1^2
            + (c1^2 - c2) r^4 Q^3,   Q1 = c1 Qhat1.
    """
    g = profiles.grid
    r, Q = g.r, profiles.Q
    Q1 = c1 * profiles.Qhat1
    rhs = (
        -2.0 * c1 * Q1
        + (3.0 * c1**2 - 8.0 * c2) * r**2 * Q
        - 3.0 * c1 * r**2 * Q**2 * Q1
        + 3.0 * Q * Q1**2
        + (c1**2 - c2) * r**4 * Q**3
    )
    if not np.any(rhs):
        return np.zeros_like(rhs), 0.0
    Lp = profiles.L_plus()
    Q2 = Lp.solve(rhs)
    return Q2, _rel(Lp.apply(Q2, 4) - rhs, rhs, g)


def _b1_integrand_parts(S0, Qh, Q, r):
    return 2.0 * Qh - 3.0 * r**2 * Q + 3.0 * r**2 * Q**2 * Qh - 3.0 * Q * Qh**2 - r**4 * Q**3


def compute_b1(profiles: ExpansionProfiles, rule: QuadratureRule | None = None) -> tuple[float, float]:
    """b1 = ||Qhat1||^2 + (S0 | 2 Qhat1 - 3 r^2 Q + 3 r^2 Q^2 Qhat1 - 3 Q Qhat1^2 - r^4 Q^3).

    Returns (spectral, grid): the first uses the spectral profiles with
    Gauss quadrature, the second the directly solved grid Qhat1 with the grid
    rule.
    """
    rule = rule or QuadratureRule()
    gs = profiles.ground_state
    qh, s0 = profiles.Qhat1_func, profiles.S0_func

    def bracket(r):
        return _b1_integrand_parts(s0(r), qh(r), gs(r), r)

    spectral = inner_product(qh, qh, 0, 2, rule) + inner_product(s0, bracket, 0, 2, rule)
    g = profiles.grid
    Qh = profiles.Qhat1_direct
    gridval = g.inner(Qh, Qh) + g.inner(profiles.S0, _b1_integrand_parts(profiles.S0, Qh, profiles.Q, g.r))
    return float(spectral), float(gridval)


def compute_b2(profiles: ExpansionProfiles, rule: QuadratureRule | None = None) -> tuple[float, float]:
    """(direct, ibp) = ((S0 | 8 r^2 Q + r^4 Q^3), -8 (Q | r^2 Q) - (Q | r^4 Q^3) / 2)."""
    rule = rule or QuadratureRule()
    gs = profiles.ground_state
    direct = inner_product(profiles.S0_func, lambda r: 8.0 * gs(r) + r**2 * gs(r) ** 3, 2, 2, rule)
    ibp = -8.0 * inner_product(gs, gs, 2, 2, rule) - 0.5 * inner_product(gs, lambda r: gs(r) ** 3, 4, 2, rule)
    return float(direct), float(ibp)


@dataclass(frozen=True)
class ExpansionConstants:
    b1: float
    b1_grid: float
    b2_direct: float
    b2_ibp: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def b2(self) -> float:
        return self.b2_ibp

    def to_json(self) -> dict:
        return {
            "b1": self.b1,
            "b1_over_2pi": self.b1 / (2.0 * np.pi),
            "b1_grid": self.b1_grid,
            "b2_direct": self.b2_direct,
            "b2_ibp": self.b2_ibp,
        }


@lru_cache(maxsize=4)
def _constants(config: SolverConfig) -> ExpansionConstants:
    prof = compute_Qhat1(config)
    rule = QuadratureRule(panels=config.quad_panels, R_max=config.R_max, order=config.quad_order)
    b1, b1_grid = compute_b1(prof, rule)
    b2d, b2i = compute_b2(prof, rule)
    diag = dict(prof.residuals)
    diag["b1_spectral_vs_grid"] = abs(b1 - b1_grid) / abs(b1)
    diag["b2_direct_vs_ibp"] = abs(b2d - b2i) / abs(b2i)
    return ExpansionConstants(b1, b1_grid, b2d, b2i, diag)


def expansion_constants(config: SolverConfig = DEFAULT_CONFIG) -> ExpansionConstants:
    """b1 and b2, computed once per configuration and cached."""
    return _constants(config)


@dataclass(frozen=True)
class StabilityReport:
    b1: float
    b2_direct: float
    b2_ibp: float
    kappa: float
    classification: str
    warp_params: tuple
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "c1": self.warp_params[0],
            "c2": self.warp_params[1],
            "b1": self.b1,
            "b2_direct": self.b2_direct,
            "b2_ibp": self.b2_ibp,
            "kappa": self.kappa,
            "classification": self.classification,
        }


def classify(kappa_value: float, b1: float) -> str:
    tol = 1e-8 * abs(b1)
    if kappa_value > tol:
        return "unstable"
    if kappa_value < -tol:
        return "stable_candidate"
    return "degenerate"


def kappa(c1: float, c2: float, config: SolverConfig = DEFAULT_CONFIG, constants: ExpansionConstants | None = None) -> StabilityReport:
    """kappa = c1^2 b1 + c2 b2 with its sign classification."""
    k = constants or expansion_constants(config)
    val = c1 * c1 * k.b1 + c2 * k.b2
    return StabilityReport(k.b1, k.b2_direct, k.b2_ibp, float(val), classify(val, k.b1), (float(c1), float(c2)), dict(k.diagnostics))


def stability_boundary(c1, constants: ExpansionConstants):
    """c2 on the curve kappa = 0 for the given c1."""
    return -np.asarray(c1, dtype=float) ** 2 * constants.b1 / constants.b2


def scan(c1_range, c2_range, steps, config: SolverConfig = DEFAULT_CONFIG, jobs: int = 1) -> list[StabilityReport]:
    """kappa on a steps x steps (or steps=(n1, n2)) grid of (c1, c2), c1 outermost."""
    n1, n2 = (steps, steps) if np.isscalar(steps) else steps
    if n1 < 2 or n2 < 2:
        raise ValueError("steps must be >= 2")
    bounds = (*c1_range, *c2_range)
    if not all(np.isfinite(bounds)):
        raise ValueError("ranges must be finite")
    consts = expansion_constants(config)
    pairs = [(a, b) for a in np.linspace(*c1_range, n1) for b in np.linspace(*c2_range, n2)]

    def row(pair):
        return kappa(pair[0], pair[1], constants=consts)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(row, pairs))
    return [row(pc) for pc in pairs]


def scan_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["c1", "c2", "kappa", "classification"])
    for rep in rows:
        c1, c2 = rep.warp_params
        w.writerow([repr(float(c1)), repr(float(c2)), repr(rep.kappa), rep.classification])
    return buf.getvalue()


@dataclass(frozen=True)
class KappaCrossCheck:
    alpha: float
    predicted: float
    measured: float
    rel_error: float
    sign_agrees: bool
    indeterminate: bool


def cross_validate_kappa(warp_params, alphas, config: SolverConfig = DEFAULT_CONFIG) -> list[KappaCrossCheck]:
    """Compare -4 alpha^-5 kappa with the finite-difference mass derivative."""
    c1, c2 = warp_params
    k = kappa(c1, c2, config).kappa
    warp = WarpingFunction.polynomial(c1, c2)
    gs = reference_ground_state(config.n_max_refined)
    grid = RadialGrid.from_config(config)
    out = []
    for a in alphas:
        pred = -4.0 * a**-5 * k
        vk = mass_derivative(warp, a, gs, config, grid)
        meas = vk.d_mass_d_alpha
        dm = abs(vk.masses[1] - vk.masses[0])
        indet = dm < MASS_NOISE_FLOOR
        if pred == 0.0:
            rel = 0.0 if meas == 0.0 else float("inf")
        else:
            rel = abs(meas - pred) / abs(pred)
        out.append(KappaCrossCheck(float(a), float(pred), float(meas), float(rel), bool(np.sign(meas) == np.sign(pred)), bool(indet)))
    return out
