"""Euclidean ground state Q of -Delta Q + Q - Q^p = 0.

The d = 2, p = 3 (Townes) profile is computed by Newton collocation in the
constrained Chebyshev basis; a shooting/bisection integrator provides an
independent oracle for general (d, p).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline
from scipy.special import kv

from .cheb_basis import SpectralFunction, build_basis, collocation_nodes
from .config import DEFAULT_CONFIG, SolverConfig
from .quadrature import QuadratureRule, inner_product

log = logging.getLogger(__name__)


class ConvergenceError(RuntimeError):
    """A nonlinear or iterative solver failed to converge."""


def compactified_coefficients(x):
    """Coefficients of g'' + p1 g' + p0 g + w g^3 in the compactified variable.

    The linear part is the radial operator f'' + f'/r - f after the
    substitution f = (1+r)^(-1/2) e^(-r) g((r-1)/(r+1)); ``w`` is the weight of
    the cubic term.  Valid for x in (-1, 1); ``w`` vanishes at x = 1.
    """
    x = np.asarray(x, dtype=float)
    om = 1.0 - x
    op = 1.0 + x
    p1 = (3.0 * x**2 - 6.0 * x - 5.0) / (om**2 * op)
    p0 = -3.0 * (3.0 - x) / (4.0 * om**2 * op)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        e2 = np.where(om > 0, np.exp(-2.0 * op / om), 0.0)
        w = np.where(om > 0, 2.0 * e2 / om**3, 0.0)
    return p1, p0, w


def radial_to_compact_factor(x):
    """Factor 4/(1-x)^4 converting c(r) f into the g-equation, f = pref * g.

    If f'' + f'/r - f + c f = F, then Lg + c * 4/(1-x)^4 g = F/m with
    m = 2^(-5/2) (1-x)^(9/2) e^(-r).
    """
    return 4.0 / (1.0 - np.asarray(x, dtype=float)) ** 4


def cubic_residual(sf: SpectralFunction, x):
    """Nonlinear residual R(g)(x) of the compactified Townes equation."""
    x = np.asarray(x, dtype=float)
    p1, p0, w = compactified_coefficients(x)
    g = sf.eval(x)
    return sf.eval_deriv(x, 2) + p1 * sf.eval_deriv(x, 1) + p0 * g + w * g**3


def _collocation_system(basis):
    # values, linear operator and cubic weight at the collocation nodes
    nodes = collocation_nodes(basis.size).nodes
    vals, d1, d2 = basis.design_matrices(nodes)
    p1, p0, w = compactified_coefficients(nodes)
    return vals, d2 + p1[:, None] * d1 + p0[:, None] * vals, w


def collocation_residual(sf: SpectralFunction) -> float:
    """Max residual at the collocation nodes, evaluated exactly as in the Newton solve."""
    vals, lin, w = _collocation_system(sf.basis)
    g = vals @ sf.coeffs
    return float(np.max(np.abs(lin @ sf.coeffs + w * g**3)))


@dataclass(frozen=True)
class GroundState:
    """Converged spectral ground state with solver diagnostics."""

    profile: SpectralFunction
    d: int = 2
    p: float = 3.0
    residual_norm: float = 0.0
    newton_iters: int = 0
    residual_history: tuple = ()

    def __call__(self, r):
        return self.profile(r)

    @property
    def amplitude(self) -> float:
        return float(self.profile(0.0))

    def derivatives(self, r):
        return self.profile.radial_derivatives(r)

    def S0(self, r):
        """Scaling generator r Q'(r) + Q(r)."""
        f, f1, _ = self.profile.radial_derivatives(r)
        return np.asarray(r) * f1 + f


def _initial_guess(basis, nodes, amplitude=2.2):
    # least-squares projection of the constant g = amplitude onto the basis
    vals, _, _ = basis.design_matrices(nodes)
    coeffs, *_ = np.linalg.lstsq(vals, np.full(nodes.size, amplitude), rcond=None)
    return coeffs


def solve_ground_state(d: int = 2, p: float = 3.0, config: SolverConfig = DEFAULT_CONFIG, n_max: int | None = None) -> GroundState:
    """Newton collocation for the d = 2, p = 3 ground state.

    The number of collocation nodes equals the number of active basis
    functions, so the Jacobian is square.  Falls back to step halving when a
    full Newton step does not reduce the residual.
    """
    if (d, p) != (2, 3.0) and (d, p) != (2, 3):
        raise NotImplementedError("spectral solve is available for d = 2, p = 3 only; use shoot_ground_state")
    n_max = config.n_max if n_max is None else n_max
    if n_max < 10:
        raise ValueError("n_max must be >= 10")
    basis = build_basis(n_max)
    vals, lin, w = _collocation_system(basis)
    nodes = collocation_nodes(basis.size).nodes

    def residual(c):
        g = vals @ c
        return lin @ c + w * g**3, g

    coeffs = _initial_guess(basis, nodes)
    res, g = residual(coeffs)
    norm = np.max(np.abs(res))
    history = [norm]
    for it in range(1, config.newton_max_iter + 1):
        jac = lin + (3.0 * w * g**2)[:, None] * vals
        try:
            step = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError("singular Newton Jacobian") from exc
        t = 1.0
        for _ in range(9):
            trial = coeffs + t * step
            tres, tg = residual(trial)
            tnorm = np.max(np.abs(tres))
            if tnorm < norm or t < 2.0**-7:
                break
            t *= 0.5
        coeffs, res, g, norm = trial, tres, tg, tnorm
        history.append(norm)
        log.debug("newton iter %d residual %.3e step %.3e", it, norm, t)
        if norm < config.newton_tol or np.max(np.abs(t * step)) < 1e-15:
            break
    else:
        raise ConvergenceError(f"Newton did not converge, residual {norm:.3e}")
    if norm > max(config.newton_tol, 1e-9):
        raise ConvergenceError(f"Newton stalled at residual {norm:.3e}")
    profile = SpectralFunction(basis, coeffs)
    if profile(0.0) <= 0:
        raise ConvergenceError("Newton converged to a non-positive profile")
    return GroundState(profile, d, p, float(norm), it, tuple(history))


def solve_compact_linear(n_max: int, potential, rhs) -> SpectralFunction:
    """Collocation solve of g'' + p1 g' + p0 g + potential(x) g = rhs(x).

    ``potential`` and ``rhs`` are callables of the compactified variable.
    """
    basis = build_basis(n_max)
    nodes = collocation_nodes(basis.size).nodes
    vals, d1, d2 = basis.design_matrices(nodes)
    p1, p0, _ = compactified_coefficients(nodes)
    mat = d2 + p1[:, None] * d1 + (p0 + potential(nodes))[:, None] * vals
    coeffs = np.linalg.solve(mat, rhs(nodes))
    return SpectralFunction(basis, coeffs)


# -- shooting oracle -------------------------------------------------------


@dataclass(frozen=True)
class ShotProfile:
    """Dense radial profile from shooting with an analytic linear tail."""

    d: int
    p: float
    amplitude: float
    r_match: float
    _spline: CubicHermiteSpline
    _tail_scale: float

    def _tail(self, r):
        nu = 0.5 * (self.d - 2)
        return self._tail_scale * r ** (-nu) * kv(nu, r)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        inner = r <= self.r_match
        with np.errstate(over="ignore", under="ignore"):
            out = np.where(inner, self._spline(np.minimum(r, self.r_match)), self._tail(np.maximum(r, self.r_match)))
        return out


def _shoot_rhs(d, p):
    def rhs(r, y):
        f, fp = y
        return [fp, -(d - 1) / r * fp + f - np.abs(f) ** (p - 1) * f]

    return rhs


def _integrate(a, d, p, r_end, dense=False):
    r0 = 1e-6
    c2 = (a - abs(a) ** (p - 1) * a) / (2 * d)
    y0 = [a + c2 * r0**2, 2 * c2 * r0]

    def crossed(r, y):
        return y[0]

    crossed.terminal = True
    crossed.direction = -1

    def turned(r, y):
        return y[1]

    turned.terminal = True
    turned.direction = 1
    return solve_ivp(
        _shoot_rhs(d, p), (r0, r_end), y0, method="DOP853", rtol=1e-12, atol=1e-14,
        events=(crossed, turned), dense_output=dense,
    )


def shoot_ground_state(d: int = 2, p: float = 3.0, r_end: float = 25.0, match_level: float = 1e-6) -> ShotProfile:
    """Ground state by bisection on f(0) for f'' + (d-1)f'/r - f + |f|^(p-1) f = 0.

    Too large an amplitude makes the trajectory cross zero; too small makes it
    turn upward.  After bisection to machine precision the trajectory is kept
    up to the radius where it first drops below ``match_level`` and continued
    by the decaying solution r^(-nu) K_nu(r) of the linearized equation.
    """
    if p <= 1:
        raise ValueError("p must exceed 1")
    if d >= 3 and p >= 1 + 4 / (d - 2):
        raise ValueError("p must be energy subcritical")

    def classify(a):
        sol = _integrate(a, d, p, r_end)
        if sol.t_events[0].size:
            return +1
        if sol.t_events[1].size:
            return -1
        return 0

    lo, hi = 0.5, 1.0
    while classify(hi) < 0:
        lo, hi = hi, 2.0 * hi
        if hi > 1e3:
            raise ConvergenceError("no bisection bracket found")
    if classify(lo) > 0:
        raise ConvergenceError("no bisection bracket found")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        s = classify(mid)
        if s > 0:
            hi = mid
        elif s < 0:
            lo = mid
        else:
            lo = mid
    a = lo
    sol = _integrate(a, d, p, r_end, dense=True)
    r = np.linspace(sol.t[0], sol.t[-1], 20001)
    y = sol.sol(r)
    below = np.nonzero(y[0] < match_level)[0]
    i = below[0] if below.size else r.size - 1
    r_match = float(r[i])
    # prepend the origin using the series start
    r_dense = np.concatenate(([0.0], r[: i + 1]))
    f_dense = np.concatenate(([a], y[0, : i + 1]))
    fp_dense = np.concatenate(([0.0], y[1, : i + 1]))
    spline = CubicHermiteSpline(r_dense, f_dense, fp_dense)
    nu = 0.5 * (d - 2)
    scale = float(y[0, i] / (r_match ** (-nu) * kv(nu, r_match)))
    return ShotProfile(d, p, a, r_match, spline, scale)


def mass(profile, d: int = 2, rule: QuadratureRule | None = None) -> float:
    """Squared L^2(R^d) norm of a radial profile (callable or GroundState)."""
    rule = rule or QuadratureRule()
    return inner_product(profile, profile, 0, d, rule)
