"""Radial Schroedinger-type operators -Delta + c + W(r) on a finite-volume grid.

The grid is cell centred, r_i = (i - 1/2) h on [0, R_max].  The second-order
operator is the conservative stencil

    -(1/V_i) [a_{i+1/2} (f_{i+1} - f_i) - a_{i-1/2} (f_i - f_{i-1})] / h,

with face weights a = r^(d-1) and exact shell volumes V_i; the origin face has
weight zero and f = 0 beyond R_max.  In the variables fhat_i = sqrt(V_i) f_i
(the discrete analogue of r^((d-1)/2) f) the matrix is exactly symmetric and
tridiagonal.  A fourth-order residual using the even extension of f across
the origin is available for defect-corrected solves.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.sparse import diags
from scipy.sparse.linalg import splu

from .config import DEFAULT_CONFIG, SolverConfig
from .geometry import WarpingFunction, potential_V, weight_phi
from .quadrature import sphere_area

log = logging.getLogger(__name__)


class SingularOperatorError(RuntimeError):
    """The operator has an eigenvalue too close to zero to be inverted."""

    def __init__(self, message, smallest_eigenvalue):
        super().__init__(message)
        self.smallest_eigenvalue = smallest_eigenvalue


@dataclass(frozen=True)
class RadialGrid:
    M: int = 4000
    R_max: float = 40.0
    d: int = 2

    def __post_init__(self):
        if self.M < 10:
            raise ValueError("grid needs at least 10 points")
        if self.d < 2:
            raise ValueError("d must be >= 2")

    @classmethod
    def from_config(cls, config: SolverConfig = DEFAULT_CONFIG, d: int = 2) -> "RadialGrid":
        return cls(config.grid_points, config.R_max, d)

    @property
    def h(self) -> float:
        return self.R_max / self.M

    @cached_property
    def r(self) -> np.ndarray:
        r = (np.arange(1, self.M + 1) - 0.5) * self.h
        r.setflags(write=False)
        return r

    @cached_property
    def faces(self) -> np.ndarray:
        return np.arange(self.M + 1) * self.h

    @cached_property
    def volumes(self) -> np.ndarray:
        f = self.faces
        return (f[1:] ** self.d - f[:-1] ** self.d) / self.d

    def integrate(self, vals, weight_power: int = 0) -> float:
        """|S^{d-1}| int_0^R_max F(r) r^w r^(d-1) dr for grid samples of an even F.

        Midpoint rule on the cell centres; for d = 2 the O(h^2) endpoint term
        of the Euler-Maclaurin expansion at the origin is subtracted, which
        makes the rule fourth-order for smooth even integrands.
        """
        vals = np.asarray(vals, dtype=float)
        r, h = self.r, self.h
        total = np.sum(vals * r ** (weight_power + self.d - 1)) * h
        if self.d == 2 and weight_power == 0:
            g0 = (9.0 * vals[0] - vals[1]) / 8.0
            total -= h * h / 24.0 * g0
        return float(sphere_area(self.d) * total)

    def inner(self, f, g, weight_power: int = 0) -> float:
        return self.integrate(np.asarray(f) * np.asarray(g), weight_power)

    def norm(self, f) -> float:
        return float(np.sqrt(max(self.inner(f, f), 0.0)))

    def sample(self, func) -> np.ndarray:
        return np.asarray(func(self.r), dtype=float)


def _lap4(f, r, h, d):
    """Fourth-order radial Laplacian f'' + (d-1)/r f' with even/zero ghosts."""
    ext = np.concatenate(([f[1], f[0]], f, [0.0, 0.0]))
    fm2, fm1, f0, fp1, fp2 = ext[:-4], ext[1:-3], ext[2:-2], ext[3:-1], ext[4:]
    d2 = (-fm2 + 16 * fm1 - 30 * f0 + 16 * fp1 - fp2) / (12 * h * h)
    d1 = (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * h)
    return d2 + (d - 1) / r * d1


@dataclass(frozen=True)
class RadialOperator:
    """Discretized L = -Delta_rad + constant_term + W(r) on a RadialGrid."""

    grid: RadialGrid
    potential_samples: np.ndarray = field(repr=False)
    constant_term: float = 1.0
    half_line_reduction: bool = True
    label: str = ""

    def __post_init__(self):
        pot = np.array(self.potential_samples, dtype=float)
        if pot.shape != (self.grid.M,):
            raise ValueError("potential_samples must match the grid")
        if not np.all(np.isfinite(pot)):
            raise ValueError("non-finite potential")
        pot.setflags(write=False)
        object.__setattr__(self, "potential_samples", pot)

    @property
    def d(self) -> int:
        return self.grid.d

    @cached_property
    def _stiffness(self):
        g = self.grid
        a = g.faces ** (g.d - 1)
        a = a.copy()
        a[0] = 0.0
        main = (a[:-1] + a[1:]) / g.h
        off = -a[1:-1] / g.h
        return main, off

    def tridiagonal(self):
        """Diagonal and off-diagonal of the symmetric matrix acting on fhat."""
        main, off = self._stiffness
        vol = self.grid.volumes
        diag = main / vol + self.constant_term + self.potential_samples
        sub = off / np.sqrt(vol[:-1] * vol[1:])
        return diag, sub

    def matrix(self):
        """Sparse symmetric matrix in the fhat variables."""
        diag, sub = self.tridiagonal()
        return diags([sub, diag, sub], [-1, 0, 1], format="csc")

    @cached_property
    def _nodal_matrix(self):
        # the same operator acting on nodal values f
        main, off = self._stiffness
        vol = self.grid.volumes
        lower = off / vol[1:]
        upper = off / vol[:-1]
        diag = main / vol + self.constant_term + self.potential_samples
        return diags([lower, diag, upper], [-1, 0, 1], format="csc")

    @cached_property
    def _lu(self):
        return splu(self._nodal_matrix)

    def apply(self, f, order: int = 2):
        """Apply the operator to nodal values (order 2: matrix; order 4: high-order residual)."""
        f = np.asarray(f, dtype=float)
        if order == 2:
            return self._nodal_matrix @ f
        if order == 4:
            g = self.grid
            return -_lap4(f, g.r, g.h, g.d) + (self.constant_term + self.potential_samples) * f
        raise ValueError("order must be 2 or 4")

    def solve(self, rhs, order: int = 4, check: bool = True, tol: float = 1e-13, max_iter: int = 60,
              singular_tol: float = DEFAULT_CONFIG.eig_tol):
        """Solve L f = rhs on the grid.

        ``order=4`` runs defect correction: the second-order factorization is
        reused to drive the fourth-order residual to zero.  With ``check`` the
        operator is rejected when an eigenvalue lies within ``singular_tol`` of
        zero (the same threshold that marks eigenvalues as near zero).
        """
        rhs = np.asarray(rhs, dtype=float)
        if check:
            lam = self.smallest_magnitude_eigenvalue()
            if abs(lam) < singular_tol:
                raise SingularOperatorError(f"operator is near-singular (eigenvalue {lam:.3e})", lam)
        u = self._lu.solve(rhs)
        if order == 2:
            return u
        scale = max(np.max(np.abs(u)), 1e-300)
        for _ in range(max_iter):
            du = self._lu.solve(rhs - self.apply(u, 4))
            u = u + du
            if np.max(np.abs(du)) <= tol * scale:
                break
        else:
            log.warning("defect correction stopped after %d iterations", max_iter)
        return u

    def eigen(self, k: int):
        diag, sub = self.tridiagonal()
        k = min(k, self.grid.M)
        vals, vecs = eigh_tridiagonal(diag, sub, select="i", select_range=(0, k - 1))
        return vals, vecs

    def refined_eigen(self, k: int):
        """Lowest k eigenpairs with Rayleigh-quotient values from the fourth-order residual.

        Returns (refined, raw, nodal eigenvectors).
        """
        raw, vecs = self.eigen(k)
        vol = self.grid.volumes
        nodal = vecs / np.sqrt(vol)[:, None]
        refined = np.array([np.sum(vol * f * self.apply(f, 4)) / np.sum(vol * f * f) for f in nodal.T])
        return refined, raw, nodal

    def smallest_magnitude_eigenvalue(self, k: int = 4) -> float:
        vals, _, _ = self.refined_eigen(k)
        return float(vals[np.argmin(np.abs(vals))])


@dataclass(frozen=True)
class SpectrumSlice:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)
    neg_count: int
    near_zero: list
    tol: float
    raw_eigenvalues: np.ndarray | None = field(default=None, repr=False)


def low_spectrum(op: RadialOperator, k: int = 4, tol: float = DEFAULT_CONFIG.eig_tol) -> SpectrumSlice:
    """The k lowest eigenpairs; eigenvectors are nodal values with sum V_i f_i^2 = 1.

    The eigenvalues of the second-order matrix are corrected with the Rayleigh
    quotient of the fourth-order residual; the uncorrected values are kept in
    ``raw_eigenvalues``.
    """
    if not 1 <= k <= 10:
        raise ValueError("k must lie in 1..10")
    vals, raw, nodal = op.refined_eigen(k)
    if not np.all(np.isfinite(raw)):
        raise np.linalg.LinAlgError("eigensolver failure")
    order = np.argsort(vals)
    vals, raw, nodal = vals[order], raw[order], nodal[:, order]
    # fix the sign so that the vector is positive near the origin
    nodal *= np.where(nodal[0] < 0, -1.0, 1.0)[None, :]
    near = [float(v) for v in vals if abs(v) <= tol]
    neg = int(np.sum(vals < -tol))
    return SpectrumSlice(vals, nodal, neg, near, tol, raw)


def essential_edge(alpha: float, V0d: float) -> float:
    """Bottom of the essential spectrum, 1 + V0d / alpha^2, in rescaled units."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if np.isinf(alpha):
        return 1.0
    return 1.0 + V0d / alpha**2


def _samples(grid: RadialGrid, profile):
    if callable(profile):
        return grid.sample(profile)
    vals = np.asarray(profile, dtype=float)
    if vals.shape != (grid.M,):
        raise ValueError("profile samples must match the grid")
    return vals


def build_L(
    variant: str,
    alpha: float,
    warp: WarpingFunction | None,
    d: int,
    p: float,
    profile,
    grid: RadialGrid | None = None,
) -> RadialOperator:
    """Linearized operator L_{alpha,+} (variant 'plus') or L_{alpha,-} ('minus').

    The zeroth-order term is -sigma phi(r/alpha)|profile|^(p-1) +
    alpha^-2 V_d(r/alpha), sigma = p or 1.  ``alpha = inf`` (or a flat warp)
    gives the Euclidean operators.  The limit value V0 of the potential is
    carried in ``constant_term`` so that the essential spectrum starts there.
    """
    if variant not in ("plus", "minus"):
        raise ValueError(f"invalid variant {variant!r}")
    grid = grid or RadialGrid(d=d)
    if grid.d != d:
        raise ValueError("grid dimension mismatch")
    sigma = p if variant == "plus" else 1.0
    prof = _samples(grid, profile)
    nonlin = np.abs(prof) ** (p - 1)
    euclidean = warp is None or np.isinf(alpha) or warp.is_flat
    if euclidean:
        pot = -sigma * nonlin
        const = 1.0
    else:
        if not alpha > 0:
            raise ValueError("alpha must be positive")
        s = grid.r / alpha
        v0 = warp.limit_potential(d)
        pot = -sigma * weight_phi(warp, d, p, s) * nonlin + (potential_V(warp, d, s) - v0) / alpha**2
        const = 1.0 + v0 / alpha**2
    label = f"L_{variant}(alpha={alpha})"
    return RadialOperator(grid, pot, const, True, label)


def free_operator(grid: RadialGrid) -> RadialOperator:
    return RadialOperator(grid, np.zeros(grid.M), 1.0, True, "free")


def solve(op: RadialOperator, rhs, order: int = 4):
    """Module-level alias for ``op.solve``; ``rhs`` may be a callable of r."""
    return op.solve(_samples(op.grid, rhs), order=order)


# -- fundamental systems -----------------------------------------------------


@dataclass(frozen=True)
class FundamentalSystem:
    r: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    a: np.ndarray
    b: np.ndarray
    side: str
    iterations: int
    converged: bool


def _cumtrapz(y, x):
    out = np.zeros_like(y)
    out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(x))
    return out


def _volterra_origin(V, lam, d, r, tol, max_iter):
    f0 = r ** ((d - 1) / 2)
    if d == 2:
        g0 = np.sqrt(r) * np.log(r)
    else:
        g0 = -(r ** (-(d - 3) / 2)) / (d - 2)
    ratio = g0 / f0
    pot = V(r) + lam**2
    h = np.ones_like(r)
    for it in range(1, max_iter + 1):
        # K(r,s) = [ (g0/f0)(r) f0(s)^2 - f0(s) g0(s) ] (V(s) + lam^2)
        i1 = _cumtrapz(f0**2 * pot * h, r)
        i2 = _cumtrapz(f0 * g0 * pot * h, r)
        new = 1.0 + ratio * i1 - i2
        diff = np.max(np.abs(new - h))
        h = new
        if diff < tol:
            return h, it, True
    return h, max_iter, False


def _volterra_infinity(V, lam, d, r, tol, max_iter):
    c = (d - 1) * (d - 3) / 4.0
    pot = c / r**2 + V(r)
    h = np.ones_like(r)
    dr = np.diff(r)
    decay = np.exp(-2 * lam * dr)
    for it in range(1, max_iter + 1):
        y = pot * h
        # I1(r) = int_r^inf y ds,  I2(r) = int_r^inf exp(2 lam (r - s)) y ds
        seg = 0.5 * (y[1:] + y[:-1]) * dr
        i1 = np.concatenate((np.cumsum(seg[::-1])[::-1], [0.0]))
        i2 = np.zeros_like(r)
        for j in range(r.size - 2, -1, -1):
            i2[j] = decay[j] * i2[j + 1] + 0.5 * dr[j] * (y[j] + decay[j] * y[j + 1])
        new = 1.0 + (i1 - i2) / (2 * lam)
        diff = np.max(np.abs(new - h))
        h = new
        if diff < tol:
            return h, it, True
    return h, max_iter, False


def fundamental_system(V, lam: float, d: int, side: str, R_max: float = 40.0, points: int = 4000, tol: float = 1e-10, max_iter: int = 200) -> FundamentalSystem:
    """Fundamental system of phi'' - (d-1)(d-3)/(4r^2) phi - V phi - lam^2 phi = 0.

    ``side='origin'`` returns phi0 = r^((d-1)/2)(1 + a0) and the second
    solution psi0 from the reduction formula on (0, 1/2]; ``side='infinity'``
    returns phi_inf = e^(-lam r)(1 + a_inf) and psi_inf on [1/4, R_max].  The
    Volterra equations are solved by successive approximation with
    trapezoidal quadrature until iterates differ by less than ``tol``.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    if side == "origin":
        # geometric grid resolves the r^(1/2) log r structure near 0
        r = np.geomspace(1e-8, 0.5, points)
        h, it, ok = _volterra_origin(V, lam, d, r, tol, max_iter)
        f0 = r ** ((d - 1) / 2)
        phi = f0 * h
        # psi0 = -phi0 int_r^{r0} phi0^-2 ds, r0 = 1/2
        inv = 1.0 / phi**2
        tail = _cumtrapz(inv[::-1], -r[::-1])[::-1]
        psi = -phi * tail
        if d == 2:
            g0 = np.sqrt(r) * np.log(r)
        else:
            g0 = -(r ** (-(d - 3) / 2)) / (d - 2)
        return FundamentalSystem(r, phi, psi, h - 1.0, psi / g0 - 1.0, side, it, ok)
    if side == "infinity":
        core = np.linspace(0.25, R_max, points)
        far = np.geomspace(R_max, 1e6, 2000)[1:]
        r = np.concatenate((core, far))
        h, it, ok = _volterra_infinity(V, lam, d, r, tol, max_iter)
        h = h[: core.size]
        r = core
        phi = np.exp(-lam * r) * h
        # psi_inf = phi int_{r1}^r phi^-2 ds with r1 = 1/4; exp(2 lam s) factored
        inv = np.exp(2 * lam * (r - r[0])) / h**2
        integral = _cumtrapz(inv, r) * np.exp(2 * lam * r[0])
        psi = phi * integral
        g_inf = np.exp(lam * r) / (2 * lam)
        return FundamentalSystem(r, phi, psi, h - 1.0, psi / g_inf - 1.0, side, it, ok)
    raise ValueError("side must be 'origin' or 'infinity'")
