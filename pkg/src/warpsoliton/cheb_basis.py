"""Constrained Chebyshev basis on the compactified half-line.

A radial profile ``f(r)`` on ``[0, inf)`` is represented through the variable
``x = (r - 1)/(r + 1)`` in ``[-1, 1]`` and the ansatz

    f(r) = (1 + r)**(-1/2) * exp(-r) * g(x),

where ``g`` is expanded in the functions ``phi_n = T_n + a0n + a1n*x + a2n*x**2``.
The quadratic correction is chosen so that every ``phi_n`` satisfies the three
endpoint regularity conditions

    4 g'(-1) - 3 g(-1) = 0,
    16 g'(1) + 3 g(1) = 0,
    16 g''(1) - 5 g'(1) - 3 g(1) = 0.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev as C

SPECTRAL_SCHEMA = "warp-soliton/spectral-v1"
PREFACTOR_GROUND_STATE = "ground_state_form"

# Rows: the three regularity conditions; columns: the monomials 1, x, x^2.
_CONSTRAINT_MATRIX = np.array(
    [
        [-3.0, 7.0, -11.0],
        [3.0, 19.0, 35.0],
        [-3.0, -8.0, 19.0],
    ]
)


def regularity_residuals(g, dg, d2g):
    """Residuals of the three regularity conditions.

    ``g``, ``dg`` and ``d2g`` are callables returning the function and its
    first two derivatives.
    """
    return np.array(
        [
            4.0 * dg(-1.0) - 3.0 * g(-1.0),
            16.0 * dg(1.0) + 3.0 * g(1.0),
            16.0 * d2g(1.0) - 5.0 * dg(1.0) - 3.0 * g(1.0),
        ]
    )


def _chebyshev_endpoint_data(n: int) -> np.ndarray:
    """Condition values of T_n: (T(-1), T'(-1), T(1), T'(1), T''(1))."""
    sign = -1.0 if n % 2 else 1.0
    n2 = float(n * n)
    return np.array([sign, -sign * n2, 1.0, n2, n2 * (n2 - 1.0) / 3.0])


@dataclass(frozen=True)
class ConstrainedBasis:
    """Basis functions phi_n, n = 0..n_max, with their quadratic corrections.

    ``constraint_coeffs[n]`` holds ``(a0n, a1n, a2n)``; for ``n <= 2`` the
    correction cancels ``T_n`` exactly, so those functions vanish identically.
    """

    n_max: int
    constraint_coeffs: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        """Number of active basis functions (n = 3..n_max)."""
        return self.n_max - 2

    def cheb_coefficients(self, n: int) -> np.ndarray:
        """Chebyshev coefficients (length n_max + 1) of phi_n."""
        out = np.zeros(self.n_max + 1)
        if n <= 2:
            return out
        out[n] = 1.0
        a0, a1, a2 = self.constraint_coeffs[n]
        # a0 + a1 x + a2 x^2 = (a0 + a2/2) T0 + a1 T1 + (a2/2) T2
        out[0] += a0 + 0.5 * a2
        out[1] += a1
        out[2] += 0.5 * a2
        return out

    def series_to_chebyshev(self, coeffs) -> np.ndarray:
        """Map active coefficients (n = 3..n_max) to a plain Chebyshev series."""
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (self.size,):
            raise ValueError(f"expected {self.size} coefficients, got {coeffs.shape}")
        out = np.zeros(self.n_max + 1)
        out[3:] = coeffs
        a = self.constraint_coeffs[3:]
        a0 = coeffs @ a[:, 0]
        a1 = coeffs @ a[:, 1]
        a2 = coeffs @ a[:, 2]
        out[0] = a0 + 0.5 * a2
        out[1] = a1
        out[2] = 0.5 * a2
        return out

    def design_matrices(self, x):
        """Values, first and second derivatives of phi_3..phi_nmax at ``x``.

        Returns three arrays of shape ``(len(x), size)``.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        vals = np.empty((x.size, self.size))
        d1 = np.empty_like(vals)
        d2 = np.empty_like(vals)
        for j, n in enumerate(range(3, self.n_max + 1)):
            c = self.cheb_coefficients(n)
            vals[:, j] = C.chebval(x, c)
            d1[:, j] = C.chebval(x, C.chebder(c, 1))
            d2[:, j] = C.chebval(x, C.chebder(c, 2))
        return vals, d1, d2


@lru_cache(maxsize=32)
def build_basis(n_max: int) -> ConstrainedBasis:
    """Build the regularity-constrained basis up to degree ``n_max``."""
    if n_max < 3:
        raise ValueError("n_max must be at least 3")
    det = np.linalg.det(_CONSTRAINT_MATRIX)
    assert abs(det) > 1.0, "regularity constraint system is singular"
    coeffs = np.zeros((n_max + 1, 3))
    for n in range(n_max + 1):
        tm1, dtm1, t1, dt1, d2t1 = _chebyshev_endpoint_data(n)
        rhs = -np.array(
            [
                4.0 * dtm1 - 3.0 * tm1,
                16.0 * dt1 + 3.0 * t1,
                16.0 * d2t1 - 5.0 * dt1 - 3.0 * t1,
            ]
        )
        coeffs[n] = np.linalg.solve(_CONSTRAINT_MATRIX, rhs)
    coeffs.setflags(write=False)
    return ConstrainedBasis(n_max=n_max, constraint_coeffs=coeffs)


@dataclass(frozen=True)
class CollocationGrid:
    nodes: np.ndarray

    @property
    def count(self) -> int:
        return int(self.nodes.size)


def collocation_nodes(count: int) -> CollocationGrid:
    """Chebyshev-Gauss nodes (roots of T_count), sorted ascending."""
    if count < 1:
        raise ValueError("count must be positive")
    k = np.arange(count)
    nodes = np.sort(np.cos((2 * k + 1) * np.pi / (2 * count)))
    nodes.setflags(write=False)
    return CollocationGrid(nodes=nodes)


def _compact(r):
    return (r - 1.0) / (r + 1.0)


@dataclass(frozen=True)
class SpectralFunction:
    """A radial profile given by constrained Chebyshev coefficients.

    ``coeffs[k]`` multiplies ``phi_{k+3}``.  The profile in the radial
    variable is ``(1 + r)**(-1/2) exp(-r) g((r - 1)/(r + 1))``.
    """

    basis: ConstrainedBasis
    coeffs: np.ndarray
    prefactor: str = PREFACTOR_GROUND_STATE

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=float)
        if coeffs.shape != (self.basis.size,):
            raise ValueError(
                f"coeffs must have length n_max - 2 = {self.basis.size}, got {coeffs.shape}"
            )
        if self.prefactor != PREFACTOR_GROUND_STATE:
            raise ValueError(f"unknown prefactor {self.prefactor!r}")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)
        cheb = self.basis.series_to_chebyshev(coeffs)
        cheb.setflags(write=False)
        object.__setattr__(self, "_cheb", cheb)

    @classmethod
    def from_coeffs(cls, coeffs) -> "SpectralFunction":
        coeffs = np.asarray(coeffs, dtype=float)
        return cls(build_basis(coeffs.size + 2), coeffs)

    @property
    def n_max(self) -> int:
        return self.basis.n_max

    @property
    def chebyshev(self) -> np.ndarray:
        """The equivalent plain Chebyshev coefficients of g."""
        return self._cheb

    def eval(self, x):
        return eval_series(self, x)

    def eval_deriv(self, x, order: int = 1):
        return eval_deriv(self, x, order)

    def __call__(self, r):
        return to_radial(self, r)

    def radial_derivatives(self, r):
        return radial_derivatives(self, r)

    def to_json(self) -> dict:
        return {
            "schema": SPECTRAL_SCHEMA,
            "n_max": self.n_max,
            "coeffs": [float(c) for c in self.coeffs],
            "prefactor": self.prefactor,
        }

    @classmethod
    def from_json(cls, obj) -> "SpectralFunction":
        if isinstance(obj, str):
            obj = json.loads(obj)
        if obj.get("schema") != SPECTRAL_SCHEMA:
            raise ValueError(f"unsupported schema {obj.get('schema')!r}")
        basis = build_basis(int(obj["n_max"]))
        return cls(basis, np.asarray(obj["coeffs"], dtype=float), obj.get("prefactor", PREFACTOR_GROUND_STATE))


def _check_domain(x):
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0 + 1e-14) or np.any(~np.isfinite(x)):
        raise ValueError("x must lie in [-1, 1]")
    return x


def eval_series(sf: SpectralFunction, x):
    """Evaluate g(x) = sum_n c_n phi_n(x) with Clenshaw's recurrence."""
    x = _check_domain(x)
    return C.chebval(x, sf.chebyshev)


def eval_deriv(sf: SpectralFunction, x, order: int = 1):
    """Exact first or second derivative of g."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    x = _check_domain(x)
    return C.chebval(x, C.chebder(sf.chebyshev, order))


def to_radial(sf: SpectralFunction, r):
    """Evaluate the profile f(r); r = inf maps to x = 1 and gives 0."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(np.isnan(r)):
        raise ValueError("r must be nonnegative")
    with np.errstate(invalid="ignore", over="ignore"):
        x = np.where(np.isinf(r), 1.0, _compact(r))
        pref = np.where(np.isinf(r), 0.0, np.exp(-r) / np.sqrt(1.0 + r))
    return pref * C.chebval(x, sf.chebyshev)


def radial_derivatives(sf: SpectralFunction, r):
    """Return f, f', f'' at finite radii ``r`` from the exact series derivatives."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(~np.isfinite(r)):
        raise ValueError("r must be finite and nonnegative")
    x = _compact(r)
    c = sf.chebyshev
    g = C.chebval(x, c)
    g1 = C.chebval(x, C.chebder(c, 1))
    g2 = C.chebval(x, C.chebder(c, 2))
    s = 1.0 + r
    pref = np.exp(-r) / np.sqrt(s)
    # P = pref; P'/P = -1 - 1/(2s); x'(r) = 2/s^2, x''(r) = -4/s^3
    lp = -1.0 - 0.5 / s
    lpp = 0.5 / s**2  # derivative of lp
    xr = 2.0 / s**2
    xrr = -4.0 / s**3
    f = pref * g
    f1 = pref * (lp * g + xr * g1)
    f2 = pref * ((lp * lp + lpp) * g + 2.0 * lp * xr * g1 + xr * xr * g2 + xrr * g1)
    return f, f1, f2
