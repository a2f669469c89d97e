"""Weighted radial inner products for exponentially decaying profiles.

All integrals are taken in the radial variable on ``[0, R_max]``:

    (f | g)_w = |S^{d-1}| * int_0^R_max f(r) g(r) r**w r**(d-1) dr.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy.special import gamma

SCHEMES = ("gauss_legendre_mapped", "clenshaw_curtis_mapped")


def sphere_area(d: int) -> float:
    """Surface measure of the unit sphere S^{d-1} in R^d."""
    if d == 2:
        return 2.0 * np.pi
    return 2.0 * np.pi ** (d / 2) / gamma(d / 2)


@lru_cache(maxsize=64)
def _reference_rule(scheme: str, order: int):
    if scheme == "gauss_legendre_mapped":
        return np.polynomial.legendre.leggauss(order)
    if scheme == "clenshaw_curtis_mapped":
        return _clenshaw_curtis(order)
    raise ValueError(f"unknown scheme {scheme!r}")


def _clenshaw_curtis(npts: int):
    """Clenshaw-Curtis nodes and weights on [-1, 1] with npts points."""
    n = npts - 1
    if n < 1:
        raise ValueError("Clenshaw-Curtis needs at least 2 points")
    theta = np.pi * np.arange(n + 1) / n
    x = np.cos(theta)
    w = np.zeros(n + 1)
    v = np.ones(n - 1)
    inner = slice(1, n)
    if n % 2 == 0:
        w[0] = w[n] = 1.0 / (n * n - 1)
        for k in range(1, n // 2):
            v -= 2.0 * np.cos(2 * k * theta[inner]) / (4 * k * k - 1)
        v -= np.cos(n * theta[inner]) / (n * n - 1)
    else:
        w[0] = w[n] = 1.0 / (n * n)
        for k in range(1, (n - 1) // 2 + 1):
            v -= 2.0 * np.cos(2 * k * theta[inner]) / (4 * k * k - 1)
    w[inner] = 2.0 * v / n
    return x[::-1].copy(), w[::-1].copy()


@dataclass(frozen=True)
class QuadratureRule:
    """Composite rule of ``panels`` equal panels on ``[0, R_max]``.

    Each panel carries an ``order``-point reference rule mapped affinely onto it.
    """

    scheme: str = "gauss_legendre_mapped"
    panels: int = 64
    R_max: float = 40.0
    order: int = 16
    mapping: str = "affine_panels"

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.panels < 8:
            raise ValueError("panels must be >= 8")
        if self.R_max < 20:
            raise ValueError("R_max must be >= 20")
        if self.mapping != "affine_panels":
            raise ValueError(f"unknown mapping {self.mapping!r}")

    def nodes_weights(self):
        xr, wr = _reference_rule(self.scheme, self.order)
        edges = np.linspace(0.0, self.R_max, self.panels + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        r = (mid[:, None] + half[:, None] * xr[None, :]).ravel()
        w = (half[:, None] * wr[None, :]).ravel()
        return r, w


DEFAULT_RULE = QuadratureRule()


def integrate_radial(h, weight_power: int = 0, d: int = 2, rule: QuadratureRule = DEFAULT_RULE) -> float:
    """|S^{d-1}| int_0^R_max h(r) r^weight_power r^(d-1) dr for a callable ``h``."""
    if d < 1:
        raise ValueError("d must be positive")
    if weight_power < 0:
        raise ValueError("weight_power must be nonnegative")
    r, w = rule.nodes_weights()
    vals = np.asarray(h(r), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise FloatingPointError("non-finite integrand sample")
    return float(sphere_area(d) * np.sum(w * vals * r ** (weight_power + d - 1)))


def inner_product(f, g, weight_power: int = 0, d: int = 2, rule: QuadratureRule = DEFAULT_RULE) -> float:
    """Weighted L^2(R^d) inner product of two radial callables."""
    if d < 2:
        raise ValueError("d must be >= 2")
    return integrate_radial(lambda r: np.asarray(f(r)) * np.asarray(g(r)), weight_power, d, rule)


@dataclass(frozen=True)
class ConvergenceProbe:
    values: list
    converged: bool
    tol: float


def convergence_probe(
    f, g, rule: QuadratureRule = DEFAULT_RULE, weight_power: int = 0, d: int = 2, tol: float = 1e-10, doublings: int = 6
) -> ConvergenceProbe:
    """Inner products at doubling panel counts.

    ``converged`` is set when the last two values agree to ``tol`` (absolute,
    or relative to the magnitude of the value when that exceeds one).
    """
    values = []
    panels = rule.panels
    for _ in range(doublings + 1):
        values.append((panels, inner_product(f, g, weight_power, d, replace(rule, panels=panels))))
        panels *= 2
        if len(values) >= 2:
            a, b = values[-2][1], values[-1][1]
            if abs(a - b) <= tol * max(1.0, abs(b)):
                return ConvergenceProbe(values, True, tol)
    return ConvergenceProbe(values, False, tol)
