"""Warping functions of rotationally symmetric manifolds dr^2 + A(r)^2 dw^2.

Besides A and its derivatives, each warp exposes the small-r-safe ratios
needed by the conjugated Euclidean problem:

    V_d(r)       = (d-1)/2 A''/A + (d-1)(d-3)/4 (A'^2/A^2 - 1/r^2)
    phi_{d,p}(r) = (r/A)^((d-1)(p-1)/2)
"""
from __future__ import annotations

import json
from math import factorial
from dataclasses import dataclass, field

import numpy as np

WARP_SCHEMA = "warp-soliton/warp-v1"
KINDS = ("flat", "polynomial", "hyperbolic")

# sinh-specific series switch; below this radius the closed forms cancel
_SERIES_RADIUS = 0.5


@dataclass(frozen=True)
class WarpingFunction:
    """Odd warping function with A'(0) = 1.

    ``kind='polynomial'`` means A(r) = r + sum_k coeffs[k-1] r^(2k+1), so the
    two-parameter family r + c1 r^3 + c2 r^5 is ``coeffs=(c1, c2)``.
    """

    kind: str
    coeffs: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown warp kind {self.kind!r}")
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if self.kind != "polynomial" and self.coeffs:
            raise ValueError(f"{self.kind} warp takes no coefficients")

    @classmethod
    def flat(cls):
        return cls("flat")

    @classmethod
    def hyperbolic(cls):
        return cls("hyperbolic")

    @classmethod
    def polynomial(cls, c1: float = 0.0, c2: float = 0.0, *higher: float):
        return cls("polynomial", (c1, c2) + tuple(higher))

    @property
    def c1(self) -> float:
        return self.coeffs[0] if self.coeffs else 0.0

    @property
    def c2(self) -> float:
        return self.coeffs[1] if len(self.coeffs) > 1 else 0.0

    @property
    def is_flat(self) -> bool:
        return self.kind == "flat" or (self.kind == "polynomial" and not any(self.coeffs))

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        out = {"schema": WARP_SCHEMA, "kind": self.kind}
        if self.kind == "polynomial":
            out["c1"] = self.c1
            out["c2"] = self.c2
            if len(self.coeffs) > 2:
                out["higher"] = list(self.coeffs[2:])
        return out

    @classmethod
    def from_json(cls, obj) -> "WarpingFunction":
        if isinstance(obj, str):
            obj = json.loads(obj)
        if obj.get("schema") != WARP_SCHEMA:
            raise ValueError(f"unsupported warp schema {obj.get('schema')!r}")
        kind = obj.get("kind")
        allowed = {"schema", "kind", "c1", "c2", "higher"}
        extra = set(obj) - allowed
        if extra:
            raise ValueError(f"unknown warp keys {sorted(extra)}")
        if kind == "polynomial":
            return cls.polynomial(float(obj.get("c1", 0.0)), float(obj.get("c2", 0.0)), *obj.get("higher", []))
        if kind in ("flat", "hyperbolic"):
            if any(k in obj for k in ("c1", "c2", "higher")):
                raise ValueError(f"{kind} warp takes no coefficients")
            return cls(kind)
        raise ValueError(f"unknown warp kind {kind!r}")

    # -- A and derivatives ----------------------------------------------------

    def _poly(self):
        # coefficient of r^(2k+1), k = 0, 1, ...
        return np.array((1.0,) + self.coeffs)

    def A(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "flat":
            return r.copy()
        if self.kind == "hyperbolic":
            return np.sinh(r)
        return r * self.A_over_r(r)

    def dA(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "flat":
            return np.ones_like(r)
        if self.kind == "hyperbolic":
            return np.cosh(r)
        a = self._poly()
        k = np.arange(a.size)
        return np.polynomial.polynomial.polyval(r**2, a * (2 * k + 1))

    def d2A(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "flat":
            return np.zeros_like(r)
        if self.kind == "hyperbolic":
            return np.sinh(r)
        a = self._poly()
        k = np.arange(a.size)
        return r * np.polynomial.polynomial.polyval(r**2, (a * (2 * k + 1) * (2 * k))[1:])

    # -- cancellation-free ratios --------------------------------------------

    def A_over_r(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "flat":
            return np.ones_like(r)
        if self.kind == "hyperbolic":
            with np.errstate(invalid="ignore"):
                return np.where(r == 0, 1.0, np.sinh(r) / np.where(r == 0, 1.0, r))
        return np.polynomial.polynomial.polyval(r**2, self._poly())

    def d2A_over_A(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "flat":
            return np.zeros_like(r)
        if self.kind == "hyperbolic":
            return np.ones_like(r)
        a = self._poly()
        k = np.arange(a.size)
        return np.polynomial.polynomial.polyval(r**2, (a * (2 * k + 1) * (2 * k))[1:]) / self.A_over_r(r)

    def _rdA_minus_A_over_r3(self, r):
        """(r A' - A)/r^3, finite at r = 0."""
        if self.kind == "flat":
            return np.zeros_like(r)
        if self.kind == "hyperbolic":
            small = np.abs(r) < _SERIES_RADIUS
            rs = np.where(small, r, 0.0)
            # r cosh r - sinh r = sum_k 2k r^(2k+1)/(2k+1)!
            series = sum(2 * k * rs ** (2 * k - 2) / factorial(2 * k + 1) for k in range(1, 12))
            rl = np.where(small, 1.0, r)
            closed = (rl * np.cosh(rl) - np.sinh(rl)) / rl**3
            return np.where(small, series, closed)
        a = self._poly()
        k = np.arange(a.size)
        # r A' - A = sum 2k a_k r^(2k+1); divide by r^3
        return np.polynomial.polynomial.polyval(r**2, (a * 2 * k)[1:])

    def _dA_minus_1_over_r2(self, r):
        """(A' - 1)/r^2, finite at r = 0."""
        if self.kind == "flat":
            return np.zeros_like(r)
        if self.kind == "hyperbolic":
            small = np.abs(r) < _SERIES_RADIUS
            rs = np.where(small, r, 0.0)
            # cosh r - 1 = sum_k r^(2k)/(2k)!
            series = sum(rs ** (2 * k - 2) / factorial(2 * k) for k in range(1, 12))
            rl = np.where(small, 1.0, r)
            return np.where(small, series, (np.cosh(rl) - 1.0) / rl**2)
        a = self._poly()
        k = np.arange(a.size)
        return np.polynomial.polynomial.polyval(r**2, (a * (2 * k + 1))[1:])

    def centrifugal_defect(self, r):
        """A'^2/A^2 - 1/r^2, finite at r = 0."""
        r = np.asarray(r, dtype=float)
        if self.kind == "flat":
            return np.zeros_like(r)
        big = None
        if self.kind == "hyperbolic":
            big = np.abs(r) >= _SERIES_RADIUS
            rb = np.where(big, r, 1.0)
            closed = 1.0 / np.tanh(rb) ** 2 - 1.0 / rb**2
            r = np.where(big, 0.0, r)
        aor = self.A_over_r(r)
        # (rA' - A)(rA' + A) / (r^2 A^2) with rA' + A = 2A + (rA' - A)
        t = self._rdA_minus_A_over_r3(r)
        series = t * (2.0 * aor + r**2 * t) / aor**2
        if big is None:
            return series
        return np.where(big, closed, series)

    def limit_potential(self, d: int) -> float:
        """Exact limit of V_d at infinity for the built-in kinds."""
        if self.kind == "hyperbolic":
            return (d - 1) ** 2 / 4.0
        return 0.0


def sectional_curvatures(w: WarpingFunction, r):
    """Radial and spherical sectional curvatures (-A''/A, (1 - A'^2)/A^2).

    The spherical value is the formula for a pair of distinct sphere
    directions; for d = 2 no such pair exists and the number is reported for
    reference only.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("r must be positive")
    A = w.A(r)
    if np.any(A == 0):
        raise ZeroDivisionError("A(r) vanishes")
    k_rad = -w.d2A_over_A(r)
    if w.kind == "hyperbolic":
        k_sph = 1.0 / np.sinh(r) ** 2 - 1.0 / np.tanh(r) ** 2
    else:
        # 1 - A'^2 = -(A' - 1)(A' + 1)
        aor = w.A_over_r(r)
        k_sph = -w._dA_minus_1_over_r2(r) * (w.dA(r) + 1.0) / aor**2
    return k_rad, k_sph


def potential_V(w: WarpingFunction, d: int, r):
    """Effective potential of the conjugated radial Laplacian; V = 0 when flat."""
    if d < 2:
        raise ValueError("d must be >= 2")
    r = np.asarray(r, dtype=float)
    if w.kind == "flat":
        return np.zeros_like(r)
    out = 0.5 * (d - 1) * w.d2A_over_A(r)
    if d != 3:
        out = out + 0.25 * (d - 1) * (d - 3) * w.centrifugal_defect(r)
    return out


def weight_phi(w: WarpingFunction, d: int, p: float, r):
    """Nonlinearity weight (r/A)^((d-1)(p-1)/2); equals 1 at r = 0 and when flat."""
    r = np.asarray(r, dtype=float)
    if w.kind == "flat":
        return np.ones_like(r)
    expo = 0.5 * (d - 1) * (p - 1)
    return w.A_over_r(r) ** (-expo)


@dataclass(frozen=True)
class MetricReport:
    d: int
    V0d: float
    hypothesis_ok: bool
    curvature_samples: list
    fit_residual: float = 0.0
    message: str = ""


def estimate_V0d(w: WarpingFunction, d: int, r_min: float = 50.0, r_max: float = 400.0, probe_points: int = 400) -> MetricReport:
    """Fit V_d(r) = V0 + c / r^2 on [r_min, r_max] at doubled radii.

    The hypothesis is accepted when the fit residual is below 1e-4 relative
    to 1 + |V0| and A(r)/r stays positive on a probe grid of (0, r_max].
    """
    radii = []
    r = r_min
    while r <= r_max * (1 + 1e-12):
        radii.append(r)
        r *= 2.0
    # sub-sample each octave to avoid an exactly determined fit
    rs = np.unique(np.concatenate([np.geomspace(a, 2 * a, 5) for a in radii[:-1]] + [radii[-1:]]))
    probe = np.linspace(r_max / probe_points, r_max, probe_points)
    positive = bool(np.all(w.A_over_r(probe) > 0))
    samples = []
    for x in (0.5, 1.0, 2.0, 5.0):
        if w.A_over_r(x) > 0:
            samples.append((float(x), *map(float, sectional_curvatures(w, x))))
    if w.kind == "flat":
        return MetricReport(d, 0.0, True, samples, 0.0)
    if not positive:
        return MetricReport(d, float("nan"), False, samples, float("inf"), "A(r) not positive")
    try:
        V = potential_V(w, d, rs)
        design = np.column_stack([np.ones_like(rs), rs**-2])
        sol, *_ = np.linalg.lstsq(design, V, rcond=None)
        resid = float(np.max(np.abs(design @ sol - V)))
        v0 = float(sol[0])
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        return MetricReport(d, float("nan"), False, samples, float("inf"), f"fit failed: {exc}")
    if not np.isfinite(v0):
        return MetricReport(d, v0, False, samples, float("inf"), "non-finite fit")
    rel = resid / (1.0 + abs(v0))
    ok = rel < 1e-4
    msg = "" if ok else f"fit residual {rel:.2e}"
    return MetricReport(d, v0, ok, samples, rel, msg)
