"""Collar-lemma quantities and the conformal stretch factor.

Covers collar half-widths, injectivity radii in cylinder coordinates, the
truncated reciprocal-injectivity weight, the bottleneck functional I(S)
in both its geodesic and integral forms, and the mollified stretch factor
with its Gaussian curvature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from .errors import CollarDomainError, HyplabError, LocationError
from .hypgeom import acosh1p

#: inj lower bound in the thick part; also the cuff-length cutoff is 2*asinh(1)
THICK_INJ = math.asinh(1.0)
SHORT_CUFF_MAX = 2.0 * THICK_INJ


def half_width_formula(length: float) -> float:
    """W(l) = asinh(1 / sinh(l/2)), evaluated on any positive length."""
    if not length > 0:
        raise CollarDomainError(f"cuff length must be positive, got {length}")
    return math.asinh(1.0 / math.sinh(0.5 * length))


def collar_half_width(length: float) -> float:
    """Half-width of the standard collar around a short closed geodesic.

    Collars exist only for lengths in (0, 2 asinh 1]; beyond that the
    formula is still finite but the collar lemma no longer applies, so the
    argument is rejected.
    """
    if not 0 < length <= SHORT_CUFF_MAX:
        raise CollarDomainError(
            f"collar defined for cuff length in (0, {SHORT_CUFF_MAX:.6f}], got {length}"
        )
    return half_width_formula(length)


def inj_in_collar(rho: float, length: float) -> float:
    """Injectivity radius at signed distance rho from the collar core.

    The defining formula is r = acosh(1 + (cosh(l) - 1) cosh(rho)^2) / 2;
    it is evaluated in the equivalent cancellation-free form
    r = asinh(sinh(l/2) cosh(rho)).
    """
    if not length > 0:
        raise CollarDomainError(f"cuff length must be positive, got {length}")
    return math.asinh(math.sinh(0.5 * length) * math.cosh(rho))


def inj_in_collar_reference(rho: float, length: float) -> float:
    """Literal half-acosh form of the collar injectivity radius."""
    x = (math.cosh(length) - 1.0) * math.cosh(rho) ** 2
    return 0.5 * acosh1p(x)


def inj_from_collar_boundary(length: float, boundary_dist: float) -> float:
    """Injectivity radius at distance d from the collar boundary.

    sinh(inj) = cosh(l/2) cosh(d) - sinh(d).
    """
    s = math.cosh(0.5 * length) * math.cosh(boundary_dist) - math.sinh(boundary_dist)
    return math.asinh(s)


@dataclass(frozen=True)
class Collar:
    """Embedded collar around a short cuff geodesic."""

    geodesic_id: int
    cuff_length: float
    half_width: float

    def __post_init__(self):
        if not 0 < self.cuff_length <= SHORT_CUFF_MAX:
            raise CollarDomainError(f"collar cuff length {self.cuff_length} out of range")
        w = half_width_formula(self.cuff_length)
        if abs(w - self.half_width) > 1e-12 * max(1.0, w):
            raise CollarDomainError(
                f"half_width {self.half_width} inconsistent with cuff length (expected {w})"
            )


@dataclass(frozen=True)
class SurfacePoint:
    """Location of a point: either collar cylinder coordinates or a thick tag."""

    region: str  # "collar" | "thick"
    cuff: int = -1
    rho: float = 0.0
    t: float = 0.0


def trunc_inj(point: SurfacePoint, model) -> float:
    """Truncated reciprocal-injectivity weight iota-hat = min(inj, 1).

    Inside a collar the injectivity radius comes from the cylinder formula;
    in the thick part the guaranteed lower bound asinh(1) is used as the
    value (this uniform clamp is disclosed in every report).
    """
    if point.region == "thick":
        return THICK_INJ
    if point.region == "collar":
        collar = model.collar_by_id(point.cuff)
        if collar is None:
            raise LocationError(f"no collar with id {point.cuff}")
        if abs(point.rho) > collar.half_width + 1e-9:
            raise LocationError(
                f"rho={point.rho} outside collar of half-width {collar.half_width}"
            )
        return min(1.0, inj_in_collar(point.rho, collar.cuff_length))
    raise LocationError(f"unlocated point (region={point.region!r})")


# ---------------------------------------------------------------------------
# conformal stretch factor


@lru_cache(maxsize=1)
def mollifier_norm() -> float:
    """Normalizing constant c with  c * int_{-1}^{1} exp(-1/(1-x^2)) dx = 1."""
    val, _ = quad(lambda x: math.exp(-1.0 / (1.0 - x * x)), -1.0, 1.0, epsabs=1e-14, epsrel=1e-13)
    return 1.0 / val


def mollifier(x: float) -> float:
    """Standard bump psi supported on [-1, 1] with unit integral."""
    if abs(x) >= 1.0:
        return 0.0
    return mollifier_norm() * math.exp(-1.0 / (1.0 - x * x))


def _pre_stretch(x: float, length: float, half_width: float) -> float:
    # unsmoothed profile: reciprocal collar circumference deep inside, 1 near the ends
    if abs(x) < half_width - 2.0:
        return 1.0 / (length * math.cosh(x))
    return 1.0


def stretch_factor(rho: float, length: float) -> float:
    """Mollified conformal factor f(rho) on a collar of the given cuff length.

    f is the convolution of the piecewise profile (1/(l cosh x) deep in the
    collar, 1 within 2 of the ends and outside) with the standard bump; it
    is smooth, >= 1, and identically 1 for |rho| >= W - 1.
    """
    if not 0 < length <= SHORT_CUFF_MAX:
        raise CollarDomainError(f"cuff length {length} out of collar range")
    w = half_width_formula(length)
    if w <= 2.0:
        return 1.0
    if abs(rho) >= w - 1.0:
        return 1.0
    lo, hi = rho - 1.0, rho + 1.0
    kinks = sorted({lo, hi, *(k for k in (-(w - 2.0), w - 2.0) if lo < k < hi)})
    total = 0.0
    for a, b in zip(kinks[:-1], kinks[1:]):
        val, _ = quad(
            lambda x: _pre_stretch(x, length, w) * mollifier(rho - x),
            a, b, epsabs=1e-12, epsrel=1e-11,
        )
        total += val
    return total


@dataclass(frozen=True)
class StretchProfile:
    """Sampled stretch factor along a collar."""

    cuff_length: float
    samples: dict = field(default_factory=dict)  # rho -> f(rho)
    mollifier_norm: float = 0.0

    def max_value(self) -> float:
        return max(self.samples.values())


def build_stretch_profile(length: float, rhos) -> StretchProfile:
    samples = {float(r): stretch_factor(float(r), length) for r in rhos}
    return StretchProfile(cuff_length=length, samples=samples, mollifier_norm=mollifier_norm())


def stretched_curvature(rho: float, length: float, step: float = 1e-4) -> float:
    """Gaussian curvature of the conformally stretched collar metric.

    K = -(f^2 + f (tanh(rho) f' + f'') - f'^2) / f^3 with derivatives taken
    by centered differences of width `step`.
    """
    f0 = stretch_factor(rho, length)
    fp = stretch_factor(rho + step, length)
    fm = stretch_factor(rho - step, length)
    d1 = (fp - fm) / (2.0 * step)
    d2 = (fp - 2.0 * f0 + fm) / (step * step)
    return -(f0 * f0 + f0 * (math.tanh(rho) * d1 + d2) - d1 * d1) / f0 ** 3


# ---------------------------------------------------------------------------
# the functional I(S)


def collar_weight_integral(length: float) -> float:
    """Exact 1D reduction of the integral of iota-hat^-2 over one collar.

    int_collar min(inj,1)^-2 dA = int_{-W}^{W} r(rho)^{-2} l cosh(rho) drho
    (the clamp at 1 is inactive inside collars, where inj <= asinh(cosh(l/2))).
    """
    w = collar_half_width(length)

    def integrand(rho):
        return length * math.cosh(rho) / inj_in_collar(rho, length) ** 2

    val, _ = quad(integrand, -w, w, epsabs=1e-11, epsrel=1e-10, limit=200)
    return val


def surface_I(model, method: str = "geodesic", mesh=None) -> float:
    """Bottleneck functional I(S): mean of iota-hat^-2 over the surface.

    method="geodesic": 1 + (1/Vol) sum of reciprocal short-cuff lengths.
    method="integral": quadrature of iota-hat^-2 over mesh vertices with
    hyperbolic vertex masses; reduction runs in vertex-index order, so the
    result is deterministic.
    """
    if method == "geodesic":
        total = sum(1.0 / c.cuff_length for c in model.collars)
        return 1.0 + total / model.volume
    if method == "integral":
        if mesh is None:
            raise HyplabError("integral method requires a mesh", code="collar.precondition")
        weights = mesh.vertex_masses_hyperbolic()
        inv2 = mesh.trunc_inj_vertices() ** -2.0
        num = float(np.add.reduce(weights * inv2))
        den = float(np.add.reduce(weights))
        return num / den
    raise HyplabError(f"unknown surface_I method {method!r}", code="collar.method")
