"""Upper half-plane hyperbolic geometry primitives.

Points are complex numbers with positive imaginary part (the model is the
upper half-plane throughout; the Poincare disk is never used).  Geodesics
are stored as ordered pairs of ideal endpoints on the extended real axis,
with ``math.inf`` as the marker for the vertical-line endpoint.  All
operations are pure functions and safe for concurrent use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import DEFAULT_RTOL
from .errors import InvalidLengthError, InvalidPointError, NoPerpendicularError, RangeError

INF = math.inf


@dataclass(frozen=True)
class HPoint:
    """A point of the upper half-plane."""

    re: float
    im: float

    def __post_init__(self):
        if not (self.im > 0 and math.isfinite(self.im) and math.isfinite(self.re)):
            raise InvalidPointError(f"point {self.re}+{self.im}i is not in the upper half-plane")

    @property
    def z(self) -> complex:
        return complex(self.re, self.im)

    @classmethod
    def from_complex(cls, z: complex) -> "HPoint":
        return cls(z.real, z.imag)


def _as_complex(z) -> complex:
    if isinstance(z, HPoint):
        return z.z
    z = complex(z)
    if not (z.imag > 0 and math.isfinite(z.imag) and math.isfinite(z.real)):
        raise InvalidPointError(f"point {z} is not in the upper half-plane")
    return z


def dist_h(z, w) -> float:
    """Hyperbolic distance, via cosh(d) = 1 + |z-w|^2 / (2 Im z Im w).

    Evaluated in the numerically stable form d = asinh(sqrt(x(x+2)))
    with x = cosh(d) - 1, which is exact for nearby points.
    """
    z = _as_complex(z)
    w = _as_complex(w)
    x = abs(z - w) ** 2 / (2.0 * z.imag * w.imag)
    return math.asinh(math.sqrt(x * (x + 2.0)))


def acosh1p(x: float) -> float:
    """acosh(1 + x) for x >= 0 without cancellation near 0."""
    if x < 0:
        if x > -1e-12:
            return 0.0
        raise ValueError(f"acosh1p needs x >= 0, got {x}")
    return math.asinh(math.sqrt(x * (x + 2.0)))


@dataclass(frozen=True)
class Geodesic:
    """Complete geodesic given by its ordered ideal endpoints (reals or INF)."""

    p: float
    q: float

    def __post_init__(self):
        if self.p == self.q:
            raise InvalidPointError(f"degenerate geodesic with equal endpoints {self.p}")
        if math.isinf(self.p) and math.isinf(self.q):
            raise InvalidPointError("both geodesic endpoints at infinity")

    @property
    def vertical(self) -> bool:
        return math.isinf(self.p) or math.isinf(self.q)

    def contains(self, z, tol=1e-9) -> bool:
        z = _as_complex(z)
        if self.vertical:
            x0 = self.q if math.isinf(self.p) else self.p
            return abs(z.real - x0) <= tol * max(1.0, abs(z.imag))
        c = 0.5 * (self.p + self.q)
        r = 0.5 * abs(self.q - self.p)
        return abs(abs(z - c) - r) <= tol * max(1.0, r)


class Mobius:
    """Real Moebius map z -> (az+b)/(cz+d) with ad - bc > 0 (preserves H)."""

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a, b, c, d):
        det = a * d - b * c
        if not det > 0:
            raise InvalidPointError(f"Moebius determinant must be positive, got {det}")
        s = 1.0 / math.sqrt(det)
        self.a, self.b, self.c, self.d = a * s, b * s, c * s, d * s

    def __call__(self, z):
        if isinstance(z, HPoint):
            z = z.z
        if isinstance(z, complex):
            return (self.a * z + self.b) / (self.c * z + self.d)
        # boundary point (real or INF)
        if math.isinf(z):
            return self.a / self.c if self.c != 0.0 else INF
        den = self.c * z + self.d
        if den == 0.0:
            return INF
        return (self.a * z + self.b) / den

    def inverse(self) -> "Mobius":
        return Mobius(self.d, -self.b, -self.c, self.a)

    def compose(self, other: "Mobius") -> "Mobius":
        # self after other: (self o other)(z)
        return Mobius(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    @classmethod
    def identity(cls) -> "Mobius":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def translation(cls, length: float) -> "Mobius":
        """Hyperbolic translation by `length` along the imaginary axis (i -> e^len i)."""
        e = math.exp(0.5 * length)
        return cls(e, 0.0, 0.0, 1.0 / e)

    @classmethod
    def rotation(cls, angle: float) -> "Mobius":
        """Rotation by `angle` of the tangent space at i."""
        t = 0.5 * angle
        return cls(math.cos(t), math.sin(t), -math.sin(t), math.cos(t))

    @classmethod
    def to_imaginary_axis(cls, g: Geodesic) -> "Mobius":
        """Map sending g.p -> 0 and g.q -> infinity."""
        p, q = g.p, g.q
        if math.isinf(p):
            return cls(0.0, -1.0, 1.0, -q)
        if math.isinf(q):
            return cls(1.0, -p, 0.0, 1.0)
        k = 1.0 if p > q else -1.0
        return cls(k, -k * p, 1.0, -q)

    def transport_geodesic(self, g: Geodesic) -> Geodesic:
        return Geodesic(self(g.p), self(g.q))


def geodesic_through(z, w) -> Geodesic:
    """The complete geodesic through two distinct points of H."""
    z = _as_complex(z)
    w = _as_complex(w)
    if abs(z - w) == 0.0:
        raise InvalidPointError("need two distinct points")
    if abs(z.real - w.real) <= 1e-15 * max(1.0, abs(z.real)):
        return Geodesic(z.real, INF)
    # center of the Euclidean semicircle through z, w
    c = (abs(z) ** 2 - abs(w) ** 2) / (2.0 * (z.real - w.real))
    r = abs(z - c)
    return Geodesic(c - r, c + r)


def side_of(g: Geodesic, z) -> float:
    """Signed side indicator of z relative to g (sign only is meaningful)."""
    z = _as_complex(z)
    if g.vertical:
        x0 = g.q if math.isinf(g.p) else g.p
        return z.real - x0
    c = 0.5 * (g.p + g.q)
    r = 0.5 * abs(g.q - g.p)
    return abs(z - c) ** 2 - r * r


def dist_to_geodesic(g: Geodesic, z) -> float:
    """Distance from z to the complete geodesic g: sinh(d) = |cot(angle)|."""
    z = _as_complex(z)
    t = Mobius.to_imaginary_axis(g)
    w = t(z)
    # distance to imaginary axis: sinh(d) = |Re w| / Im w
    return math.asinh(abs(w.real) / w.imag)


def common_perpendicular_foot(g1: Geodesic, g2: Geodesic):
    """Feet and length of the common perpendicular of two disjoint geodesics.

    Returns ``(foot1, foot2, length)`` where foot1 lies on g1 and foot2 on
    g2, both as complex points.  Raises NoPerpendicularError for
    intersecting or asymptotic pairs.
    """
    for a in (g1.p, g1.q):
        for b in (g2.p, g2.q):
            if a == b:
                raise NoPerpendicularError("geodesics share an ideal endpoint (asymptotic)")
    t = Mobius.to_imaginary_axis(g1)
    c, d = t(g2.p), t(g2.q)
    if math.isinf(c) or math.isinf(d) or c == 0.0 or d == 0.0:
        raise NoPerpendicularError("geodesics are asymptotic")
    if (c > 0) != (d > 0):
        raise NoPerpendicularError("geodesics intersect")
    flip = c < 0
    if flip:
        # conjugate by z -> -1/z, an isometry fixing the imaginary axis
        t = Mobius(0.0, -1.0, 1.0, 0.0).compose(t)
        c, d = -1.0 / c, -1.0 / d
    root = math.sqrt(c * d)
    m = 0.5 * (c + d)
    r = 0.5 * abs(d - c)
    foot1 = complex(0.0, root)
    foot2 = (root / m) * complex(root, r)
    length = dist_h(foot1, foot2)
    tinv = t.inverse()
    return tinv(foot1), tinv(foot2), length


def perpendicular_distance_between(g1: Geodesic, g2: Geodesic) -> float:
    """Length of the common perpendicular via the endpoint cross-ratio."""
    a, b = g1.p, g1.q
    c, d = g2.p, g2.q

    def ratio(x, y):
        # (x - y) with projective handling of INF
        if math.isinf(x) and math.isinf(y):
            raise NoPerpendicularError("shared endpoint at infinity")
        if math.isinf(x) or math.isinf(y):
            return INF
        return x - y

    # cross ratio q = ((d-a)(c-b)) / ((d-b)(c-a)); INF factors cancel pairwise
    num_parts = [ratio(d, a), ratio(c, b)]
    den_parts = [ratio(d, b), ratio(c, a)]
    num_inf = sum(math.isinf(x) for x in num_parts)
    den_inf = sum(math.isinf(x) for x in den_parts)
    num = math.prod(x for x in num_parts if not math.isinf(x))
    den = math.prod(x for x in den_parts if not math.isinf(x))
    if num_inf != den_inf:
        raise NoPerpendicularError("degenerate endpoint configuration")
    q = num / den
    if q < 0 or q == 1.0:
        raise NoPerpendicularError("geodesics intersect or coincide")
    if q < 1.0:
        q = 1.0 / q
    return acosh1p((q + 1.0) / (q - 1.0) - 1.0)


@dataclass(frozen=True)
class Hexagon:
    """Right-angled hexagon: alternating sides a1,a2,a3 and opposite seams b1,b2,b3."""

    alt_sides: tuple
    seam_sides: tuple

    def __post_init__(self):
        for s in (*self.alt_sides, *self.seam_sides):
            if not (s > 0 and math.isfinite(s)):
                raise InvalidLengthError(f"hexagon side {s} must be positive and finite")
        a1, a2, a3 = self.alt_sides
        for k, (ai, aj, ak, bk) in enumerate(
            [(a2, a3, a1, self.seam_sides[0]),
             (a3, a1, a2, self.seam_sides[1]),
             (a1, a2, a3, self.seam_sides[2])]
        ):
            lhs = math.cosh(bk)
            rhs = (math.cosh(ai) * math.cosh(aj) + math.cosh(ak)) / (math.sinh(ai) * math.sinh(aj))
            if abs(lhs - rhs) > DEFAULT_RTOL * max(abs(lhs), abs(rhs), 1.0):
                raise InvalidLengthError(f"hexagon relation violated for seam b{k + 1}")


def hexagon_seams(a1: float, a2: float, a3: float) -> Hexagon:
    """Seam lengths of the right-angled hexagon with alternating sides a1,a2,a3.

    Defining relation: cosh(b_k) = (cosh a_i cosh a_j + cosh a_k) /
    (sinh a_i sinh a_j) for {i,j,k} = {1,2,3}; b_k is the side opposite a_k.
    """
    alts = (float(a1), float(a2), float(a3))
    for a in alts:
        if not (a > 0 and math.isfinite(a)):
            raise InvalidLengthError(f"hexagon alternating side {a} must be positive")
    try:
        ch = [math.cosh(a) for a in alts]
        sh = [math.sinh(a) for a in alts]
        seams = []
        for k in range(3):
            i, j = (k + 1) % 3, (k + 2) % 3
            x = (ch[i] * ch[j] + ch[k]) / (sh[i] * sh[j])
            seams.append(acosh1p(x - 1.0))
    except OverflowError as exc:
        raise RangeError(f"hexagon sides {alts} overflow hyperbolic functions") from exc
    return Hexagon(alt_sides=alts, seam_sides=tuple(seams))


def fermi_point(s: float, rho: float) -> complex:
    """Point at signed distance rho from the imaginary axis, foot at height e^s.

    Coordinates are Fermi coordinates of the imaginary axis: arclength s
    along the axis, signed perpendicular distance rho (positive toward
    Re > 0).
    """
    return math.exp(s) * complex(math.tanh(rho), 1.0 / math.cosh(rho))


def fermi_distance(rho1: float, rho2: float, ds: float) -> float:
    """Distance between Fermi points (s1, rho1), (s2, rho2) with ds = s2 - s1.

    Closed form cosh d = cosh rho1 cosh rho2 cosh(ds) - sinh rho1 sinh rho2,
    evaluated without cancellation.
    """
    x = math.cosh(rho1) * math.cosh(rho2) * 2.0 * math.sinh(0.5 * ds) ** 2
    x += 2.0 * math.sinh(0.5 * (rho1 - rho2)) ** 2
    return acosh1p(x)


