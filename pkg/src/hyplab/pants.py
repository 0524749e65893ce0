"""Pants graphs and assembled surface models (zero-twist gluings only)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .collar import SHORT_CUFF_MAX, Collar, half_width_formula
from .errors import GenusError, HyplabError, IncompleteGluingError, InvalidLengthError
from .hypgeom import Hexagon, hexagon_seams

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Gluing:
    """One cuff: two (pants, slot) ends identified along a geodesic of the given length."""

    a: tuple  # (pants index, slot index)
    b: tuple
    length: float


@dataclass
class PantsGraph:
    """3-regular multigraph of pants with cuff lengths on the gluing edges."""

    num_pants: int
    gluings: list

    def __post_init__(self):
        if self.num_pants <= 0:
            raise GenusError("need at least two pants")
        if self.num_pants % 2 != 0:
            raise GenusError(f"pants count {self.num_pants} is odd; genus 1 + pants/2 "
                             "must be an integer")
        seen = {}
        for gi, gl in enumerate(self.gluings):
            if not gl.length > 0:
                raise InvalidLengthError(f"cuff length {gl.length} must be positive")
            for end in (gl.a, gl.b):
                p, s = end
                if not (0 <= p < self.num_pants and 0 <= s < 3):
                    raise IncompleteGluingError(f"gluing end {end} out of range")
                if end in seen:
                    raise IncompleteGluingError(f"slot {end} appears in two gluings")
                seen[end] = gi
        expected = {(p, s) for p in range(self.num_pants) for s in range(3)}
        missing = expected - set(seen)
        if missing:
            raise IncompleteGluingError(f"dangling slots: {sorted(missing)}")
        self._slot_to_gluing = seen

    @property
    def genus(self) -> int:
        return 1 + self.num_pants // 2

    def gluing_at(self, pants: int, slot: int):
        """Return (gluing index, side) where side is 0 for end `a`, 1 for end `b`."""
        gi = self._slot_to_gluing[(pants, slot)]
        gl = self.gluings[gi]
        return gi, (0 if gl.a == (pants, slot) else 1)

    def slot_lengths(self, pants: int):
        return tuple(self.gluings[self.gluing_at(pants, s)[0]].length for s in range(3))

    def cuff_lengths(self):
        return [gl.length for gl in self.gluings]


@dataclass(frozen=True)
class PantsBlock:
    """One pair of pants realized as two mirror right-angled hexagons."""

    cuff_lengths: tuple
    hexagon: Hexagon

    @property
    def area(self) -> float:
        return TWO_PI

    def seam_between(self, slot_i: int, slot_j: int) -> float:
        """Length of the seam joining cuffs slot_i and slot_j (the side opposite
        the remaining cuff)."""
        k = 3 - slot_i - slot_j
        return self.hexagon.seam_sides[k]


def build_pants(l1: float, l2: float, l3: float) -> PantsBlock:
    """Pair of pants with cuff lengths l1,l2,l3: two isometric right-angled
    hexagons with alternating sides l_i / 2."""
    for l in (l1, l2, l3):
        if not (l > 0 and math.isfinite(l)):
            raise InvalidLengthError(f"cuff length {l} must be positive and finite")
    hexagon = hexagon_seams(0.5 * l1, 0.5 * l2, 0.5 * l3)
    return PantsBlock(cuff_lengths=(l1, l2, l3), hexagon=hexagon)


@dataclass
class SurfaceModel:
    """Assembled closed surface: pants blocks plus collar decomposition metadata."""

    graph: PantsGraph
    blocks: list
    collars: list
    volume: float
    genus: int
    shortest_seam_pair: float = math.inf
    flags: dict = field(default_factory=dict)

    def collar_by_id(self, geodesic_id: int):
        for c in self.collars:
            if c.geodesic_id == geodesic_id:
                return c
        return None

    def collar_half_width_at(self, gluing_index: int) -> float:
        c = self.collar_by_id(gluing_index)
        return c.half_width if c is not None else 0.0


def _audit_collar_disjointness(graph: PantsGraph, blocks, widths):
    """Within every pants, collars of two cuffs must fit inside the seam
    separating them (collar-lemma disjointness realized in coordinates)."""
    for p in range(graph.num_pants):
        block = blocks[p]
        for i in range(3):
            for j in range(i + 1, 3):
                gi, _ = graph.gluing_at(p, i)
                gj, _ = graph.gluing_at(p, j)
                seam = block.seam_between(i, j)
                need = widths.get(gi, 0.0) + widths.get(gj, 0.0)
                if need > seam + 1e-9:
                    raise HyplabError(
                        f"collars of cuffs {gi},{gj} overlap in pants {p}: "
                        f"widths sum {need:.6f} > seam {seam:.6f}",
                        code="pants.collar_overlap",
                    )


def assemble_surface(graph: PantsGraph) -> SurfaceModel:
    """Assemble the closed surface for a pants graph (all twists zero).

    Produces hexagon realizations per pants, the collar list for every cuff
    of length <= 2 asinh(1), and audits collar disjointness inside every
    pants.  Concatenated seam pairs shorter than the short-geodesic cutoff
    are flagged (they would be untracked short geodesics).
    """
    blocks = [build_pants(*graph.slot_lengths(p)) for p in range(graph.num_pants)]
    widths = {}
    collars = []
    for gi, gl in enumerate(graph.gluings):
        if gl.length <= SHORT_CUFF_MAX:
            w = half_width_formula(gl.length)
            widths[gi] = w
            collars.append(Collar(geodesic_id=gi, cuff_length=gl.length, half_width=w))
    _audit_collar_disjointness(graph, blocks, widths)
    shortest_seam_pair = min(
        (2.0 * min(b.hexagon.seam_sides) for b in blocks), default=math.inf
    )
    flags = {}
    if shortest_seam_pair < SHORT_CUFF_MAX:
        flags["untracked_short_geodesic_risk"] = shortest_seam_pair
    return SurfaceModel(
        graph=graph,
        blocks=blocks,
        collars=collars,
        volume=TWO_PI * graph.num_pants,
        genus=graph.genus,
        shortest_seam_pair=shortest_seam_pair,
        flags=flags,
    )


def two_pants_surface(l1: float, l2: float, l3: float) -> PantsGraph:
    """Genus-2 surface: two pants glued along all three cuffs."""
    gluings = [Gluing(a=(0, k), b=(1, k), length=l) for k, l in enumerate((l1, l2, l3))]
    return PantsGraph(num_pants=2, gluings=gluings)


def sharpness_family(n: int, epsilon: float) -> PantsGraph:
    """Cycle of n building blocks X, each two (1,1,eps) pants glued along
    both unit cuffs; consecutive blocks share an eps-cuff.

    Output: 2n pants, genus n+1, cuff multiset {eps} x n plus {1} x 2n,
    zero twists.
    """
    if n < 2:
        raise GenusError(f"sharpness family needs n >= 2, got {n}")
    if not 0 < epsilon < SHORT_CUFF_MAX:
        raise InvalidLengthError(
            f"epsilon must lie in (0, {SHORT_CUFF_MAX:.6f}), got {epsilon}"
        )
    gluings = []
    for i in range(n):
        y0, y1 = 2 * i, 2 * i + 1
        gluings.append(Gluing(a=(y0, 0), b=(y1, 0), length=1.0))
        gluings.append(Gluing(a=(y0, 1), b=(y1, 1), length=1.0))
    for i in range(n):
        y1 = 2 * i + 1
        y0_next = (2 * (i + 1)) % (2 * n)
        gluings.append(Gluing(a=(y1, 2), b=(y0_next, 2), length=epsilon))
    return PantsGraph(num_pants=2 * n, gluings=gluings)


def block_of_pants(graph: PantsGraph, pants: int) -> int:
    """X-block index of a pants in the sharpness family layout."""
    return pants // 2
