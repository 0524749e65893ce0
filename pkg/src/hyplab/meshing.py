"""Intrinsic triangle meshes for assembled surfaces.

Collars carry structured cylinder grids in (rho, t) coordinates with
per-ring doubling so cells stay near-square; the thick remainder of every
pants is meshed inside its hexagon chart (seeded Poisson sampling plus
Delaunay with quality refinement) and glued watertight to the collar rings
and to its mirror hexagon along the seams.  The second side of a cuff is
attached with the zero-twist convention: seam feet aligned, arclength
orientation reversed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import Delaunay

from . import DEFAULT_SEED
from .collar import THICK_INJ, inj_in_collar
from .errors import MeshQualityError, MeshResolutionError
from .hypgeom import (
    Geodesic,
    Mobius,
    dist_h,
    fermi_distance,
    fermi_point,
    perpendicular_distance_between,
)

RIGHT_ANGLE = 0.5 * math.pi
_M_BASE = 4          # smallest ring subdivision (keeps t=0 and t=1/2 as nodes)
_ASPECT_CAP = 2.2    # radial step at most this multiple of the ring arc spacing
_MIN_GAP_H = 0.62    # required clearance between structured strips, in units of h


# ---------------------------------------------------------------------------
# hexagon charts


class HexagonChart:
    """Upper half-plane realization of one right-angled hexagon.

    Sides in cyclic order: cuff 0, seam 01, cuff 1, seam 12, cuff 2, seam 20.
    Side s starts at vertex s; poses[s] maps the imaginary axis onto side s
    with the start vertex at i and arclength increasing upward.
    """

    def __init__(self, block):
        self.block = block
        lengths = []
        for s in range(6):
            if s % 2 == 0:
                lengths.append(0.5 * block.cuff_lengths[s // 2])
            else:
                i = (s - 1) // 2
                lengths.append(block.seam_between(i, (i + 1) % 3))
        self.side_lengths = lengths

        pose = Mobius.identity()
        self.poses = []
        for s in range(6):
            self.poses.append(pose)
            pose = pose.compose(Mobius.translation(lengths[s]))
            pose = pose.compose(Mobius.rotation(-RIGHT_ANGLE))
        base = complex(0.0, 1.0)
        probe = complex(0.0, math.e)
        closure = max(dist_h(pose(base), base), dist_h(pose(probe), probe))
        if closure > 1e-8:
            raise MeshQualityError(f"hexagon walk failed to close (residual {closure:.2e})")

        self.vertices = [self.poses[s](base) for s in range(6)]
        self.side_geodesics = [
            Geodesic(self.poses[s](0.0), self.poses[s](math.inf)) for s in range(6)
        ]
        self._inv_poses = [p.inverse() for p in self.poses]
        # interior side of each side geodesic, in the side's normalized frame
        self.interior_sign = []
        for s in range(6):
            w = self._inv_poses[s](self.vertices[(s + 3) % 6])
            self.interior_sign.append(1.0 if w.real > 0 else -1.0)

    def cuff_side(self, slot: int) -> int:
        return 2 * slot

    def seam_side(self, slot: int) -> int:
        """Side index of the seam that follows cuff `slot` in the cycle."""
        return 2 * slot + 1

    def side_point(self, side: int, arclength: float) -> complex:
        return self.poses[side](complex(0.0, math.exp(arclength)))

    def cuff_fermi(self, slot: int, arclength: float, depth: float) -> complex:
        """Point at perpendicular distance `depth` into the hexagon, above the
        cuff-side foot at the given arclength."""
        s = self.cuff_side(slot)
        return self.poses[s](fermi_point(arclength, self.interior_sign[s] * depth))

    def dist_and_foot(self, slot: int, z: complex):
        """(distance to the cuff-side geodesic, foot arclength from the side start)."""
        w = self._inv_poses[self.cuff_side(slot)](z)
        return math.asinh(abs(w.real) / w.imag), math.log(abs(w))

    def contains(self, z: complex, pad: float = 0.0) -> bool:
        """Point inside the hexagon, with hyperbolic margin `pad` from each side."""
        for s in range(6):
            w = self._inv_poses[s](z)
            if self.interior_sign[s] * math.asinh(w.real / w.imag) < pad:
                return False
        return True

    def altitude(self, slot: int) -> float:
        """Perpendicular distance from cuff side `slot` to the opposite seam."""
        g_cuff = self.side_geodesics[2 * slot]
        g_seam = self.side_geodesics[(2 * slot + 3) % 6]
        return perpendicular_distance_between(g_cuff, g_seam)


# ---------------------------------------------------------------------------
# mesh container


@dataclass(frozen=True)
class VertexTag:
    region: str          # "collar" | "thick" | "flat"
    cuff: int = -1
    rho: float = 0.0
    t: float = 0.0
    pants: int = -1
    hexside: int = 0     # 0 = hexagon A, 1 = mirror hexagon B
    x: float = 0.0
    y: float = 0.0


class HyperbolicMesh:
    """Triangle mesh with intrinsic edge lengths and per-vertex region tags."""

    def __init__(self, tags, triangles, edge_lengths, model=None, h=None):
        self.tags = list(tags)
        self.tris = np.asarray(triangles, dtype=np.int64)
        self.edge_lengths = dict(edge_lengths)
        self.model = model
        self.h = h
        self._tri_lengths = None
        self._areas_euclidean = None
        self._areas_hyperbolic = None
        self._trunc_inj = None

    # -- basic counts ---------------------------------------------------------

    @property
    def num_vertices(self) -> int:
        return len(self.tags)

    @property
    def num_triangles(self) -> int:
        return int(self.tris.shape[0])

    @property
    def num_edges(self) -> int:
        return len(self.edge_lengths)

    def euler_characteristic(self) -> int:
        return self.num_vertices - self.num_edges + self.num_triangles

    def genus_from_euler(self) -> int:
        chi = self.euler_characteristic()
        if chi % 2 != 0:
            raise MeshQualityError(f"odd Euler characteristic {chi}")
        return (2 - chi) // 2

    def edge_length(self, u: int, v: int) -> float:
        return self.edge_lengths[(u, v) if u < v else (v, u)]

    def tri_lengths(self) -> np.ndarray:
        """(m, 3) lengths of edges (v0,v1), (v1,v2), (v2,v0) per triangle."""
        if self._tri_lengths is None:
            out = np.empty((self.num_triangles, 3))
            for ti, (a, b, c) in enumerate(self.tris):
                out[ti, 0] = self.edge_length(a, b)
                out[ti, 1] = self.edge_length(b, c)
                out[ti, 2] = self.edge_length(c, a)
            self._tri_lengths = out
        return self._tri_lengths

    # -- geometry -------------------------------------------------------------

    def areas_euclidean(self) -> np.ndarray:
        """Triangle areas treating edge lengths as Euclidean (stable Heron)."""
        if self._areas_euclidean is None:
            l = np.sort(self.tri_lengths(), axis=1)  # ascending
            a, b, c = l[:, 2], l[:, 1], l[:, 0]
            t = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
            bad = t <= 0
            if np.any(bad):
                idx = int(np.nonzero(bad)[0][0])
                raise MeshQualityError(
                    f"triangle {idx} violates the triangle inequality: {l[idx]}"
                )
            self._areas_euclidean = 0.25 * np.sqrt(t)
        return self._areas_euclidean

    def triangle_angles(self) -> np.ndarray:
        """(m, 3) Euclidean angles (law of cosines on intrinsic lengths)."""
        l = self.tri_lengths()
        a, b, c = l[:, 0], l[:, 1], l[:, 2]
        angles = np.empty_like(l)
        for k, (p, q, r) in enumerate(((a, c, b), (b, a, c), (c, b, a))):
            cosv = np.clip((p ** 2 + q ** 2 - r ** 2) / (2 * p * q), -1.0, 1.0)
            angles[:, k] = np.arccos(cosv)
        return angles

    def min_angle_deg(self) -> float:
        return float(np.degrees(self.triangle_angles().min()))

    def areas_hyperbolic(self) -> np.ndarray:
        """Angle-defect areas of the geodesic triangles."""
        if self._areas_hyperbolic is None:
            l = self.tri_lengths()
            ch, sh = np.cosh(l), np.sinh(l)
            total = np.zeros(l.shape[0])
            for (i, j, opp) in ((0, 2, 1), (1, 0, 2), (2, 1, 0)):
                cosv = (ch[:, i] * ch[:, j] - ch[:, opp]) / (sh[:, i] * sh[:, j])
                total += np.arccos(np.clip(cosv, -1.0, 1.0))
            self._areas_hyperbolic = np.pi - total
        return self._areas_hyperbolic

    def vertex_masses(self) -> np.ndarray:
        """Lumped vertex masses: one third of adjacent Euclidean triangle areas."""
        masses = np.zeros(self.num_vertices)
        np.add.at(masses, self.tris.ravel(), np.repeat(self.areas_euclidean() / 3.0, 3))
        return masses

    def vertex_masses_hyperbolic(self) -> np.ndarray:
        masses = np.zeros(self.num_vertices)
        np.add.at(masses, self.tris.ravel(), np.repeat(self.areas_hyperbolic() / 3.0, 3))
        return masses

    def trunc_inj_vertices(self) -> np.ndarray:
        """iota-hat at every vertex: collar formula inside collars, the
        asinh(1) clamp elsewhere (incl. flat fixture meshes)."""
        if self._trunc_inj is None:
            out = np.empty(self.num_vertices)
            cuff_lengths = {}
            if self.model is not None:
                cuff_lengths = {c.geodesic_id: c.cuff_length for c in self.model.collars}
            for i, tag in enumerate(self.tags):
                if tag.region == "collar":
                    out[i] = min(1.0, inj_in_collar(tag.rho, cuff_lengths[tag.cuff]))
                else:
                    out[i] = THICK_INJ
            self._trunc_inj = out
        return self._trunc_inj

    def edges_array(self):
        """(e, 2) vertex pairs and (e,) lengths, sorted for determinism."""
        keys = sorted(self.edge_lengths)
        pairs = np.array(keys, dtype=np.int64)
        lengths = np.array([self.edge_lengths[k] for k in keys])
        return pairs, lengths

    # -- audits ----------------------------------------------------------------

    def audit_watertight(self):
        """Every edge of a closed surface borders exactly two triangles."""
        counts = {}
        for a, b, c in self.tris:
            for u, v in ((a, b), (b, c), (c, a)):
                key = (u, v) if u < v else (v, u)
                counts[key] = counts.get(key, 0) + 1
        bad = {k: v for k, v in counts.items() if v != 2}
        if bad:
            sample = sorted(bad.items())[:5]
            raise MeshQualityError(f"non-watertight edges (edge: count): {sample}")
        missing = set(counts) - set(self.edge_lengths)
        extra = set(self.edge_lengths) - set(counts)
        if missing or extra:
            raise MeshQualityError(
                f"edge-length table mismatch: {len(missing)} missing, {len(extra)} extra"
            )

    def audit_orientable(self):
        """A consistent global orientation must exist (parity propagation)."""
        edge_tris = {}
        for ti, (a, b, c) in enumerate(self.tris):
            for u, v in ((a, b), (b, c), (c, a)):
                key = (u, v) if u < v else (v, u)
                edge_tris.setdefault(key, []).append((ti, u < v))
        flip = -np.ones(self.num_triangles, dtype=np.int8)
        for start in range(self.num_triangles):
            if flip[start] >= 0:
                continue
            flip[start] = 0
            stack = [start]
            while stack:
                ti = int(stack.pop())
                a, b, c = self.tris[ti]
                for u, v in ((a, b), (b, c), (c, a)):
                    key = (u, v) if u < v else (v, u)
                    mine_fwd = u < v
                    for tj, other_fwd in edge_tris[key]:
                        if tj == ti:
                            continue
                        # opposite traversal directions <=> same flip state
                        want = flip[ti] if other_fwd != mine_fwd else 1 - flip[ti]
                        if flip[tj] < 0:
                            flip[tj] = want
                            stack.append(tj)
                        elif flip[tj] != want:
                            raise MeshQualityError("mesh is not orientable")

    # -- export ----------------------------------------------------------------

    def to_text(self) -> str:
        lines = [
            "# hyplab mesh v1",
            f"# vertices {self.num_vertices} triangles {self.num_triangles} "
            f"edges {self.num_edges}",
        ]
        for i, tag in enumerate(self.tags):
            if tag.region == "collar":
                lines.append(f"v {i} collar {tag.cuff} {tag.rho!r} {tag.t!r}")
            elif tag.region == "thick":
                lines.append(f"v {i} thick {tag.pants} {tag.hexside} {tag.x!r} {tag.y!r}")
            else:
                lines.append(f"v {i} flat {tag.x!r} {tag.y!r}")
        for a, b, c in self.tris:
            lines.append(f"t {a} {b} {c}")
        for (u, v) in sorted(self.edge_lengths):
            lines.append(f"e {u} {v} {self.edge_lengths[(u, v)]!r}")
        return "\n".join(lines) + "\n"

    def export_text(self, path):
        with open(path, "w", newline="\n") as fh:
            fh.write(self.to_text())


# ---------------------------------------------------------------------------
# builder


@dataclass
class _CuffInterface:
    gluing: int
    length: float
    true_width: float       # collar-lemma half-width W (0 when uncollared)
    grid_width: float       # structured grid extent, <= W
    m_outer: int = 0
    ring_nodes: dict = field(default_factory=dict)   # sign -> [vertex ids], i = 0..m-1
    line_nodes: list = field(default_factory=list)   # uncollared cuff circle nodes


class _MeshBuilder:
    def __init__(self, model, h, seed):
        if not 0 < h <= 0.3:
            raise MeshResolutionError(f"mesh spacing h must lie in (0, 0.3], got {h}")
        self.model = model
        self.graph = model.graph
        self.h = float(h)
        self.seed = seed
        self.tags = []
        self.tris = []
        self.edge_lengths = {}
        self.charts = [HexagonChart(b) for b in model.blocks]
        self.cuffs = {}
        self.shared_seam_nodes = set()

    # -- plumbing ---------------------------------------------------------------

    def _new_vertex(self, tag) -> int:
        self.tags.append(tag)
        return len(self.tags) - 1

    def _set_edge(self, u, v, length):
        key = (u, v) if u < v else (v, u)
        prev = self.edge_lengths.get(key)
        if prev is None:
            self.edge_lengths[key] = length
        elif abs(prev - length) > 2e-8 * max(1.0, prev):
            raise MeshQualityError(f"inconsistent edge length for {key}: {prev} vs {length}")

    def _add_triangle(self, a, b, c, lengths):
        self.tris.append((a, b, c))
        self._set_edge(a, b, lengths[0])
        self._set_edge(b, c, lengths[1])
        self._set_edge(c, a, lengths[2])

    # -- step 1: structured widths ------------------------------------------------

    def _solve_grid_widths(self):
        g_min = _MIN_GAP_H * self.h
        widths = {}
        for gi in range(len(self.graph.gluings)):
            c = self.model.collar_by_id(gi)
            widths[gi] = c.half_width if c is not None else 0.0
        grid = dict(widths)
        for p in range(self.graph.num_pants):
            chart = self.charts[p]
            for slot in range(3):
                gi, _ = self.graph.gluing_at(p, slot)
                if grid[gi] <= 0:
                    continue
                grid[gi] = min(grid[gi], chart.altitude(slot) - g_min)
        for _ in range(64):
            changed = False
            for p in range(self.graph.num_pants):
                block = self.model.blocks[p]
                for i in range(3):
                    for j in range(i + 1, 3):
                        gi, _ = self.graph.gluing_at(p, i)
                        gj, _ = self.graph.gluing_at(p, j)
                        seam = block.seam_between(i, j)
                        deficit = grid[gi] + grid[gj] + g_min - seam
                        if deficit <= 1e-15:
                            continue
                        changed = True
                        shrinkable = [g for g in {gi, gj} if grid[g] > 0]
                        if not shrinkable:
                            raise MeshResolutionError(
                                f"seam between cuffs {gi},{gj} shorter than the "
                                f"required clearance {g_min:.4f}"
                            )
                        for g in shrinkable:
                            grid[g] -= deficit / len(shrinkable)
            if not changed:
                break
        else:
            raise MeshResolutionError("collar width negotiation did not converge")
        for gi, w in grid.items():
            if widths[gi] > 0 and w < min(widths[gi], 2.0 * self.h):
                raise MeshResolutionError(
                    f"h={self.h} too coarse for a structured collar on cuff {gi} "
                    f"(residual width {w:.4f})"
                )
        return widths, grid

    # -- step 2: collar cylinders ---------------------------------------------------

    def _ring_m(self, length, rho) -> int:
        m = _M_BASE
        while length * math.cosh(rho) / m > self.h:
            m *= 2
        return m

    def _collar_levels(self, length, width):
        levels = [0.0]
        rho = 0.0
        while True:
            m = self._ring_m(length, rho)
            arc = length * math.cosh(rho) / m
            step = min(self.h, _ASPECT_CAP * arc)
            rem = width - rho
            if rem <= step * 1.0000001:
                levels.append(width)
                break
            if rem <= 2.0 * step:
                levels.append(rho + 0.5 * rem)
                levels.append(width)
                break
            rho += step
            levels.append(rho)
        return levels

    def _build_cylinder(self, gi, length, grid_width):
        pos = self._collar_levels(length, grid_width)
        levels = [-r for r in reversed(pos[1:])] + pos
        ms = [self._ring_m(length, abs(r)) for r in levels]
        rings = []
        for rho, m in zip(levels, ms):
            rings.append([
                self._new_vertex(VertexTag(region="collar", cuff=gi, rho=rho, t=i / m))
                for i in range(m)
            ])

        def fd(r1, r2, t1, t2):
            dt = abs(t1 - t2)
            return fermi_distance(r1, r2, length * min(dt, 1.0 - dt))

        def same_band(ring_a, r_a, ring_b, r_b, m):
            for i in range(m):
                i2 = (i + 1) % m
                t0, t1v = i / m, i2 / m
                self._add_triangle(
                    ring_a[i], ring_b[i], ring_b[i2],
                    (fd(r_a, r_b, t0, t0), fd(r_b, r_b, t0, t1v), fd(r_b, r_a, t1v, t0)),
                )
                self._add_triangle(
                    ring_a[i], ring_b[i2], ring_a[i2],
                    (fd(r_a, r_b, t0, t1v), fd(r_b, r_a, t1v, t1v), fd(r_a, r_a, t1v, t0)),
                )

        def transition_band(coarse, r_c, fine, r_f, m):
            # coarse ring has m nodes, fine ring 2m
            for i in range(m):
                i2 = (i + 1) % m
                f0, f1, f2 = 2 * i, 2 * i + 1, (2 * i + 2) % (2 * m)
                ti, ti2 = i / m, i2 / m
                tf0, tf1, tf2 = f0 / (2 * m), f1 / (2 * m), f2 / (2 * m)
                self._add_triangle(
                    coarse[i], fine[f0], fine[f1],
                    (fd(r_c, r_f, ti, tf0), fd(r_f, r_f, tf0, tf1), fd(r_f, r_c, tf1, ti)),
                )
                self._add_triangle(
                    coarse[i], fine[f1], coarse[i2],
                    (fd(r_c, r_f, ti, tf1), fd(r_f, r_c, tf1, ti2), fd(r_c, r_c, ti, ti2)),
                )
                self._add_triangle(
                    coarse[i2], fine[f1], fine[f2],
                    (fd(r_c, r_f, ti2, tf1), fd(r_f, r_f, tf1, tf2), fd(r_f, r_c, tf2, ti2)),
                )

        for j in range(len(levels) - 1):
            r1, r2 = levels[j], levels[j + 1]
            m1, m2 = ms[j], ms[j + 1]
            if m1 == m2:
                same_band(rings[j], r1, rings[j + 1], r2, m1)
            elif m2 == 2 * m1:
                transition_band(rings[j], r1, rings[j + 1], r2, m1)
            elif m1 == 2 * m2:
                transition_band(rings[j + 1], r2, rings[j], r1, m2)
            else:
                raise MeshResolutionError(f"ring subdivision jumped {m1} -> {m2} on cuff {gi}")
        iface = self.cuffs[gi]
        iface.m_outer = ms[-1]
        iface.ring_nodes[+1] = rings[-1]
        iface.ring_nodes[-1] = rings[0]

    def _build_cuff_line(self, gi, length):
        m = 2 * max(2, math.ceil(0.5 * length / self.h))
        iface = self.cuffs[gi]
        iface.m_outer = m
        iface.line_nodes = [
            self._new_vertex(VertexTag(region="thick", cuff=gi, t=i / m))
            for i in range(m)
        ]

    # -- step 3: hexagon cores --------------------------------------------------------

    def _interface_nodes(self, pants, slot, hexside):
        """Shared cuff nodes covered by this hexagon (ascending own arclength).

        Returns a list of (vertex id, own parameter) with own parameter in
        [0, 1/2] for hexagon A and [1/2, 1] for the mirror hexagon B.
        """
        gi, side = self.graph.gluing_at(pants, slot)
        iface = self.cuffs[gi]
        m = iface.m_outer
        sign = 1 if side == 0 else -1
        nodes = iface.ring_nodes[sign] if iface.true_width > 0 else iface.line_nodes
        out = []
        for k in range(m // 2 + 1):
            t_own = (k / m) if hexside == 0 else (0.5 + k / m)
            t_cyl = t_own % 1.0 if sign > 0 else (-t_own) % 1.0
            out.append((nodes[round(t_cyl * m) % m], t_own))
        return out

    def _tag_for_chart_point(self, pants, hexside, z):
        chart = self.charts[pants]
        for slot in range(3):
            gi, side = self.graph.gluing_at(pants, slot)
            iface = self.cuffs[gi]
            if iface.true_width <= 0:
                continue
            d, foot = chart.dist_and_foot(slot, z)
            if d < iface.true_width:
                gl_len = self.graph.gluings[gi].length
                t_own = min(max(foot, 0.0), 0.5 * gl_len) / gl_len
                if hexside == 1:
                    t_own = 1.0 - t_own
                sign = 1 if side == 0 else -1
                t_cyl = t_own % 1.0 if sign > 0 else (-t_own) % 1.0
                return VertexTag(region="collar", cuff=gi, rho=sign * d, t=t_cyl,
                                 pants=pants, hexside=hexside, x=z.real, y=z.imag)
        return VertexTag(region="thick", pants=pants, hexside=hexside, x=z.real, y=z.imag)

    def _core_boundary(self, pants):
        """Closed boundary loop of the hexagon-A core.

        Returns (loop vertex ids, loop chart positions).  Seam interior
        nodes created here are shared with the mirror hexagon.
        """
        chart = self.charts[pants]
        loop_ids, loop_pos = [], []

        def push(idx, pos):
            if loop_ids and loop_ids[-1] == idx:
                return
            loop_ids.append(idx)
            loop_pos.append(pos)

        for slot in range(3):
            gi, _ = self.graph.gluing_at(pants, slot)
            gl_len = self.graph.gluings[gi].length
            w = self.cuffs[gi].grid_width
            for idx, t_own in self._interface_nodes(pants, slot, hexside=0):
                push(idx, chart.cuff_fermi(slot, t_own * gl_len, w))
            s = chart.seam_side(slot)
            seam_len = chart.side_lengths[s]
            gj, _ = self.graph.gluing_at(pants, (slot + 1) % 3)
            lo, hi = w, seam_len - self.cuffs[gj].grid_width
            if hi < lo - 1e-12:
                raise MeshResolutionError(f"seam {s} of pants {pants} over-consumed")
            n_mid = max(1, math.ceil((hi - lo) / (0.85 * self.h)))
            for k in range(1, n_mid):
                arc = lo + (hi - lo) * k / n_mid
                pos = chart.side_point(s, arc)
                idx = self._new_vertex(self._tag_for_chart_point(pants, 0, pos))
                self.shared_seam_nodes.add(idx)
                push(idx, pos)
        return loop_ids, loop_pos

    def _mesh_core(self, pants, loop_ids, loop_pos):
        """Triangulate the core polygon: Poisson interior + Delaunay + fixup."""
        chart = self.charts[pants]
        h = self.h
        rng = np.random.default_rng(np.random.PCG64([self.seed, pants]))
        boundary = np.array([(z.real, z.imag) for z in loop_pos])
        nb = len(loop_ids)
        nxt = np.roll(np.arange(nb), -1)
        seg_mid = 0.5 * (boundary + boundary[nxt])
        seg_rad = 0.5 * np.linalg.norm(boundary - boundary[nxt], axis=1)

        collared = []
        for slot in range(3):
            gi, _ = self.graph.gluing_at(pants, slot)
            if self.cuffs[gi].grid_width > 0:
                collared.append((slot, self.cuffs[gi].grid_width))

        def in_core(z, pad=0.0):
            if not chart.contains(z, pad=pad):
                return False
            for slot, w in collared:
                if chart.dist_and_foot(slot, z)[0] < w + pad:
                    return False
            return True

        def clear_of_segments(p):
            d2 = (seg_mid[:, 0] - p.real) ** 2 + (seg_mid[:, 1] - p.imag) ** 2
            return bool(np.all(d2 >= (1.02 * seg_rad) ** 2))

        def dists_to(z, pts_arr):
            if len(pts_arr) == 0:
                return np.empty(0)
            dx = pts_arr[:, 0] - z.real
            dy = pts_arr[:, 1] - z.imag
            x = (dx * dx + dy * dy) / (2.0 * z.imag * pts_arr[:, 1])
            return np.arcsinh(np.sqrt(x * (x + 2.0)))

        interior = []
        interior_arr = np.empty((0, 2))
        radius = 0.64 * h

        def try_add(z, min_boundary, min_interior):
            nonlocal interior_arr
            if not in_core(z, pad=0.33 * h):
                return False
            if not clear_of_segments(z):
                return False
            if np.any(dists_to(z, boundary) < min_boundary):
                return False
            if np.any(dists_to(z, interior_arr) < min_interior):
                return False
            interior.append(z)
            interior_arr = np.vstack([interior_arr, [z.real, z.imag]])
            return True

        # Every boundary chain is concircular in the chart (equidistant curves
        # and geodesics are circles), so a chord triangle of chain nodes has
        # its circumdisk on the empty outside and survives on 1e-16 tie noise.
        # Two countermeasures: an interior offset row along each segment, and
        # throwaway guard points on the outside that poison chord circumdisks.
        guards = []
        for i in range(nb):
            a = loop_pos[i]
            b = loop_pos[(i + 1) % nb]
            mid = 0.5 * (a + b)
            direction = (b - a) / abs(b - a)
            normal = complex(-direction.imag, direction.real)
            for sgn in (1.0, -1.0):
                cand = mid + sgn * (0.68 * h * mid.imag) * normal
                if cand.imag > 0 and try_add(cand, 0.5 * h, 0.55 * h):
                    break
            # outside the diametral circle of every nearby segment, inside the
            # chord circumdisks (which span the whole outside of the chain)
            for sgn in (1.0, -1.0):
                cand = mid + sgn * (0.62 * h * mid.imag) * normal
                if cand.imag > 0 and not in_core(cand) and clear_of_segments(cand):
                    guards.append(cand)
                    break

        xmin, xmax = boundary[:, 0].min(), boundary[:, 0].max()
        ymin, ymax = boundary[:, 1].min(), boundary[:, 1].max()
        span = max(xmax - xmin, 1e-9)
        xmin, xmax = xmin - 0.05 * span, xmax + 0.05 * span
        inv_lo, inv_hi = 1.0 / (ymax * 1.25), 1.0 / (ymin * 0.8)
        attempts = min(int(60 * math.pi / (h * h)), 200_000)
        for _ in range(attempts):
            u, v = rng.random(2)
            z = complex(xmin + u * (xmax - xmin), 1.0 / (inv_lo + v * (inv_hi - inv_lo)))
            try_add(z, 0.52 * h, radius)

        def triangulate(pts):
            arr = np.array([(p.real, p.imag) for p in pts] +
                           [(g.real, g.imag) for g in guards])
            limit = len(pts)
            kept = []
            for simplex in Delaunay(arr).simplices:
                if simplex.max() >= limit:
                    continue
                a, b, c = (pts[int(k)] for k in simplex)
                if in_core((a + b + c) / 3.0):
                    kept.append(tuple(int(x) for x in simplex))
            return kept

        def chart_min_angle(a, b, c):
            la, lb, lc = abs(b - a), abs(c - b), abs(a - c)
            if min(la, lb, lc) <= 0:
                return 0.0
            best = math.pi
            for p, q, r in ((la, lc, lb), (lb, la, lc), (lc, lb, la)):
                best = min(best, math.acos(max(-1.0, min(1.0, (p * p + q * q - r * r) / (2 * p * q)))))
            return best

        def lloyd_pass(pts, kept):
            nbrs = {}
            for ia, ib, ic in kept:
                for u, v in ((ia, ib), (ib, ic), (ic, ia)):
                    nbrs.setdefault(u, set()).add(v)
                    nbrs.setdefault(v, set()).add(u)
            moved = list(pts)
            for k in range(nb, len(pts)):
                around = nbrs.get(k)
                if not around:
                    continue
                xs = [pts[j].real for j in around]
                lys = [math.log(pts[j].imag) for j in around]
                cand = complex(sum(xs) / len(xs), math.exp(sum(lys) / len(lys)))
                if in_core(cand, pad=0.3 * h) and clear_of_segments(cand):
                    moved[k] = cand
            return moved

        pts = list(loop_pos) + interior
        target = math.radians(27.0)
        kept = triangulate(pts)
        for round_no in range(16):
            pts = lloyd_pass(pts, kept)
            kept = triangulate(pts)
            clearance = max(0.42 - 0.02 * round_no, 0.30)
            all_arr = np.array([(p.real, p.imag) for p in pts])
            inserted = 0
            for ia, ib, ic in kept:
                a, b, c = pts[ia], pts[ib], pts[ic]
                if chart_min_angle(a, b, c) >= target:
                    continue
                cc = _circumcenter(a, b, c)
                if cc is None or cc.imag <= 0:
                    continue
                if not in_core(cc, pad=0.3 * h) or not clear_of_segments(cc):
                    continue
                if np.any(dists_to(cc, all_arr) < clearance * h):
                    continue
                pts.append(cc)
                all_arr = np.vstack([all_arr, [cc.real, cc.imag]])
                inserted += 1
            if inserted == 0 and round_no >= 3:
                break
            if inserted:
                kept = triangulate(pts)
        # drop stray interior points crowding the fixed boundary nodes
        crowded = {
            k for k in range(nb, len(pts))
            if np.any(dists_to(pts[k], boundary) < 0.40 * h)
        }
        if crowded:
            pts = [p for k, p in enumerate(pts) if k not in crowded]
            kept = triangulate(pts)

        edges_present = set()
        for t in kept:
            for u, v in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
                edges_present.add((u, v) if u < v else (v, u))
        for a in range(nb):
            b = (a + 1) % nb
            if ((a, b) if a < b else (b, a)) not in edges_present:
                raise MeshQualityError(
                    f"core boundary segment {a}-{b} of pants {pants} lost in triangulation"
                )
        return pts, kept

    def _mirror_map(self, pants, loop_ids):
        """Hexagon-B counterpart of every hexagon-A boundary node."""
        mirror = {idx: idx for idx in self.shared_seam_nodes}
        for slot in range(3):
            nodes_a = self._interface_nodes(pants, slot, hexside=0)
            nodes_b = self._interface_nodes(pants, slot, hexside=1)
            half = len(nodes_a) - 1
            for k, (idx_a, _) in enumerate(nodes_a):
                mirror[idx_a] = nodes_b[half - k][0]
        out = []
        for idx in loop_ids:
            if idx not in mirror:
                raise MeshQualityError(f"no mirror counterpart for boundary node {idx}")
            out.append(mirror[idx])
        return out

    def _instantiate_cores(self, pants, loop_ids, pts, kept):
        nb = len(loop_ids)
        a_ids = list(loop_ids)
        b_ids = self._mirror_map(pants, loop_ids)
        for k in range(nb, len(pts)):
            a_ids.append(self._new_vertex(self._tag_for_chart_point(pants, 0, pts[k])))
            b_ids.append(self._new_vertex(self._tag_for_chart_point(pants, 1, pts[k])))

        for ia, ib, ic in kept:
            a, b, c = pts[ia], pts[ib], pts[ic]
            cross = (b - a).real * (c - a).imag - (b - a).imag * (c - a).real
            if cross < 0:
                ia, ic = ic, ia
                a, c = c, a
            la, lb, lc = dist_h(a, b), dist_h(b, c), dist_h(c, a)
            self._add_triangle(a_ids[ia], a_ids[ib], a_ids[ic], (la, lb, lc))
            self._add_triangle(b_ids[ic], b_ids[ib], b_ids[ia], (lb, la, lc))

    # -- main ------------------------------------------------------------------------

    def build(self) -> HyperbolicMesh:
        widths, grid = self._solve_grid_widths()
        for gi, gl in enumerate(self.graph.gluings):
            self.cuffs[gi] = _CuffInterface(
                gluing=gi, length=gl.length, true_width=widths[gi], grid_width=grid[gi],
            )
        for gi, gl in enumerate(self.graph.gluings):
            if widths[gi] > 0:
                self._build_cylinder(gi, gl.length, grid[gi])
            else:
                self._build_cuff_line(gi, gl.length)
        for p in range(self.graph.num_pants):
            loop_ids, loop_pos = self._core_boundary(p)
            pts, kept = self._mesh_core(p, loop_ids, loop_pos)
            self._instantiate_cores(p, loop_ids, pts, kept)
        return HyperbolicMesh(self.tags, self.tris, self.edge_lengths,
                              model=self.model, h=self.h)


def _circumcenter(a: complex, b: complex, c: complex):
    d = 2.0 * (a.real * (b.imag - c.imag) + b.real * (c.imag - a.imag)
               + c.real * (a.imag - b.imag))
    if abs(d) < 1e-300:
        return None
    aa, bb, cc = abs(a) ** 2, abs(b) ** 2, abs(c) ** 2
    ux = (aa * (b.imag - c.imag) + bb * (c.imag - a.imag) + cc * (a.imag - b.imag)) / d
    uy = (aa * (c.real - b.real) + bb * (a.real - c.real) + cc * (b.real - a.real)) / d
    return complex(ux, uy)


def mesh_surface(model, h: float, seed: int = DEFAULT_SEED) -> HyperbolicMesh:
    """Triangulate an assembled surface at hyperbolic resolution h.

    Deterministic for fixed (model, h, seed).  Collar cylinders are
    structured (rho, t) grids; thick cores are chart triangulations; all
    shared interfaces carry identical vertex sequences on both sides.
    """
    return _MeshBuilder(model, h, seed).build()
