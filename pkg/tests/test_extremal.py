import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.sparse import csr_matrix

from hyplab.collar import THICK_INJ, half_width_formula, inj_in_collar
from hyplab.errors import DegeneratePairError
from hyplab.extremal import (
    DiscPair,
    discrete_extremal_length,
    make_disc_pair,
    sample_disc_pairs,
    surface_distances_from,
    verify_thm14,
    weight_graph,
    weighted_distance,
    weighted_distances_from,
)
from hyplab.lab import compute_surface
from hyplab.pants import sharpness_family
from hyplab.spectral import FemSystem, assemble_fem

from fixtures_flat import flat_annulus_mesh

ANNULUS_MODULUS = math.log(2.0) / (2.0 * math.pi)


@pytest.fixture(scope="module")
def annulus():
    return flat_annulus_mesh(1.0, 2.0, 24, 96)


@pytest.fixture(scope="module")
def sharp_run():
    return compute_surface("sharp-2-0.05", sharpness_family(2, 0.05), 0.1, k=8)


class TestExtremalLength:
    def test_annulus_oracle(self, annulus):
        mesh, inner, outer = annulus
        pair = DiscPair(x=inner[0], y=outer[0], r_x=1.0, r_y=1.0,
                        boundary_x=inner, boundary_y=outer)
        el = discrete_extremal_length(mesh, pair)
        assert el == pytest.approx(ANNULUS_MODULUS, rel=0.05)

    def test_swap_symmetry(self, annulus):
        mesh, inner, outer = annulus
        p1 = DiscPair(x=inner[0], y=outer[0], r_x=1.0, r_y=1.0,
                      boundary_x=inner, boundary_y=outer)
        p2 = DiscPair(x=outer[0], y=inner[0], r_x=1.0, r_y=1.0,
                      boundary_x=outer, boundary_y=inner)
        assert discrete_extremal_length(mesh, p1) == pytest.approx(
            discrete_extremal_length(mesh, p2), rel=1e-12)

    def test_ring_modulus_additivity(self):
        # widening the annulus from [1,2] to [0.5,2] adds log(2)/(2 pi)
        mesh, inner, outer = flat_annulus_mesh(0.5, 2.0, 36, 96)
        n_t = 96
        mid_ring = [12 * n_t + i for i in range(n_t)]  # radius 1.0
        el_half = discrete_extremal_length(
            mesh, DiscPair(x=inner[0], y=outer[0], r_x=1, r_y=1,
                           boundary_x=inner, boundary_y=outer))
        el_unit = discrete_extremal_length(
            mesh, DiscPair(x=mid_ring[0], y=outer[0], r_x=1, r_y=1,
                           boundary_x=mid_ring, boundary_y=outer))
        assert el_half - el_unit == pytest.approx(ANNULUS_MODULUS, rel=0.30)

    def test_conductance_rescale_consistency(self, annulus):
        mesh, inner, outer = annulus
        pair = DiscPair(x=inner[0], y=outer[0], r_x=1.0, r_y=1.0,
                        boundary_x=inner, boundary_y=outer)
        fem = assemble_fem(mesh)
        el = discrete_extremal_length(mesh, pair, fem=fem)
        scaled = FemSystem(stiffness=csr_matrix(fem.stiffness * 2.5), mass=fem.mass)
        assert discrete_extremal_length(mesh, pair, fem=scaled) == pytest.approx(
            el / 2.5, rel=1e-9)

    def test_monotone_under_disc_enlargement(self, sharp_run):
        mesh = sharp_run.mesh
        fem = sharp_run.fem
        iota = mesh.trunc_inj_vertices()
        x, y = 10, mesh.num_vertices - 10
        d = surface_distances_from(mesh, x)
        if d[y] < 2.0:
            y = int(np.argmax(d))
        small = make_disc_pair(mesh, x, y, 0.25 * iota[x], 0.25 * iota[y])
        large = make_disc_pair(mesh, x, y, 0.5 * iota[x], 0.5 * iota[y])
        el_small = discrete_extremal_length(mesh, small, fem=fem)
        el_large = discrete_extremal_length(mesh, large, fem=fem)
        assert el_large <= el_small + 1e-12

    def test_touching_boundaries_rejected(self, annulus):
        mesh, inner, outer = annulus
        with pytest.raises(DegeneratePairError):
            DiscPair(x=inner[0], y=inner[1], r_x=0.1, r_y=0.1,
                     boundary_x=inner, boundary_y=inner)


class TestWeightedDistance:
    def test_zero_at_same_vertex(self, sharp_run):
        assert weighted_distance(sharp_run.mesh, 7, 7) == 0.0

    def test_thick_surface_scaling(self, thick_run):
        # all-thick surface: d_w is the plain distance divided by asinh(1)
        mesh = thick_run.mesh
        d_plain = surface_distances_from(mesh, 0)
        d_w = weighted_distances_from(mesh, 0)
        ratio = d_w[1:] / d_plain[1:]
        assert np.allclose(ratio, 1.0 / THICK_INJ, rtol=1e-9)

    def test_triangle_inequality_exact(self, sharp_run):
        mesh = sharp_run.mesh
        g = weight_graph(mesh)
        d0 = weighted_distances_from(mesh, 0, g)
        d5 = weighted_distances_from(mesh, 5, g)
        assert np.all(d0 <= d0[5] + d5 + 1e-9)

    def test_collar_crossing_cost_oracle(self, sharp_run):
        # crossing an eps-collar costs about the quadrature of 1/iota along
        # the radial fiber; Dijkstra agrees within a factor 4
        mesh = sharp_run.mesh
        model = sharp_run.model
        eps = 0.05
        w = half_width_formula(eps)
        crossing, _ = quad(
            lambda rho: 1.0 / min(1.0, inj_in_collar(rho, eps)), -w, w, limit=200)
        # endpoints: thick vertices in the two blocks adjacent to cycle cuff 4
        gi = 4
        side_a = model.graph.gluings[gi].a[0]
        side_b = model.graph.gluings[gi].b[0]
        va = next(i for i, t in enumerate(mesh.tags)
                  if t.region == "thick" and t.pants == side_a)
        vb = next(i for i, t in enumerate(mesh.tags)
                  if t.region == "thick" and t.pants == side_b)
        d_w = weighted_distance(mesh, va, vb)
        assert crossing / 4.0 <= d_w <= crossing * 4.0

    def test_disconnected_mesh_unreachable(self):
        from hyplab.errors import UnreachableError
        from hyplab.meshing import HyperbolicMesh
        m1, m2 = flat_annulus_mesh(1, 2, 3, 8)[0], flat_annulus_mesh(1, 2, 3, 8)[0]
        shift = m1.num_vertices
        tags = m1.tags + m2.tags
        tris = list(map(tuple, m1.tris)) + [
            (a + shift, b + shift, c + shift) for a, b, c in m2.tris]
        edges = dict(m1.edge_lengths)
        edges.update({(u + shift, v + shift): l
                      for (u, v), l in m2.edge_lengths.items()})
        broken = HyperbolicMesh(tags, tris, edges)
        with pytest.raises(UnreachableError):
            weighted_distance(broken, 0, shift + 1)

    def test_never_beats_explicit_path_weight(self, sharp_run):
        # Dijkstra result is a minimum: any explicit edge path costs >= d_w
        mesh = sharp_run.mesh
        g = weight_graph(mesh).tocsr()
        d = weighted_distances_from(mesh, 3, g)
        rng = np.random.default_rng(5)
        v = 3
        cost = 0.0
        for _ in range(60):
            row = g[v]
            nxt = int(rng.choice(row.indices))
            cost += float(row[0, nxt])
            v = nxt
            assert d[v] <= cost + 1e-9


class TestCrossModuleConsistency:
    def test_network_distance_tracks_mesh_weighted_distance(self, sweep_runs):
        # the pants conductance network is a rough analogue: its weighted
        # distance between antipodal blocks matches the mesh d_w up to a
        # bounded fitted factor
        from hyplab.graphs import pants_network, resistance_path_bound
        run = next(r for r in sweep_runs if r.name == "sharp-n6-eps0.05")
        net = pants_network(run.model.graph)
        graph_dist = resistance_path_bound(net, 0, 6)  # antipodal pants
        mesh = run.mesh
        va = next(i for i, t in enumerate(mesh.tags)
                  if t.region == "thick" and t.pants == 0)
        vb = next(i for i, t in enumerate(mesh.tags)
                  if t.region == "thick" and t.pants == 6)
        mesh_dist = weighted_distance(mesh, va, vb)
        assert 0.5 <= mesh_dist / graph_dist <= 10.0


class TestThm14:
    def test_sampling_and_log_terms(self, sharp_run):
        rows, summary = verify_thm14(sharp_run.model, sharp_run.mesh, 10,
                                     fem=sharp_run.fem)
        assert len(rows) == 10
        iota = sharp_run.mesh.trunc_inj_vertices()
        for row in rows:
            want = row["d_w"] + 2.0 * math.log(2.0)
            assert row["bound"] == pytest.approx(want, rel=1e-9)
            assert row["ratio"] == row["EL"] / row["bound"]
            assert row["r_x"] == pytest.approx(0.5 * iota[row["x_id"]])
        assert summary["max_ratio"] == max(r["ratio"] for r in rows)
        assert "grounded" in summary["interpretation"]

    def test_pairs_respect_preconditions(self, sharp_run):
        pairs = sample_disc_pairs(sharp_run.mesh, 8)
        d_cache = {}
        iota = sharp_run.mesh.trunc_inj_vertices()
        for p in pairs:
            assert p.r_x <= 0.5 * iota[p.x] + 1e-12
            assert p.r_y <= 0.5 * iota[p.y] + 1e-12
            if p.x not in d_cache:
                d_cache[p.x] = surface_distances_from(sharp_run.mesh, p.x)
            assert d_cache[p.x][p.y] >= p.r_x + p.r_y - 1e-12
            assert not (set(p.boundary_x) & set(p.boundary_y))
