import math

import numpy as np
import pytest

from hyplab.errors import GraphConnectivityError, GraphSettingError, HyplabError
from hyplab.graphs import (
    WeightedGraph,
    check_discrete_bounds,
    clique_ring,
    complete_graph,
    cycle_graph,
    effective_resistance,
    lazy_walk_spectrum,
    parse_edge_list,
    pants_network,
    resistance_path_bound,
)
from hyplab.pants import sharpness_family, two_pants_surface


class TestLazySpectrum:
    def test_cycle_closed_form(self):
        for n in (5, 8, 16, 33):
            lam = lazy_walk_spectrum(cycle_graph(n))
            want = np.sort([(1 - math.cos(2 * math.pi * j / n)) / 2 for j in range(n)])
            assert np.allclose(lam, want, atol=1e-9)

    def test_complete_closed_form(self):
        for n in (4, 7, 12):
            lam = lazy_walk_spectrum(complete_graph(n))
            assert lam[0] == pytest.approx(0.0, abs=1e-12)
            assert np.allclose(lam[1:], n / (2.0 * (n - 1)), atol=1e-9)

    def test_zero_mode_always(self):
        lam = lazy_walk_spectrum(clique_ring(4, 5))
        assert abs(lam[0]) < 1e-12
        assert lam[1] > 1e-8

    def test_rejects_weighted_or_irregular(self):
        with pytest.raises(GraphSettingError):
            lazy_walk_spectrum(WeightedGraph(3, [(0, 1, 2.0), (1, 2, 1.0), (0, 2, 1.0)]))
        star = WeightedGraph(4, [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)])
        with pytest.raises(GraphSettingError):
            lazy_walk_spectrum(star)


class TestDiscreteBounds:
    def test_trace_identity_exact_c16(self):
        report = check_discrete_bounds(cycle_graph(16), t_max=100)
        assert report.trace_identity_residual <= 1e-12

    def test_cycle_band_stability(self):
        # the bottleneck-band statistic min_{k<=n/2} lambda_k n^2/k^2 is
        # constant (=2 exactly on even cycles); c0 fixed at n=8
        c0 = check_discrete_bounds(cycle_graph(8), t_max=10).eigenvalue_ratio_min_low_band
        assert c0 == pytest.approx(2.0, rel=1e-12)
        for n in (16, 32, 64, 128, 256, 512):
            r = check_discrete_bounds(cycle_graph(n), t_max=10)
            assert abs(r.eigenvalue_ratio_min_low_band / c0 - 1.0) <= 0.10
            # the full-range minimum drifts toward 1 at the spectral top and
            # is reported, not asserted stable
            assert r.eigenvalue_ratio_min > 0.99

    def test_heat_statistic_bounded(self):
        r = check_discrete_bounds(clique_ring(5, 6), t_max=10_000)
        assert r.trace_identity_residual <= 1e-10
        assert r.heat_constant < 5.0

    def test_t_max_validation(self):
        with pytest.raises(GraphSettingError):
            check_discrete_bounds(cycle_graph(8), t_max=0)


class TestPantsNetwork:
    def test_two_pants_parallel_law(self):
        g = pants_network(two_pants_surface(1.0, 1.0, 1.0))
        assert g.n == 2
        assert g.edges == [(0, 1, 3.0)]

    def test_conductance_multiset_before_merge(self):
        graph = sharpness_family(3, 0.25)
        lengths = sorted(gl.length for gl in graph.gluings)
        assert lengths == sorted([0.25] * 3 + [1.0] * 6)

    def test_sharpness_reduction_hand_oracle(self):
        # n=3: alternating cycle P0-P1 (two unit cuffs -> 2), P1-P2 (eps), ...
        net = pants_network(sharpness_family(3, 0.25))
        assert net.n == 6
        merged = {(u, v): c for u, v, c in net.edges}
        assert merged[(0, 1)] == pytest.approx(2.0)
        assert merged[(2, 3)] == pytest.approx(2.0)
        assert merged[(4, 5)] == pytest.approx(2.0)
        assert merged[(1, 2)] == pytest.approx(0.25)
        assert merged[(3, 4)] == pytest.approx(0.25)
        assert merged[(0, 5)] == pytest.approx(0.25)


class TestEffectiveResistance:
    def test_single_edge(self):
        g = WeightedGraph(2, [(0, 1, 4.0)])
        assert effective_resistance(g, 0, 1) == pytest.approx(0.25, rel=1e-12)
        assert effective_resistance(g, 0, 0) == 0.0

    def test_parallel_law(self):
        g = WeightedGraph(2, [(0, 1, 1.5), (0, 1, 2.5)])
        assert effective_resistance(g, 0, 1) == pytest.approx(0.25, rel=1e-12)

    def test_path_bound_sweep(self, rng):
        for trial in range(10):
            n = 12
            edges = [(i, i + 1, 0.5 + rng.random()) for i in range(n - 1)]
            for _ in range(14):
                u, v = rng.integers(0, n, 2)
                if u != v:
                    edges.append((int(min(u, v)), int(max(u, v)), 0.5 + rng.random()))
            g = WeightedGraph(n, edges)
            for _ in range(10):
                u, v = rng.integers(0, n, 2)
                if u == v:
                    continue
                reff = effective_resistance(g, int(u), int(v))
                bound = resistance_path_bound(g, int(u), int(v))
                assert reff <= bound + 1e-10
                assert reff == pytest.approx(
                    effective_resistance(g, int(v), int(u)), rel=1e-10)

    def test_rayleigh_monotonicity(self, rng):
        n = 10
        edges = [(i, (i + 1) % n, 1.0 + rng.random()) for i in range(n)]
        edges += [(0, 5, 2.0), (2, 7, 1.3), (3, 8, 0.7)]
        g = WeightedGraph(n, edges)
        base = effective_resistance(g, 1, 6)
        # deleting any single non-bridge edge never decreases the resistance
        for drop in range(len(edges)):
            sub = edges[:drop] + edges[drop + 1:]
            try:
                g2 = WeightedGraph(n, sub)
            except GraphConnectivityError:
                continue
            assert effective_resistance(g2, 1, 6) >= base - 1e-10


class TestEdgeListIO:
    def test_parse_roundtrip(self):
        g = parse_edge_list("0 1 2.5\n1 2\n# comment\n2 0 0.5 # inline\n")
        assert g.n == 3
        assert g.edges == [(0, 1, 2.5), (1, 2, 1.0), (2, 0, 0.5)]

    def test_parse_errors(self):
        with pytest.raises(HyplabError):
            parse_edge_list("0 1 2.5 extra junk\n")
        with pytest.raises(HyplabError):
            parse_edge_list("0 one\n")

    def test_connectivity_required(self):
        with pytest.raises(GraphConnectivityError):
            WeightedGraph(4, [(0, 1, 1.0), (2, 3, 1.0)])
