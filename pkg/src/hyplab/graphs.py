"""Exact discrete analogue: lazy-walk spectra, heat-trace bounds on graphs,
pants conductance networks, and effective resistance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra

from .errors import GraphConnectivityError, GraphSettingError, HyplabError


@dataclass
class WeightedGraph:
    """Finite connected graph with positive edge conductances."""

    n: int
    edges: list  # (u, v, conductance)
    regular_degree: int | None = None

    def __post_init__(self):
        for u, v, c in self.edges:
            if u == v:
                raise HyplabError(f"self-loop at vertex {u}", code="graphana.self_loop")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise HyplabError(f"edge ({u},{v}) out of range", code="graphana.vertex_range")
            if not c > 0:
                raise HyplabError(f"conductance {c} must be positive", code="graphana.conductance")
        if self.n > 0 and connected_components(self.adjacency(), directed=False)[0] != 1:
            raise GraphConnectivityError("graph is not connected")

    def adjacency(self) -> csr_matrix:
        if not self.edges:
            return csr_matrix((self.n, self.n))
        u, v, c = zip(*self.edges)
        rows = np.concatenate([u, v])
        cols = np.concatenate([v, u])
        vals = np.concatenate([c, c]).astype(float)
        return csr_matrix((vals, (rows, cols)), shape=(self.n, self.n))

    def degrees(self) -> np.ndarray:
        return np.asarray(self.adjacency().sum(axis=1)).ravel()

    def laplacian(self) -> np.ndarray:
        a = self.adjacency().toarray()
        return np.diag(a.sum(axis=1)) - a

    def is_unweighted_regular(self) -> bool:
        if any(c != 1.0 for _, _, c in self.edges):
            return False
        deg = self.degrees()
        return bool(np.all(deg == deg[0]))


def cycle_graph(n: int) -> WeightedGraph:
    edges = [(i, (i + 1) % n, 1.0) for i in range(n)]
    return WeightedGraph(n=n, edges=edges, regular_degree=2)


def complete_graph(n: int) -> WeightedGraph:
    edges = [(i, j, 1.0) for i in range(n) for j in range(i + 1, n)]
    return WeightedGraph(n=n, edges=edges, regular_degree=n - 1)


def clique_ring(num_cliques: int, clique_size: int) -> WeightedGraph:
    """Regular bottleneck graph: cliques in a cycle joined by single bridges.

    Each clique drops the internal edge between its two bridge endpoints,
    which keeps every vertex at degree clique_size - 1.
    """
    if num_cliques < 3 or clique_size < 3:
        raise GraphSettingError("clique_ring needs at least 3 cliques of size >= 3")
    s = clique_size
    edges = []
    for q in range(num_cliques):
        base = q * s
        # bridge endpoints are base (to previous clique) and base+s-1 (to next)
        for i in range(s):
            for j in range(i + 1, s):
                if i == 0 and j == s - 1:
                    continue
                edges.append((base + i, base + j, 1.0))
        nxt = ((q + 1) % num_cliques) * s
        edges.append((base + s - 1, nxt, 1.0))
    return WeightedGraph(n=num_cliques * s, edges=edges, regular_degree=s - 1)


def lazy_transition_matrix(g: WeightedGraph) -> np.ndarray:
    if not g.is_unweighted_regular():
        raise GraphSettingError(
            "lazy-walk spectrum requires a regular unweighted graph; "
            "use effective_resistance for weighted graphs"
        )
    d = g.degrees()[0]
    a = g.adjacency().toarray()
    return 0.5 * np.eye(g.n) + a / (2.0 * d)


def lazy_walk_spectrum(g: WeightedGraph) -> np.ndarray:
    """Ascending eigenvalues of L = I - P for the lazy random walk."""
    p = lazy_transition_matrix(g)
    evals = np.linalg.eigvalsh(np.eye(g.n) - p)
    evals.sort()
    return evals


@dataclass
class DiscreteBoundsReport:
    n: int
    trace_identity_residual: float
    eigenvalue_ratio_min: float          # min over all k >= 1 of lam_k n^2 / k^2
    eigenvalue_ratio_min_low_band: float  # same, restricted to k <= n/2
    heat_constant: float                 # max over t <= t_max of sqrt(t) * S(t)
    t_max: int
    spectrum: np.ndarray = field(repr=False, default=None)


def check_discrete_bounds(g: WeightedGraph, t_max: int) -> DiscreteBoundsReport:
    """Verify the lazy-walk trace identity and measure the bound constants.

    Reports (a) the residual between sum_x P^t(x,x) and sum_i (1-lam_i)^t
    over direct matrix powers, (b) the minimum of lam_k n^2/k^2 (full range
    and the bottleneck band k <= n/2), and (c) the largest sqrt(t)-normalized
    heat statistic up to t_max.
    """
    if t_max < 1:
        raise GraphSettingError("t_max must be >= 1")
    lam = lazy_walk_spectrum(g)
    n = g.n
    p = lazy_transition_matrix(g)

    resid = 0.0
    power = np.eye(n)
    for _ in range(1, min(t_max, 32) + 1):
        power = power @ p
        direct = float(np.trace(power))
        spectral = float(np.sum((1.0 - lam) ** _))
        resid = max(resid, abs(direct - spectral))

    ks = np.arange(1, n)
    ratios = lam[1:] * n * n / ks ** 2
    low = ks <= n // 2
    ratio_min = float(ratios.min())
    ratio_min_low = float(ratios[low].min()) if low.any() else ratio_min

    ts = np.arange(1, t_max + 1, dtype=float)
    decay = (1.0 - lam[1:])[None, :] ** ts[:, None]
    stat = np.abs(decay.sum(axis=1)) / n
    heat_constant = float(np.max(np.sqrt(ts) * stat))

    return DiscreteBoundsReport(
        n=n,
        trace_identity_residual=resid,
        eigenvalue_ratio_min=ratio_min,
        eigenvalue_ratio_min_low_band=ratio_min_low,
        heat_constant=heat_constant,
        t_max=t_max,
        spectrum=lam,
    )


def pants_network(graph) -> WeightedGraph:
    """Conductance network of a pants decomposition.

    Pants are vertices; each gluing contributes conductance equal to its
    cuff length; parallel cuffs between the same pair merge by the parallel
    law.  Cuffs gluing a pants to itself would be self-loops and carry no
    current, so they are dropped.
    """
    merged: dict = {}
    for gl in graph.gluings:
        u, v = gl.a[0], gl.b[0]
        if u == v:
            continue
        key = (min(u, v), max(u, v))
        merged[key] = merged.get(key, 0.0) + gl.length
    edges = [(u, v, c) for (u, v), c in sorted(merged.items())]
    return WeightedGraph(n=graph.num_pants, edges=edges, regular_degree=None)


def effective_resistance(g: WeightedGraph, u: int, v: int) -> float:
    """Effective resistance between u and v via one grounded Laplacian solve."""
    if u == v:
        return 0.0
    lap = g.laplacian()
    ground = v
    keep = [i for i in range(g.n) if i != ground]
    rhs = np.zeros(g.n)
    rhs[u] = 1.0
    rhs[v] = -1.0
    sol = np.linalg.solve(lap[np.ix_(keep, keep)], rhs[keep])
    x = np.zeros(g.n)
    x[keep] = sol
    return float(x[u] - x[v])


def resistance_path_bound(g: WeightedGraph, u: int, v: int) -> float:
    """Minimum over u-v paths of the summed edge resistances 1/c_e."""
    rows = [e[0] for e in g.edges] + [e[1] for e in g.edges]
    cols = [e[1] for e in g.edges] + [e[0] for e in g.edges]
    vals = [1.0 / e[2] for e in g.edges] * 2
    m = csr_matrix((vals, (rows, cols)), shape=(g.n, g.n))
    d = dijkstra(m, directed=False, indices=[u])[0, v]
    if math.isinf(d):
        raise GraphConnectivityError(f"no path between {u} and {v}")
    return float(d)


def parse_edge_list(text: str) -> WeightedGraph:
    """Parse the plain-text edge format: one `u v [conductance]` per line."""
    edges = []
    vmax = -1
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise HyplabError(f"line {ln}: expected 'u v [c]', got {raw!r}",
                              code="graphana.parse")
        try:
            u, v = int(parts[0]), int(parts[1])
            c = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError as exc:
            raise HyplabError(f"line {ln}: malformed numeric field in {raw!r}",
                              code="graphana.parse") from exc
        edges.append((u, v, c))
        vmax = max(vmax, u, v)
    return WeightedGraph(n=vmax + 1, edges=edges)
