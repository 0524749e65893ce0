"""Flat oracle meshes: unit-square torus and planar annulus.

These carry Euclidean edge lengths in the HyperbolicMesh container, which
is metric-agnostic; they back the FEM and extremal-length oracles with
closed-form spectra/moduli.
"""

import math

from hyplab.meshing import HyperbolicMesh, VertexTag


def flat_torus_mesh(n: int) -> HyperbolicMesh:
    """Unit-square torus on an n x n grid with diagonal splits."""
    def vid(i, j):
        return (i % n) * n + (j % n)

    tags = [VertexTag(region="flat", x=i / n, y=j / n)
            for i in range(n) for j in range(n)]
    s = 1.0 / n
    diag = math.sqrt(2.0) / n
    tris = []
    edges = {}

    def set_edge(u, v, length):
        key = (u, v) if u < v else (v, u)
        edges[key] = length

    for i in range(n):
        for j in range(n):
            v00, v10 = vid(i, j), vid(i + 1, j)
            v01, v11 = vid(i, j + 1), vid(i + 1, j + 1)
            tris.append((v00, v10, v11))
            tris.append((v00, v11, v01))
            set_edge(v00, v10, s)
            set_edge(v00, v01, s)
            set_edge(v00, v11, diag)
            set_edge(v10, v11, s)
            set_edge(v01, v11, s)
    return HyperbolicMesh(tags, tris, edges, model=None, h=s)


def flat_annulus_mesh(r_in: float, r_out: float, n_r: int, n_t: int):
    """Planar annulus on a polar grid; returns (mesh, inner ids, outer ids)."""
    pts = []
    tags = []
    for k in range(n_r + 1):
        r = r_in + (r_out - r_in) * k / n_r
        for i in range(n_t):
            th = 2.0 * math.pi * i / n_t
            pts.append(complex(r * math.cos(th), r * math.sin(th)))
            tags.append(VertexTag(region="flat", x=pts[-1].real, y=pts[-1].imag))

    def vid(k, i):
        return k * n_t + (i % n_t)

    tris = []
    edges = {}

    def set_edge(u, v):
        key = (u, v) if u < v else (v, u)
        edges[key] = abs(pts[u] - pts[v])

    for k in range(n_r):
        for i in range(n_t):
            a, b = vid(k, i), vid(k, i + 1)
            c, d = vid(k + 1, i), vid(k + 1, i + 1)
            tris.append((a, c, d))
            tris.append((a, d, b))
            set_edge(a, c)
            set_edge(c, d)
            set_edge(a, d)
            set_edge(d, b)
            set_edge(a, b)
    mesh = HyperbolicMesh(tags, tris, edges, model=None, h=(r_out - r_in) / n_r)
    inner = list(range(n_t))
    outer = list(range(n_r * n_t, (n_r + 1) * n_t))
    return mesh, inner, outer


def rect_patch_mesh(nx: int, ny: int, lx: float = 1.0, ly: float = 1.0):
    """Flat rectangle patch (with boundary), for assembler unit oracles."""
    pts = []
    tags = []
    for i in range(nx + 1):
        for j in range(ny + 1):
            pts.append(complex(lx * i / nx, ly * j / ny))
            tags.append(VertexTag(region="flat", x=pts[-1].real, y=pts[-1].imag))

    def vid(i, j):
        return i * (ny + 1) + j

    tris = []
    edges = {}

    def set_edge(u, v):
        key = (u, v) if u < v else (v, u)
        edges[key] = abs(pts[u] - pts[v])

    for i in range(nx):
        for j in range(ny):
            a, b, c, d = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
            tris.append((a, b, c))
            tris.append((a, c, d))
            for u, v in ((a, b), (b, c), (a, c), (c, d), (a, d)):
                set_edge(u, v)
    mesh = HyperbolicMesh(tags, tris, edges, model=None, h=max(lx / nx, ly / ny))
    return mesh, pts
