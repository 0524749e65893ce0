"""Cycle-family test functions, discrete minimax bounds, and the
eigenvalue/heat-trace verification sweeps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CoverageError, ProfileError, ReportError
from .spectral import FemSystem, heat_trace_stat


def sharpness_layout(graph):
    """(n, epsilon) of a cycle-family pants graph; raises if not one."""
    n2 = graph.num_pants
    if n2 % 2 or n2 < 4 or len(graph.gluings) != 3 * (n2 // 2):
        raise ProfileError("graph is not a sharpness-family layout")
    n = n2 // 2
    eps = graph.gluings[2 * n].length
    for i in range(n):
        a, b = graph.gluings[2 * i], graph.gluings[2 * i + 1]
        if a.length != 1.0 or b.length != 1.0:
            raise ProfileError("unit cuffs not in expected positions")
        e = graph.gluings[2 * n + i]
        if e.length != eps:
            raise ProfileError("cycle cuffs have inconsistent lengths")
    return n, eps


def _vertex_block_info(model, mesh, n):
    """Per vertex: (kind, data); kind 'block' -> block index, kind 'layer'
    -> (negative-side block, positive-side block, rho) for cycle-cuff collars."""
    graph = model.graph
    info = []
    for tag in mesh.tags:
        if tag.region == "collar" and tag.cuff >= 2 * n:
            i = tag.cuff - 2 * n
            block_pos = graph.gluings[tag.cuff].a[0] // 2
            block_neg = graph.gluings[tag.cuff].b[0] // 2
            info.append(("layer", (block_neg, block_pos, tag.rho)))
        elif tag.region == "collar":
            info.append(("block", graph.gluings[tag.cuff].a[0] // 2))
        else:
            info.append(("block", tag.pants // 2))
    return info


@dataclass
class TestFunctionProfile:
    """Disjointly supported plateau functions on the block cycle."""

    k: int
    supports: list                      # list of block-index lists
    values: np.ndarray = field(repr=False)  # (num_vertices, k)
    plateau: list = field(default_factory=list)

    def rayleigh_quotients(self, system: FemSystem) -> np.ndarray:
        out = np.empty(self.k)
        for j in range(self.k):
            f = self.values[:, j]
            norm2 = system.mass_norm_sq(f)
            if norm2 <= 0:
                raise ProfileError(f"test function {j} has zero mass norm")
            out[j] = system.energy(f) / norm2
        return out


def build_test_functions(model, mesh, k: int) -> TestFunctionProfile:
    """k disjointly supported piecewise-linear functions, each living on
    floor(n/k) consecutive blocks of the cycle.

    Plateau heights step by 1/(m+1) per block toward the middle and the
    profile interpolates linearly in the signed collar coordinate across
    the width-2 layer around each cycle cuff; at the two outer cuffs of a
    support the values reach exactly 0 on the cuff circle, so supports of
    abutting functions stay disjoint.  The even-block case uses the
    symmetric trapezoid with two equal middle plateaus (interpretation of
    the construction, flagged in reports).
    """
    n, eps = sharpness_layout(model.graph)
    if not 1 <= k <= n:
        raise ProfileError(f"need 1 <= k <= n={n}, got {k}")
    if eps > 1.0:
        raise ProfileError("cycle cuffs too long for a width-2 interpolation layer")
    blocks = _vertex_block_info(model, mesh, n)
    width = n // k
    m = (width - 1) // 2 if width % 2 else width // 2
    plateau = [min(j + 1, width - j) / (m + 1) for j in range(width)]

    values = np.zeros((mesh.num_vertices, k))
    supports = []
    for fi in range(k):
        start = (fi * n) // k
        support = [(start + j) % n for j in range(width)]
        supports.append(support)
        pmap = {b: plateau[j] for j, b in enumerate(support)}
        col = values[:, fi]
        for v, (kind, data) in enumerate(blocks):
            if kind == "block":
                col[v] = pmap.get(data, 0.0)
            else:
                bn, bp, rho = data
                vl, vr = pmap.get(bn), pmap.get(bp)
                if vl is None and vr is None:
                    continue
                if vl is not None and vr is not None:
                    s = 0.5 * (min(max(rho, -1.0), 1.0) + 1.0)
                    col[v] = vl + (vr - vl) * s
                elif vl is not None:
                    col[v] = vl * min(max(-rho, 0.0), 1.0)
                else:
                    col[v] = vr * min(max(rho, 0.0), 1.0)
    return TestFunctionProfile(k=k, supports=supports, values=values, plateau=plateau)


def minimax_upper_bounds(profile: TestFunctionProfile, system: FemSystem) -> np.ndarray:
    """Certified eigenvalue bounds from the profile's Rayleigh quotients.

    With p disjointly supported functions the span of the j+1 smallest
    Rayleigh quotients is a (j+1)-dimensional subspace on which the
    quotient never exceeds their maximum, so (0-indexed) bounds[j] >=
    lambda_j exactly on the discrete system, for j = 0..p-1.  Bounding
    lambda_k therefore takes a profile with k+1 functions.
    """
    quotients = profile.rayleigh_quotients(system)
    return np.sort(quotients)


def cross_energy_max(profile: TestFunctionProfile, system: FemSystem) -> float:
    """Largest |f_i^T K f_j| over i != j (must vanish for disjoint supports)."""
    worst = 0.0
    for i in range(profile.k):
        ki = system.stiffness @ profile.values[:, i]
        for j in range(i + 1, profile.k):
            worst = max(worst, abs(float(ki @ profile.values[:, j])))
    return worst


def kernel_concentration(run) -> dict:
    """Qualitative localization report for the cycle family (not asserted).

    Compares the diagonal spectral kernel at the top of the small band
    between cycle-cuff cores and thick block interiors; the small
    eigenfunctions should live in the blocks, not in the narrow collars.
    """
    from .spectral import spectral_kernel

    n, _ = sharpness_layout(run.model.graph)
    lam_n = float(run.spectrum.eigenvalues[n])
    mu = spectral_kernel(run.spectrum, lam_n)
    core_max = 0.0
    thick_max = 0.0
    for i, tag in enumerate(run.mesh.tags):
        if tag.region == "collar" and tag.cuff >= 2 * n and abs(tag.rho) < 0.2:
            core_max = max(core_max, float(mu[i]))
        elif tag.region == "thick":
            thick_max = max(thick_max, float(mu[i]))
    return {"lambda_n": lam_n, "collar_core_max_mu": core_max,
            "thick_block_max_mu": thick_max,
            "localized_in_blocks": bool(core_max < thick_max)}


# ---------------------------------------------------------------------------
# sweep verification


def verify_thm11(runs, k_cap: int = None):
    """Eigenvalue lower-bound report over computed surfaces.

    Each row: (surface, k, lambda_k, I, g, ratio = lambda_k I g^2 / k^2).
    The summary carries per-surface minima, the global minimum, and the
    spread of the minima across the sharpness-family members (the window in
    which the k^2 eps/g^2 scaling is sandwiched; thick surfaces sit far
    above it by nature and are reported unwindowed).
    """
    rows = []
    per_surface_min = {}
    for run in runs:
        g = run.model.genus
        lam = run.spectrum.eigenvalues
        kmax = min(2 * g - 3, run.spectrum.count - 1)
        if k_cap is not None:
            kmax = min(kmax, k_cap)
        if kmax < 1:
            raise CoverageError(f"{run.name}: no k in range (genus {g})")
        best = math.inf
        for k in range(1, kmax + 1):
            ratio = lam[k] * run.I_geo * g * g / (k * k)
            rows.append({
                "surface": run.name, "k": k, "lambda_k": float(lam[k]),
                "I": run.I_geo, "g": g, "ratio": float(ratio),
            })
            best = min(best, ratio)
        per_surface_min[run.name] = float(best)
    sharp_mins = [per_surface_min[r.name] for r in runs if r.is_sharpness]
    summary = {
        "per_surface_min": per_surface_min,
        "min_ratio": min(per_surface_min.values()),
        "sharpness_window_spread": (max(sharp_mins) / min(sharp_mins)) if sharp_mins else None,
    }
    return rows, summary


def verify_thm12(runs, t_grid):
    """Heat-trace report: fitted upper constant on every surface and the
    reverse-inequality lower constant on sharpness-family surfaces.

    C = max over the grid of stat(t) sqrt(t/I); on cycle surfaces c' is the
    minimum over grid points in the pre-relaxation window t <= g^2/(eps n).
    A truncation-unsafe heat trace raises a remainder error.
    """
    t_grid = sorted(t_grid)
    if not t_grid or t_grid[0] < 1.0:
        raise ReportError("t grid must lie in [1, inf)")
    rows = []
    summary = {"per_surface": {}}
    for run in runs:
        vol = run.model.volume
        k_cut = run.spectrum.count - 1
        c_fit = 0.0
        c_rev = math.inf
        window = math.inf
        if run.is_sharpness:
            n, eps = sharpness_layout(run.model.graph)
            window = run.model.genus ** 2 / (eps * n)
        for t in t_grid:
            stat, flagged = heat_trace_stat(run.spectrum, vol, t, k_cut)
            if flagged:
                raise ReportError(
                    f"{run.name}: heat trace truncation unsafe at t={t} "
                    f"(resolve more eigenpairs)"
                )
            scaled = stat * math.sqrt(t / run.I_geo)
            rows.append({"surface": run.name, "t": t, "stat": stat,
                         "scaled": scaled})
            c_fit = max(c_fit, scaled)
            if run.is_sharpness and t <= window:
                c_rev = min(c_rev, scaled)
        entry = {"C": c_fit}
        if run.is_sharpness and math.isfinite(c_rev):
            entry["c_lower"] = c_rev
            entry["window_t_max"] = window
        summary["per_surface"][run.name] = entry
    uppers = [v["C"] for v in summary["per_surface"].values()]
    lowers = [v["c_lower"] for v in summary["per_surface"].values() if "c_lower" in v]
    summary["max_C"] = max(uppers)
    if lowers:
        summary["min_c_lower"] = min(lowers)
        summary["two_sided_gap"] = summary["max_C"] / summary["min_c_lower"]
    return rows, summary
