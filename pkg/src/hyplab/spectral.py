"""Cotangent FEM on intrinsic meshes and low-eigenpair extraction.

Triangles are laid out as Euclidean triangles with their intrinsic edge
lengths (error O(h^2) from curvature); the mass matrix is lumped.  The
generalized problem K phi = lambda M phi reduces by diagonal scaling to a
standard symmetric one solved by shift-invert Lanczos with a seeded start
vector, so results are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from . import DEFAULT_SEED
from .errors import AssemblyError, ConnectivityError, ConvergenceError, CoverageError


@dataclass
class FemSystem:
    """Stiffness (cotangent) and lumped mass of a triangle mesh."""

    stiffness: csr_matrix
    mass: np.ndarray  # diagonal entries

    @property
    def dimension(self) -> int:
        return int(self.mass.shape[0])

    def energy(self, u: np.ndarray) -> float:
        return float(u @ (self.stiffness @ u))

    def mass_norm_sq(self, u: np.ndarray) -> float:
        return float(u @ (self.mass * u))


def assemble_fem(mesh) -> FemSystem:
    """Assemble cotangent stiffness and lumped mass from intrinsic edge lengths."""
    tris = mesh.tris
    l = mesh.tri_lengths()  # (m,3): |v0v1|, |v1v2|, |v2v0|
    areas = mesh.areas_euclidean()
    if np.any(areas <= 0):
        bad = int(np.argmin(areas))
        raise AssemblyError(f"degenerate triangle {bad} with lengths {l[bad]}")

    n = mesh.num_vertices
    rows, cols, vals = [], [], []
    # cotangent of the angle opposite each edge; angle at vertex k faces edge k+1
    l01, l12, l20 = l[:, 0], l[:, 1], l[:, 2]
    for (e_i, e_j, opp_a, opp_b, opp_c) in (
        # edge (v0,v1): opposite angle at v2, between edges l12 and l20
        (0, 1, l12, l20, l01),
        # edge (v1,v2): opposite angle at v0
        (1, 2, l20, l01, l12),
        # edge (v2,v0): opposite angle at v1
        (2, 0, l01, l12, l20),
    ):
        cos_opp = (opp_a ** 2 + opp_b ** 2 - opp_c ** 2) / (2 * opp_a * opp_b)
        # cot = cos / sin with 4*area = 2ab sin
        cot = cos_opp * (opp_a * opp_b) / (2.0 * areas)
        w = 0.5 * cot
        u, v = tris[:, e_i], tris[:, e_j]
        rows.extend([u, v, u, v])
        cols.extend([v, u, u, v])
        vals.extend([-w, -w, w, w])
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    stiffness = csr_matrix((vals, (rows, cols)), shape=(n, n))
    stiffness.sum_duplicates()

    mass = np.zeros(n)
    np.add.at(mass, tris.ravel(), np.repeat(areas / 3.0, 3))
    if np.any(mass <= 0):
        raise AssemblyError("isolated vertex with zero lumped mass")
    return FemSystem(stiffness=stiffness, mass=mass)


@dataclass
class Spectrum:
    """Ascending eigenvalues with mass-orthonormal eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # (n, count)
    residuals: np.ndarray
    mass: np.ndarray = field(repr=False, default=None)

    @property
    def count(self) -> int:
        return int(self.eigenvalues.shape[0])

    @property
    def dimension(self) -> int:
        return int(self.eigenvectors.shape[0])


def lowest_eigenpairs(system: FemSystem, k: int, tol: float = 0.0,
                      seed: int = DEFAULT_SEED) -> Spectrum:
    """The k smallest eigenpairs of K phi = lambda M phi.

    Shift-invert Lanczos on the diagonally scaled operator with a seeded
    start vector; eigenvector signs are canonicalized so repeated runs are
    identical.  A second near-zero eigenvalue triggers a connectivity error
    (it means the mesh fell apart) rather than silent acceptance.
    """
    n = system.dimension
    if not 1 <= k < n:
        raise ConvergenceError(f"need 1 <= k < dimension, got k={k}, n={n}")
    d = 1.0 / np.sqrt(system.mass)
    a = system.stiffness.multiply(d[:, None]).multiply(d[None, :]).tocsc()
    rng = np.random.default_rng(np.random.PCG64(seed))
    v0 = rng.standard_normal(n)
    try:
        vals, vecs = eigsh(a, k=k, sigma=-0.05, which="LM", v0=v0, tol=tol)
    except ArpackNoConvergence as exc:
        raise ConvergenceError(
            f"eigensolver converged only {len(exc.eigenvalues)} of {k} pairs"
        ) from exc
    order = np.argsort(vals)
    vals = vals[order]
    vecs = vecs[:, order]
    phi = vecs * d[:, None]
    for j in range(phi.shape[1]):
        lead = int(np.argmax(np.abs(phi[:, j])))
        if phi[lead, j] < 0:
            phi[:, j] = -phi[:, j]
    residuals = np.empty(k)
    for j in range(k):
        r = system.stiffness @ phi[:, j] - vals[j] * (system.mass * phi[:, j])
        residuals[j] = np.linalg.norm(r) / np.linalg.norm(phi[:, j])
    vals = np.where(np.abs(vals) < 1e-14, 0.0, vals)
    if k >= 2 and vals[1] < 1e-8:
        raise ConnectivityError(
            f"second eigenvalue {vals[1]:.2e} is numerically zero; "
            "mesh is likely disconnected (meshing leak)"
        )
    return Spectrum(eigenvalues=vals, eigenvectors=phi, residuals=residuals,
                    mass=system.mass)


def default_k_cut(genus: int) -> int:
    """Enough pairs to straddle the small-eigenvalue regime: max(2g-2+5, 40)."""
    return max(2 * genus - 2 + 5, 40)


def heat_trace_stat(spectrum: Spectrum, volume: float, t: float, k_cut: int):
    """Normalized heat-trace tail (1/Vol) sum_{k=1}^{k_cut} exp(-t lambda_k).

    Returns (value, remainder_flag); the flag is set when the crude tail
    bound dimension * exp(-t lambda_{k_cut}) exceeds 1% of the partial sum,
    i.e. when the truncation cannot be trusted at this t.
    """
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")
    if k_cut >= spectrum.count:
        raise CoverageError(
            f"k_cut={k_cut} needs at least {k_cut + 1} resolved pairs, "
            f"have {spectrum.count}"
        )
    lam = spectrum.eigenvalues[1:k_cut + 1]
    partial = float(np.exp(-t * lam).sum())
    tail_bound = spectrum.dimension * math.exp(-t * spectrum.eigenvalues[k_cut])
    flag = tail_bound > 0.01 * max(partial, 1e-300)
    return partial / volume, flag


def spectral_kernel(spectrum: Spectrum, lam: float, x=None):
    """Diagonal spectral kernel mu_x(lambda) = sum_{0<lambda_k<=lambda} phi_k(x)^2.

    With x=None the whole vertex vector is returned.  Requires the spectrum
    resolved past lambda, else a coverage error.
    """
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    if spectrum.eigenvalues[-1] < lam:
        raise CoverageError(
            f"spectrum resolved only to {spectrum.eigenvalues[-1]:.4f} < {lam}"
        )
    sel = (spectrum.eigenvalues <= lam)
    sel[0] = False
    block = spectrum.eigenvectors[:, sel]
    mu = (block * block).sum(axis=1)
    if x is None:
        return mu
    return float(mu[x])


def counting(spectrum: Spectrum, lam: float) -> int:
    """N(lambda): number of eigenvalues in (0, lambda]."""
    if spectrum.eigenvalues[-1] < lam:
        raise CoverageError(
            f"spectrum resolved only to {spectrum.eigenvalues[-1]:.4f} < {lam}"
        )
    sel = (spectrum.eigenvalues <= lam)
    sel[0] = False
    return int(sel.sum())


def kernel_counting_identity_gap(spectrum: Spectrum, lam: float) -> float:
    """|mass-weighted sum of mu_x(lambda) - N(lambda)| (exact identity check)."""
    mu = spectral_kernel(spectrum, lam)
    return abs(float(spectrum.mass @ mu) - counting(spectrum, lam))


def spectrum_to_csv_rows(spectrum: Spectrum):
    return [
        {"index": i, "eigenvalue": float(spectrum.eigenvalues[i]),
         "residual": float(spectrum.residuals[i])}
        for i in range(spectrum.count)
    ]
