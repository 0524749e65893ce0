import math

import numpy as np
import pytest

from hyplab.errors import ConvergenceError, CoverageError
from hyplab.meshing import HyperbolicMesh, VertexTag, mesh_surface
from hyplab.spectral import (
    assemble_fem,
    counting,
    default_k_cut,
    heat_trace_stat,
    kernel_counting_identity_gap,
    lowest_eigenpairs,
    spectral_kernel,
    spectrum_to_csv_rows,
)

from fixtures_flat import flat_torus_mesh


def dirichlet_energy_oracle(mesh, u):
    """Per-triangle gradient quadrature of the piecewise-linear interpolant,
    independent of the cotangent assembly."""
    total = 0.0
    for (a, b, c), (lab, lbc, lca) in zip(mesh.tris, mesh.tri_lengths()):
        # embed: A=(0,0), B=(lab,0), C from the two remaining lengths
        xc = (lab * lab + lca * lca - lbc * lbc) / (2 * lab)
        yc = math.sqrt(max(lca * lca - xc * xc, 1e-300))
        pa, pb, pc = np.array([0, 0]), np.array([lab, 0]), np.array([xc, yc])
        area = 0.5 * lab * yc
        mat = np.array([pb - pa, pc - pa]).T
        grad = np.linalg.solve(mat.T, np.array([u[b] - u[a], u[c] - u[a]]))
        total += area * float(grad @ grad)
    return total


class TestAssembly:
    def test_equilateral_cotan_weights(self):
        tags = [VertexTag(region="flat")] * 3
        tris = [(0, 1, 2)]
        edges = {(0, 1): 1.0, (1, 2): 1.0, (0, 2): 1.0}
        fem = assemble_fem(HyperbolicMesh(tags, tris, edges))
        k = fem.stiffness.toarray()
        w = 1.0 / (2.0 * math.tan(math.pi / 3.0))
        for i in range(3):
            for j in range(3):
                want = 2 * w if i == j else -w
                assert k[i, j] == pytest.approx(want, rel=1e-12)

    def test_row_sums_zero_on_torus(self):
        fem = assemble_fem(flat_torus_mesh(12))
        rs = np.abs(np.asarray(fem.stiffness.sum(axis=1))).max()
        assert rs < 1e-10

    def test_mass_positive_and_total(self):
        mesh = flat_torus_mesh(10)
        fem = assemble_fem(mesh)
        assert np.all(fem.mass > 0)
        assert fem.mass.sum() == pytest.approx(mesh.areas_euclidean().sum(), rel=1e-10)

    def test_energy_matches_gradient_oracle(self, genus2_run, rng):
        mesh, fem = genus2_run.mesh, genus2_run.fem
        for _ in range(3):
            u = rng.standard_normal(mesh.num_vertices)
            assert fem.energy(u) == pytest.approx(
                dirichlet_energy_oracle(mesh, u), rel=1e-9)

    def test_positive_semidefinite(self, genus2_run, rng):
        fem = genus2_run.fem
        for _ in range(10):
            v = rng.standard_normal(fem.dimension)
            assert fem.energy(v) >= -1e-10 * float(v @ v)

    def test_degenerate_triangle_rejected(self):
        tags = [VertexTag(region="flat")] * 3
        tris = [(0, 1, 2)]
        edges = {(0, 1): 1.0, (1, 2): 1.0, (0, 2): 2.0}
        with pytest.raises(Exception):
            assemble_fem(HyperbolicMesh(tags, tris, edges)).stiffness


class TestEigenpairs:
    def test_torus_oracle_three_percent(self):
        # closed-form flat torus spectrum 4 pi^2 (p^2 + q^2)
        mesh = flat_torus_mesh(20)  # h = 0.05
        spec = lowest_eigenpairs(assemble_fem(mesh), 7)
        lam = spec.eigenvalues
        base = 4 * math.pi ** 2
        assert abs(lam[0]) <= 1e-8
        for k in range(1, 5):
            assert lam[k] == pytest.approx(base, rel=0.03)
        assert lam[5] == pytest.approx(2 * base, rel=0.03)

    def test_constant_zero_mode_and_orthonormality(self, genus2_run):
        spec = genus2_run.spectrum
        fem = genus2_run.fem
        assert abs(spec.eigenvalues[0]) <= 1e-8
        v0 = spec.eigenvectors[:, 0]
        assert np.std(v0) / np.abs(v0).mean() < 1e-6
        k = min(spec.count, 20)
        gram = spec.eigenvectors[:, :k].T @ (fem.mass[:, None] * spec.eigenvectors[:, :k])
        assert np.abs(gram - np.eye(k)).max() < 1e-8

    def test_residuals_small(self, genus2_run):
        assert genus2_run.spectrum.residuals.max() <= 1e-6

    def test_deterministic_given_seed(self):
        mesh = flat_torus_mesh(8)
        fem = assemble_fem(mesh)
        s1 = lowest_eigenpairs(fem, 5, seed=3)
        s2 = lowest_eigenpairs(fem, 5, seed=3)
        assert np.array_equal(s1.eigenvalues, s2.eigenvalues)
        assert np.array_equal(s1.eigenvectors, s2.eigenvectors)

    def test_refinement_stability_five_percent(self, genus2_run):
        model = genus2_run.model
        fine = mesh_surface(model, 0.05, seed=genus2_run.seed)
        spec_fine = lowest_eigenpairs(assemble_fem(fine), 8)
        lam_c = genus2_run.spectrum.eigenvalues[1:7]
        lam_f = spec_fine.eigenvalues[1:7]
        assert np.all(np.abs(lam_c / lam_f - 1.0) < 0.05)

    def test_k_range_validation(self):
        fem = assemble_fem(flat_torus_mesh(4))
        with pytest.raises(ConvergenceError):
            lowest_eigenpairs(fem, fem.dimension + 1)

    def test_disconnected_mesh_triggers_connectivity_audit(self):
        # two disjoint tori: the second zero mode is a meshing leak, not
        # silently accepted
        m1, m2 = flat_torus_mesh(5), flat_torus_mesh(5)
        shift = m1.num_vertices
        tags = m1.tags + m2.tags
        tris = list(map(tuple, m1.tris)) + [
            (a + shift, b + shift, c + shift) for a, b, c in m2.tris]
        edges = dict(m1.edge_lengths)
        edges.update({(u + shift, v + shift): l
                      for (u, v), l in m2.edge_lengths.items()})
        from hyplab.errors import ConnectivityError
        from hyplab.meshing import HyperbolicMesh
        broken = HyperbolicMesh(tags, tris, edges)
        with pytest.raises(ConnectivityError):
            lowest_eigenpairs(assemble_fem(broken), 4)

    def test_default_k_cut(self):
        assert default_k_cut(2) == 40
        assert default_k_cut(25) == 53


class TestHeatTrace:
    def test_decay_and_monotonicity(self, genus2_run):
        spec = genus2_run.spectrum
        vol = genus2_run.model.volume
        k_cut = spec.count - 1
        t_large = 100.0 / spec.eigenvalues[1]
        v_large, _ = heat_trace_stat(spec, vol, t_large, k_cut)
        assert v_large <= k_cut * math.exp(-100.0) / vol * 1.001 + 1e-300
        v1, _ = heat_trace_stat(spec, vol, 2.0, k_cut)
        v2, _ = heat_trace_stat(spec, vol, 1.0, k_cut)
        assert v2 > v1 > 0

    def test_monotone_in_k_cut(self, genus2_run):
        spec = genus2_run.spectrum
        vol = genus2_run.model.volume
        vals = [heat_trace_stat(spec, vol, 1.0, k)[0] for k in (10, 20, spec.count - 1)]
        assert vals[0] < vals[1] < vals[2]

    def test_remainder_flag(self, genus2_run):
        spec = genus2_run.spectrum
        vol = genus2_run.model.volume
        _, flagged_small_t = heat_trace_stat(spec, vol, 1e-4, 10)
        assert flagged_small_t
        _, flagged_large_t = heat_trace_stat(spec, vol, 5.0, spec.count - 1)
        assert not flagged_large_t

    def test_k_cut_coverage(self, genus2_run):
        with pytest.raises(CoverageError):
            heat_trace_stat(genus2_run.spectrum, 1.0, 1.0,
                            genus2_run.spectrum.count)


class TestSpectralKernel:
    def test_below_first_eigenvalue(self, genus2_run):
        spec = genus2_run.spectrum
        lam = 0.5 * spec.eigenvalues[1]
        assert counting(spec, lam) == 0
        assert np.all(spectral_kernel(spec, lam) == 0.0)

    def test_single_eigenfunction_mass(self, genus2_run):
        spec = genus2_run.spectrum
        lam1 = spec.eigenvalues[1]
        if spec.eigenvalues[2] > lam1 * (1 + 1e-10):
            mu = spectral_kernel(spec, lam1)
            assert float(spec.mass @ mu) == pytest.approx(1.0, abs=1e-6)

    def test_identity_on_two_surfaces(self, genus2_run, thick_run):
        for run in (genus2_run, thick_run):
            spec = run.spectrum
            for lam in (spec.eigenvalues[1], spec.eigenvalues[3], 0.24):
                gap = kernel_counting_identity_gap(spec, lam)
                assert gap <= 1e-6

    def test_coverage_error(self, genus2_run):
        with pytest.raises(CoverageError):
            spectral_kernel(genus2_run.spectrum,
                            genus2_run.spectrum.eigenvalues[-1] * 2.0)

    def test_vertex_access(self, genus2_run):
        spec = genus2_run.spectrum
        mu = spectral_kernel(spec, spec.eigenvalues[2])
        assert spectral_kernel(spec, spec.eigenvalues[2], x=5) == mu[5]
        assert np.all(mu >= 0)

    def test_csv_rows(self, genus2_run):
        rows = spectrum_to_csv_rows(genus2_run.spectrum)
        assert rows[0]["index"] == 0
        assert {"index", "eigenvalue", "residual"} == set(rows[0])
