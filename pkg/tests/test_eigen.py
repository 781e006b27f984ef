"""Eigensolver and projector tests against dense numpy oracles."""

import numpy as np
import pytest
import scipy.sparse as sp

from nelsonlab import (
    ConditioningError,
    ContractError,
    DivergenceError,
    IterationError,
    SparseOperator,
    StateVector,
    build_grid,
    enumerate_basis,
)
from nelsonlab.eigen import (
    ContourSpec,
    contour_projector_apply,
    kato_smallness,
    lowest_pair,
    neumann_projector_apply,
    resolvent_apply,
)
from nelsonlab.hamiltonian import PhysParams, assemble_fiber_hamiltonian


def random_symmetric(rng, n, scale=1.0):
    a = rng.standard_normal((n, n)) * scale
    return SparseOperator(sp.csr_matrix((a + a.T) / 2.0), hermitian=True)


def random_hermitian(rng, n, scale=1.0):
    a = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) * scale
    return SparseOperator(sp.csr_matrix((a + a.conj().T) / 2.0), hermitian=True)


class TestLowestPair:
    def test_matches_dense_real(self):
        rng = np.random.default_rng(11)
        for n in (8, 60, 200):
            h = random_symmetric(rng, n)
            want = np.linalg.eigvalsh(h.toarray())[:2]
            got = lowest_pair(h, tol=1e-11)
            assert abs(got.E0 - want[0]) < 1e-10
            assert abs(got.E1 - want[1]) < 1e-10
            assert got.residual <= 1e-11
            assert abs(got.v0.norm() - 1.0) < 1e-12

    def test_matches_dense_complex(self):
        rng = np.random.default_rng(3)
        h = random_hermitian(rng, 90)
        want, vecs = np.linalg.eigh(h.toarray())
        got = lowest_pair(h, tol=1e-11)
        assert abs(got.E0 - want[0]) < 1e-10
        assert abs(got.E1 - want[1]) < 1e-10
        overlap = abs(np.vdot(vecs[:, 0], got.v0.amplitudes))
        assert overlap > 1.0 - 1e-10

    def test_degenerate_ground_found_through_breakdown(self):
        # the all-ones start sees one copy of a degenerate pair; the
        # deterministic replacement direction must recover the second
        d = np.array([2.0, 2.0, 5.0, 7.0, 9.0, 11.0, 13.0])
        h = SparseOperator(sp.diags(d, format="csr"), hermitian=True)
        got = lowest_pair(h, tol=1e-12)
        assert abs(got.E0 - 2.0) < 1e-12
        assert abs(got.E1 - 2.0) < 1e-12
        assert got.degenerate

    def test_free_fiber_ground(self):
        grid = build_grid(0.2, 1.0, 2, angular="axis2")
        basis = enumerate_basis(grid.n_modes, 3)
        p = PhysParams(g=0.0, m=2.0, kappa=1.0, P=np.array([0, 0, 0.3]))
        h = assemble_fiber_hamiltonian(p, grid, basis)
        got = lowest_pair(h, tol=1e-12)
        diag = h.mat.diagonal()
        assert abs(got.E0 - diag.min()) < 1e-12
        assert abs(got.v0.amplitudes[np.argmin(diag)]) > 1.0 - 1e-10

    def test_iteration_budget(self):
        rng = np.random.default_rng(5)
        h = random_symmetric(rng, 120)
        with pytest.raises(IterationError):
            lowest_pair(h, tol=1e-13, max_iter=6)

    def test_requires_hermitian_flag(self):
        a = sp.csr_matrix(np.diag([1.0, 2.0, 3.0]))
        with pytest.raises(ContractError):
            lowest_pair(SparseOperator(a, hermitian=False))


class TestResolvent:
    def test_matches_dense_solve(self):
        rng = np.random.default_rng(21)
        h = random_symmetric(rng, 50)
        z = 0.3 + 0.4j
        rhs = rng.standard_normal(50)
        got = resolvent_apply(h, z, StateVector(rhs), tol=1e-10)
        want = np.linalg.solve(h.toarray() - z * np.eye(50), rhs.astype(complex))
        assert np.allclose(got.amplitudes, want, atol=1e-10)

    def test_singular_shift_rejected(self):
        h = SparseOperator(sp.diags([1.0, 2.0, 3.0], format="csr"), hermitian=True)
        with pytest.raises(ConditioningError):
            resolvent_apply(h, 2.0, StateVector(np.ones(3)))


def spectral_projector(dense, lo, hi):
    evals, vecs = np.linalg.eigh(dense)
    sel = (evals > lo) & (evals < hi)
    return vecs[:, sel] @ vecs[:, sel].T.conj()


class TestContourProjector:
    def test_matches_spectral_projector(self):
        rng = np.random.default_rng(42)
        h = random_symmetric(rng, 60)
        dense = h.toarray()
        evals = np.linalg.eigvalsh(dense)
        # isolate the lowest two eigenvalues with a comfortable circle
        center = 0.5 * (evals[0] + evals[1])
        radius = 0.5 * (evals[1] - evals[0]) + 0.35 * (evals[2] - evals[1])
        spec = ContourSpec(center=center, radius=radius, n_quad=64)
        psi = StateVector(rng.standard_normal(60))
        got = contour_projector_apply(h, spec, psi)
        want = spectral_projector(dense, center - radius, center + radius) \
            @ psi.amplitudes
        assert np.allclose(got.amplitudes, want, atol=1e-9)

    def test_idempotent(self):
        rng = np.random.default_rng(9)
        h = random_symmetric(rng, 40)
        evals = np.linalg.eigvalsh(h.toarray())
        spec = ContourSpec(center=evals[0], radius=0.45 * (evals[1] - evals[0]))
        psi = StateVector(rng.standard_normal(40))
        p1 = contour_projector_apply(h, spec, psi)
        p2 = contour_projector_apply(h, spec, p1)
        assert np.allclose(p2.amplitudes, p1.amplitudes, atol=1e-9)

    def test_near_contour_warning(self):
        h = SparseOperator(sp.diags([0.0, 1.0, 2.0], format="csr"), hermitian=True)
        spec = ContourSpec(center=0.0, radius=1.0 - 1e-9, n_quad=8)
        with pytest.warns(UserWarning, match="contour"):
            contour_projector_apply(h, spec, StateVector(np.ones(3)), tol=1e-4)

    def test_spec_validation(self):
        with pytest.raises(Exception):
            ContourSpec(center=0.0, radius=-1.0)
        with pytest.raises(Exception):
            ContourSpec(center=0.0, radius=1.0, n_quad=4)


class TestNeumannProjector:
    def setup_case(self, eps_scale):
        rng = np.random.default_rng(77)
        d = np.concatenate([[0.0, 0.4], 2.0 + np.arange(28.0)])
        h0 = SparseOperator(sp.diags(d, format="csr"), hermitian=True)
        pert = random_symmetric(rng, 30, scale=eps_scale)
        return h0, pert

    def test_matches_exact_projector(self):
        h0, dh = self.setup_case(0.02)
        total = SparseOperator(h0.mat + dh.mat, hermitian=True)
        spec = ContourSpec(center=0.2, radius=0.9, n_quad=64, n_terms=12)
        rng = np.random.default_rng(1)
        psi = StateVector(rng.standard_normal(30))
        got, norms = neumann_projector_apply(h0, dh, spec, psi)
        want = spectral_projector(total.toarray(), -0.7, 1.1) @ psi.amplitudes
        assert np.allclose(got.amplitudes, want, atol=1e-8)
        # geometric decay of the expansion terms
        assert norms[3] < norms[1]
        ratios = [norms[i + 1] / norms[i] for i in range(1, 5) if norms[i] > 0]
        assert max(ratios) < 0.5

    def test_zero_perturbation_reduces_to_contour(self):
        h0, _ = self.setup_case(0.0)
        zero = SparseOperator(sp.csr_matrix((30, 30)), hermitian=True)
        spec = ContourSpec(center=0.2, radius=0.9, n_quad=32, n_terms=4)
        psi = StateVector(np.ones(30))
        got, norms = neumann_projector_apply(h0, zero, spec, psi)
        direct = contour_projector_apply(h0, spec, psi)
        assert np.allclose(got.amplitudes, direct.amplitudes, atol=1e-12)
        assert all(n < 1e-14 for n in norms[1:])

    def test_divergence_detected(self):
        h0, dh = self.setup_case(5.0)
        spec = ContourSpec(center=0.2, radius=0.9, n_quad=16, n_terms=10)
        with pytest.raises(DivergenceError):
            neumann_projector_apply(h0, dh, spec, StateVector(np.ones(30)))


class TestKatoSmallness:
    def test_two_level_closed_form(self):
        # base diag(0, 2), contour |z| = 1: the sandwich norm is
        # d / sqrt(|z| |2 - z|), maximized at z = 1 where it equals d
        d = 0.37
        h0 = SparseOperator(sp.diags([0.0, 2.0], format="csr"), hermitian=True)
        dh = SparseOperator(sp.csr_matrix(np.array([[0.0, d], [d, 0.0]])),
                            hermitian=True)
        spec = ContourSpec(center=0.0, radius=1.0, n_quad=64)
        got = kato_smallness(h0, dh, spec, n_sample=64)
        assert got == pytest.approx(d, rel=1e-12)

    def test_dense_cap(self):
        n = 3000
        h0 = SparseOperator(sp.identity(n, format="csr"), hermitian=True)
        with pytest.raises(ContractError):
            kato_smallness(h0, h0, ContourSpec(center=0.0, radius=1.0))
