"""Hamiltonian-layer tests.

Oracles: closed-form displaced-oscillator energies, coherent-state amplitude
formulas, adaptive scipy quadrature for the angular average, and dense
expm/eigh for the Weyl conjugation identity.
"""

import math

import numpy as np
import pytest
import scipy.integrate
import scipy.linalg

from nelsonlab import (
    ConfigError,
    TruncationError,
    VelocityDomainError,
    WindowError,
    build_grid,
    composite_ops,
    enumerate_basis,
    expectation,
    ladder_ops,
)
from nelsonlab.hamiltonian import (
    PhysParams,
    apply_weyl,
    assemble_dressed_hamiltonian,
    assemble_fiber_hamiltonian,
    dressing_generator,
    ground_constant,
    ground_constant_discrete,
    make_dressing,
    mode_couplings,
    pi_operators,
)


def params_for(g=0.1, m=2.0, kappa=1.0, P=(0, 0, 0.3), **kw):
    return PhysParams(g=g, m=m, kappa=kappa, P=np.array(P, float), **kw)


class TestPhysParams:
    def test_relaxed_mode_warns(self):
        with pytest.warns(UserWarning, match="strict"):
            params_for(g=0.5)

    def test_strict_mode_raises(self):
        with pytest.raises(ConfigError):
            params_for(g=0.5, strict_regime=True)

    def test_always_enforced(self):
        with pytest.raises(ConfigError):
            params_for(m=-1.0)
        with pytest.raises(ConfigError):
            params_for(eps=0.3)

    def test_kappa1_default(self):
        p = params_for(kappa=2.0)
        assert np.isclose(p.kappa1, 0.2)

    def test_with_momentum(self):
        p = params_for()
        q = p.with_momentum([0.1, 0.0, 0.0])
        assert np.allclose(q.P, [0.1, 0, 0]) and q.g == p.g


class TestGroundConstant:
    def test_v_zero_closed_form(self):
        # machine-precision agreement, any angular rule and resolution
        for rule, n in [("octahedral6", 1), ("axis2", 3), ("gauss_4x4", 2)]:
            grid = build_grid(0.05, 1.0, n, angular=rule)
            p = params_for(g=0.12, P=(0, 0, 0))
            got = ground_constant(p, grid, 0.05, np.zeros(3))
            want = -2.0 * np.pi * p.g**2 * (1.0 - 0.05)
            assert np.isclose(got, want, rtol=1e-14)

    def test_momentum_offset(self):
        grid = build_grid(0.1, 1.0, 2)
        p = params_for(g=0.1, m=3.0, P=(0.2, -0.1, 0.4))
        got = ground_constant(p, grid, 0.1, np.zeros(3))
        want = p.P @ p.P / 6.0 - 2.0 * np.pi * p.g**2 * 0.9
        assert np.isclose(got, want, rtol=1e-14)

    def test_axial_velocity_closed_form(self):
        # exact angular average for v along z: 4 pi atanh(|v|)/|v|
        grid = build_grid(0.2, 1.0, 2, angular="gauss_32x8")
        p = params_for(g=0.1, P=(0, 0, 0))
        vz = 0.35
        got = ground_constant(p, grid, 0.2, [0, 0, vz])
        want = -p.g**2 * 0.5 * 0.8 * 4.0 * np.pi * np.arctanh(vz) / vz
        assert np.isclose(got, want, rtol=1e-10)

    def test_generic_velocity_adaptive_oracle(self):
        v = np.array([0.12, -0.2, 0.25])
        grid = build_grid(0.3, 1.1, 2, angular="gauss_32x32")
        p = params_for(g=0.07, kappa=1.1, P=(0, 0, 0))

        def integrand(mu, phi):
            st = math.sqrt(1.0 - mu * mu)
            kh = np.array([st * math.cos(phi), st * math.sin(phi), mu])
            return 1.0 / (1.0 - kh @ v)

        ang, err = scipy.integrate.dblquad(integrand, 0, 2 * np.pi, -1, 1,
                                           epsabs=1e-12, epsrel=1e-12)
        want = -p.g**2 * 0.5 * (1.1 - 0.3) * ang
        got = ground_constant(p, grid, 0.3, v)
        assert err < 1e-9
        assert np.isclose(got, want, rtol=1e-8)

    def test_velocity_domain(self):
        grid = build_grid(0.1, 1.0, 1)
        with pytest.raises(VelocityDomainError):
            ground_constant(params_for(), grid, 0.1, [0, 0, 1.0])

    def test_window_check(self):
        grid = build_grid(0.1, 1.0, 1)
        with pytest.raises(WindowError):
            ground_constant(params_for(), grid, 0.01, np.zeros(3))


class TestFiberHamiltonian:
    def test_free_case_is_diagonal(self):
        grid = build_grid(0.2, 1.0, 2, angular="axis2")
        basis = enumerate_basis(grid.n_modes, 3)
        p = params_for(g=0.0, P=(0, 0, 0.5))
        h = assemble_fiber_hamiltonian(p, grid, basis)
        dense = h.toarray()
        assert np.allclose(dense, np.diag(np.diagonal(dense)))
        occ = basis.states.astype(float)
        rel = p.P[None, :] - occ @ grid.k
        want = (rel**2).sum(axis=1) / (2 * p.m) + occ @ grid.kabs
        assert np.allclose(np.diagonal(dense), want, rtol=1e-14)

    def test_field_block_elements(self):
        grid = build_grid(0.2, 1.0, 1, angular="axis2")
        basis = enumerate_basis(grid.n_modes, 2)
        p = params_for(g=0.3)
        h = assemble_fiber_hamiltonian(p, grid, basis).toarray()
        c = mode_couplings(p, grid, grid.sigma)
        i0, i1 = 0, basis.index_of([1, 0])
        i2 = basis.index_of([2, 0])
        assert np.isclose(h[i1, i0], c[0], rtol=1e-14)
        assert np.isclose(h[i2, i1], math.sqrt(2.0) * c[0], rtol=1e-14)
        assert assemble_fiber_hamiltonian(p, grid, basis).is_hermitian_exact()

    def test_interaction_window_cuts_soft_modes(self):
        grid = build_grid(0.1, 1.0, 4, angular="axis2")
        basis = enumerate_basis(grid.n_modes, 1)
        p = params_for(g=0.2)
        cut = grid.r_edges[2]
        h = assemble_fiber_hamiltonian(p, grid, basis).toarray()
        hcut = assemble_fiber_hamiltonian(p, grid, basis, sigma=cut).toarray()
        soft = grid.kabs < cut
        for m in range(grid.n_modes):
            occ = np.zeros(grid.n_modes, int)
            occ[m] = 1
            el = hcut[basis.index_of(occ), 0]
            assert el == 0.0 if soft[m] else el != 0.0

    def test_recoil_disabled_closed_form(self):
        # independent displaced modes: E0 = -sum c_m^2/|k_m| exactly
        grid = build_grid(0.3, 1.0, 2, angular="axis2")
        basis = enumerate_basis(grid.n_modes, 8)
        p = params_for(g=0.05, P=(0, 0, 0))
        h = assemble_fiber_hamiltonian(p, grid, basis, include_recoil=False)
        e = np.linalg.eigvalsh(h.toarray())[0]
        c = mode_couplings(p, grid, grid.sigma)
        want = -np.sum(c**2 / grid.kabs)
        assert np.isclose(e, want, rtol=0, atol=1e-10)


class TestWeyl:
    def test_generator_skew_hermitian(self):
        grid = build_grid(0.2, 1.0, 2, angular="octahedral6")
        basis = enumerate_basis(grid.n_modes, 2)
        spec = make_dressing(params_for(), grid, [0, 0, 0.2])
        a = dressing_generator(spec, grid, basis)
        s = a.mat + a.mat.conjugate().T.tocsr()
        assert s.nnz == 0 or not np.any(s.data)

    def test_single_mode_coherent_amplitudes(self):
        grid = build_grid(0.5, 1.0, 1, angular="single")
        basis = enumerate_basis(1, 24)
        f = 0.4
        spec = make_dressing(params_for(g=1.0), grid, np.zeros(3))
        # override the amplitude to a clean value
        spec = type(spec)(v=spec.v, window=spec.window, f=np.array([f]))
        a = dressing_generator(spec, grid, basis)
        res = apply_weyl(a, basis.vacuum())
        n = np.arange(25)
        want = np.exp(-f * f / 2.0) * f**n / np.sqrt(
            np.array([math.factorial(int(i)) for i in n], dtype=float))
        assert np.allclose(res.state.amplitudes, want, atol=1e-12)
        assert res.norm_drift < 1e-12

    def test_mean_annihilation_is_plus_f(self):
        grid = build_grid(0.3, 1.0, 1, angular="axis2")
        basis = enumerate_basis(grid.n_modes, 10)
        p = params_for(g=0.08, P=(0, 0, 0))
        spec = make_dressing(p, grid, [0, 0, 0.1])
        a = dressing_generator(spec, grid, basis)
        res = apply_weyl(a, basis.vacuum())
        for m in range(grid.n_modes):
            ann, _ = ladder_ops(basis, m)
            got = np.vdot(res.state.amplitudes, ann.mat @ res.state.amplitudes)
            assert np.isclose(got.real, spec.f[m], atol=1e-9)
            assert abs(got.imag) < 1e-12

    def test_unitarity(self):
        grid = build_grid(0.3, 1.0, 2, angular="axis2")
        basis = enumerate_basis(grid.n_modes, 6)
        p = params_for(g=0.05, P=(0, 0, 0))
        spec = make_dressing(p, grid, np.zeros(3))
        a = dressing_generator(spec, grid, basis)
        rng = np.random.default_rng(7)
        x = rng.standard_normal(basis.dim)
        from nelsonlab import StateVector

        res = apply_weyl(a, StateVector(x))
        assert res.norm_drift < 1e-10 * np.linalg.norm(x)

    def test_series_abort_when_order_too_small(self):
        basis = enumerate_basis(1, 4)
        grid = build_grid(0.5, 1.0, 1, angular="single")
        spec = make_dressing(params_for(g=1.0), grid, np.zeros(3))
        spec = type(spec)(v=spec.v, window=spec.window, f=np.array([6.0]))
        a = dressing_generator(spec, grid, basis)
        with pytest.raises(TruncationError):
            apply_weyl(a, basis.vacuum(), order=8)


class TestDressedForm:
    def setup(self):
        grid = build_grid(0.25, 1.0, 2, angular="axis2")
        basis = enumerate_basis(grid.n_modes, 8)
        p = params_for(g=0.02, m=2.0, P=(0, 0, 0.3))
        return p, grid, basis

    def test_conjugation_identity(self):
        # dense oracle: expm(-A) H expm(A) against the direct assembly,
        # compared on the low-occupation block where truncation is invisible
        p, grid, basis = self.setup()
        h = assemble_fiber_hamiltonian(p, grid, basis).toarray()
        e, vec = np.linalg.eigh(h)
        psi = vec[:, 0]
        ops = composite_ops(grid, basis)
        pmes = np.array([expectation(c, _sv(psi)) for c in ops.meson_momentum])
        v = (p.P - pmes) / p.m
        spec = make_dressing(p, grid, v)
        s_vec = (grid.k * spec.f[:, None] ** 2).sum(axis=0)
        mu = p.P - s_vec - p.m * v
        hw = assemble_dressed_hamiltonian(p, grid, basis, grid.sigma, v, mu).toarray()
        a = dressing_generator(spec, grid, basis).toarray()
        w = scipy.linalg.expm(-a)
        hconj = w @ h @ w.T
        offset = float((p.P - p.m * v) @ (p.P - p.m * v)) / (2 * p.m)
        low = basis.totals <= 2
        diff = (hw - offset * np.eye(basis.dim) - hconj)[np.ix_(low, low)]
        assert np.max(np.abs(diff)) < 1e-8

    def test_spectrum_shift(self):
        # conjugation is unitary, so the dressed spectrum is the fiber
        # spectrum shifted by the |P - m v|^2/(2m) offset
        p, grid, basis = self.setup()
        h = assemble_fiber_hamiltonian(p, grid, basis).toarray()
        e, vec = np.linalg.eigh(h)
        psi = vec[:, 0]
        ops = composite_ops(grid, basis)
        pmes = np.array([expectation(c, _sv(psi)) for c in ops.meson_momentum])
        v = (p.P - pmes) / p.m
        spec = make_dressing(p, grid, v)
        s_vec = (grid.k * spec.f[:, None] ** 2).sum(axis=0)
        mu = p.P - s_vec - p.m * v
        hw = assemble_dressed_hamiltonian(p, grid, basis, grid.sigma, v, mu).toarray()
        offset = float((p.P - p.m * v) @ (p.P - p.m * v)) / (2 * p.m)
        ew = np.linalg.eigvalsh(hw)
        assert np.isclose(ew[0] - offset, e[0], atol=1e-8)

    def test_dressed_vacuum_energy_budget(self):
        # ground energy = constant + recoil zero point <0|Pi^2|0>/(2m) up to
        # the second-order lowering from the vacuum/one-boson coupling of
        # Pi^2, whose g^2 scaling is checked by halving g
        grid = build_grid(0.25, 1.0, 2, angular="axis2")
        basis = enumerate_basis(grid.n_modes, 4)

        def residual(g):
            p = params_for(g=g, m=2.0, P=(0, 0, 0))
            hw = assemble_dressed_hamiltonian(p, grid, basis, grid.sigma,
                                              np.zeros(3), np.zeros(3))
            e0 = np.linalg.eigvalsh(hw.toarray())[0]
            c = ground_constant_discrete(p, grid, grid.sigma, np.zeros(3))
            spec = make_dressing(p, grid, np.zeros(3))
            zero_point = np.sum(grid.kabs**2 * spec.f**2) / (2 * p.m)
            return abs(e0 - c - zero_point)

        r1, r2 = residual(0.01), residual(0.005)
        assert r1 < 5e-5
        assert r1 / r2 == pytest.approx(4.0, rel=0.1)

    def test_discrete_constant_converges_to_exact(self):
        p = params_for(g=0.1, P=(0, 0, 0))
        want = ground_constant(p, build_grid(0.1, 1.0, 1), 0.1, np.zeros(3))
        errs = []
        for n in (8, 16, 32):
            g = build_grid(0.1, 1.0, n)
            errs.append(abs(ground_constant_discrete(p, g, 0.1, np.zeros(3)) - want))
        assert errs[2] < errs[1] < errs[0]
        assert errs[2] / errs[1] == pytest.approx(0.25, rel=0.1)

    def test_pi_operators_hermitian(self):
        p, grid, basis = self.setup()
        spec = make_dressing(p, grid, [0, 0, 0.1])
        for op in pi_operators(p, grid, basis, spec):
            assert op.hermitian and op.is_hermitian_exact()


def _sv(x):
    from nelsonlab import StateVector

    return StateVector(x)
