import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mieq.config import DEFAULT_DRUDE_LORENTZ, FIG4_LAMBDA_2_UM
from mieq.geometry import ScatteringGeometry, auto_triad, fig3_geometry, make_class_A
from mieq.material import DrudeLorentz
from mieq.mie import mie_coefficients, mie_set
from mieq.twophoton import (
    DegenerateSpectrumError,
    FrequencyGrid,
    GaussianProfile,
    OverlapMatrix,
    coincidence_amplitude,
    coincidence_amplitude_grid,
    coincidence_density,
    coincidence_density_grid,
    gaussian_overlap,
    general_probabilities,
    l_k_pm,
    make_symmetrized_spectrum,
    overlap_matrix,
    process_probabilities,
    t_oe_eo,
)

W0 = GaussianProfile.from_wavelength(12.6, 0.05)
W1 = GaussianProfile.from_wavelength(12.62, 0.04)


def lossy(eps=10 + 1j, x=1.5):
    k = 2 * np.pi / 12.6
    return mie_coefficients(eps, x, k=k, radius=x / k)


def random_weights(rng):
    return rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))


class TestSpectra:
    def test_profile_conversion(self):
        assert W0.fwhm / W0.center == pytest.approx(0.05 / 12.6)
        om = np.array([W0.center + W0.fwhm / 2])
        assert W0(om)[0] ** 2 == pytest.approx(0.5)
        with pytest.raises(ValueError):
            GaussianProfile.from_wavelength(-1.0, 0.1)

    def test_grid(self):
        g = FrequencyGrid.gauss_legendre(1.0, 3.0, 8)
        assert g.weights.sum() == pytest.approx(2.0)
        with pytest.raises(ValueError):
            FrequencyGrid.gauss_legendre(3.0, 1.0)

    def test_gaussian_overlap_quadrature(self):
        grid = FrequencyGrid.gauss_legendre(W0.center - 8 * W0.fwhm, W0.center + 8 * W0.fwhm, 128)
        num = np.sum(grid.weights * W0(grid.omega) * W1(grid.omega))
        assert num == pytest.approx(gaussian_overlap(W0, W1), rel=1e-10)

    @settings(max_examples=20, deadline=None)
    @given(sigma=st.sampled_from([1, -1]), seed=st.integers(0, 2**32 - 1))
    def test_symmetry_and_norm(self, sigma, seed):
        spec = make_symmetrized_spectrum(sigma, random_weights(np.random.default_rng(seed)), W0, W1)
        assert spec.symmetry_error() < 1e-12
        assert spec.norm() == pytest.approx(1.0, abs=1e-10)

    def test_degenerate_antisymmetric(self):
        with pytest.raises(DegenerateSpectrumError):
            make_symmetrized_spectrum(-1, [[1, 2], [2, 1]], W0, W0)

    def test_input_validation(self):
        with pytest.raises(ValueError):
            make_symmetrized_spectrum(0, np.eye(2), W0, W1)
        with pytest.raises(ValueError):
            make_symmetrized_spectrum(1, np.eye(3), W0, W1)
        with pytest.raises(ValueError):
            make_symmetrized_spectrum(1, np.eye(2), lambda w: w, W1)

    def test_central_wavelength(self):
        spec = make_symmetrized_spectrum(1, np.eye(2), W0, W0)
        assert spec.central_wavelength_um() == pytest.approx(12.6, rel=1e-6)

    def test_grid_lookup(self):
        spec = make_symmetrized_spectrum(1, np.eye(2), W0, W0, n_nodes=16)
        assert spec.index_of(spec.grid.omega[3]) == 3
        with pytest.raises(ValueError):
            spec.index_of(spec.grid.omega[3] * (1 + 1e-9))


class TestOverlap:
    def test_single_polarization(self):
        ov = overlap_matrix(make_symmetrized_spectrum(1, [[1, 0], [0, 0]], W0, W0))
        ref = np.zeros((2, 2, 2, 2))
        ref[0, 0, 0, 0] = 1.0
        np.testing.assert_allclose(ov.I, ref, atol=1e-14)
        assert ov.I12_12 == 0.0

    @pytest.mark.parametrize("sigma", [1, -1])
    def test_properties(self, sigma):
        spec = make_symmetrized_spectrum(sigma, random_weights(np.random.default_rng(7)), W0, W1)
        errs = overlap_matrix(spec).property_errors()
        assert max(errs.values()) < 1e-10

    def test_hermitian_pair_by_direct_quadrature(self):
        spec = make_symmetrized_spectrum(1, random_weights(np.random.default_rng(8)), W0, W1)
        W = np.outer(spec.grid.weights, spec.grid.weights)
        ov = overlap_matrix(spec)
        for idx in [(0, 1, 1, 0), (1, 1, 0, 1), (0, 0, 1, 1)]:
            a, b, c, d = idx
            fwd = np.sum(W * np.conj(spec.phi[a, b]) * spec.phi[c, d])
            rev = np.sum(W * np.conj(spec.phi[c, d]) * spec.phi[a, b])
            assert ov.I[idx] == pytest.approx(fwd, abs=1e-14)
            assert np.conj(fwd) == pytest.approx(rev, abs=1e-14)

    def test_cross_polarized_entry_closed_form(self):
        """Offset Gaussians, sigma = -1, w = [[0, 1], [0, 0]]: closed form vs grid."""
        spec = make_symmetrized_spectrum(-1, [[0, 1], [0, 0]], W0, W1)
        # phi_12 = N u(w1) v(w2), phi_21 = -N u(w2) v(w1); with norm 2 N^2 |u|^2 |v|^2 = 1
        # I^{12}_{12} = N^2 |u|^2 |v|^2 = 1/2 irrespective of the offset
        uu = gaussian_overlap(W0, W0)
        vv = gaussian_overlap(W1, W1)
        N2 = 1.0 / (2 * uu * vv)
        assert overlap_matrix(spec).I12_12 == pytest.approx(N2 * uu * vv, abs=1e-8)
        # I^{12}_{21} = -N^2 (int u v)^2 depends on the offset
        uv = gaussian_overlap(W0, W1)
        assert overlap_matrix(spec).I[0, 1, 1, 0].real == pytest.approx(-N2 * uv**2, abs=1e-8)


class TestFig3Quantities:
    def test_dipole_limit(self):
        mie = lossy(4 + 0.1j, 0.05)
        toe, _ = t_oe_eo(mie)
        assert toe == pytest.approx(3 / (4 * np.pi) * mie.a[0], rel=1e-3)
        # b_1 only dominates a_2 near the magnetic-dipole resonance of a high-index sphere
        mie = mie_set(DrudeLorentz(**DEFAULT_DRUDE_LORENTZ), 1.0, 18.05)
        _, teo = t_oe_eo(mie)
        assert teo == pytest.approx(3 / (4 * np.pi) * mie.b[0], rel=1e-2)

    def test_vacuum(self):
        mie = mie_coefficients(1.0, 1.0)
        assert t_oe_eo(mie) == (0, 0)
        assert l_k_pm(mie) == (0.0, 0.0, 0.0, 0.0)

    def test_t_matches_s_matrix(self):
        mie = mie_coefficients(10 + 1j, 1.5, 3)
        s = fig3_geometry().s_matrix(mie)
        toe, teo = t_oe_eo(mie)
        assert s[0, 0, 0, 0] == pytest.approx(-toe, rel=1e-13)
        assert s[1, 0, 0, 0] == pytest.approx(toe, rel=1e-13)
        assert abs(s[0, 1, 0, 1]) == pytest.approx(abs(teo), rel=1e-13)
        assert abs(s[0, 0, 0, 1]) < 1e-15

    def test_l_k_bounds_and_cross_section(self):
        mie = lossy()
        Lp, Lm, Kp, Km = l_k_pm(mie)
        assert Lp >= abs(Lm) and Kp >= abs(Km)
        n = mie.orders()
        c_sca = 2 * np.pi / mie.k**2 * np.sum((2 * n + 1) * (abs(mie.a) ** 2 + abs(mie.b) ** 2))
        assert Lp == pytest.approx(mie.k**2 * c_sca / (2 * np.pi) ** 2, rel=1e-13)

    def test_lossless_K_zero(self):
        _, _, Kp, Km = l_k_pm(lossy(9.0))
        assert abs(Kp) < 1e-12 and abs(Km) < 1e-12


class TestCoincidence:
    def setup_method(self):
        self.mie = lossy()
        rng = np.random.default_rng(11)
        self.w = random_weights(rng)

    def test_fig3_antisymmetric_vanishes(self):
        spec = make_symmetrized_spectrum(-1, self.w, W0, W1, n_nodes=24)
        g = fig3_geometry()
        for L1 in (1, 2):
            for L2 in (1, 2):
                dens = coincidence_density_grid(g, self.mie, spec, L1, L2)
                base = 0.5 * np.abs(coincidence_amplitude_grid(g, self.mie, make_symmetrized_spectrum(1, self.w, W0, W1, n_nodes=24), L1, L2)).max() ** 2
                assert dens.max() <= 1e-20 * base

    def test_fig3_symmetric_same_polarization(self):
        spec = make_symmetrized_spectrum(1, self.w, W0, W1, n_nodes=24)
        g = fig3_geometry()
        toe, _ = t_oe_eo(self.mie)
        dens = coincidence_density_grid(g, self.mie, spec, 1, 1)
        np.testing.assert_allclose(dens, 2 * np.abs(spec.phi[0, 0]) ** 2 * abs(toe) ** 4, rtol=1e-12)

    def test_exchange_symmetry(self):
        rng = np.random.default_rng(12)
        g = ScatteringGeometry(*(auto_triad(rng.normal(size=3)) for _ in range(4)))
        swapped = ScatteringGeometry(g.in1, g.in2, g.out2, g.out1)
        spec = make_symmetrized_spectrum(1, self.w, W0, W1, n_nodes=12)
        om = spec.grid.omega
        for L1, L2 in ((1, 2), (2, 2)):
            a = coincidence_amplitude(g, self.mie, spec, om[2], om[7], L1, L2)
            b = coincidence_amplitude(swapped, self.mie, spec, om[7], om[2], L2, L1)
            assert a == pytest.approx(b, rel=1e-12)

    def test_grid_matches_pointwise(self):
        rng = np.random.default_rng(13)
        g = ScatteringGeometry(*(auto_triad(rng.normal(size=3)) for _ in range(4)))
        spec = make_symmetrized_spectrum(-1, self.w, W0, W1, n_nodes=10)
        grid = coincidence_amplitude_grid(g, self.mie, spec, 2, 1)
        om = spec.grid.omega
        assert grid[3, 8] == pytest.approx(coincidence_amplitude(g, self.mie, spec, om[3], om[8], 2, 1))
        assert coincidence_density(g, self.mie, spec, om[3], om[8], 2, 1) == pytest.approx(0.5 * abs(grid[3, 8]) ** 2)

    def test_class_A_factorization(self):
        g = make_class_A([0.2, -0.5, 0.3], auto_triad([0.7, 0.1, -0.2]))
        sp = make_symmetrized_spectrum(1, self.w, W0, W1, n_nodes=16)
        sm = make_symmetrized_spectrum(-1, self.w, W0, W1, n_nodes=16)
        s = g.s_matrix(self.mie)
        for L1 in (1, 2):
            for L2 in (1, 2):
                # direct-path-only amplitude
                direct = np.einsum("a,b,abij->ij", s[0, :, 0, L1 - 1], s[1, :, 1, L2 - 1], sp.phi)
                half = 0.5 * np.abs(direct) ** 2
                np.testing.assert_allclose(coincidence_density_grid(g, self.mie, sp, L1, L2), 4 * half, rtol=1e-10, atol=1e-30)
                assert coincidence_density_grid(g, self.mie, sm, L1, L2).max() <= 1e-20 * max(half.max(), 1e-300)


class TestProbabilities:
    @pytest.mark.parametrize("sigma", [1, -1])
    def test_lossless_closed_form(self, sigma):
        mie = lossy(9.0, 2.0)
        spec = make_symmetrized_spectrum(sigma, [[0.3, 1.0], [0.2, 0.5]], W0, W1)
        ov = overlap_matrix(spec)
        Lp, Lm, _, _ = l_k_pm(mie)
        for geo in ("fig3", fig3_geometry()):
            p = process_probabilities(mie, spec, geo)
            assert abs(p.p1s) < 1e-12 and abs(p.p0s) < 1e-12
            assert p.p2s == pytest.approx(Lp**2 + sigma * (1 - 4 * ov.I12_12) * Lm**2, rel=1e-10)

    def test_b1_resonance_ratio(self):
        """Near a magnetic-dipole resonance the symmetric/antisymmetric ratio is large."""
        mie = mie_set(DrudeLorentz(**DEFAULT_DRUDE_LORENTZ), 1.0, 18.05)
        ov = OverlapMatrix(1, np.zeros((2, 2, 2, 2)))
        plus = process_probabilities(mie, ov)
        minus = process_probabilities(mie, OverlapMatrix(-1, ov.I))
        assert plus.p2s / minus.p2s > 1e2
        Lp, Lm, _, _ = l_k_pm(mie)
        ratio = (Lp**2 - Lm**2) / (Lp**2 + Lm**2)
        assert ratio == pytest.approx(2 * abs(mie.a[0]) ** 2 / abs(mie.b[0]) ** 2, rel=0.2)
        assert abs(FIG4_LAMBDA_2_UM - 18.05) < 0.3

    def test_nonnegative(self):
        rng = np.random.default_rng(14)
        for _ in range(10):
            mie = mie_coefficients(complex(rng.uniform(1, 20), rng.uniform(0, 3)), rng.uniform(0.2, 3))
            g = ScatteringGeometry(*(auto_triad(rng.normal(size=3)) for _ in range(4)))
            for sigma in (1, -1):
                ov = overlap_matrix(make_symmetrized_spectrum(sigma, random_weights(rng), W0, W1, n_nodes=16))
                p = general_probabilities(g, mie, ov)
                assert min(p.p2s, p.p1s, p.p0s) >= -1e-12

    def test_scaled(self):
        p = process_probabilities(lossy(), OverlapMatrix(1, np.zeros((2, 2, 2, 2))))
        q = p.scaled(0.1)
        assert q.p2s == pytest.approx(0.01 * p.p2s)

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            process_probabilities(lossy(), OverlapMatrix(1, np.zeros((2, 2, 2, 2))), "other")
