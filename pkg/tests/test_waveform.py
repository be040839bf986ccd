import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from biphoton_ft.analysis import chi2_against_model
from biphoton_ft.detection import histogram_coincidences
from biphoton_ft.montecarlo import make_rng
from biphoton_ft.waveform import (BiphotonSpec, GaussianLike, RectPrecursor, Tabulated, TauSampler, g2_zero,
                                  integral_g2, phi_squared, sample_tau)

from conftest import NS, gaussian_bin_mass


class TestPhiSquared:
    def test_gaussian_peak_is_amplitude(self):
        assert phi_squared(GaussianLike(1.0, 200 * NS, 50 * NS), 200 * NS) == pytest.approx(1.0)

    @pytest.mark.parametrize("model", [
        GaussianLike(1.0, 200 * NS, 50 * NS),
        RectPrecursor(1.0, 50 * NS, 400 * NS, 4.0, 10 * NS),
        Tabulated(np.array([0.0, 100 * NS, 200 * NS]), np.array([0.0, 1.0, 0.0])),
    ])
    def test_zero_before_origin(self, model):
        assert phi_squared(model, -5 * NS) == 0.0

    def test_precursor_spike_adds_to_body_at_leading_edge(self):
        m = RectPrecursor(1.0, 50 * NS, 400 * NS, 4.0, 10 * NS)
        assert phi_squared(m, 50 * NS) == pytest.approx(5.0)

    def test_precursor_body_and_spike_decay(self):
        m = RectPrecursor(1.0, 50 * NS, 400 * NS, 4.0, 10 * NS)
        assert phi_squared(m, 60 * NS) == pytest.approx(1.0 + 4.0 * math.exp(-1.0))
        assert phi_squared(m, 40 * NS) == 0.0
        assert phi_squared(m, 460 * NS) == pytest.approx(0.0, abs=4.0 * math.exp(-41.0))

    def test_vectorized(self):
        tau = np.linspace(-100, 900, 11) * NS
        out = phi_squared(GaussianLike(2.0, 300 * NS, 80 * NS), tau)
        assert out.shape == tau.shape

    @given(st.floats(-1e-6, 2e-6, allow_nan=False))
    def test_non_negative_and_causal(self, tau):
        for m in (GaussianLike(1.0, 200 * NS, 50 * NS), RectPrecursor(1.0, 0.0, 400 * NS, 3.0, 5 * NS)):
            v = phi_squared(m, tau)
            assert v >= 0.0
            if tau < 0:
                assert v == 0.0


class TestG2Zero:
    def test_floor_only_region(self):
        spec = BiphotonSpec(RectPrecursor(1.0, 0.0, 100 * NS, 0.0, 1 * NS), 325.0, 1000 * NS)
        assert g2_zero(spec, 500 * NS) == pytest.approx(105625.0)

    def test_no_floor_at_zero_rate(self):
        model = GaussianLike(3.0, 200 * NS, 50 * NS)
        spec = BiphotonSpec(model, 0.0, 1000 * NS)
        tau = np.linspace(0, 900, 37) * NS
        np.testing.assert_array_equal(g2_zero(spec, tau), phi_squared(model, tau))

    def test_peak_plus_floor(self):
        spec = BiphotonSpec(GaussianLike(1e6, 200 * NS, 50 * NS), 325.0, 1000 * NS)
        assert g2_zero(spec, 200 * NS) == pytest.approx(1105625.0)

    def test_floor_only_inside_window(self):
        spec = BiphotonSpec(GaussianLike(1e6, 200 * NS, 50 * NS), 325.0, 1000 * NS)
        assert g2_zero(spec, -1 * NS) == 0.0
        assert g2_zero(spec, 1001 * NS) < 1e-40  # Gaussian tail only, no floor

    @given(st.floats(0.0, 1e-6))
    def test_at_least_floor_in_window(self, tau):
        spec = BiphotonSpec(GaussianLike(10.0, 200 * NS, 50 * NS), 325.0, 1000 * NS)
        assert g2_zero(spec, tau) >= 325.0 ** 2

    def test_support_must_contain_waveform(self):
        with pytest.raises(ValueError):
            BiphotonSpec(GaussianLike(1.0, 500 * NS, 100 * NS), 325.0, 600 * NS)


class TestIntegral:
    def test_gaussian_area(self):
        a, c, s = 7.0, 400 * NS, 50 * NS
        spec = BiphotonSpec(GaussianLike(a, c, s), 0.0, 1000 * NS)
        assert integral_g2(spec) == pytest.approx(a * s * math.sqrt(2 * math.pi), rel=1e-6)

    def test_flat_floor(self):
        spec = BiphotonSpec(GaussianLike(0.0, 200 * NS, 50 * NS), 325.0, 800 * NS)
        assert integral_g2(spec) == pytest.approx(325.0 ** 2 * 800 * NS, rel=1e-12)

    def test_rect_body(self):
        spec = BiphotonSpec(RectPrecursor(1.0, 0.0, 400 * NS, 0.0, 1 * NS), 0.0, 400 * NS)
        assert integral_g2(spec) == pytest.approx(4.0e-7, rel=1e-9)

    def test_rect_with_spike_closed_form(self):
        m = RectPrecursor(2.0, 50 * NS, 400 * NS, 4.0, 10 * NS)
        spec = BiphotonSpec(m, 325.0, 1000 * NS)
        exact = 2.0 * 400 * NS + 4.0 * 10 * NS * (1 - math.exp(-950 / 10)) + 325.0 ** 2 * 1000 * NS
        assert integral_g2(spec) == pytest.approx(exact, rel=1e-8)

    @pytest.mark.parametrize("model", [
        GaussianLike(1.0, 300 * NS, 80 * NS),
        RectPrecursor(1.0, 50 * NS, 400 * NS, 4.0, 10 * NS),
        Tabulated(np.linspace(0, 500, 11) * NS, np.array([0, 1, 3, 2, 5, 4, 2, 1, 0.5, 0.2, 0.0])),
    ])
    def test_grid_convergence(self, model):
        spec = BiphotonSpec(model, 325.0, 800 * NS)
        coarse = integral_g2(spec, n_per_segment=64)
        fine = integral_g2(spec, n_per_segment=640)
        assert coarse == pytest.approx(fine, rel=1e-6)

    def test_normalized_integral_equals_rate(self, gaussian_spec):
        assert integral_g2(gaussian_spec) == pytest.approx(325.0, rel=1e-12)


class TestSampling:
    def test_uniform_body_mean(self):
        spec = BiphotonSpec(RectPrecursor(1.0, 0.0, 400 * NS, 0.0, 1 * NS), 0.0, 400 * NS)
        n = 100_000
        x = sample_tau(spec, make_rng(1), n)
        assert abs(x.mean() - 200 * NS) < 3 * 115.5 * NS / math.sqrt(n)
        assert x.min() >= 0 and x.max() <= 400 * NS

    def test_truncated_gaussian_ks(self):
        c, s, tmax = 200 * NS, 50 * NS, 1000 * NS
        spec = BiphotonSpec(GaussianLike(1.0, c, s), 0.0, tmax)
        x = sample_tau(spec, make_rng(2), 100_000)
        dist = stats.truncnorm((0 - c) / s, (tmax - c) / s, loc=c, scale=s)
        assert stats.kstest(x, dist.cdf).pvalue > 0.01

    def test_empty_distribution(self):
        spec = BiphotonSpec(GaussianLike(0.0, 200 * NS, 50 * NS), 0.0, 600 * NS)
        with pytest.raises(ValueError, match="empty distribution"):
            TauSampler(spec)

    def test_histogram_shape_gaussian_with_floor(self):
        c, s, tmax, rate = 300 * NS, 80 * NS, 1000 * NS, 325.0
        amp = 5e5
        spec = BiphotonSpec(GaussianLike(amp, c, s), rate, tmax)
        x = sample_tau(spec, make_rng(3), 1_000_000)
        h = histogram_coincidences(x, 1 * NS, (0.0, tmax))
        expected = amp * gaussian_bin_mass(h.edges, c, s) + rate ** 2 * NS
        chi, dof = chi2_against_model(h.counts, expected)
        assert dof > 500
        assert 0.8 <= chi <= 1.2

    def test_histogram_shape_precursor(self):
        b, start, length, spike, decay = 1.0, 50 * NS, 400 * NS, 4.0, 10 * NS
        spec = BiphotonSpec(RectPrecursor(b, start, length, spike, decay), 0.0, 500 * NS)
        x = sample_tau(spec, make_rng(4), 1_000_000)
        h = histogram_coincidences(x, 1 * NS, (0.0, 500 * NS))
        lo, hi = h.edges[:-1], h.edges[1:]
        body = b * np.clip(np.minimum(hi, start + length) - np.maximum(lo, start), 0, None)
        a, z = np.maximum(lo, start), np.maximum(hi, start)
        spike_mass = spike * decay * (np.exp(-(a - start) / decay) - np.exp(-(z - start) / decay))
        chi, dof = chi2_against_model(h.counts, body + spike_mass)
        assert 0.8 <= chi <= 1.2

    def test_sampler_reproducible(self, gaussian_spec):
        a = sample_tau(gaussian_spec, make_rng(9), 1000)
        b = sample_tau(gaussian_spec, make_rng(9), 1000)
        np.testing.assert_array_equal(a, b)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 10.0), st.floats(100.0, 600.0), st.floats(10.0, 60.0))
def test_scaled_model_scales_integral(k, center_ns, width_ns):
    model = GaussianLike(1.0, center_ns * NS, width_ns * NS)
    a = integral_g2(BiphotonSpec(model, 0.0, 1000 * NS))
    b = integral_g2(BiphotonSpec(model.scaled(k), 0.0, 1000 * NS))
    assert b == pytest.approx(k * a, rel=1e-12)
