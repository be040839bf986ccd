import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from biphoton_ft import _quad
from biphoton_ft.analysis import chi2_against_model
from biphoton_ft.detection import histogram_coincidences
from biphoton_ft.modulator import ModulatorPair, Open, Sinusoid, modulator_correlation_analytic
from biphoton_ft.montecarlo import (CoincidenceEvents, SimConfig, expected_coincidence_rate, generate_pairs,
                                    make_rng, read_events_csv, simulate, thin_and_detect, write_events_csv)
from biphoton_ft.waveform import BiphotonSpec, GaussianLike, TauSampler, g2_zero, integral_g2

from conftest import MHZ, NS


def bare_spec(rate=325.0):
    return BiphotonSpec(GaussianLike(1.0, 200 * NS, 50 * NS), rate, 600 * NS)


class TestPairGeneration:
    def test_poisson_count(self):
        cfg = SimConfig(bare_spec(), duration=80.0, seed=4)
        t, tau = generate_pairs(cfg, make_rng(cfg.seed))
        assert abs(t.size - 26000) <= 3 * math.sqrt(26000)
        assert np.all(np.diff(t) >= 0) and t.min() >= 0 and t.max() < 80.0
        assert tau.min() >= 0 and tau.max() <= 600 * NS

    def test_zero_rate_is_empty(self):
        cfg = SimConfig(bare_spec(0.0), duration=80.0)
        assert len(simulate(cfg)) == 0

    def test_bitwise_deterministic(self, gaussian_spec, matched35):
        cfg = SimConfig(gaussian_spec, matched35, duration=50.0, delay=175 * NS, seed=12345)
        a, b = simulate(cfg, stream=3), simulate(cfg, stream=3)
        assert a.t_signal.tobytes() == b.t_signal.tobytes()
        assert a.delta.tobytes() == b.delta.tobytes()

    def test_streams_differ(self, gaussian_spec):
        cfg = SimConfig(gaussian_spec, duration=10.0, seed=1)
        assert not np.array_equal(simulate(cfg, 0).t_signal[:10], simulate(cfg, 1).t_signal[:10])

    @pytest.mark.parametrize("kwargs", [dict(duration=0.0), dict(efficiency=1.5), dict(delay=-1e-9),
                                        dict(seed=-1)])
    def test_invalid_config(self, kwargs):
        with pytest.raises(ValueError):
            SimConfig(bare_spec(), **kwargs)


class TestThinning:
    N = 1_000_000

    def _pairs(self, spec, seed):
        rng = make_rng(seed)
        t = np.sort(rng.random(self.N) * self.N / 325.0)
        tau = TauSampler(spec).sample(rng, self.N)
        return t, tau, rng

    def test_open_full_efficiency_keeps_everything(self, gaussian_spec):
        cfg = SimConfig(gaussian_spec, ModulatorPair(Open(), Open()), efficiency=1.0, delay=175 * NS)
        t, tau, rng = self._pairs(gaussian_spec, 1)
        ev = thin_and_detect(t, tau, cfg, rng)
        assert len(ev) == self.N
        np.testing.assert_array_equal(ev.delta, 175 * NS + tau)

    def test_one_open_channel_halves(self, gaussian_spec):
        cfg = SimConfig(gaussian_spec, ModulatorPair(Open(), Sinusoid(35 * MHZ)), efficiency=1.0, delay=175 * NS)
        t, tau, rng = self._pairs(gaussian_spec, 2)
        frac = len(thin_and_detect(t, tau, cfg, rng)) / self.N
        assert abs(frac - 0.5) < 3 * 0.0005

    def test_matched_survival_matches_quadrature(self, gaussian_spec, matched35):
        delay = 175 * NS
        cfg = SimConfig(gaussian_spec, matched35, efficiency=1.0, delay=delay)
        t, tau, rng = self._pairs(gaussian_spec, 3)
        frac = len(thin_and_detect(t, tau, cfg, rng)) / self.N

        def weight(x):
            return modulator_correlation_analytic(matched35, delay + x) * g2_zero(gaussian_spec, x)
        num, _ = integrate.quad(weight, 0, 600 * NS, limit=400, points=[200 * NS])
        den, _ = integrate.quad(lambda x: g2_zero(gaussian_spec, x), 0, 600 * NS, points=[200 * NS])
        p = num / den
        assert abs(frac - p) < 3 * math.sqrt(p * (1 - p) / self.N)

    @settings(max_examples=20, deadline=None)
    @given(st.floats(0.0, 1.0), st.integers(0, 1000))
    def test_thinning_only_removes(self, eps, seed):
        cfg = SimConfig(bare_spec(), ModulatorPair(Sinusoid(20 * MHZ), Sinusoid(20 * MHZ)), duration=2.0,
                        efficiency=eps, delay=100 * NS, seed=seed)
        rng = make_rng(seed)
        t, tau = generate_pairs(cfg, rng)
        ev = thin_and_detect(t, tau, cfg, rng)
        assert len(ev) <= t.size
        assert np.all(np.isin(ev.t_signal, t))


class TestEmittedHistogram:
    def test_delays_inside_window(self, gaussian_spec, matched35):
        cfg = SimConfig(gaussian_spec, matched35, duration=200.0, delay=175 * NS, seed=2)
        ev = simulate(cfg)
        assert ev.delta.min() >= 175 * NS
        assert ev.delta.max() <= (175 + 600) * NS

    @pytest.mark.parametrize("delay", [0.0, 175 * NS])
    def test_shape_matches_modulated_g2(self, gaussian_spec, matched35, delay):
        cfg = SimConfig(gaussian_spec, matched35, duration=1e6 / 325.0, efficiency=1.0, delay=delay, seed=21)
        ev = simulate(cfg)
        h = histogram_coincidences(ev.delta - delay, 1 * NS, (0.0, 600 * NS))
        expected = np.empty(h.counts.size)
        for i, (a, b) in enumerate(zip(h.edges[:-1], h.edges[1:])):
            expected[i] = _quad.integrate(
                lambda x: modulator_correlation_analytic(matched35, delay + x) * g2_zero(gaussian_spec, x),
                [a, b], 8)
        chi, dof = chi2_against_model(h.counts, expected)
        assert dof > 300
        assert 0.8 <= chi <= 1.2

    def test_peak_bin_matches_rate(self, million_pair_config):
        cfg = million_pair_config
        ev = simulate(cfg)
        h = histogram_coincidences(ev, 1 * NS, (0.0, 1000 * NS))
        k = int(np.argmax(h.counts))
        rate = expected_coincidence_rate(cfg, h.centers[k] - cfg.delay, 1 * NS)
        mu = rate * cfg.duration
        assert abs(h.counts[k] - mu) < 3 * math.sqrt(mu)


class TestExpectedRate:
    def test_half_efficiency(self):
        spec = BiphotonSpec(GaussianLike(4e5, 200 * NS, 50 * NS), 0.0, 600 * NS)
        cfg = SimConfig(spec, efficiency=0.5)
        assert expected_coincidence_rate(cfg, 200 * NS, 1 * NS) == pytest.approx(1.0e-4, rel=1e-12)

    def test_unit_efficiency_open(self, gaussian_spec):
        cfg = SimConfig(gaussian_spec, efficiency=1.0, delay=175 * NS)
        tau = np.linspace(0, 600, 31) * NS
        np.testing.assert_allclose(expected_coincidence_rate(cfg, tau, 1 * NS), g2_zero(gaussian_spec, tau) * 1e-9,
                                   rtol=1e-14)

    def test_total_rate_normalized(self, gaussian_spec):
        cfg = SimConfig(gaussian_spec, efficiency=0.7)
        total = _quad.integrate(lambda x: expected_coincidence_rate(cfg, x, 1.0), gaussian_spec.breakpoints())
        assert total == pytest.approx(0.49 * 325.0, rel=1e-9)
        assert integral_g2(gaussian_spec) == pytest.approx(325.0)


class TestMergeAndFiles:
    def test_half_runs_match_full_run(self, gaussian_spec, matched35):
        full_t = 400.0
        half = SimConfig(gaussian_spec, matched35, duration=full_t / 2, delay=175 * NS, seed=8)
        a = simulate(half, stream=0)
        b = simulate(half, stream=1).shifted(full_t / 2)
        merged = a.merge(b)
        full = simulate(half.with_(duration=full_t), stream=2)
        assert stats.ks_2samp(merged.delta, full.delta).pvalue > 0.01
        assert stats.ks_2samp(merged.t_signal, full.t_signal).pvalue > 0.01
        assert np.all(np.diff(merged.t_signal) >= 0)

    def test_merge_commutative_and_associative(self, gaussian_spec):
        cfg = SimConfig(gaussian_spec, duration=5.0, seed=3)
        a, b, c = (simulate(cfg, s) for s in range(3))
        ab_c, a_bc = a.merge(b).merge(c), a.merge(b.merge(c))
        np.testing.assert_array_equal(ab_c.t_signal, a_bc.t_signal)
        np.testing.assert_array_equal(a.merge(b).delta, b.merge(a).delta)

    def test_empty(self):
        assert len(CoincidenceEvents.empty()) == 0

    def test_csv_round_trip(self, tmp_path, gaussian_spec, matched35):
        cfg = SimConfig(gaussian_spec, matched35, duration=20.0, delay=175 * NS, seed=5)
        ev = simulate(cfg)
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_events_csv(p1, ev)
        back = read_events_csv(p1)
        write_events_csv(p2, back)
        assert p1.read_bytes() == p2.read_bytes()
        assert p1.read_text().splitlines()[0] == "t_signal_ns,t_idler_ns"
        np.testing.assert_allclose(back.t_signal, ev.t_signal, atol=1e-12, rtol=0)
        np.testing.assert_allclose(back.delta, ev.delta, atol=2e-12, rtol=0)
