import numpy as np
import pytest

from biphoton_ft import io
from biphoton_ft.detection import FrequencyTrace, Histogram, default_frequency_grid
from biphoton_ft.reconstruct import Reconstruction

from conftest import NS


def test_histogram_round_trip(tmp_path):
    h = Histogram(1 * NS, 0.0, np.random.default_rng(0).poisson(50, 1000))
    p1, p2 = tmp_path / "h1.csv", tmp_path / "h2.csv"
    io.write_histogram(p1, h)
    back = io.read_histogram(p1)
    io.write_histogram(p2, back)
    assert p1.read_bytes() == p2.read_bytes()
    assert p1.read_text().splitlines()[:2] == ["delta_ns,counts", f"0.000,{h.counts[0]}"]
    np.testing.assert_array_equal(back.counts, h.counts)
    assert back.width == pytest.approx(h.width) and back.origin == pytest.approx(h.origin)


def test_float_histogram_round_trip(tmp_path):
    h = Histogram(2 * NS, 100 * NS, np.linspace(0.1, 7.3, 50) ** 2)
    io.write_histogram(tmp_path / "h.csv", h)
    back = io.read_histogram(tmp_path / "h.csv")
    np.testing.assert_array_equal(back.counts, h.counts)


def test_trace_round_trip(tmp_path):
    f = default_frequency_grid()
    tr = FrequencyTrace(f, np.arange(f.size) * 3 + 1000)
    p1, p2 = tmp_path / "t1.csv", tmp_path / "t2.csv"
    io.write_trace(p1, tr)
    back = io.read_trace(p1)
    io.write_trace(p2, back)
    assert p1.read_bytes() == p2.read_bytes()
    assert p1.read_text().splitlines()[0] == "applied_freq_mhz,counts"
    np.testing.assert_allclose(back.freqs, f, rtol=0, atol=1e-3)
    np.testing.assert_array_equal(back.counts, tr.counts)


def test_reconstruction_round_trip(tmp_path):
    tau = np.arange(0, 1000) * NS
    r = Reconstruction(tau, np.sin(tau / 37e-9) * 123.456)
    p1, p2 = tmp_path / "r1.csv", tmp_path / "r2.csv"
    io.write_reconstruction(p1, r)
    back = io.read_reconstruction(p1)
    io.write_reconstruction(p2, back)
    assert p1.read_bytes() == p2.read_bytes()
    assert p1.read_text().splitlines()[0] == "tau_ns,value"
    np.testing.assert_array_equal(back.values, r.values)


def test_metrics_round_trip(tmp_path):
    m = {"nrmse": 0.0123456789, "n_points": 980, "source": "roundtrip", "flag": True}
    io.write_metrics(tmp_path / "m.txt", m)
    assert io.read_metrics(tmp_path / "m.txt") == m
    assert (tmp_path / "m.txt").read_text().splitlines()[1] == "n_points=980"


def test_wrong_header(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        io.read_histogram(p)
