"""Fourier cosine reconstruction of the correlation function from a sweep.

With matched sinusoids at applied frequency ``f`` the first slow bin
collects ``(1/8) * int [2 + cos(2 w tau)] G2_0(tau) dtau`` with
``w = 2 pi f``.  Removing the constant part leaves the cosine transform
``F(2w)`` sampled on the sweep grid; the inverse cosine transform returns
``G2_0`` up to a vertical scale, fixed afterwards by a one-point fit to a
direct histogram.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate

from . import _kernels
from .detection import FrequencyTrace, Histogram
from .waveform import BiphotonSpec, g2_zero, integral_g2

__all__ = [
    "Reconstruction",
    "CompareMetrics",
    "forward_transform",
    "synthetic_trace",
    "model_histogram",
    "correct_static_point",
    "remove_dc",
    "cosine_transform",
    "one_point_scale",
    "compare",
    "fwhm",
    "DC_GUARD",
]

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
DC_GUARD = 20e-9
DC_STRATEGIES = ("tail-mean", "global-mean")


@dataclass(eq=False)
class Reconstruction:
    """Reconstructed correlation on a uniform delay grid starting at 0."""

    tau: np.ndarray
    values: np.ndarray
    scale: float = 1.0
    dc: float = 0.0
    source: str = ""


@dataclass(frozen=True)
class CompareMetrics:
    nrmse: float
    peak_shift: float
    fwhm_diff: float
    n_points: int

    def as_dict(self) -> dict:
        return {"nrmse": self.nrmse, "peak_shift_ns": self.peak_shift * 1e9,
                "fwhm_diff_ns": self.fwhm_diff * 1e9, "n_points": self.n_points}


def forward_transform(spec: BiphotonSpec, freq, delay: float = 0.0, *, epsrel: float = 1e-11):
    """``sqrt(2/pi) * int_0^Tmax G2_0(tau) cos(2 w (tau + delay)) dtau``.

    ``freq`` is the applied frequency (``w = 2 pi f``), scalar or array.
    Each waveform segment is integrated with QUADPACK's oscillatory rule;
    ``delay`` shifts the curve to the detector delay axis.
    """
    edges = spec.breakpoints()
    g = lambda t: g2_zero(spec, t)  # noqa: E731
    epsabs = 1e-14 * max(integral_g2(spec), 1e-300)
    freq_arr = np.atleast_1d(np.asarray(freq, dtype=np.float64))
    out = np.empty(freq_arr.size)
    for i, f in enumerate(freq_arr):
        w = 4.0 * math.pi * f
        c = s = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            if w == 0.0:
                c += integrate.quad(g, a, b, epsabs=epsabs, epsrel=epsrel, limit=500)[0]
                continue
            c += integrate.quad(g, a, b, weight="cos", wvar=w, epsabs=epsabs, epsrel=epsrel, limit=500)[0]
            if delay:
                s += integrate.quad(g, a, b, weight="sin", wvar=w, epsabs=epsabs, epsrel=epsrel, limit=500)[0]
        out[i] = SQRT_2_OVER_PI * (c * math.cos(w * delay) - s * math.sin(w * delay))
    return float(out[0]) if np.ndim(freq) == 0 else out


def synthetic_trace(spec: BiphotonSpec, f_grid, delay: float = 0.0, dc: float = 0.0) -> FrequencyTrace:
    """Noise-free trace ``dc + F(2w)`` on ``f_grid``."""
    f_grid = np.asarray(f_grid, dtype=np.float64)
    counts = dc + forward_transform(spec, f_grid, delay)
    return FrequencyTrace(f_grid, counts, label="synthetic forward transform")


def model_histogram(spec: BiphotonSpec, width: float, range: tuple[float, float],
                    delay: float = 0.0) -> Histogram:
    """``G2_0`` at the bin centers of a histogram on the detector delay axis."""
    nbins = int(round((range[1] - range[0]) / width))
    h = Histogram(float(width), float(range[0]), np.zeros(nbins))
    h.counts = np.asarray(g2_zero(spec, h.centers - delay), dtype=np.float64)
    return h


def correct_static_point(trace: FrequencyTrace) -> FrequencyTrace:
    """Map a static ``f = 0`` point onto the ``f -> 0+`` limit of the cosine law.

    With both modulators frozen at phase ``p`` the zero-frequency point
    collects ``cos(p)^4 * int G2_0`` instead of ``(3/8) * int G2_0``.  Left
    alone, that excess enters the trapezoidal inverse transform as a flat
    offset under the whole reconstruction.  Traces without ``static_phase``
    (or not starting at 0 Hz) are returned unchanged.
    """
    if trace.static_phase is None or trace.freqs[0] != 0.0:
        return trace
    transmission = math.cos(trace.static_phase) ** 4
    if transmission < 1e-6:
        raise ValueError("static zero-frequency point carries no signal")
    counts = trace.counts.astype(np.float64)
    counts[0] *= 0.375 / transmission
    return replace(trace, counts=counts, static_phase=None)


def remove_dc(trace: FrequencyTrace, strategy: str = "tail-mean", tail_fraction: float = 0.2) -> FrequencyTrace:
    """Subtract a constant estimate of the DC term from every point.

    ``tail-mean`` averages the highest ``tail_fraction`` of the grid, where
    the transform of a smooth waveform has died out; ``global-mean`` uses
    all points.  A static zero-frequency point is first corrected with
    :func:`correct_static_point`.
    """
    n = trace.counts.size
    if n < 10:
        raise ValueError("remove_dc needs at least 10 frequency points")
    trace = correct_static_point(trace)
    counts = trace.counts.astype(np.float64)
    if strategy == "tail-mean":
        k = max(1, int(math.ceil(tail_fraction * n)))
        dc = float(np.mean(counts[-k:]))
    elif strategy == "global-mean":
        dc = float(np.mean(counts))
    else:
        raise ValueError(f"unknown DC strategy {strategy!r}; expected one of {DC_STRATEGIES}")
    return replace(trace, counts=counts - dc, dc=trace.dc + dc)


def _uniform_step(freqs: np.ndarray) -> float:
    if freqs.size < 2:
        raise ValueError("uniform grid required")
    d = np.diff(freqs)
    if not np.allclose(d, d[0], rtol=1e-9, atol=0.0):
        raise ValueError("uniform grid required")
    return float((freqs[-1] - freqs[0]) / (freqs.size - 1))


def cosine_transform(trace: FrequencyTrace, tau) -> Reconstruction:
    """Trapezoidal inverse cosine transform of a (DC-removed) trace.

    ``G(tau_j) = sum_k c_k N_k cos(2 * 2 pi f_k * tau_j) * dw`` with
    ``dw = 2 pi df`` and trapezoid weights ``c_k`` (1/2 at both ends).
    Unit normalization is left to :func:`one_point_scale`.
    """
    tau = np.asarray(tau, dtype=np.float64)
    step = _uniform_step(trace.freqs)
    weights = np.ones(trace.freqs.size)
    weights[0] = weights[-1] = 0.5
    amps = weights * trace.counts.astype(np.float64) * (2.0 * math.pi * step)
    values = _kernels.cosine_sum(amps, trace.freqs, tau)
    return Reconstruction(tau, values, 1.0, trace.dc, trace.label)


def _peak_point(reference: Histogram, guard: float) -> tuple[float, float]:
    centers = reference.centers
    ok = centers >= guard
    if not np.any(ok):
        raise ValueError("reference histogram has no bins outside the DC guard zone")
    idx = np.flatnonzero(ok)[np.argmax(reference.counts[ok])]
    return float(centers[idx]), float(reference.counts[idx])


def one_point_scale(recon: Reconstruction, reference: Histogram, guard: float = DC_GUARD) -> Reconstruction:
    """Scale ``recon`` to match ``reference`` at the reference peak."""
    tau_star, peak = _peak_point(reference, guard)
    if not recon.tau[0] <= tau_star <= recon.tau[-1]:
        raise ValueError("reference peak lies outside the reconstruction grid")
    value = float(np.interp(tau_star, recon.tau, recon.values))
    if not value > 0:
        raise ValueError("unusable scale point")
    s = peak / value
    return replace(recon, values=recon.values * s, scale=recon.scale * s)


def _half_max_crossings(x: np.ndarray, y: np.ndarray):
    """Linear half-maximum crossings either side of the global peak, or None."""
    p = int(np.argmax(y))
    half = 0.5 * y[p]
    left = p
    while left > 0 and y[left] > half:
        left -= 1
    right = p
    while right < y.size - 1 and y[right] > half:
        right += 1
    if y[left] > half or y[right] > half:
        return None
    xl = np.interp(half, [y[left], y[left + 1]], [x[left], x[left + 1]])
    xr = np.interp(half, [y[right], y[right - 1]], [x[right], x[right - 1]])
    return float(xl), float(xr)


def fwhm(x, y) -> float:
    """Full width at half maximum around the global peak (linear crossings)."""
    crossings = _half_max_crossings(np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64))
    if crossings is None:
        return math.nan
    return crossings[1] - crossings[0]


def peak_location(x, y) -> float:
    """Centre of the half-maximum window around the global peak.

    On a broad, flat-topped peak the raw arg-max wanders with the noise on
    the top; the two half-maximum crossings sit on the steep flanks and are
    far better determined.  Falls back to the arg-max when the peak does
    not drop below half maximum on both sides.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    crossings = _half_max_crossings(x, y)
    if crossings is None:
        return float(x[np.argmax(y)])
    return 0.5 * (crossings[0] + crossings[1])


def compare(recon: Reconstruction, direct: Histogram, guard: float = DC_GUARD) -> CompareMetrics:
    """Agreement metrics of a scaled reconstruction against a direct histogram.

    NRMSE is the RMS difference over the peak of the histogram; the peak
    shift compares :func:`peak_location` of both curves.  The histogram is
    interpolated from its bin centers onto the reconstruction grid.  Points with ``tau < guard`` (the DC spike) are
    excluded from every metric.
    """
    centers = direct.centers
    ok = (recon.tau >= centers[0]) & (recon.tau <= centers[-1]) & (recon.tau >= guard)
    if not np.any(ok):
        raise ValueError("reconstruction and histogram do not overlap")
    tau = recon.tau[ok]
    rec = recon.values[ok]
    ref = np.interp(tau, centers, direct.counts.astype(np.float64))
    peak = float(np.max(ref))
    if not peak > 0:
        raise ValueError("direct histogram is empty over the overlap")
    nrmse = float(np.sqrt(np.mean((rec - ref) ** 2)) / peak)
    shift = peak_location(tau, rec) - peak_location(tau, ref)
    width_diff = fwhm(tau, rec) - fwhm(tau, ref)
    return CompareMetrics(nrmse, shift, width_diff, int(tau.size))
