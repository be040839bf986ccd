"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The numba path is used when numba imports cleanly and the environment
variable ``BIPHOTON_FT_DISABLE_NUMBA`` is unset (or ``0``).  Both paths
take identical arguments and are expected to agree to rounding; the
test-suite checks this and ``benchmarks/bench_kernels.py`` times them.

Modulators are passed to kernels in a flat encoding
``(kind, freq, phase, duty, table)`` produced by
:meth:`biphoton_ft.modulator.ModulatorWaveform.kernel_args`.
"""
from __future__ import annotations

import math
import os

import numpy as np

OPEN = 0
SINUSOID = 1
SQUARE = 2
TABULATED = 3

TWO_PI = 2.0 * math.pi

_disabled = os.environ.get("BIPHOTON_FT_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

NUMBA_AVAILABLE = numba is not None
USE_NUMBA = NUMBA_AVAILABLE and not _disabled

# Largest number of float64 temporaries a numpy kernel materializes at once.
_CHUNK = 1 << 21


# ---------------------------------------------------------------------------
# pure numpy
# ---------------------------------------------------------------------------

def intensity_numpy(kind, freq, phase, duty, table, t):
    t = np.asarray(t, dtype=np.float64)
    if kind == OPEN:
        return np.ones_like(t)
    if kind == SINUSOID:
        x = freq * t
        x = x - np.floor(x)
        c = np.cos(TWO_PI * x + phase)
        return c * c
    if kind == SQUARE:
        x = freq * t + phase / TWO_PI
        x = x - np.floor(x)
        return np.where(x < duty, 1.0, 0.0)
    # tabulated periodic, linear interpolation with wraparound
    n = table.shape[0]
    x = freq * t
    x = x - np.floor(x)
    pos = x * n
    i = np.minimum(pos.astype(np.int64), n - 1)
    frac = pos - i
    j = (i + 1) % n
    return table[i] * (1.0 - frac) + table[j] * frac


def thin_mask_numpy(t, delay, u1, u2, eps, m1, m2):
    p1 = eps * intensity_numpy(*m1, t)
    p2 = eps * intensity_numpy(*m2, t + delay)
    return (u1 < p1) & (u2 < p2)


def bin_counts_numpy(delta, origin, width, nbins):
    delta = np.asarray(delta, dtype=np.float64)
    idx = np.floor((delta - origin) / width)
    ok = (idx >= 0) & (idx < nbins)
    counts = np.bincount(idx[ok].astype(np.int64), minlength=nbins).astype(np.int64)
    return counts, int(delta.size - np.count_nonzero(ok))


def simpson_correlation_numpy(m1, m2, taus, period, n):
    h = period / n
    t = np.arange(n + 1, dtype=np.float64) * h
    w = np.full(n + 1, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    a = w * intensity_numpy(*m1, t)
    taus = np.asarray(taus, dtype=np.float64)
    out = np.empty(taus.size)
    step = max(1, _CHUNK // (n + 1))
    for s in range(0, taus.size, step):
        tt = taus[s:s + step, None] + t[None, :]
        out[s:s + step] = intensity_numpy(*m2, tt) @ a
    return out * (h / 3.0) / period


def cosine_sum_numpy(amps, freqs, taus):
    amps = np.asarray(amps, dtype=np.float64)
    freqs = np.asarray(freqs, dtype=np.float64)
    taus = np.asarray(taus, dtype=np.float64)
    out = np.empty(taus.size)
    step = max(1, _CHUNK // max(freqs.size, 1))
    for s in range(0, taus.size, step):
        phase = 2.0 * TWO_PI * np.outer(taus[s:s + step], freqs)
        out[s:s + step] = np.cos(phase) @ amps
    return out


# ---------------------------------------------------------------------------
# numba
# ---------------------------------------------------------------------------

if NUMBA_AVAILABLE:

    @numba.njit(cache=True, inline="always")
    def _intensity_one(kind, freq, phase, duty, table, t):
        if kind == OPEN:
            return 1.0
        if kind == SINUSOID:
            x = freq * t
            x = x - math.floor(x)
            c = math.cos(TWO_PI * x + phase)
            return c * c
        if kind == SQUARE:
            x = freq * t + phase / TWO_PI
            x = x - math.floor(x)
            return 1.0 if x < duty else 0.0
        n = table.shape[0]
        x = freq * t
        x = x - math.floor(x)
        pos = x * n
        i = min(int(pos), n - 1)
        frac = pos - i
        j = (i + 1) % n
        return table[i] * (1.0 - frac) + table[j] * frac

    @numba.njit(cache=True)
    def _intensity_nb(kind, freq, phase, duty, table, t):
        out = np.empty(t.shape[0])
        for k in range(t.shape[0]):
            out[k] = _intensity_one(kind, freq, phase, duty, table, t[k])
        return out

    @numba.njit(cache=True)
    def _thin_mask_nb(t, delay, u1, u2, eps,
                      k1, f1, p1, d1, tab1, k2, f2, p2, d2, tab2):
        out = np.empty(t.shape[0], dtype=np.bool_)
        for i in range(t.shape[0]):
            keep = u1[i] < eps * _intensity_one(k1, f1, p1, d1, tab1, t[i])
            if keep:
                keep = u2[i] < eps * _intensity_one(k2, f2, p2, d2, tab2, t[i] + delay[i])
            out[i] = keep
        return out

    @numba.njit(cache=True)
    def _bin_counts_nb(delta, origin, width, nbins):
        counts = np.zeros(nbins, dtype=np.int64)
        dropped = 0
        for i in range(delta.shape[0]):
            idx = math.floor((delta[i] - origin) / width)
            if idx >= 0 and idx < nbins:
                counts[int(idx)] += 1
            else:
                dropped += 1
        return counts, dropped

    @numba.njit(cache=True)
    def _simpson_correlation_nb(k1, f1, p1, d1, tab1, k2, f2, p2, d2, tab2,
                                taus, period, n):
        h = period / n
        a = np.empty(n + 1)
        for j in range(n + 1):
            w = 1.0 if (j == 0 or j == n) else (4.0 if j % 2 == 1 else 2.0)
            a[j] = w * _intensity_one(k1, f1, p1, d1, tab1, j * h)
        out = np.empty(taus.shape[0])
        for i in range(taus.shape[0]):
            s = 0.0
            for j in range(n + 1):
                if a[j] != 0.0:
                    s += a[j] * _intensity_one(k2, f2, p2, d2, tab2, taus[i] + j * h)
            out[i] = s * (h / 3.0) / period
        return out

    @numba.njit(cache=True)
    def _cosine_sum_nb(amps, freqs, taus):
        out = np.empty(taus.shape[0])
        for j in range(taus.shape[0]):
            s = 0.0
            for k in range(freqs.shape[0]):
                s += amps[k] * math.cos(2.0 * TWO_PI * taus[j] * freqs[k])
            out[j] = s
        return out

    def intensity_numba(kind, freq, phase, duty, table, t):
        t = np.ascontiguousarray(t, dtype=np.float64)
        return _intensity_nb(kind, freq, phase, duty, table, t.ravel()).reshape(t.shape)

    def thin_mask_numba(t, delay, u1, u2, eps, m1, m2):
        return _thin_mask_nb(t, delay, u1, u2, eps, *m1, *m2)

    def bin_counts_numba(delta, origin, width, nbins):
        counts, dropped = _bin_counts_nb(np.ascontiguousarray(delta, dtype=np.float64),
                                         float(origin), float(width), int(nbins))
        return counts, int(dropped)

    def simpson_correlation_numba(m1, m2, taus, period, n):
        taus = np.ascontiguousarray(taus, dtype=np.float64)
        return _simpson_correlation_nb(*m1, *m2, taus, float(period), int(n))

    def cosine_sum_numba(amps, freqs, taus):
        return _cosine_sum_nb(np.ascontiguousarray(amps, dtype=np.float64),
                              np.ascontiguousarray(freqs, dtype=np.float64),
                              np.ascontiguousarray(taus, dtype=np.float64))

else:  # pragma: no cover
    intensity_numba = intensity_numpy
    thin_mask_numba = thin_mask_numpy
    bin_counts_numba = bin_counts_numpy
    simpson_correlation_numba = simpson_correlation_numpy
    cosine_sum_numba = cosine_sum_numpy


if USE_NUMBA:
    intensity = intensity_numba
    thin_mask = thin_mask_numba
    bin_counts = bin_counts_numba
    simpson_correlation = simpson_correlation_numba
    cosine_sum = cosine_sum_numba
else:
    intensity = intensity_numpy
    thin_mask = thin_mask_numpy
    bin_counts = bin_counts_numpy
    simpson_correlation = simpson_correlation_numpy
    cosine_sum = cosine_sum_numpy


def backend() -> str:
    """Name of the active kernel backend (``"numba"`` or ``"numpy"``)."""
    return "numba" if USE_NUMBA else "numpy"
