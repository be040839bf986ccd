"""Statistics on histograms and traces: shape tests, oscillation fits, ripple period."""
from __future__ import annotations

import math

import numpy as np
from scipy import optimize

from .detection import FrequencyTrace, Histogram
from .reconstruct import correct_static_point, remove_dc

__all__ = [
    "chi2_two_sample",
    "chi2_against_model",
    "fit_oscillation_frequency",
    "dominant_ripple_period",
]


def chi2_two_sample(h1: Histogram, h2: Histogram, min_count: int = 10) -> tuple[float, int]:
    """Chi-square per degree of freedom for equal *shape* of two histograms.

    Uses the unequal-totals statistic
    ``sum (sqrt(N2/N1) n1 - sqrt(N1/N2) n2)^2 / (n1 + n2)`` over bins with
    ``n1 + n2 >= min_count``; ``dof = bins used - 1``.
    """
    n1 = np.asarray(h1.counts, dtype=np.float64)
    n2 = np.asarray(h2.counts, dtype=np.float64)
    if n1.shape != n2.shape:
        raise ValueError("histograms have different binning")
    used = (n1 + n2) >= min_count
    a, b = n1[used], n2[used]
    k1 = math.sqrt(b.sum() / a.sum())
    k2 = 1.0 / k1
    chi2 = float(np.sum((k1 * a - k2 * b) ** 2 / (a + b)))
    dof = int(used.sum()) - 1
    return chi2 / dof, dof


def chi2_against_model(observed, expected, min_expected: float = 10.0) -> tuple[float, int]:
    """Pearson chi-square per dof of counts against expected counts, after
    scaling ``expected`` to the observed total over the used bins."""
    obs = np.asarray(observed, dtype=np.float64)
    exp = np.asarray(expected, dtype=np.float64)
    exp = exp * obs.sum() / exp.sum()
    used = exp >= min_expected
    chi2 = float(np.sum((obs[used] - exp[used]) ** 2 / exp[used]))
    dof = int(used.sum()) - 1
    return chi2 / dof, dof


def fit_oscillation_frequency(hist: Histogram, baseline, f_range=(5e6, 300e6),
                              min_fraction: float = 0.05) -> tuple[float, float]:
    """Frequency (Hz) of the modulation riding on an unmodulated ``baseline``.

    ``hist.counts / baseline`` is fitted with ``a + b cos(2 pi nu tau + psi)``
    over bins where the baseline exceeds ``min_fraction`` of its peak.  The
    starting ``nu`` comes from a weighted periodogram scan of ``f_range``.
    Returns ``(nu, stderr)``.
    """
    base = np.asarray(baseline, dtype=np.float64)
    use = base >= min_fraction * base.max()
    x = hist.centers[use]
    counts = np.asarray(hist.counts, dtype=np.float64)[use]
    ratio = counts / base[use]
    sigma = np.sqrt(np.maximum(counts, 1.0)) / base[use]
    w = 1.0 / sigma ** 2
    y = ratio - np.average(ratio, weights=w)

    nus = np.linspace(f_range[0], f_range[1], 20000)
    power = np.abs(np.exp(-2j * np.pi * np.outer(nus, x)) @ (w * y)) ** 2
    nu0 = float(nus[np.argmax(power)])
    c = (w * y) @ np.cos(2 * np.pi * nu0 * x)
    s = (w * y) @ np.sin(2 * np.pi * nu0 * x)
    amp0 = 2.0 * math.hypot(c, s) / w.sum()
    psi0 = math.atan2(-s, c)

    def model(t, a, b, nu, psi):
        return a + b * np.cos(2 * np.pi * nu * t + psi)

    p0 = (float(np.average(ratio, weights=w)), amp0, nu0, psi0)
    popt, pcov = optimize.curve_fit(model, x, ratio, p0=p0, sigma=sigma, absolute_sigma=True,
                                    maxfev=20000)
    return float(popt[2]), float(math.sqrt(pcov[2, 2]))


def dominant_ripple_period(trace: FrequencyTrace, q_range=None, points: int = 20000) -> float:
    """Period (Hz, applied-frequency axis) of the strongest ripple in a trace.

    After DC removal the trace is scanned with a dense periodogram over
    ripple "quefrencies" ``q`` (s), ``P(q) = |sum_k y_k exp(-2 pi i q f_k)|^2``.
    A waveform concentrated at detector delay ``T`` ripples as
    ``cos(2 pi (2T) f)``, so the peak sits at ``q = 2T`` and the returned
    period is ``1 / q``.
    """
    trace = correct_static_point(trace)
    y = remove_dc(trace, "global-mean").counts
    f = trace.freqs
    span = float(f[-1] - f[0])
    if q_range is None:
        q_range = (3.0 / span, 0.5 / float(np.min(np.diff(f))))
    qs = np.linspace(q_range[0], q_range[1], points)
    power = np.abs(np.exp(-2j * np.pi * np.outer(qs, f)) @ y) ** 2
    return float(1.0 / qs[np.argmax(power)])
