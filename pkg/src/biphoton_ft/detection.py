"""TDC histogramming, slow-detector integration and the frequency sweep."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels, _quad
from .modulator import ModulatorPair, Sinusoid
from .montecarlo import CoincidenceEvents, SimConfig, simulate
from .waveform import TauSampler, g2_zero

__all__ = [
    "Histogram",
    "FrequencyTrace",
    "histogram_coincidences",
    "integrate_first_slow_bin",
    "run_frequency_sweep",
    "expected_first_bin_count",
    "default_frequency_grid",
    "SLOW_BIN",
]

SLOW_BIN = 1e-6


@dataclass(eq=False)
class Histogram:
    """Coincidence counts in contiguous bins ``origin + k * width`` (s).

    ``counts`` are integers for simulated data; expected (model) histograms
    may carry float counts.
    """

    width: float
    origin: float
    counts: np.ndarray
    integration_time: float = 0.0
    dropped: int = 0

    @property
    def edges(self) -> np.ndarray:
        return self.origin + self.width * np.arange(self.counts.size + 1)

    @property
    def centers(self) -> np.ndarray:
        return self.origin + self.width * (np.arange(self.counts.size) + 0.5)

    def total(self):
        return self.counts.sum()

    def __add__(self, other: "Histogram") -> "Histogram":
        if (self.width, self.origin, self.counts.size) != (other.width, other.origin, other.counts.size):
            raise ValueError("histograms have different binning")
        return Histogram(self.width, self.origin, self.counts + other.counts,
                         self.integration_time + other.integration_time,
                         self.dropped + other.dropped)


@dataclass(eq=False)
class FrequencyTrace:
    """First-slow-bin counts versus applied modulation frequency (Hz).

    The correlation function is modulated at twice the applied frequency.
    ``dc`` records what :func:`biphoton_ft.reconstruct.remove_dc` subtracted.
    ``static_phase`` is set when the ``f = 0`` point was taken with both
    modulators held static at that common phase, so its transmission is
    ``cos(phase)^4`` instead of the ``3/8`` limit of the cosine law.
    """

    freqs: np.ndarray
    counts: np.ndarray
    integration_time: float = 0.0
    config: dict = field(default_factory=dict)
    label: str = ""
    dc: float = 0.0
    static_phase: float | None = None

    def __post_init__(self):
        self.freqs = np.asarray(self.freqs, dtype=np.float64)
        self.counts = np.asarray(self.counts)
        if self.freqs.shape != self.counts.shape or self.freqs.ndim != 1:
            raise ValueError("freqs and counts must be 1-D arrays of equal length")
        if np.any(np.diff(self.freqs) <= 0):
            raise ValueError("frequencies must be strictly increasing")

    @property
    def observed_freqs(self) -> np.ndarray:
        return 2.0 * self.freqs


def _deltas(events) -> np.ndarray:
    if isinstance(events, CoincidenceEvents):
        return events.delta
    return np.asarray(events, dtype=np.float64)


def histogram_coincidences(events, width: float, range: tuple[float, float],
                           integration_time: float = 0.0) -> Histogram:
    """Bin idler-minus-signal delays into ``[range[0], range[1])``.

    ``events`` is a :class:`CoincidenceEvents` or an array of delays.  An
    event at delay ``d`` lands in bin ``floor((d - range[0]) / width)``;
    events outside the range are dropped and counted in ``Histogram.dropped``.
    """
    lo, hi = float(range[0]), float(range[1])
    if not width > 0:
        raise ValueError("bin width must be > 0")
    if not hi > lo:
        raise ValueError("histogram range is empty")
    nbins = int(round((hi - lo) / width))
    if nbins < 1:
        raise ValueError("histogram range is shorter than one bin")
    counts, dropped = _kernels.bin_counts(_deltas(events), lo, float(width), nbins)
    return Histogram(float(width), lo, counts, integration_time, dropped)


def integrate_first_slow_bin(events, width: float = SLOW_BIN, origin: float = 0.0,
                             config: SimConfig | None = None) -> int:
    """Coincidences with delay in ``[origin, origin + width)``.

    With ``config`` given, checks that the delayed waveform
    ``[D, D + support]`` fits in the bin and raises
    ``ValueError("waveform exceeds slow bin")`` otherwise.
    """
    if config is not None and config.delay + config.source.support > origin + width:
        raise ValueError("waveform exceeds slow bin")
    d = _deltas(events)
    return int(np.count_nonzero((d >= origin) & (d < origin + width)))


def default_frequency_grid(f_max: float = 30e6, step: float = 0.25e6) -> np.ndarray:
    """Applied frequencies ``0, step, ..., f_max`` (Hz)."""
    n = int(round(f_max / step))
    return step * np.arange(n + 1)


def _sweep_phase(config: SimConfig) -> float:
    m1, m2 = config.modulators.m1, config.modulators.m2
    if not (isinstance(m1, Sinusoid) and isinstance(m2, Sinusoid) and m1.phase == m2.phase):
        raise ValueError("frequency sweep needs a matched sinusoid pair")
    return m1.phase


def run_frequency_sweep(config: SimConfig, f_grid, integration_time: float, *,
                        slow_width: float = SLOW_BIN, origin: float = 0.0,
                        threads: int = 1, order=None) -> FrequencyTrace:
    """Simulate one run per applied frequency and record first-slow-bin counts.

    Both modulators are driven at ``f_grid[k]`` with the common phase of
    ``config.modulators`` (their configured frequency is ignored).  Point
    ``k`` uses RNG stream ``k``, so each count depends only on
    ``(config.seed, k)``; ``order`` permutes evaluation order for testing.
    """
    phase = _sweep_phase(config)
    f_grid = np.asarray(f_grid, dtype=np.float64)
    if np.any(np.diff(f_grid) <= 0):
        raise ValueError("frequency grid must be strictly increasing")
    base = config.with_(duration=float(integration_time))
    integrate_first_slow_bin(np.zeros(0), slow_width, origin, base)
    sampler = TauSampler(config.source)

    def point(k):
        mod = Sinusoid(float(f_grid[k]), phase)
        cfg = base.with_(modulators=ModulatorPair(mod, mod))
        return integrate_first_slow_bin(simulate(cfg, stream=k, sampler=sampler), slow_width, origin)

    indices = list(range(f_grid.size)) if order is None else [int(k) for k in order]
    if sorted(indices) != list(range(f_grid.size)):
        raise ValueError("order must be a permutation of the grid indices")
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = dict(zip(indices, pool.map(point, indices)))
    else:
        results = {k: point(k) for k in indices}
    counts = np.array([results[k] for k in range(f_grid.size)], dtype=np.int64)
    snapshot = {
        "seed": int(config.seed),
        "efficiency": config.efficiency,
        "delay": config.delay,
        "pair_rate": config.source.pair_rate,
        "support": config.source.support,
        "phase": phase,
    }
    return FrequencyTrace(f_grid, counts, float(integration_time), snapshot,
                          label=f"sweep seed={int(config.seed)}", static_phase=phase)


def expected_first_bin_count(config: SimConfig, freq, integration_time: float,
                             n_per_segment: int = 256):
    """Mean first-slow-bin count for matched sinusoids at applied ``freq``.

    ``(eps^2 R T / int G2_0) * int M(D + tau) G2_0(tau) dtau`` with
    ``M = [2 + cos(2 w (D + tau))] / 8`` for ``f > 0`` and ``cos(phase)^4``
    at ``f = 0``, integrated by composite Simpson on the waveform segments.
    """
    phase = _sweep_phase(config)
    spec = config.source
    edges = spec.breakpoints()
    # resolve the fastest oscillation: at least 16 nodes per period
    fmax = float(np.max(np.abs(freq)))
    longest = float(np.max(np.diff(edges)))
    n_osc = 2 * int(math.ceil(8 * 2 * fmax * longest)) + 2
    nodes, weights = _quad.simpson_nodes(edges, max(n_per_segment, n_osc))
    g = weights * g2_zero(spec, nodes)
    total = g.sum()
    scale = config.efficiency ** 2 * spec.pair_rate * integration_time / total
    freq_arr = np.atleast_1d(np.asarray(freq, dtype=np.float64))
    out = np.empty(freq_arr.size)
    for i, f in enumerate(freq_arr):
        if f == 0:
            m_int = math.cos(phase) ** 4 * g.sum()
        else:
            m_int = (2.0 * g.sum() + g @ np.cos(4.0 * math.pi * f * (config.delay + nodes))) / 8.0
        out[i] = scale * m_int
    return float(out[0]) if np.ndim(freq) == 0 else out
