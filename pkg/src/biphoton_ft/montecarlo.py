"""Photon-pair event generation and modulator thinning.

Pairs arrive as a Poisson process of rate ``R`` over ``[0, duration)``;
each carries a delay ``tau`` drawn from ``G2_0``.  The idler photon passes
a fiber delay ``D`` before its modulator, so the two channels see the
transmissions ``|m1(t)|^2`` and ``|m2(t + D + tau)|^2``.  Each photon
survives its modulator and detector independently with probability
``efficiency * transmission``; a coincidence is recorded when both do.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .modulator import ModulatorPair, Open, modulator_correlation, modulator_correlation_analytic
from .waveform import BiphotonSpec, TauSampler, g2_zero

__all__ = [
    "SimConfig",
    "CoincidenceEvents",
    "make_rng",
    "generate_pairs",
    "thin_and_detect",
    "simulate",
    "expected_coincidence_rate",
    "write_events_csv",
    "read_events_csv",
]

EVENT_COLUMNS = ("t_signal_ns", "t_idler_ns")


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator for ``(seed, stream)``.

    Streams are independent Philox keys derived through ``SeedSequence``,
    so sweep point ``k`` always sees the same numbers regardless of the
    order in which points are evaluated.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(int(stream),))))


@dataclass(frozen=True, eq=False)
class SimConfig:
    source: BiphotonSpec
    modulators: ModulatorPair = field(default_factory=lambda: ModulatorPair(Open(), Open()))
    duration: float = 1.0
    efficiency: float = 0.5
    delay: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError("duration must be > 0")
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError("efficiency must be in [0, 1]")
        if self.delay < 0:
            raise ValueError("delay must be >= 0")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def with_(self, **changes) -> "SimConfig":
        return replace(self, **changes)


@dataclass(eq=False)
class CoincidenceEvents:
    """Detected pairs: signal arrival times and idler-minus-signal delays (s)."""

    t_signal: np.ndarray
    delta: np.ndarray

    @property
    def t_idler(self) -> np.ndarray:
        return self.t_signal + self.delta

    def __len__(self) -> int:
        return int(self.t_signal.size)

    def merge(self, other: "CoincidenceEvents") -> "CoincidenceEvents":
        t = np.concatenate([self.t_signal, other.t_signal])
        d = np.concatenate([self.delta, other.delta])
        order = np.lexsort((d, t))
        return CoincidenceEvents(t[order], d[order])

    def shifted(self, dt: float) -> "CoincidenceEvents":
        return CoincidenceEvents(self.t_signal + dt, self.delta.copy())

    @classmethod
    def empty(cls) -> "CoincidenceEvents":
        return cls(np.zeros(0), np.zeros(0))


def generate_pairs(config: SimConfig, rng: np.random.Generator, sampler: TauSampler | None = None):
    """Pair arrival times ``t`` (sorted) and delays ``tau`` for one run."""
    n = rng.poisson(config.source.pair_rate * config.duration)
    if n == 0:
        return np.zeros(0), np.zeros(0)
    t = np.sort(rng.random(n) * config.duration)
    if sampler is None:
        sampler = TauSampler(config.source)
    tau = sampler.sample(rng, n)
    return t, tau


def thin_and_detect(t, tau, config: SimConfig, rng: np.random.Generator) -> CoincidenceEvents:
    """Apply modulator transmission and detector efficiency to each photon."""
    t = np.ascontiguousarray(t, dtype=np.float64)
    lag = np.ascontiguousarray(config.delay + np.asarray(tau, dtype=np.float64))
    u = rng.random((2, t.size))
    keep = _kernels.thin_mask(t, lag, u[0], u[1], float(config.efficiency),
                              config.modulators.m1.kernel_args(), config.modulators.m2.kernel_args())
    return CoincidenceEvents(t[keep], lag[keep])


def simulate(config: SimConfig, stream: int = 0, sampler: TauSampler | None = None) -> CoincidenceEvents:
    """Generate and thin one run using the RNG stream ``(config.seed, stream)``."""
    rng = make_rng(config.seed, stream)
    t, tau = generate_pairs(config, rng, sampler)
    return thin_and_detect(t, tau, config, rng)


def expected_coincidence_rate(config: SimConfig, tau, bin_width: float):
    """Mean coincidence rate (s^-1) in a bin of width ``bin_width`` at pair delay ``tau``.

    ``eps^2 * bin_width * M(D + tau) * G2_0(tau)``; with open modulators this
    is ``eps^2 * bin_width * G2_0(tau)``.  It equals the simulated rate when
    the source is normalized so that ``integral_g2 == pair_rate``
    (see :meth:`BiphotonSpec.normalized`).
    """
    if not bin_width > 0:
        raise ValueError("bin_width must be > 0")
    lag = config.delay + np.asarray(tau, dtype=np.float64)
    try:
        m = modulator_correlation_analytic(config.modulators, lag)
    except ValueError:
        m = modulator_correlation(config.modulators, lag)
    return config.efficiency ** 2 * bin_width * m * g2_zero(config.source, tau)


def _ns(x):
    return f"{float(x) * 1e9:.3f}"


def write_events_csv(path, events: CoincidenceEvents) -> None:
    """Write ``t_signal_ns,t_idler_ns`` rows (ns, picosecond resolution)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EVENT_COLUMNS)
        for ts, ti in zip(events.t_signal, events.t_idler):
            w.writerow((_ns(ts), _ns(ti)))


def read_events_csv(path) -> CoincidenceEvents:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = tuple(next(r))
        if header != EVENT_COLUMNS:
            raise ValueError(f"unexpected event header {header!r}")
        rows = np.array([[float(a), float(b)] for a, b in r], dtype=np.float64).reshape(-1, 2)
    ts, ti = rows[:, 0], rows[:, 1]
    return CoincidenceEvents(ts * 1e-9, (ti - ts) * 1e-9)
