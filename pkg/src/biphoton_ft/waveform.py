"""Biphoton waveform models and the unmodulated correlation function.

All quantities are SI: times in seconds, ``|phi(tau)|^2`` and ``G2_0`` in
s^-2, rates in s^-1.  The shapes are phenomenological stand-ins for the
two measured regimes (a Gaussian-like packet, and a rectangular body with a
sharp leading-edge spike); a tabulated model accepts any measured curve.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

from . import _quad

__all__ = [
    "GaussianLike",
    "RectPrecursor",
    "Tabulated",
    "WaveformModel",
    "BiphotonSpec",
    "TauSampler",
    "phi_squared",
    "g2_zero",
    "integral_g2",
    "sample_tau",
    "INVERSE_CDF_POINTS",
    "NEGLIGIBLE",
]

INVERSE_CDF_POINTS = 2 ** 14
NEGLIGIBLE = 1e-6


def _scalar_or_array(values, like):
    return float(np.ravel(values)[0]) if np.ndim(like) == 0 else values


@dataclass(frozen=True)
class GaussianLike:
    """``A * exp(-(tau - center)^2 / (2 width^2))`` for ``tau >= 0``."""

    amplitude: float
    center: float
    width: float

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError("amplitude must be >= 0")
        if not self.width > 0:
            raise ValueError("width must be > 0")

    def evaluate(self, tau):
        tau = np.asarray(tau, dtype=np.float64)
        z = (tau - self.center) / self.width
        out = self.amplitude * np.exp(-0.5 * z * z)
        return np.where(tau < 0, 0.0, out)

    def peak(self) -> float:
        return float(self.evaluate(max(self.center, 0.0)))

    def sup_beyond(self, t: float) -> float:
        return float(self.evaluate(max(t, self.center)))

    def breakpoints(self, t_max: float) -> np.ndarray:
        pts = self.center + self.width * np.arange(-10.0, 10.5, 1.0)
        return pts[(pts > 0) & (pts < t_max)]

    def scaled(self, k: float) -> "GaussianLike":
        return replace(self, amplitude=self.amplitude * k)


@dataclass(frozen=True)
class RectPrecursor:
    """Flat body on ``[body_start, body_start + body_length)`` plus an
    exponentially decaying spike that starts at ``body_start``."""

    body_amplitude: float
    body_start: float
    body_length: float
    spike_amplitude: float
    spike_decay: float

    def __post_init__(self):
        if self.body_amplitude < 0 or self.spike_amplitude < 0:
            raise ValueError("amplitudes must be >= 0")
        if not self.body_length > 0:
            raise ValueError("body_length must be > 0")
        if not self.spike_decay > 0:
            raise ValueError("spike_decay must be > 0")

    def evaluate(self, tau):
        tau = np.asarray(tau, dtype=np.float64)
        start = self.body_start
        body = np.where((tau >= start) & (tau < start + self.body_length), self.body_amplitude, 0.0)
        lag = np.maximum(tau - start, 0.0)
        spike = np.where(tau >= start, self.spike_amplitude * np.exp(-lag / self.spike_decay), 0.0)
        return np.where(tau < 0, 0.0, body + spike)

    def peak(self) -> float:
        return float(self.evaluate(max(self.body_start, 0.0)))

    def sup_beyond(self, t: float) -> float:
        body = self.body_amplitude if t < self.body_start + self.body_length else 0.0
        spike = self.spike_amplitude * math.exp(-max(t - self.body_start, 0.0) / self.spike_decay)
        return body + spike

    def breakpoints(self, t_max: float) -> np.ndarray:
        s = self.body_start
        pts = [s, s + self.body_length]
        pts += [s + self.spike_decay * k for k in (0.5, 1, 2, 4, 8, 16, 32)]
        pts = np.asarray(pts)
        return pts[(pts > 0) & (pts < t_max)]

    def scaled(self, k: float) -> "RectPrecursor":
        return replace(self, body_amplitude=self.body_amplitude * k,
                       spike_amplitude=self.spike_amplitude * k)


@dataclass(frozen=True, eq=False)
class Tabulated:
    """Linearly interpolated samples; zero outside the tabulated range."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.float64)
        values = np.asarray(self.values, dtype=np.float64)
        if times.ndim != 1 or times.shape != values.shape or times.size < 2:
            raise ValueError("times and values must be 1-D arrays of equal length >= 2")
        if np.any(np.diff(times) <= 0):
            raise ValueError("tabulated times must be strictly increasing")
        if np.any(values < 0):
            raise ValueError("tabulated values must be >= 0")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def evaluate(self, tau):
        tau = np.asarray(tau, dtype=np.float64)
        out = np.interp(tau, self.times, self.values, left=0.0, right=0.0)
        return np.where(tau < 0, 0.0, out)

    def peak(self) -> float:
        return float(np.max(self.evaluate(self.times)))

    def sup_beyond(self, t: float) -> float:
        tail = self.times > t
        cands = [float(self.evaluate(t))]
        if np.any(tail):
            cands.append(float(np.max(self.values[tail])))
        return max(cands)

    def breakpoints(self, t_max: float) -> np.ndarray:
        pts = self.times
        return pts[(pts > 0) & (pts < t_max)]

    def scaled(self, k: float) -> "Tabulated":
        return Tabulated(self.times, self.values * k)


WaveformModel = Union[GaussianLike, RectPrecursor, Tabulated]


@dataclass(frozen=True, eq=False)
class BiphotonSpec:
    """Waveform, pair generation rate and the support window ``[0, support]``.

    The accidental floor ``pair_rate**2`` is added only inside the window.
    """

    waveform: WaveformModel
    pair_rate: float
    support: float = 1e-6
    _integral: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.pair_rate < 0:
            raise ValueError("pair_rate must be >= 0")
        if not self.support > 0:
            raise ValueError("support must be > 0")
        peak = self.waveform.peak()
        if self.waveform.sup_beyond(self.support) > NEGLIGIBLE * peak:
            raise ValueError(
                f"waveform is not negligible beyond the support window ({self.support:g} s)")

    def breakpoints(self) -> np.ndarray:
        inner = self.waveform.breakpoints(self.support)
        return np.unique(np.concatenate([[0.0], inner, [self.support]]))

    def normalized(self) -> "BiphotonSpec":
        """Rescale the waveform so that the integral of ``G2_0`` over the
        window equals ``pair_rate`` (one generated pair per unit area)."""
        floor = self.pair_rate ** 2 * self.support
        area = _quad.integrate(self.waveform.evaluate, self.breakpoints())
        target = self.pair_rate - floor
        if area <= 0 or target <= 0:
            raise ValueError("cannot normalize: need pair_rate * support < 1 and a non-zero waveform")
        return BiphotonSpec(self.waveform.scaled(target / area), self.pair_rate, self.support)


def phi_squared(model: WaveformModel, tau):
    """|phi(tau)|^2 of ``model``; zero for negative delays."""
    return _scalar_or_array(model.evaluate(tau), tau)


def g2_zero(spec: BiphotonSpec, tau):
    """Unmodulated Glauber correlation ``|phi(tau)|^2 + R^2``."""
    t = np.asarray(tau, dtype=np.float64)
    floor = np.where((t >= 0) & (t <= spec.support), spec.pair_rate ** 2, 0.0)
    return _scalar_or_array(spec.waveform.evaluate(t) + floor, tau)


def integral_g2(spec: BiphotonSpec, n_per_segment: int = 64) -> float:
    """Composite-Simpson integral of ``G2_0`` over ``[0, support]``.

    The window is split at the model's features (Gaussian sigma marks,
    body edges, spike decay marks, table knots) and each piece gets
    ``n_per_segment`` intervals.
    """
    cache = spec._integral
    if n_per_segment not in cache:
        cache[n_per_segment] = _quad.integrate(lambda t: g2_zero(spec, t), spec.breakpoints(),
                                               n_per_segment)
    return cache[n_per_segment]


class TauSampler:
    """Inverse-CDF sampler of the pair delay with density ``G2_0 / int G2_0``.

    The density is tabulated on ``points`` uniformly spaced delays over the
    support window, the CDF is accumulated with the trapezoid rule, and
    draws are mapped through the linearly interpolated inverse.
    """

    def __init__(self, spec: BiphotonSpec, points: int = INVERSE_CDF_POINTS):
        self.grid = np.linspace(0.0, spec.support, points)
        pdf = g2_zero(spec, self.grid)
        cdf = np.concatenate([[0.0], np.cumsum(0.5 * (pdf[1:] + pdf[:-1]) * np.diff(self.grid))])
        if not cdf[-1] > 0:
            raise ValueError("empty distribution")
        self.cdf = cdf / cdf[-1]

    def sample(self, rng: np.random.Generator, size=None):
        u = rng.random(size)
        return np.interp(u, self.cdf, self.grid)


def sample_tau(spec: BiphotonSpec, rng: np.random.Generator, size=None):
    """Draw pair delays from ``G2_0``; raises ``ValueError`` if it is zero."""
    return TauSampler(spec).sample(rng, size)
