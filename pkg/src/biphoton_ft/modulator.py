"""Periodic amplitude modulators and their intensity correlation.

A modulator is described directly by its intensity transmission
``|m(t)|^2`` in ``[0, 1]``.  The correlation of two modulators,

    M(tau) = (1/T) * integral_0^T |m1(t)|^2 |m2(t + tau)|^2 dt,

multiplies the unmodulated correlation function after period averaging.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from . import _kernels
from .waveform import BiphotonSpec, g2_zero

__all__ = [
    "Open",
    "Sinusoid",
    "Square",
    "TabulatedPeriodic",
    "ModulatorWaveform",
    "ModulatorPair",
    "common_period",
    "intensity_transmission",
    "modulator_correlation",
    "modulator_correlation_analytic",
    "modulated_g2",
]

MAX_PERIOD_MULTIPLE = 10_000
RATIO_TOLERANCE = 1e-12

_NO_TABLE = np.zeros(1)


@dataclass(frozen=True)
class Open:
    """Modulator switched off at full transmission."""

    def kernel_args(self):
        return (_kernels.OPEN, 0.0, 0.0, 0.0, _NO_TABLE)

    @property
    def period(self) -> Optional[float]:
        return None


@dataclass(frozen=True)
class Sinusoid:
    """Field transmission ``cos(2 pi f t + phase)``; intensity is its square."""

    freq: float
    phase: float = 0.0

    def __post_init__(self):
        if self.freq < 0:
            raise ValueError("freq must be >= 0")

    def kernel_args(self):
        return (_kernels.SINUSOID, float(self.freq), float(self.phase), 0.0, _NO_TABLE)

    @property
    def period(self) -> Optional[float]:
        return 1.0 / self.freq if self.freq > 0 else None


@dataclass(frozen=True)
class Square:
    """On/off intensity: 1 for the first ``duty`` fraction of each period.

    ``phase`` shifts the wave by ``phase / (2 pi)`` of a period, the same
    convention as :class:`Sinusoid`.
    """

    freq: float
    phase: float = 0.0
    duty: float = 0.5

    def __post_init__(self):
        if not self.freq > 0:
            raise ValueError("freq must be > 0")
        if not 0.0 < self.duty < 1.0:
            raise ValueError("duty must be in (0, 1)")

    def kernel_args(self):
        return (_kernels.SQUARE, float(self.freq), float(self.phase), float(self.duty), _NO_TABLE)

    @property
    def period(self) -> Optional[float]:
        return 1.0 / self.freq


@dataclass(frozen=True, eq=False)
class TabulatedPeriodic:
    """Intensity samples at ``k * period / len(values)``, interpolated
    linearly and repeated with the given period."""

    period_s: float
    values: np.ndarray

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if not self.period_s > 0:
            raise ValueError("period must be > 0")
        if values.ndim != 1 or values.size < 2:
            raise ValueError("values must be a 1-D array with at least 2 samples")
        if np.any(values < 0) or np.any(values > 1):
            raise ValueError("intensity samples must lie in [0, 1]")
        object.__setattr__(self, "values", values)

    def kernel_args(self):
        return (_kernels.TABULATED, 1.0 / self.period_s, 0.0, 0.0, self.values)

    @property
    def period(self) -> Optional[float]:
        return self.period_s


ModulatorWaveform = Union[Open, Sinusoid, Square, TabulatedPeriodic]


@dataclass(frozen=True)
class ModulatorPair:
    """Signal-channel modulator ``m1`` and idler-channel modulator ``m2``."""

    m1: ModulatorWaveform
    m2: ModulatorWaveform

    def common_period(self) -> Optional[float]:
        return common_period(self.m1.period, self.m2.period)


def common_period(p1: Optional[float], p2: Optional[float]) -> Optional[float]:
    """Least common period of two periods (``None`` means constant).

    Raises ``ValueError("no common period")`` when the ratio has no
    rational approximation ``a/b`` with ``a, b <= 10**4`` accurate to 1e-12.
    """
    if p1 is None:
        return p2
    if p2 is None:
        return p1
    ratio = p1 / p2
    frac = Fraction(ratio).limit_denominator(MAX_PERIOD_MULTIPLE)
    a, b = frac.numerator, frac.denominator
    if a > MAX_PERIOD_MULTIPLE or abs(a / b - ratio) > RATIO_TOLERANCE * ratio:
        raise ValueError("no common period")
    # b * p1 == a * p2 up to rounding; average the two estimates
    return 0.5 * (b * p1 + a * p2)


def intensity_transmission(mod: ModulatorWaveform, t):
    """``|m(t)|^2`` for scalar or array ``t``."""
    out = _kernels.intensity(*mod.kernel_args(), np.asarray(t, dtype=np.float64))
    return float(np.ravel(out)[0]) if np.ndim(t) == 0 else out


def modulator_correlation(pair: ModulatorPair, tau, *, intervals: int = 4096,
                          tol: float = 1e-10, max_intervals: int = 2 ** 16):
    """Period-averaged product ``M(tau)`` by composite Simpson quadrature.

    Starts at ``intervals`` per common period and doubles until successive
    estimates differ by less than ``tol`` at every ``tau``.  Discontinuous
    transmissions (square waves) converge only linearly, so doubling stops
    at ``max_intervals``; the error there is of order ``1 / max_intervals``.
    """
    period = pair.common_period()
    if period is None:
        period = 1.0  # both constant: any averaging window gives the same value
    taus = np.atleast_1d(np.asarray(tau, dtype=np.float64))
    m1, m2 = pair.m1.kernel_args(), pair.m2.kernel_args()
    n = intervals
    prev = _kernels.simpson_correlation(m1, m2, taus, period, n)
    while n < max_intervals:
        n *= 2
        cur = _kernels.simpson_correlation(m1, m2, taus, period, n)
        done = np.max(np.abs(cur - prev)) < tol
        prev = cur
        if done:
            break
    out = np.clip(prev, 0.0, 1.0)
    return float(out[0]) if np.ndim(tau) == 0 else out


def modulator_correlation_analytic(pair: ModulatorPair, tau):
    """Closed-form ``M(tau)`` for open channels and matched sinusoids.

    Supported pairs: (Open, Open) -> 1; one Open and one Sinusoid -> 1/2;
    identical sinusoids -> ``1/4 + cos(2 * 2 pi f * tau) / 8``.
    Anything else raises ``ValueError("no closed form")``.
    """
    m1, m2 = pair.m1, pair.m2
    shape = np.shape(tau)
    if isinstance(m1, Open) and isinstance(m2, Open):
        value = np.ones(shape)
    elif {type(m1), type(m2)} == {Open, Sinusoid} and max(
            getattr(m1, "freq", 0.0), getattr(m2, "freq", 0.0)) > 0:
        value = np.full(shape, 0.5)
    elif (isinstance(m1, Sinusoid) and isinstance(m2, Sinusoid) and m1.freq > 0
          and m1.freq == m2.freq and m1.phase == m2.phase):
        value = 0.25 + 0.125 * np.cos(2.0 * (2.0 * math.pi * m1.freq) * np.asarray(tau, dtype=np.float64))
    else:
        raise ValueError("no closed form")
    return float(np.ravel(value)[0]) if np.ndim(tau) == 0 else value


def modulated_g2(spec: BiphotonSpec, pair: ModulatorPair, tau, **kwargs):
    """Time-averaged modulated correlation ``M(tau) * G2_0(tau)``."""
    return modulator_correlation(pair, tau, **kwargs) * g2_zero(spec, tau)
