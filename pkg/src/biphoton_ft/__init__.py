"""Simulate biphoton wavepackets seen through synchronously driven modulators
and slow detectors, and recover them with a Fourier-cosine reconstruction."""
from ._kernels import backend
from .detection import (FrequencyTrace, Histogram, default_frequency_grid, expected_first_bin_count,
                        histogram_coincidences, integrate_first_slow_bin, run_frequency_sweep)
from .modulator import (ModulatorPair, Open, Sinusoid, Square, TabulatedPeriodic, intensity_transmission,
                        modulated_g2, modulator_correlation, modulator_correlation_analytic)
from .montecarlo import CoincidenceEvents, SimConfig, expected_coincidence_rate, simulate
from .reconstruct import (Reconstruction, compare, cosine_transform, forward_transform, one_point_scale,
                          remove_dc)
from .waveform import BiphotonSpec, GaussianLike, RectPrecursor, Tabulated, g2_zero, integral_g2, phi_squared

__version__ = "0.1.0"

__all__ = [
    "backend",
    "BiphotonSpec", "GaussianLike", "RectPrecursor", "Tabulated", "g2_zero", "integral_g2", "phi_squared",
    "ModulatorPair", "Open", "Sinusoid", "Square", "TabulatedPeriodic", "intensity_transmission",
    "modulated_g2", "modulator_correlation", "modulator_correlation_analytic",
    "CoincidenceEvents", "SimConfig", "expected_coincidence_rate", "simulate",
    "FrequencyTrace", "Histogram", "default_frequency_grid", "expected_first_bin_count",
    "histogram_coincidences", "integrate_first_slow_bin", "run_frequency_sweep",
    "Reconstruction", "compare", "cosine_transform", "forward_transform", "one_point_scale", "remove_dc",
]
