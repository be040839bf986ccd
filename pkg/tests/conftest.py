import numpy as np
import pytest

from biphoton_ft.modulator import ModulatorPair, Open, Sinusoid
from biphoton_ft.montecarlo import SimConfig
from biphoton_ft.waveform import BiphotonSpec, GaussianLike

NS = 1e-9
MHZ = 1e6

# criterion number -> (passed, detail); filled by tests in test_acceptance.py
ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def acceptance_report():
    def record(number: int, passed: bool, detail: str) -> None:
        ACCEPTANCE_RESULTS[number] = (bool(passed), detail)
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        passed, detail = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")


@pytest.fixture
def gaussian_spec():
    """Normalized Gaussian-like source at the experiment's pair rate."""
    return BiphotonSpec(GaussianLike(1.0, 200 * NS, 50 * NS), 325.0, 600 * NS).normalized()


@pytest.fixture
def matched35():
    return ModulatorPair(Sinusoid(35 * MHZ), Sinusoid(35 * MHZ))


@pytest.fixture
def open_pair():
    return ModulatorPair(Open(), Open())


@pytest.fixture
def million_pair_config(gaussian_spec):
    """Open-pair run sized for ~10^6 emitted pairs."""
    return SimConfig(gaussian_spec, ModulatorPair(Open(), Open()), duration=1e6 / 325.0,
                     efficiency=1.0, delay=175 * NS, seed=11)


def gaussian_bin_mass(edges, center, sigma):
    """Exact integral of exp(-(t-c)^2 / 2 s^2) over each [edges[i], edges[i+1])."""
    from scipy.special import erf
    z = (np.asarray(edges) - center) / (np.sqrt(2.0) * sigma)
    cdf = 0.5 * sigma * np.sqrt(2.0 * np.pi) * erf(z)
    return np.diff(cdf)
