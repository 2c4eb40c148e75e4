import numpy as np
import pytest

from itespec import kernels
from itespec.counting import compute_spectrum
from itespec.dispersion import parse_index


@pytest.fixture(params=sorted(kernels.backends()))
def backend(request):
    """Each available kernel module (compiled and pure Python)."""
    return kernels.backends()[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(7)


@pytest.fixture(scope="session")
def const4_small():
    """Full spectrum for n0=4 below t=12; cheap enough for unit tests."""
    return compute_spectrum(parse_index("const:4"), 12.0, threads=1)


@pytest.fixture
def record_criterion(request):
    """Print a criterion line and keep it for the end-of-run summary."""
    lines = request.config.__dict__.setdefault("_acceptance_lines", [])

    def record(result):
        print(result.line())
        lines.append(result.line())
        return result
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
