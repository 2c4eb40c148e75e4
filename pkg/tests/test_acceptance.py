"""The nine acceptance criteria at their stated tolerances.

The full-pipeline spectra are computed once per module; the radial one
dominates the runtime (a few minutes).
"""
import pytest

from itespec import acceptance as acc
from itespec.counting import compute_spectrum
from itespec.dispersion import parse_index
from itespec.fdcheck import RadialGrid, fd_vs_shooting
from itespec.tracecheck import trace_compare
from itespec.weyl import TraceQuery

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def const4_t50():
    return compute_spectrum(parse_index("const:4"), 50.0)


@pytest.fixture(scope="module")
def radial_t50():
    return compute_spectrum(parse_index("radial:3,1"), 50.0)


@pytest.fixture(scope="module")
def const4_t60():
    return compute_spectrum(parse_index("const:4"), 60.0)


def test_criterion_1_weyl_constant(const4_t50, record_criterion):
    assert const4_t50.completeness_certificate
    assert record_criterion(acc.criterion_1(const4_t50)).passed


def test_criterion_2_weyl_radial(radial_t50, record_criterion):
    assert radial_t50.completeness_certificate
    assert record_criterion(acc.criterion_2(radial_t50)).passed


def test_criterion_3_trace_identity(const4_t60, record_criterion):
    report = trace_compare(const4_t60, TraceQuery(1j, 2, (100.0, 400.0, 1600.0)))
    assert min(report.min_separation) >= 1e-3
    assert record_criterion(acc.criterion_3(report)).passed


def test_criterion_4_residue_formula(record_criterion):
    assert record_criterion(acc.criterion_4()).passed


def test_criterion_5_growth_bound(const4_t50, record_criterion):
    assert record_criterion(acc.criterion_5(const4_t50)).passed


def test_criterion_6_cone_localization(const4_t50, record_criterion):
    assert record_criterion(acc.criterion_6(const4_t50)).passed


def test_criterion_7_fd_cross_oracle(record_criterion):
    rows = fd_vs_shooting(parse_index("const:4"), [0, 1, 2], RadialGrid(400), count=5)
    assert len(rows) == 15
    assert record_criterion(acc.criterion_7(rows)).passed


def test_criterion_8_bessel_and_winding(record_criterion):
    assert record_criterion(acc.criterion_8()).passed


def test_criterion_9_tauberian(record_criterion):
    assert record_criterion(acc.criterion_9()).passed
