import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import sknet


@pytest.fixture(params=sknet.available_backends())
def backend(request):
    """Run a test under every available kernel backend."""
    sknet.use_backend(request.param)
    yield request.param
    sknet.use_backend("auto")


@pytest.fixture(autouse=True)
def _reset_backend():
    sknet.use_backend("auto")
    sknet.set_num_threads(1)
    yield
    sknet.use_backend("auto")
    sknet.set_num_threads(1)


def pytest_runtest_logreport(report):
    """One visible pass/fail line per acceptance criterion."""
    if report.when == "call" and "test_acceptance" in report.nodeid:
        status = "PASS" if report.passed else "FAIL"
        name = report.nodeid.split("::")[-1]
        print(f"\n[acceptance] {status}: {name} ({report.duration:.2f}s)")
