import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hetnet_mobility.model import NetworkModel, per_1000m2

settings.register_profile(
    "default", max_examples=60, deadline=None, derandomize=True, database=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile(
    "fuzz", max_examples=1000, deadline=None, derandomize=True, database=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_ACCEPTANCE = []


@pytest.fixture
def acceptance_report():
    """Collects one pass/fail line per acceptance criterion for the summary."""

    def record(number, title, checks):
        ok = all(c[1] for c in checks)
        detail = "; ".join(f"{name}: {'ok' if passed else 'FAIL'} ({info})" for name, passed, info in checks)
        line = f"criterion {number:>2} [{'PASS' if ok else 'FAIL'}] {title} -- {detail}"
        _ACCEPTANCE.append((number, line))
        print(line, flush=True)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE):
        terminalreporter.write_line(line)


@pytest.fixture
def fig6_net():
    return NetworkModel.from_arrays([per_1000m2(0.1), per_1000m2(1.0)], [46, 20], alpha=3.5)


@pytest.fixture
def fig7_net():
    return NetworkModel.from_arrays([per_1000m2(0.1), per_1000m2(10.0)], [46, 20], alpha=3.5, beta=0.9)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
