from __future__ import annotations

from datetime import datetime, timezone

import numpy as np
import pytest

from freqbias import AreaDroop, DisturbanceSpec, LoadModel, simulate_ba

T0 = datetime(2017, 10, 14, tzinfo=timezone.utc)
TRUTH_BETA = 4090.0
TRUTH_ALPHA = 0.98

# (criterion number, description, passed, detail) collected by test_acceptance
ACCEPTANCE_RESULTS: list[tuple[int, str, bool, str]] = []


@pytest.fixture
def t0() -> datetime:
    return T0


@pytest.fixture(scope="session")
def area() -> AreaDroop:
    return AreaDroop.from_bias(TRUTH_BETA, TRUTH_ALPHA)


@pytest.fixture(scope="session")
def noiseless_day(area):
    spec = DisturbanceSpec(seed=7, load_model=LoadModel.random_walk(10.0))
    return simulate_ba(area, spec, 1440)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20171014)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num, text, ok, detail in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {num:2d}. {text}: {detail}")
