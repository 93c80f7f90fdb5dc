import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from disttopo.config import RunConfig
from disttopo.engine import IncrementalEngine
from disttopo.fixtures import house
from disttopo.sim import SensorSpec, simulate_frames

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

HOUSE_SEED = 7
HOUSE_CONFIG = RunConfig(sigma=8.0, resolution=0.1)


@pytest.fixture(scope="session")
def house_fixture():
    return house()


@pytest.fixture(scope="session")
def house_frames(house_fixture):
    return simulate_frames(house_fixture.grid, house_fixture.trajectory, SensorSpec(), HOUSE_SEED)


@pytest.fixture(scope="session")
def house_engine(house_frames):
    eng = IncrementalEngine(HOUSE_CONFIG)
    for frame in house_frames:
        eng.ingest(frame)
    eng.finish()
    return eng



# acceptance results, printed once at the end of the run
ACCEPTANCE: dict[int, str] = {}


def record_criterion(number: int, name: str, passed: bool, detail: str) -> bool:
    line = f"criterion {number} {name}: {'PASS' if passed else 'FAIL'} ({detail})"
    ACCEPTANCE[number] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[number])
