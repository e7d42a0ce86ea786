import numpy as np
import pytest

from dfremix.audio import AudioBuffer
from dfremix.demo import demo_listener, make_demo_stems


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def short_stems():
    return make_demo_stems(duration=2.0, seed=3)


@pytest.fixture(scope="session")
def listener():
    return demo_listener()


def noise_audio(rng, channels=2, n=88200):
    return AudioBuffer(rng.standard_normal((channels, n)))


ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, text in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {number}. {text}")
