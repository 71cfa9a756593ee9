"""Shared fixtures: cached full experiments and the acceptance-result log."""

import time
from pathlib import Path

import numpy as np
import pytest

from hopinf.config import load_config
from hopinf.pipeline import run_in_memory

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

ACCEPTANCE_LOG = []


def record(criterion, passed, detail):
    """Log one acceptance line; printed in the terminal summary."""
    line = f"criterion {criterion}: {'PASS' if passed else 'FAIL'} | {detail}"
    ACCEPTANCE_LOG.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LOG:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LOG:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def _experiment(name, tasks=None):
    start = time.perf_counter()
    result = run_in_memory(load_config(CONFIGS / f"{name}.json"), tasks)
    result.elapsed = time.perf_counter() - start
    return result


@pytest.fixture(scope="session")
def lw_fd_experiment():
    return _experiment("linear_wave_fd")


@pytest.fixture(scope="session")
def lw_ps_experiment():
    return _experiment("linear_wave_ps", [("hopinf", 20), ("hopinf", 40),
                                          ("intrusive", 20), ("intrusive", 40)])


@pytest.fixture(scope="session")
def nlse_experiment():
    return _experiment("nlse", [("hopinf", 10), ("hopinf", 12), ("intrusive", 12)])


@pytest.fixture(scope="session")
def sine_gordon_experiment():
    # Operators are learned once at the largest size; only the sizes the
    # acceptance checks read are simulated.
    return _experiment("sine_gordon", [("hopinf", 30), ("hopinf", 50)])
