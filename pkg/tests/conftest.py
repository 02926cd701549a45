import json
import sys
from pathlib import Path

import pytest
from hypothesis import settings

from foenet import model
from foenet.data import SynthConfig, load_trials, make_datasets, to_arrays

HERE = Path(__file__).parent
FIXTURES = HERE / "fixtures"
sys.path.insert(0, str(HERE))

# every forward pass in the suite asserts that each side uses exactly one of
# its direct / inferred differentials
model.CHECK_SUBSTITUTION = True

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def fixture_model():
    return model.load_checkpoint(FIXTURES / "forward_model.json")


@pytest.fixture(scope="session")
def fixture_trials():
    return load_trials(FIXTURES / "forward_trials.jsonl")


@pytest.fixture(scope="session")
def fixture_expected():
    return json.loads((FIXTURES / "forward_expected.json").read_text())


SMALL_CFG = dict(n_speakers=40, n_test_speakers=20, td_dim=8, ti_dim=8,
                 utterances_per_speaker=14, test_per_speaker=4)


@pytest.fixture(scope="session")
def small_cfg():
    return SynthConfig(**SMALL_CFG)


@pytest.fixture(scope="session")
def small_sets(small_cfg):
    """(train, valid, test) trial lists on a 40-speaker population."""
    return make_datasets(small_cfg, seed=11)


@pytest.fixture(scope="session")
def small_arrays(small_sets):
    return tuple(to_arrays(s) for s in small_sets)


_criteria = {}


def pytest_runtest_logreport(report):
    if "::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or report.failed:
        _criteria[report.nodeid] = report.passed and _criteria.get(report.nodeid, True)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    by_number = {}
    for nodeid, ok in _criteria.items():
        n = int(nodeid.rsplit("criterion_", 1)[1].split("_", 1)[0])
        by_number[n] = by_number.get(n, True) and ok
    terminalreporter.section("acceptance criteria")
    for n in sorted(by_number):
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if by_number[n] else 'FAIL'}")
