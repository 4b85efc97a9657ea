import json

import pytest

from semistrong.runs import RUNNERS, run

FAST = {}


@pytest.mark.parametrize("name", sorted(RUNNERS))
def test_scenario_passes(name):
    report = run(name, **FAST.get(name, {}))
    failed = [c["name"] for child in report.children for c in child.checks if not c["passed"]]
    assert report.all_passed, failed
    assert report.verdict == "certified"


@pytest.mark.parametrize("name", ["parity", "random-bayesian"])
def test_seeded_runs_are_deterministic(name):
    a = json.dumps(run(name, seed=7).to_dict(), sort_keys=True)
    b = json.dumps(run(name, seed=7).to_dict(), sort_keys=True)
    assert a == b


def test_unknown_scenario():
    with pytest.raises(KeyError):
        run("nope")


def test_float_mode_pirates():
    assert run("pirates", exact=False).all_passed
