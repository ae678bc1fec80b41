import json
import pytest
from exp_divdiff.history import *
from exp_divdiff.settings import RunConfig

@pytest.fixture
def runs():
    config = RunConfig(seed=2, trials=10)
    first = record_run("certify", "tn2", config, min_margin=0.25, argmin={"x1": 0.1}, passed=True)
    second = record_run("selftest", None, config, min_margin=3e-15, passed=True)
    third = record_run("certify", "fourpoint", config, min_margin=-1e-3, failures=1, confirmed=0, passed=False)
    return [first["success"], second["success"], third["success"]]

def test_record_run_stores_argmin_as_decimal_strings(runs):
    record = RunRecord.get_by_id(runs[0])
    assert json.loads(record.argmin) == {"x1": "0.1"}
    assert record.seed == 2
    assert record.trials == 10
    assert record.tolerance is None

def test_record_run_without_config():
    response = record_run("bench", passed=False)
    record = RunRecord.get_by_id(response["success"])
    assert record.seed is None
    assert not record.passed

def test_list_runs_newest_first(runs):
    rows = list_runs()["table"]
    assert [row[0] for row in rows] == runs[::-1]
    assert len(rows[0]) == len(HISTORY_HEADERS)
    assert rows[0][1] == "certify"
    assert rows[0][2] == "fourpoint"
    assert rows[0][-1].tzinfo is not None

@pytest.mark.parametrize("target, expected", [("tn2", 1), ("selftest", 1), ("certify", 2), ("triangle", 0)])
def test_list_runs_filters_by_target(runs, target, expected):
    assert len(list_runs(target=target)["table"]) == expected

def test_list_runs_limit(runs):
    rows = list_runs(limit=2)["table"]
    assert [row[0] for row in rows] == runs[:0:-1]

def test_list_runs_since(runs):
    assert list_runs(since="01/01/2999")["table"] == []
    assert len(list_runs(since="01/01/2000")["table"]) == 3

@pytest.mark.parametrize("kwargs", [{"limit": 0}, {"limit": 2.5}, {"since": "never"}])
def test_list_runs_rejects_bad_arguments(runs, kwargs):
    response = list_runs(**kwargs)
    assert "error" in response
    assert response["table"] is None
