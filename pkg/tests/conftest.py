import pytest
from peewee import SqliteDatabase
from exp_divdiff.models import Preference, RunRecord

test_db = SqliteDatabase(":memory:")

@pytest.fixture(autouse=True)
def setup_and_teardown():
    test_db.bind([Preference, RunRecord], bind_refs=False, bind_backrefs=False)
    test_db.connect(reuse_if_open=True)
    test_db.create_tables([Preference, RunRecord])

    with test_db.atomic() as txn:
        yield  # Run the test
        txn.rollback()  # Rollback after test

    test_db.drop_tables([Preference, RunRecord])
    test_db.close()

@pytest.fixture(autouse=True)
def clean_seed_env(monkeypatch):
    monkeypatch.delenv("EXPDD_SEED", raising=False)
