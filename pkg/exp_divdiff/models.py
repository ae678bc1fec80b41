"""
expdd PeeWee Models and DB Functions
====================================

Persistent state of the command line: stored run defaults and the history of
certify, selftest and bench runs, kept in SQLite through the `peewee` ORM.

Dependencies:
-------------
- `pytz`: UTC timestamps
- `os`: database location
- `peewee`: ORM over SQLite

Database Schema:
----------------
1. `Preference`: a single row with the default seed, trials, tolerance,
   output format, oracle precision and thread count.
2. `RunRecord`: one row per recorded run, with its summary outcome.

Database Location:
------------------
`~/.expdd/expdd.db`, or `$EXPDD_HOME/expdd.db` when EXPDD_HOME is set.

Database Migration:
-------------------
The schema version is kept in `PRAGMA user_version`. Version 0 (a fresh file)
is migrated to version 1 by creating the tables and the default preference row.

Functions:
----------
- `database_path()`: where the database file lives.
- `add_default_preference_to_db()`: create the single preference row.
- `migrate_to_db_1()`: create the tables and default preferences.
- `init_db(path)`: open the database and migrate it if needed.
"""
import logging
import os
from datetime import datetime

import pytz
from peewee import (BooleanField, CharField, DateTimeField, FloatField, IntegerField, Model,
                    SqliteDatabase, TextField)

logger = logging.getLogger(__name__)

DB_VERSION = 1
# opened by init_db(); tests bind the models to an in-memory database instead
db = SqliteDatabase(None)


def database_path():
    """
    Returns:
        str: `$EXPDD_HOME/expdd.db`, defaulting to `~/.expdd/expdd.db`.
    """
    home = os.environ.get("EXPDD_HOME") or os.path.join(os.path.expanduser("~"), ".expdd")
    return os.path.join(home, "expdd.db")


class BaseModel(Model):
    """
    Base model that the other models inherit; all of them share `db`.
    """

    class Meta:
        database = db


class Preference(BaseModel):
    """
    Stored run defaults. A NULL tolerance means per-check defaults, a NULL
    thread count means one thread per CPU.

    Attributes:
        seed (int): default master seed.
        trials (int): default number of randomized trials.
        tolerance (float | None): default relative tolerance.
        output_format (str): 'text' or 'jsonl'.
        precision_bits (int): oracle working precision.
        threads (int | None): worker threads.
        updated_at (datetime): last change.
    """
    seed = IntegerField(default=0)
    trials = IntegerField(default=1000)
    tolerance = FloatField(null=True)
    output_format = CharField(default="text", choices=[("text", "Text"), ("jsonl", "JSON lines")])
    precision_bits = IntegerField(default=200)
    threads = IntegerField(null=True)
    updated_at = DateTimeField(default=lambda: datetime.now(pytz.UTC))


class RunRecord(BaseModel):
    """
    One recorded certify, selftest or bench run.

    Attributes:
        command (str): 'certify', 'selftest' or 'bench'.
        target (str | None): certify target.
        seed (int | None), trials (int | None), tolerance (float | None): run parameters.
        min_margin (float | None): smallest relative margin, or largest residual for selftest.
        argmin (str | None): JSON of the inputs at min_margin.
        failures (int): checks beyond tolerance.
        confirmed (int): failures confirmed at oracle precision.
        passed (bool): overall outcome.
        created_at (datetime): UTC time of the run.
    """
    command = CharField()
    target = CharField(null=True)
    seed = IntegerField(null=True)
    trials = IntegerField(null=True)
    tolerance = FloatField(null=True)
    min_margin = FloatField(null=True)
    argmin = TextField(null=True)
    failures = IntegerField(default=0)
    confirmed = IntegerField(default=0)
    passed = BooleanField(default=True)
    created_at = DateTimeField(default=lambda: datetime.now(pytz.UTC))


def add_default_preference_to_db():
    """
    Adds the default preference row to the database.
    """
    with db.atomic():
        Preference.create()
    logger.info("Stored the default run preferences.")


def migrate_to_db_1():
    """
    Migrates the database schema to version 1: creates the tables and the default preference row.
    """
    db.create_tables([Preference, RunRecord])
    if Preference.select().count() == 0:
        add_default_preference_to_db()
    logger.info("Database initialized.")


def init_db(path=None):
    """
    Opens the database at `path` (default `database_path()`) and migrates it if needed.

    Args:
        path (str | None): SQLite file, or ':memory:'.
    """
    path = path or database_path()
    if path != ":memory:":
        os.makedirs(os.path.dirname(path), exist_ok=True)
    db.init(path)
    db.connect(reuse_if_open=True)
    version = db.execute_sql("PRAGMA user_version").fetchone()[0]

    if version == 0:
        migrate_to_db_1()
        db.execute_sql(f"PRAGMA user_version = {DB_VERSION}")
