"""
Run history service functions.

Functions:
    record_run(...): store the outcome of a certify, selftest or bench run.
    list_runs(target, since, limit): recorded runs, newest first, as table rows.
"""

import json

from exp_divdiff.models import RunRecord
from exp_divdiff.utils import convert_iso_to_date, database_error_handler, decimal_string, parse_since

HISTORY_HEADERS = ["ID", "Command", "Target", "Seed", "Trials", "Tolerance", "Min margin",
                   "Failures", "Confirmed", "Passed", "Created at"]


@database_error_handler
def record_run(command, target=None, config=None, min_margin=None, argmin=None, failures=0,
               confirmed=0, passed=True):
    """
    Store one run.

    Args:
        command (str): 'certify', 'selftest' or 'bench'.
        target (str | None): certify target.
        config (RunConfig | None): resolved run configuration.
        min_margin (float | None): summary statistic of the run.
        argmin (dict | None): inputs at min_margin, stored as JSON.
        failures (int): checks beyond tolerance.
        confirmed (int): failures confirmed at oracle precision.
        passed (bool): overall outcome.

    Returns:
        dict: {"success": record id}.
    """
    record = RunRecord.create(
        command=command,
        target=target,
        seed=config.seed if config else None,
        trials=config.trials if config else None,
        tolerance=config.tolerance if config else None,
        min_margin=min_margin,
        argmin=json.dumps(decimal_string(argmin), sort_keys=True) if argmin is not None else None,
        failures=failures,
        confirmed=confirmed,
        passed=passed,
    )
    return {"success": record.id}


@database_error_handler
def list_runs(target=None, since=None, limit=20):
    """
    Recorded runs, newest first.

    Args:
        target (str | None): keep only this certify target (or command name).
        since (str | datetime | None): keep runs created at or after this date (day first, UTC).
        limit (int): maximum number of rows.

    Returns:
        dict: {"table": rows} with rows ordered as HISTORY_HEADERS; created_at is an aware datetime.
    """
    if isinstance(limit, bool) or int(limit) != limit or limit < 1:
        raise ValueError(f"limit must be an integer >= 1, got {limit!r}")
    threshold = None
    if since is not None:
        threshold = parse_since(since) if isinstance(since, str) else convert_iso_to_date(since)

    query = RunRecord.select().order_by(RunRecord.id.desc())
    if target is not None:
        query = query.where((RunRecord.target == target) | (RunRecord.command == target))

    rows = []
    for record in query:
        created_at = convert_iso_to_date(record.created_at)
        if threshold is not None and created_at < threshold:
            continue
        rows.append([record.id, record.command, record.target, record.seed, record.trials,
                     record.tolerance, record.min_margin, record.failures, record.confirmed,
                     record.passed, created_at])
        if len(rows) >= limit:
            break
    return {"table": rows}
