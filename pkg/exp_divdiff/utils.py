"""
Utility decorators and helpers shared by the service layer and the CLI.

This module provides:
- `database_error_handler`: turns peewee and validation errors into the
  `{"error": ..., "table": None}` result dicts the CLI inspects.
- `exit_code_handler`: maps `ExpddError` subclasses raised by a CLI command to
  their exit code, and a nonzero return value to `SystemExit`.
- Date helpers for run history:
    - `get_current_utc_time()`: current time in UTC.
    - `parse_since(text)`: day-first date string to an aware UTC datetime.
    - `convert_iso_to_date(value)`: ISO string or datetime to an aware datetime.
    - `format_datetime_for_user(dt, timezone, fmt)`: render in a timezone.
- `decimal_string(value)`: inputs echoed as round-trippable decimal strings.
"""

import functools
from datetime import datetime

import pytz
from dateutil import parser
from peewee import DatabaseError, IntegrityError

from exp_divdiff.errors import ExpddError, ParseError


def database_error_handler(func):
    """
    A decorator to handle database-related errors such as DatabaseError,
    IntegrityError and ValueError. If any of these errors occur, it returns
    an error message in a consistent format.

    Args:
        func (function): The function to wrap.

    Returns:
        wrapper (function): the wrapped function.
    """
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (DatabaseError, IntegrityError, ValueError) as e:
            return {"error": str(e), "table": None}
        except Exception as e:
            return {"error": f"Unknown error occurred: {e}", "table": None}
    return wrapper


def exit_code_handler(func):
    """
    A decorator for CLI command methods.

    An `ExpddError` is printed in bold red and becomes `SystemExit(exit_code)`;
    a nonzero integer return value becomes `SystemExit(value)`. Commands
    that finish cleanly return None, so Fire prints nothing extra.
    """
    @functools.wraps(func)
    def wrapper(self, *args, **kwargs):
        try:
            code = func(self, *args, **kwargs)
        except ExpddError as e:
            self._console_error(f"{type(e).__name__}: {e}")
            raise SystemExit(e.exit_code) from e
        if code:
            raise SystemExit(code)
        return None
    return wrapper


def get_current_utc_time():
    """
    Returns the current time in UTC timezone.

    Returns:
        datetime: The current UTC time.
    """
    return datetime.now(pytz.UTC)


def parse_since(text):
    """
    Parse a user date such as '15/10/2026' or '2026-10-15 08:00' (day first) as UTC.

    Raises:
        ParseError: if the text is not a date.

    Example:
        parse_since('15/10/2026') -> datetime(2026, 10, 15, 0, 0, tzinfo=<UTC>)
    """
    try:
        dt = parser.parse(str(text), dayfirst=True)
    except (ValueError, OverflowError) as e:
        raise ParseError(f"not a date: {text!r}") from e
    if dt.tzinfo:
        return dt.astimezone(pytz.UTC)
    return pytz.UTC.localize(dt)


def convert_iso_to_date(iso_str):
    """
    Convert an ISO 8601 string or datetime object to a timezone-aware datetime object.

    Args:
        iso_str (str | datetime): The ISO 8601 string or a datetime object.

    Returns:
        datetime: A timezone-aware datetime object, UTC when no zone was given.
    """
    if isinstance(iso_str, str):
        dt = datetime.fromisoformat(iso_str)
    else:
        dt = iso_str

    if dt.tzinfo:
        return dt
    return pytz.UTC.localize(dt)


def format_datetime_for_user(dt, timezone="UTC", fmt="%d.%m.%Y %H:%M"):
    """
    Converts a datetime object to the given timezone and formats it.

    Args:
        dt (datetime | str): UTC datetime or ISO string.
        timezone (str): pytz timezone name.
        fmt (str): strftime format.

    Returns:
        str: Formatted datetime string.
    """
    return convert_iso_to_date(dt).astimezone(pytz.timezone(timezone)).strftime(fmt)


def decimal_string(value):
    """
    Render numbers as shortest round-trip decimal strings; containers elementwise.

    Example:
        decimal_string((0.1, 2)) -> ['0.1', '2']
    """
    if isinstance(value, bool):
        return value
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [decimal_string(v) for v in value]
    if isinstance(value, dict):
        return {key: decimal_string(v) for key, v in value.items()}
    return value
