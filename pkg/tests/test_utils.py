from exp_divdiff.utils import *
from exp_divdiff.errors import ArgumentError, DomainError, ExpddError
import pytest
import pytz

def test_get_current_utc_time():
    now = get_current_utc_time()
    assert now.tzinfo is not None
    assert now.tzinfo.tzname(now) == 'UTC'

def test_parse_since_day_first():
    assert parse_since("15/10/2026") == datetime(2026, 10, 15, tzinfo=pytz.UTC)
    assert parse_since("2026-10-15 08:00") == datetime(2026, 10, 15, 8, 0, tzinfo=pytz.UTC)

def test_parse_since_keeps_given_zone():
    dt = parse_since("2026-10-15T08:00:00+02:00")
    assert dt == datetime(2026, 10, 15, 6, 0, tzinfo=pytz.UTC)

def test_parse_since_rejects_garbage():
    with pytest.raises(ParseError):
        parse_since("yesterday-ish")

def test_convert_iso_to_date():
    assert convert_iso_to_date("2021-10-15T13:45:00") == datetime(2021, 10, 15, 13, 45, tzinfo=pytz.UTC)
    aware = datetime(2021, 10, 15, 13, 45, tzinfo=pytz.UTC)
    assert convert_iso_to_date(aware) is aware

def test_format_datetime_for_user():
    dt = datetime(2021, 10, 15, 12, 0, tzinfo=pytz.UTC)
    assert format_datetime_for_user(dt) == "15.10.2021 12:00"
    assert format_datetime_for_user(dt, "Asia/Kolkata") == "15.10.2021 17:30"

def test_decimal_string():
    assert decimal_string(0.1) == "0.1"
    assert decimal_string(2) == "2"
    assert decimal_string(True) is True
    assert decimal_string({"nodes": (1e-300, -0.5), "p": 3}) == {"nodes": ["1e-300", "-0.5"], "p": "3"}
    assert decimal_string(None) is None

def test_database_error_handler_success():
    @database_error_handler
    def dummy():
        return {"result": "ok"}

    result = dummy()
    assert result == {"result": "ok"}

def test_database_error_handler_db_error():
    from peewee import IntegrityError

    @database_error_handler
    def dummy():
        raise IntegrityError("duplicate entry")

    result = dummy()
    assert result["error"] == "duplicate entry"
    assert result["table"] is None

def test_database_error_handler_value_error():
    @database_error_handler
    def dummy():
        raise ArgumentError("limit must be an integer >= 1")

    assert dummy()["error"] == "limit must be an integer >= 1"

def test_database_error_handler_unknown():
    @database_error_handler
    def dummy():
        raise RuntimeError("something unexpected")

    result = dummy()
    assert "Unknown error occurred" in result["error"]

class DummyCommands:
    def __init__(self):
        self.errors = []

    def _console_error(self, message):
        self.errors.append(message)

    @exit_code_handler
    def returns(self, code):
        return code

    @exit_code_handler
    def raises(self, error):
        raise error

def test_exit_code_handler_passes_clean_runs():
    assert DummyCommands().returns(0) is None
    assert DummyCommands().returns(None) is None

def test_exit_code_handler_nonzero_return():
    with pytest.raises(SystemExit) as exc:
        DummyCommands().returns(1)
    assert exc.value.code == 1

@pytest.mark.parametrize("error, code", [
    (ArgumentError("bad trials"), 2),
    (ParseError("bad token"), 2),
    (DomainError("nan node"), 3),
    (ExpddError("generic"), 3),
])
def test_exit_code_handler_maps_errors(error, code):
    commands = DummyCommands()
    with pytest.raises(SystemExit) as exc:
        commands.raises(error)
    assert exc.value.code == code
    assert commands.errors == [f"{type(error).__name__}: {error}"]

def test_exit_code_handler_keeps_signature():
    assert DummyCommands.returns.__name__ == "returns"
