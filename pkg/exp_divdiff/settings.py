"""
Run configuration and stored defaults.

Every RunConfig field is resolved in this order: explicit command-line flag,
then the environment (EXPDD_SEED for the seed), then the stored `Preference`
row, then the built-in default.

NOTE:
The `Preference` table holds a single row, created when the database is
first initialized and updated by `expdd defaults --save`.
"""

import logging
import math
import os
from dataclasses import asdict, dataclass

from exp_divdiff.errors import ArgumentError
from exp_divdiff.models import Preference
from exp_divdiff.utils import database_error_handler, get_current_utc_time

logger = logging.getLogger(__name__)

FORMATS = ("text", "jsonl")
MIN_PRECISION = 64
SEED_ENV = "EXPDD_SEED"
AUTO_THREADS = "auto"


@dataclass(frozen=True)
class RunConfig:
    """
    Parameters shared by the certify, selftest and bench commands.

    Attributes:
        seed (int): master seed, >= 0.
        trials (int): randomized trials, >= 1.
        tolerance (float | None): relative tolerance; None selects each check's default.
        output_format (str): 'text' or 'jsonl'.
        precision_bits (int): oracle precision, >= 64.
        threads (int | None): worker threads; None, or "auto" on input, means one per CPU.
    """
    seed: int = 0
    trials: int = 1000
    tolerance: float = None
    output_format: str = "text"
    precision_bits: int = 200
    threads: int = None

    def __post_init__(self):
        if isinstance(self.seed, bool) or int(self.seed) != self.seed or self.seed < 0:
            raise ArgumentError(f"seed must be a non-negative integer, got {self.seed!r}")
        if isinstance(self.trials, bool) or int(self.trials) != self.trials or self.trials < 1:
            raise ArgumentError(f"trials must be an integer >= 1, got {self.trials!r}")
        if self.tolerance is not None and not (math.isfinite(self.tolerance) and self.tolerance > 0):
            raise ArgumentError(f"tolerance must be > 0, got {self.tolerance!r}")
        if self.output_format not in FORMATS:
            raise ArgumentError(f"format must be one of {', '.join(FORMATS)}, got {self.output_format!r}")
        if int(self.precision_bits) != self.precision_bits or self.precision_bits < MIN_PRECISION:
            raise ArgumentError(f"precision must be >= {MIN_PRECISION} bits, got {self.precision_bits!r}")
        if isinstance(self.threads, str):
            object.__setattr__(self, "threads", _parse_threads(self.threads))
        if self.threads is not None and (isinstance(self.threads, bool) or int(self.threads) != self.threads
                                         or self.threads < 1):
            raise ArgumentError(f"threads must be an integer >= 1 or auto, got {self.threads!r}")

    @property
    def workers(self):
        return self.threads or os.cpu_count() or 1

    def tolerance_or(self, default):
        return default if self.tolerance is None else self.tolerance

    def to_dict(self):
        return asdict(self)


def _parse_threads(raw):
    if raw.strip().lower() == AUTO_THREADS:
        return None
    try:
        return int(raw)
    except ValueError as e:
        raise ArgumentError(f"threads must be an integer >= 1 or auto, got {raw!r}") from e


DEFAULTS = RunConfig().to_dict()


@database_error_handler
def get_preferences():
    """
    Retrieve the stored run defaults.

    Returns:
        dict: {"preferences": {...}} with the RunConfig field names.
    """
    preference = Preference.get_or_none()
    if preference is None:
        return {"preferences": dict(DEFAULTS)}
    return {"preferences": {
        "seed": preference.seed,
        "trials": preference.trials,
        "tolerance": preference.tolerance,
        "output_format": preference.output_format,
        "precision_bits": preference.precision_bits,
        "threads": preference.threads,
    }}


@database_error_handler
def set_preferences(**values):
    """
    Update the stored run defaults. Fields given as None are left unchanged.

    Returns:
        dict: {"success": {...}} with the stored values,
              {"warning": ...} when nothing was given, or {"error": ...}.
    """
    updates = {key: value for key, value in values.items() if value is not None}
    unknown = set(updates) - set(DEFAULTS)
    if unknown:
        raise ArgumentError(f"unknown preference field(s): {', '.join(sorted(unknown))}")
    if not updates:
        return {"warning": "No fields were updated because no values were provided."}

    preference = Preference.get_or_none() or Preference.create()
    current = get_preferences()["preferences"]
    current.update(updates)
    current = RunConfig(**current).to_dict()
    for key in updates:
        setattr(preference, key, current[key])
    preference.updated_at = get_current_utc_time()
    preference.save()
    logger.info("stored preferences: %s", updates)
    return {"success": current}


def _env_seed(environ):
    raw = environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return None
    try:
        return int(raw)
    except ValueError as e:
        raise ArgumentError(f"{SEED_ENV} must be an integer, got {raw!r}") from e


def resolve_run_config(flags=None, environ=None, stored=None):
    """
    Merge flags, environment, stored preferences and defaults into a RunConfig.

    Args:
        flags (dict | None): values given on the command line; None entries are unset.
        environ (Mapping | None): environment, default os.environ.
        stored (dict | None): stored preferences, default from get_preferences().

    Returns:
        RunConfig: the resolved configuration.

    Raises:
        ArgumentError: if a resolved value is invalid.
    """
    flags = {key: value for key, value in (flags or {}).items() if value is not None}
    environ = os.environ if environ is None else environ
    if stored is None:
        result = get_preferences()
        if "error" in result:
            logger.warning("stored preferences unavailable: %s", result["error"])
            stored = {}
        else:
            stored = result["preferences"]

    merged = dict(DEFAULTS)
    merged.update({key: value for key, value in stored.items() if key in DEFAULTS and value is not None})
    env_seed = _env_seed(environ)
    if env_seed is not None:
        merged["seed"] = env_seed
    merged.update(flags)
    return RunConfig(**merged)
