"""
expdd CLI Interface
===================

Command-line access to the exponential divided-difference engine, the sharp
sandwich bounds, the randomized inequality sweeps and the identity self-test.

Commands:
---------
- dd        : e^{t[x_0..x_q]} of a node list (or n! exp[...] with --factorial).
- bounds    : the sandwich e^mu L_n <= n! exp[...] <= e^mu M_n for a node list.
- certify   : randomized checks of one inequality.
- selftest  : identity residuals over the seeded battery.
- bench     : recompute against append timings.
- defaults  : show or store the default run parameters.
- history   : recorded certify, selftest and bench runs.

Shared flags (certify, selftest, bench, defaults):
    --seed, --trials, --tolerance, --format text|jsonl, --threads, --precision, --verbose.
Node commands take --format and --verbose.

Exit codes: 0 pass, 1 check failure, 2 usage error, 3 numeric or domain error.

Dependencies:
-------------
- fire          : command dispatch.
- pyfiglet      : the banner shown by `expdd` without arguments.
- tabulate      : text tables.
- rich.console  : styled terminal output.

Usage:
------
    $ expdd dd 0 1
    $ expdd dd 0^4 --factorial
    $ expdd certify fourpoint --trials 100000 --seed 7 --format jsonl
"""

import json
import logging
import math

import fire
import pyfiglet
import tabulate
from rich.console import Console
from rich.markup import escape

from exp_divdiff import history, settings, sweeps
from exp_divdiff.bounds import sandwich_check
from exp_divdiff.ddcore import dd_exp, dd_exp_factorial
from exp_divdiff.errors import ArgumentError, ExpddError
from exp_divdiff.log import configure_logging
from exp_divdiff.nodes import parse_nodes, read_node_file
from exp_divdiff.utils import decimal_string, exit_code_handler, format_datetime_for_user

logger = logging.getLogger(__name__)

COMMANDS = [
    ("dd", "exponential divided difference of a node list"),
    ("bounds", "sharp sandwich bounds for a node list"),
    ("certify", f"randomized inequality checks: {', '.join(sweeps.TARGETS)}"),
    ("selftest", "identity residuals over the seeded battery"),
    ("bench", "recompute against append timings"),
    ("defaults", "show or store default run parameters"),
    ("history", "recorded runs"),
]


def _scaled_text(value):
    """Plain decimal when representable, mantissa * e^shift otherwise."""
    if value.is_representable:
        return repr(value.to_float())
    return f"{value.mantissa!r}*e^{value.log_shift!r}"


class CLI:
    """
    Command Line Interface for expdd.

    Attributes:
        console (Console): rich console on stdout.
        error_console (Console): rich console on stderr for error messages.
        terminal_color (str): color of regular output.
    """

    def __init__(self):
        self.console = Console()
        self.error_console = Console(stderr=True)
        self.terminal_color = "blue"

    def fire(self, argv=None):
        """
        Dispatch the command line (default sys.argv[1:]) with Fire.
        """
        fire.Fire(self, command=argv, name="expdd")

    def _console_print(self, message):
        self.console.print(f"[bold {self.terminal_color}]{message}[/bold {self.terminal_color}]", soft_wrap=True)

    def _console_error(self, message):
        self.error_console.print(f"[bold red]{escape(message)}[/bold red]", soft_wrap=True)

    def _handle_result_error(self, msg, error):
        self._console_error(f"{msg}. {error if error else ''}")

    def _print_table(self, rows, headers):
        self._console_print(escape(tabulate.tabulate(rows, headers=headers, tablefmt="pretty")))

    def _emit(self, record):
        print(json.dumps(record, sort_keys=True))

    def _config(self, seed=None, trials=None, tolerance=None, format=None, threads=None, precision=None,
                verbose=False):
        """Configure logging and resolve the run configuration from flags, environment and stored defaults."""
        configure_logging(bool(verbose))
        flags = {"seed": seed, "trials": trials, "tolerance": tolerance, "output_format": format,
                 "threads": threads, "precision_bits": precision}
        try:
            return settings.resolve_run_config(flags)
        except ExpddError:
            raise
        except (TypeError, ValueError) as e:
            raise ArgumentError(str(e)) from e

    def _nodes(self, nodes, file):
        items = list(nodes)
        if file is not None:
            items.extend(read_node_file(file).flat())
        return parse_nodes(items)

    def _record(self, command, target=None, config=None, **outcome):
        result = history.record_run(command, target, config, **outcome)
        if "error" in result:
            logger.warning("run not recorded: %s", result["error"])

    @exit_code_handler
    def dd(self, *nodes, t=1.0, factorial=False, file=None, format=None, verbose=False):
        """
        Print e^{t[x_0..x_q]} for the given nodes.

        Args:
            nodes: node tokens; `v^m` repeats v m times.
            t (float): scale, default 1.
            factorial (bool): print q! exp[x_0..x_q] instead (t must be 1).
            file (str, optional): node file to read in addition to the arguments.
            format (str, optional): 'text' or 'jsonl'.
            verbose (bool): debug logging on stderr.
        """
        config = self._config(format=format, verbose=verbose)
        try:
            t = float(t)
        except (TypeError, ValueError) as e:
            raise ArgumentError(f"t must be a number, got {t!r}") from e
        multiset = self._nodes(nodes, file)
        if factorial:
            if t != 1.0:
                raise ArgumentError("--factorial evaluates q! exp[...] at t = 1")
            value = dd_exp_factorial(multiset)
        else:
            value = dd_exp(multiset, t)
        plain = value.to_float() if value.is_representable else None

        if config.output_format == "jsonl":
            self._emit({"command": "dd", "nodes": decimal_string(list(multiset.flat())), "t": repr(t),
                        "factorial": bool(factorial), "mantissa": value.mantissa,
                        "log_shift": value.log_shift, "value": plain})
            return 0
        self._console_print(f"nodes: {escape(str(multiset))}  t: {t!r}")
        self._console_print(f"mantissa: {value.mantissa!r}  log_shift: {value.log_shift!r}")
        if plain is not None:
            self._console_print(f"value ≈ {plain!r}")
        return 0

    @exit_code_handler
    def bounds(self, *nodes, file=None, tolerance=None, format=None, verbose=False):
        """
        Check e^mu L_n(sigma) <= n! exp[x_0..x_n] <= e^mu M_n(sigma); exit 1 when violated.

        Args:
            nodes: node tokens, at least two nodes.
            file (str, optional): node file to read in addition to the arguments.
            tolerance (float, optional): admissible negative log slack, default 1e-10.
            format (str, optional): 'text' or 'jsonl'.
            verbose (bool): debug logging on stderr.
        """
        config = self._config(tolerance=tolerance, format=format, verbose=verbose)
        multiset = self._nodes(nodes, file)
        report = sandwich_check(multiset, config.tolerance_or(sweeps.LOG_TOLERANCE))
        stats = report.stats

        if config.output_format == "jsonl":
            self._emit({"command": "bounds", "nodes": decimal_string(list(multiset.flat())), "n": stats.n,
                        "mu": stats.mu, "sigma": stats.sigma, "log_lower": report.lower.log(),
                        "log_value": report.value.log(), "log_upper": report.upper.log(),
                        "slack_lower": report.slack_lower, "slack_upper": report.slack_upper,
                        "tolerance": report.tolerance, "passed": report.passed})
        else:
            self._print_table([[stats.n, stats.mu, stats.sigma, _scaled_text(report.lower),
                                _scaled_text(report.value), _scaled_text(report.upper),
                                report.slack_lower, report.slack_upper, report.passed]],
                              ["n", "mu", "sigma", "e^mu L_n", "n! exp[x]", "e^mu M_n",
                               "Slack lower", "Slack upper", "Passed"])
        return 0 if report.passed else 1

    @exit_code_handler
    def certify(self, target, seed=None, trials=None, tolerance=None, format=None, threads=None, precision=None,
                verbose=False):
        """
        Run randomized checks of one inequality; exit 1 on any failure beyond tolerance.

        Args:
            target (str): tn2, supermodular, fourpoint, triangle, phiproduct, hproduct, sandwich or logsubmodular.
            seed, trials, tolerance, format, threads, precision, verbose: shared run flags.
        """
        config = self._config(seed, trials, tolerance, format, threads, precision, verbose)
        report = sweeps.certify(str(target), config)
        worst = report.worst

        if config.output_format == "jsonl":
            for trial in report.trials:
                self._emit({"target": report.target, "trial": trial.index, "margin": trial.margin,
                            "passed": trial.passed, "confirmed": report.confirmed.get(trial.index),
                            "inputs": decimal_string(trial.inputs)})
            self._emit({"summary": True, "target": report.target, "seed": report.seed,
                        "trials": len(report.trials), "pass_count": report.pass_count,
                        "failures": len(report.failures), "confirmed": report.confirmed_count,
                        "tolerance": report.tolerance, "min_margin": worst.margin,
                        "argmin_trial": worst.index, "argmin_inputs": decimal_string(worst.inputs),
                        "passed": report.passed})
        else:
            self._print_table([[report.target, len(report.trials), report.pass_count, len(report.failures),
                                report.confirmed_count, worst.margin, worst.index]],
                              ["Target", "Trials", "Passed", "Failures", "Confirmed", "Min margin", "Argmin trial"])
            self._console_print(f"argmin inputs (seed {report.seed}, trial {worst.index}): "
                                f"{escape(json.dumps(decimal_string(worst.inputs), sort_keys=True))}")
            failures = report.failures
            if failures:
                self._print_table([[trial.index, trial.margin,
                                    "confirmed" if report.confirmed[trial.index] else "working precision only"]
                                   for trial in failures[:20]],
                                  ["Trial", "Margin", "Oracle"])

        self._record("certify", report.target, config, min_margin=worst.margin, argmin=worst.inputs,
                     failures=len(report.failures), confirmed=report.confirmed_count, passed=report.passed)
        return 0 if report.passed else 1

    @exit_code_handler
    def selftest(self, seed=None, tolerance=None, format=None, precision=None, verbose=False):
        """
        Run every identity over the battery; exit 1 if any residual exceeds its tolerance.

        Args:
            seed, tolerance, format, precision, verbose: shared run flags.
        """
        config = self._config(seed=seed, tolerance=tolerance, format=format, precision=precision,
                              verbose=verbose)
        rows, checks = sweeps.selftest(config)
        passed = all(row.passed for row in rows)

        if config.output_format == "jsonl":
            for check in checks:
                self._emit({"identity": check.identity, "q": check.q, "tau": check.tau,
                            "residual": check.residual.rel_residual, "passed": check.residual.passed,
                            "inputs": decimal_string(check.case)})
            for row in rows:
                self._emit({"summary": True, "identity": row.identity, "cases": row.cases,
                            "max_residual": row.max_residual, "tolerance": row.tolerance, "passed": row.passed})
        else:
            self._print_table([[row.identity, row.cases, row.max_residual, row.tolerance, row.passed] for row in rows],
                              ["Identity", "Cases", "Max residual", "Tolerance", "Passed"])

        self._record("selftest", config=config, min_margin=max(row.max_residual for row in rows),
                     failures=sum(1 for row in rows if not row.passed), passed=passed)
        return 0 if passed else 1

    @exit_code_handler
    def bench(self, *sizes, repeats=3, format=None, verbose=False):
        """
        Time dd_exp over q+1 nodes against one dd_append onto q nodes.

        Exit 1 when the recompute/append ratio at the largest q does not exceed
        the one at the smallest q.

        Args:
            sizes: orders q, default 8 64 512.
            repeats (int): timing repetitions; the best time is kept.
            format, verbose: shared run flags.
        """
        config = self._config(format=format, verbose=verbose)
        try:
            orders = [int(q) for q in sizes]
            repeats = int(repeats)
        except (TypeError, ValueError) as e:
            raise ArgumentError(f"bench sizes must be integers: {e}") from e
        if repeats < 1:
            raise ArgumentError(f"repeats must be >= 1, got {repeats}")
        rows = sweeps.bench(orders or sweeps.DEFAULT_BENCH_SIZES, repeats)
        grows = sweeps.ratio_grows(rows)

        if config.output_format == "jsonl":
            for row in rows:
                self._emit({"q": row.q, "recompute_seconds": row.recompute_seconds,
                            "append_seconds": row.append_seconds, "ratio": row.ratio})
            self._emit({"summary": True, "ratio_grows": grows})
        else:
            self._print_table([[row.q, f"{row.recompute_seconds:.3e}", f"{row.append_seconds:.3e}",
                                f"{row.ratio:.1f}"] for row in rows],
                              ["q", "Recompute (s)", "Append (s)", "Ratio"])
            self._console_print(f"ratio grows with q: {grows}")

        self._record("bench", config=config, min_margin=rows[-1].ratio if math.isfinite(rows[-1].ratio) else None,
                     failures=0 if grows else 1, passed=grows)
        return 0 if grows else 1

    @exit_code_handler
    def defaults(self, save=False, seed=None, trials=None, tolerance=None, format=None, threads=None,
                 precision=None, verbose=False):
        """
        Show the stored default run parameters, or store the given flags with --save.
        """
        configure_logging(bool(verbose))
        if save:
            results = settings.set_preferences(seed=seed, trials=trials, tolerance=tolerance,
                                               output_format=format, threads=threads, precision_bits=precision)
            if results.get("warning"):
                self._console_print(results["warning"])
                return 0
            if "error" in results:
                self._handle_result_error("Failed to store defaults", results.get("error"))
                return 2
            preferences = results["success"]
        else:
            results = settings.get_preferences()
            if "error" in results:
                self._handle_result_error("Failed to read defaults", results.get("error"))
                return 3
            preferences = results["preferences"]
        self._print_table([[key, preferences[key]] for key in settings.DEFAULTS], ["Setting", "Value"])
        return 0

    @exit_code_handler
    def history(self, target=None, since=None, limit=20, format=None, verbose=False):
        """
        List recorded runs, newest first.

        Args:
            target (str, optional): certify target or command name.
            since (str, optional): day-first date, e.g. 15/10/2026.
            limit (int): maximum number of rows.
        """
        configure_logging(bool(verbose))
        output_format = format or settings.DEFAULTS["output_format"]
        if output_format not in settings.FORMATS:
            raise ArgumentError(f"format must be one of {', '.join(settings.FORMATS)}, got {output_format!r}")
        results = history.list_runs(target, None if since is None else str(since), limit)
        if "error" in results:
            self._handle_result_error("Failed to list runs", results.get("error"))
            return 2

        table = results["table"]
        if output_format == "jsonl":
            for row in table:
                keys = [header.lower().replace(" ", "_") for header in history.HISTORY_HEADERS]
                record = dict(zip(keys, row))
                record["created_at"] = record["created_at"].isoformat()
                self._emit(record)
            return 0
        if not table:
            self._console_print("No runs recorded.")
            return 0
        self._print_table([row[:-1] + [format_datetime_for_user(row[-1])] for row in table], history.HISTORY_HEADERS)
        return 0

    def run(self):
        """
        Shown when expdd is started without arguments: the banner and the command list.
        """
        self._console_print(escape(pyfiglet.figlet_format("expdd")))
        self._console_print("Exponential divided differences, their sharp bounds and inequalities.")
        self._print_table(COMMANDS, ["Command", "Purpose"])
        self._console_print("Run `expdd <command> --help` for the flags of a command.")
