"""
Randomized and seeded drivers behind the certify, selftest and bench commands.

Certify
-------
`certify(target, config)` runs `config.trials` randomized checks of one
inequality. Trial i draws its inputs from a Philox generator keyed by
(seed, i), so the results do not depend on the number of worker threads.
Every failure beyond tolerance is re-evaluated from the arbitrary-precision
oracle and marked confirmed when the margin is still negative beyond
tolerance there.

Input distributions: nodes uniform on [-10, 10] ([-8, 8] for kernel checks),
where each new node repeats an earlier one with probability 0.2 and sits
1e-6 away from an earlier one with probability 0.1. Rectangle corners are
sorted draws.

Selftest
--------
`selftest(config, battery)` evaluates every identity residual on the
hand-checked cases of `battery.json` plus seeded random cases (up to 9
nodes in [-5, 5], tau in [0, 3]) and reports the largest relative residual
per identity.

Bench
-----
`bench(sizes)` times a full dd_exp recompute against one dd_append for each
order q in sizes. The table holds a narrow cluster and the appended node lies
far above it, where the append sweep stays within its error bound.
"""

import json
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import mpmath

from exp_divdiff import identities
from exp_divdiff.bounds import sandwich_check
from exp_divdiff.ddcore import dd_append, dd_exp, dd_table
from exp_divdiff.errors import ArgumentError, ParseError
from exp_divdiff.inequalities import (KernelSpec, four_point_f, h_product_margin, log_submodular_margin,
                                      phi_product_margin, supermodular_margin, tn2_margin, triangle_h_margin)
from exp_divdiff.oracle import block_generator, newton_highprec_mpf

logger = logging.getLogger(__name__)

LOG_TOLERANCE = 1e-10
LINEAR_TOLERANCE = 1e-12
NODE_RANGE = (-10.0, 10.0)
KERNEL_RANGE = (-8.0, 8.0)
IDENTITY_RANGE = (-5.0, 5.0)
DUPLICATE_PROBABILITY = 0.2
CLUSTER_PROBABILITY = 0.1
CLUSTER_GAP = 1e-6
SELFTEST_CASES = 40
BATTERY_FILE = os.path.join(os.path.dirname(__file__), "battery.json")
DEFAULT_BENCH_SIZES = (8, 64, 512)
BENCH_CLUSTER = 0.25
BENCH_TOP = 600.0


def trial_rng(seed, trial):
    """Generator for one trial, keyed by (seed, trial index)."""
    return block_generator(seed, trial)


def draw_nodes(rng, size, low=NODE_RANGE[0], high=NODE_RANGE[1]):
    """
    Draw `size` nodes on [low, high] with deliberate duplicates and tight clusters.

    Returns:
        list[float]: nodes in draw order.
    """
    nodes = []
    while len(nodes) < size:
        u = rng.random()
        if nodes and u < DUPLICATE_PROBABILITY:
            nodes.append(nodes[int(rng.integers(len(nodes)))])
        elif nodes and u < DUPLICATE_PROBABILITY + CLUSTER_PROBABILITY:
            base = nodes[int(rng.integers(len(nodes)))]
            step = CLUSTER_GAP if rng.random() < 0.5 else -CLUSTER_GAP
            nodes.append(min(high, max(low, base + step)))
        else:
            nodes.append(float(rng.uniform(low, high)))
    return nodes


def _strictly_increasing(values):
    values = sorted(values)
    for i in range(1, len(values)):
        if values[i] <= values[i - 1]:
            values[i] = math.nextafter(values[i - 1], math.inf)
    return values


@dataclass(frozen=True)
class Trial:
    """
    One certify check.

    Attributes:
        index (int): trial index.
        margin (float): relative margin (log slack for log-domain checks).
        passed (bool): within tolerance.
        inputs (dict): the drawn inputs.
    """
    index: int
    margin: float
    passed: bool
    inputs: dict


@dataclass(frozen=True)
class Target:
    """A certify target: how to draw inputs, evaluate and re-evaluate them at oracle precision."""
    name: str
    draw: object
    evaluate: object
    oracle: object
    tolerance: float


# draws

def _draw_kernel(rng):
    spec = KernelSpec(tuple(draw_nodes(rng, int(rng.integers(0, 7)), *KERNEL_RANGE)),
                      int(rng.integers(1, 4)), int(rng.integers(1, 4)))
    x1, x2 = sorted(draw_nodes(rng, 2, *KERNEL_RANGE))
    y1, y2 = sorted(draw_nodes(rng, 2, *KERNEL_RANGE))
    return {"prefix": list(spec.prefix), "p": spec.p, "q": spec.q, "x1": x1, "x2": x2, "y1": y1, "y2": y2}


def _draw_lattice(rng):
    inputs = _draw_kernel(rng)
    xs = draw_nodes(rng, 2, *KERNEL_RANGE)
    ys = draw_nodes(rng, 2, *KERNEL_RANGE)
    return {"prefix": inputs["prefix"], "p": inputs["p"], "q": inputs["q"], "u": [xs[0], ys[0]], "v": [xs[1], ys[1]]}


def _draw_four(rng):
    a, b, c, d = draw_nodes(rng, 4)
    return {"a": a, "b": b, "c": c, "d": d}


def _draw_triangle(rng):
    a, b, c = sorted(draw_nodes(rng, 3))
    return {"a": a, "b": b, "c": c}


def _draw_phi(rng):
    values = [0.0 if rng.random() < 0.1 else float(rng.uniform(0.0, 5.0)) for _ in range(3)]
    return {"x": values[0], "y": values[1], "z": values[2]}


def _draw_hproduct(rng):
    a, b, c, d = _strictly_increasing(draw_nodes(rng, 4))
    return {"a": a, "b": b, "c": c, "d": d}


def _draw_sandwich(rng):
    return {"nodes": draw_nodes(rng, int(rng.integers(2, 14)))}


# evaluations: (relative margin, passed)

def _spec(inputs):
    return KernelSpec(tuple(inputs["prefix"]), inputs["p"], inputs["q"])


def _from_margin(margin):
    return margin.relative, margin.passed


def _eval_tn2(inputs, tolerance):
    return _from_margin(tn2_margin(_spec(inputs), inputs["x1"], inputs["x2"], inputs["y1"], inputs["y2"], tolerance))


def _eval_supermodular(inputs, tolerance):
    return _from_margin(supermodular_margin(_spec(inputs), inputs["x1"], inputs["x2"], inputs["y1"], inputs["y2"],
                                            tolerance))


def _eval_lattice(inputs, tolerance):
    return _from_margin(log_submodular_margin(_spec(inputs), tuple(inputs["u"]), tuple(inputs["v"]), tolerance))


def _eval_four(inputs, tolerance):
    return _from_margin(four_point_f(inputs["a"], inputs["b"], inputs["c"], inputs["d"], tolerance))


def _eval_triangle(inputs, tolerance):
    return _from_margin(triangle_h_margin(inputs["a"], inputs["b"], inputs["c"], tolerance))


def _eval_phi(inputs, tolerance):
    return _from_margin(phi_product_margin(inputs["x"], inputs["y"], inputs["z"], tolerance))


def _eval_hproduct(inputs, tolerance):
    return _from_margin(h_product_margin(inputs["a"], inputs["b"], inputs["c"], inputs["d"], tolerance))


def _eval_sandwich(inputs, tolerance):
    report = sandwich_check(inputs["nodes"], tolerance)
    return min(report.slack_lower, report.slack_upper), report.passed


# oracle re-evaluation: relative margin in mpmath

def _mp_kernel(inputs, x, y, precision):
    nodes = [(a, 1) for a in inputs["prefix"]] + [(x, inputs["p"]), (y, inputs["q"])]
    return newton_highprec_mpf(nodes, precision)


def _mp_h(x, y, precision):
    return mpmath.exp(x) + mpmath.exp(y) - 2 * newton_highprec_mpf([x, y], precision)


def _mp_phi(u):
    u = mpmath.mpf(u)
    return mpmath.mpf(0) if u == 0 else mpmath.cosh(u) - mpmath.sinh(u) / u


def _relative(positive, negative):
    scale = max(abs(v) for v in positive + negative)
    return (mpmath.fsum(positive) - mpmath.fsum(negative)) / scale if scale else mpmath.mpf(0)


def _oracle_tn2(inputs, precision):
    k = lambda x, y: mpmath.log(_mp_kernel(inputs, x, y, precision))
    return k(inputs["x1"], inputs["y2"]) + k(inputs["x2"], inputs["y1"]) - k(inputs["x1"], inputs["y1"]) - k(
        inputs["x2"], inputs["y2"])


def _oracle_supermodular(inputs, precision):
    k = lambda x, y: _mp_kernel(inputs, x, y, precision)
    return _relative([k(inputs["x1"], inputs["y1"]), k(inputs["x2"], inputs["y2"])],
                     [k(inputs["x1"], inputs["y2"]), k(inputs["x2"], inputs["y1"])])


def _oracle_lattice(inputs, precision):
    (ux, uy), (vx, vy) = inputs["u"], inputs["v"]
    k = lambda x, y: mpmath.log(_mp_kernel(inputs, x, y, precision))
    return k(ux, uy) + k(vx, vy) - k(min(ux, vx), min(uy, vy)) - k(max(ux, vx), max(uy, vy))


def _oracle_four(inputs, precision):
    a, b, c, d = inputs["a"], inputs["b"], inputs["c"], inputs["d"]
    dd = lambda *nodes: newton_highprec_mpf(list(nodes), precision)
    square = dd(a, b, c, d) ** 2
    return (dd(a, a, b, c) * dd(d, d, b, c) + dd(b, b, a, d) * dd(c, c, a, d) - square) / square


def _oracle_triangle(inputs, precision):
    a, b, c = inputs["a"], inputs["b"], inputs["c"]
    return _relative([_mp_h(a, c, precision)], [_mp_h(a, b, precision), _mp_h(b, c, precision)])


def _oracle_phi(inputs, precision):
    x, y, z = inputs["x"], inputs["y"], inputs["z"]
    return _relative([_mp_phi(x + y) * _mp_phi(y + z)], [_mp_phi(x) * _mp_phi(z), _mp_phi(y) * _mp_phi(x + y + z)])


def _oracle_hproduct(inputs, precision):
    a, b, c, d = inputs["a"], inputs["b"], inputs["c"], inputs["d"]
    h = lambda x, y: _mp_h(x, y, precision)
    return _relative([h(a, c) * h(b, d)], [h(b, c) * h(a, d), h(a, b) * h(c, d)])


def _oracle_sandwich(inputs, precision):
    nodes = [mpmath.mpf(x) for x in inputs["nodes"]]
    n = len(nodes) - 1
    mu = mpmath.fsum(nodes) / (n + 1)
    sigma = mpmath.sqrt(mpmath.fsum((x - mu) ** 2 for x in nodes) / (n + 1))
    a0 = mpmath.sqrt(n) * sigma
    a = (n + 1) * sigma / mpmath.sqrt(n)
    log_value = mpmath.log(mpmath.factorial(n) * newton_highprec_mpf(inputs["nodes"], precision))
    log_lower = mu - a0 + mpmath.log(mpmath.hyp1f1(n, n + 1, a))
    log_upper = mu + a0 - a + mpmath.log(mpmath.hyp1f1(1, n + 1, a))
    return min(log_value - log_lower, log_upper - log_value)


TARGETS = {
    "tn2": Target("tn2", _draw_kernel, _eval_tn2, _oracle_tn2, LOG_TOLERANCE),
    "supermodular": Target("supermodular", _draw_kernel, _eval_supermodular, _oracle_supermodular, LINEAR_TOLERANCE),
    "fourpoint": Target("fourpoint", _draw_four, _eval_four, _oracle_four, LINEAR_TOLERANCE),
    "triangle": Target("triangle", _draw_triangle, _eval_triangle, _oracle_triangle, LINEAR_TOLERANCE),
    "phiproduct": Target("phiproduct", _draw_phi, _eval_phi, _oracle_phi, LINEAR_TOLERANCE),
    "hproduct": Target("hproduct", _draw_hproduct, _eval_hproduct, _oracle_hproduct, LINEAR_TOLERANCE),
    "sandwich": Target("sandwich", _draw_sandwich, _eval_sandwich, _oracle_sandwich, LOG_TOLERANCE),
    "logsubmodular": Target("logsubmodular", _draw_lattice, _eval_lattice, _oracle_lattice, LOG_TOLERANCE),
}


@dataclass(frozen=True)
class CertifyReport:
    """
    Outcome of a certify run.

    Attributes:
        target (str): target name.
        seed (int): master seed.
        tolerance (float): tolerance applied to every trial.
        trials (list[Trial]): all trials in index order.
        confirmed (dict[int, bool]): failing trial index -> negative beyond tolerance at oracle precision.
    """
    target: str
    seed: int
    tolerance: float
    trials: list
    confirmed: dict = field(default_factory=dict)

    @property
    def pass_count(self):
        return sum(1 for trial in self.trials if trial.passed)

    @property
    def failures(self):
        return [trial for trial in self.trials if not trial.passed]

    @property
    def confirmed_count(self):
        return sum(1 for value in self.confirmed.values() if value)

    @property
    def worst(self):
        """Trial with the smallest margin; the first one on ties."""
        return min(self.trials, key=lambda trial: (trial.margin, trial.index))

    @property
    def passed(self):
        return not self.failures


def get_target(name):
    """
    Raises:
        ArgumentError: for an unknown target.
    """
    if name not in TARGETS:
        raise ArgumentError(f"unknown certify target {name!r}; choose from {', '.join(TARGETS)}")
    return TARGETS[name]


def run_trial(target, seed, index, tolerance):
    """Draw and evaluate trial `index`."""
    inputs = target.draw(trial_rng(seed, index))
    margin, passed = target.evaluate(inputs, tolerance)
    return Trial(index, float(margin), bool(passed), inputs)


def confirm(target, trial, tolerance, precision_bits):
    """True when the trial's margin is negative beyond tolerance at oracle precision."""
    with mpmath.workprec(precision_bits + 64):
        margin = target.oracle(trial.inputs, precision_bits)
        return bool(margin < -tolerance)


def certify(name, config):
    """
    Run config.trials randomized checks of one inequality.

    Args:
        name (str): certify target.
        config (RunConfig): seed, trials, tolerance, threads and oracle precision.

    Returns:
        CertifyReport: all trials and the oracle verdict on each failure.
    """
    target = get_target(name)
    tolerance = config.tolerance_or(target.tolerance)
    indices = range(config.trials)
    workers = config.workers
    logger.debug("certify %s: %d trials on %d threads", name, config.trials, workers)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            trials = list(pool.map(lambda i: run_trial(target, config.seed, i, tolerance), indices))
    else:
        trials = [run_trial(target, config.seed, i, tolerance) for i in indices]

    confirmed = {}
    for trial in trials:
        if not trial.passed:
            confirmed[trial.index] = confirm(target, trial, tolerance, config.precision_bits)
            logger.warning("certify %s trial %d: margin %.3g (%s at oracle precision)", name, trial.index,
                           trial.margin, "confirmed" if confirmed[trial.index] else "not confirmed")
    return CertifyReport(name, config.seed, tolerance, trials, confirmed)


# selftest

IDENTITY_CHECKS = {
    "convolution": identities.convolution_residual,
    "repeated_sum": identities.repeated_sum_residual,
    "weighted_sum": identities.weighted_sum_residual,
    "parametric_derivative": identities.parametric_derivative_residual,
    "double_sum": identities.double_sum_residual,
    "leibniz": identities.leibniz_residual,
    "rescaling": identities.rescaling_residual,
}
IDENTITY_TOLERANCES = {name: identities.IDENTITY_TOLERANCE for name in IDENTITY_CHECKS}
IDENTITY_TOLERANCES["parametric_derivative"] = identities.FD_TOLERANCE
# the parameter reported as "tau" in selftest records
TAU_FIELD = {"convolution": "beta", "leibniz": "t1", "rescaling": "t"}


@dataclass(frozen=True)
class SelftestCheck:
    identity: str
    case: dict
    residual: object

    @property
    def q(self):
        return len(self.case["nodes"]) - 1

    @property
    def tau(self):
        return self.case[TAU_FIELD.get(self.identity, "tau")]


@dataclass(frozen=True)
class SelftestRow:
    """
    Per-identity summary.

    Attributes:
        identity (str): identity name.
        cases (int): number of cases run.
        max_residual (float): largest relative residual.
        tolerance (float): tolerance applied.
        passed (bool): max_residual <= tolerance.
    """
    identity: str
    cases: int
    max_residual: float
    tolerance: float
    passed: bool


def load_battery(path=BATTERY_FILE):
    """
    Hand-checked identity cases, keyed by identity name.

    Raises:
        ParseError: if the file cannot be read or is not valid JSON.
    """
    try:
        with open(path, encoding="utf-8") as battery_file:
            battery = json.load(battery_file)
    except (OSError, ValueError) as e:
        raise ParseError(f"cannot read identity battery {path}: {e}") from e
    unknown = set(battery) - set(IDENTITY_CHECKS)
    if unknown:
        raise ParseError(f"unknown identities in battery: {', '.join(sorted(unknown))}")
    return battery


def random_cases(identity, seed, count=SELFTEST_CASES):
    """Seeded random cases for one identity: up to 9 nodes in [-5, 5], tau in [0, 3]."""
    offset = list(IDENTITY_CHECKS).index(identity) * 1_000_000
    cases = []
    for index in range(count):
        rng = trial_rng(seed, offset + index)
        min_size = 2 if identity in ("convolution", "parametric_derivative") else 1
        nodes = draw_nodes(rng, int(rng.integers(min_size, 10)), *IDENTITY_RANGE)
        if identity == "convolution":
            case = {"nodes": nodes, "j": int(rng.integers(0, len(nodes) - 1)), "beta": float(rng.uniform(0, 3))}
        elif identity == "parametric_derivative":
            case = {"nodes": nodes, "tau": float(rng.uniform(0.1, 3))}
        elif identity == "leibniz":
            case = {"nodes": nodes, "t1": float(rng.uniform(-3, 3)), "t2": float(rng.uniform(-3, 3))}
        elif identity == "rescaling":
            alpha = float(rng.uniform(0.1, 10)) * (1 if rng.random() < 0.5 else -1)
            case = {"nodes": nodes, "alpha": alpha, "t": float(rng.uniform(-3, 3))}
        else:
            case = {"nodes": nodes, "tau": float(rng.uniform(0, 3))}
        cases.append(case)
    return cases


def selftest(config, battery=None, count=SELFTEST_CASES):
    """
    Run every identity over the battery and seeded random cases.

    Args:
        config (RunConfig): seed and optional tolerance override.
        battery (dict | None): hand-checked cases; loaded from battery.json by default.
        count (int): random cases per identity.

    Returns:
        tuple[list[SelftestRow], list[SelftestCheck]]: one row per identity, and every check.
    """
    battery = load_battery() if battery is None else battery
    rows, checks = [], []
    for identity, evaluate in IDENTITY_CHECKS.items():
        tolerance = config.tolerance_or(IDENTITY_TOLERANCES[identity])
        cases = list(battery.get(identity, [])) + random_cases(identity, config.seed, count)
        results = [SelftestCheck(identity, case, evaluate(**case, tolerance=tolerance)) for case in cases]
        worst = max((check.residual.rel_residual for check in results), default=0.0)
        rows.append(SelftestRow(identity, len(results), worst, tolerance, worst <= tolerance))
        checks.extend(results)
        logger.debug("selftest %s: %d cases, max residual %.3g", identity, len(results), worst)
    return rows, checks


# bench

def van_der_corput(index, base=2):
    """index-th element of the base-b van der Corput sequence in [0, 1)."""
    value, denominator = 0.0, 1.0
    while index:
        index, digit = divmod(index, base)
        denominator *= base
        value += digit / denominator
    return value


def bench_nodes(q):
    """
    q+1 distinct nodes: q in a cluster of width BENCH_CLUSTER, then one BENCH_TOP above it.

    Appending the top node keeps the Newton sweep within its error bound, so
    the bench times the O(q) path and not a rebuild.
    """
    cluster = [BENCH_CLUSTER * van_der_corput(i + 1) for i in range(q)]
    return cluster + [BENCH_TOP]


@dataclass(frozen=True)
class BenchRow:
    """
    Attributes:
        q (int): order.
        recompute_seconds (float): best time of dd_exp over all q+1 nodes.
        append_seconds (float): best time of one dd_append onto a q-node table.
        ratio (float): recompute_seconds / append_seconds.
    """
    q: int
    recompute_seconds: float
    append_seconds: float
    ratio: float


def _best_time(action, repeats):
    best = math.inf
    for _ in range(repeats):
        start = time.perf_counter()
        action()
        best = min(best, time.perf_counter() - start)
    return best


def bench(sizes=DEFAULT_BENCH_SIZES, repeats=3):
    """
    Time recompute against append for each order in sizes.

    Raises:
        ArgumentError: for an order below 1.
    """
    sizes = [int(q) for q in sizes] or list(DEFAULT_BENCH_SIZES)
    if min(sizes) < 1:
        raise ArgumentError(f"bench sizes must be >= 1, got {sizes}")
    rows = []
    for q in sorted(sizes):
        nodes = bench_nodes(q)
        table = dd_table(nodes[:-1])
        recompute = _best_time(lambda: dd_exp(nodes), repeats)
        append = _best_time(lambda: dd_append(table, nodes[-1]), repeats)
        rows.append(BenchRow(q, recompute, append, recompute / append if append > 0 else math.inf))
        logger.debug("bench q=%d: recompute %.3gs, append %.3gs", q, recompute, append)
    return rows


def ratio_grows(rows):
    """True when the recompute/append ratio at the largest q exceeds the one at the smallest q."""
    return len(rows) < 2 or rows[-1].ratio > rows[0].ratio
