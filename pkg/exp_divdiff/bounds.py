"""
Sharp sandwich bounds for n! exp[x_0, ..., x_n].

For n+1 real nodes with mean mu and population variance sigma^2 write

    a0 = sqrt(n) sigma,      a = (n + 1) sigma / sqrt(n).

Then e^mu L_n(sigma) <= n! exp[x_0..x_n] <= e^mu M_n(sigma), where

    L_n(sigma) = n e^-a0 (-a)^-n gamma(n, -a) = e^-a0 sum_m n/(n+m) a^m/m!
    M_n(sigma) = n e^a0 a^-n gamma(n, a)      = e^(a0-a) sum_k a^k/((n+1)...(n+k))

and gamma is the lower incomplete gamma function. Both sums have positive
terms only; they are evaluated in log form so large sigma never overflows.
The upper bound is attained by one node at mu + a0 with the other n nodes at
mu - a0/n, and the lower bound by the mirror configuration.

Classes:
    SummaryStats: n, mu, sigma^2, a0 and a of a node multiset.
    SandwichReport: outcome of one sandwich check.

Functions:
    summary(nodes), lower_incomplete_gamma(n, z), log_lower_incomplete_gamma(n, z),
    bound_L(n, sigma), bound_M(n, sigma), log_bound_L(n, sigma), log_bound_M(n, sigma),
    extremal_config(n, mu, sigma, side), extremal_value(n, mu, sigma, side),
    sandwich_check(nodes, tolerance), top_cap_margin(nodes),
    asymptotic_estimate(nodes), bound_expansion(n, sigma).
"""

import logging
import math
from dataclasses import dataclass

from exp_divdiff.compensated import CompensatedSum
from exp_divdiff.ddcore import dd_exp_factorial
from exp_divdiff.errors import ArgumentError, ConvergenceError, DomainError, RangeError
from exp_divdiff.nodes import NodeMultiset
from exp_divdiff.scaled import ScaledValue

logger = logging.getLogger(__name__)

SERIES_EPS = 1e-16
SERIES_CAP = 100_000
RESCALE_AT = 1e200
SANDWICH_TOLERANCE = 1e-10
SIDES = ("upper", "lower")


@dataclass(frozen=True)
class SummaryStats:
    """
    Summary statistics of n+1 nodes.

    Attributes:
        n (int): order, node count minus one.
        mu (float): mean.
        sigma2 (float): population variance (divided by n+1).
        a0 (float): sqrt(n) * sigma.
        a (float): (n+1) * sigma / sqrt(n).
    """
    n: int
    mu: float
    sigma2: float
    a0: float
    a: float

    @property
    def sigma(self):
        return math.sqrt(self.sigma2)


@dataclass(frozen=True)
class SandwichReport:
    """
    Attributes:
        lower (ScaledValue): e^mu L_n(sigma).
        value (ScaledValue): n! exp[x_0..x_n].
        upper (ScaledValue): e^mu M_n(sigma).
        slack_lower (float): log(value) - log(lower).
        slack_upper (float): log(upper) - log(value).
        passed (bool): both slacks >= -tolerance.
        tolerance (float): tolerance applied.
        stats (SummaryStats): statistics the bounds were built from.
    """
    lower: ScaledValue
    value: ScaledValue
    upper: ScaledValue
    slack_lower: float
    slack_upper: float
    passed: bool
    tolerance: float
    stats: SummaryStats


def _check_order(n):
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ArgumentError(f"order n must be an integer >= 1, got {n!r}")
    return int(n)


def _check_sigma(sigma):
    if not math.isfinite(sigma):
        raise DomainError(f"sigma={sigma!r} is not finite")
    if sigma < 0:
        raise ArgumentError(f"sigma must be >= 0, got {sigma!r}")
    return float(sigma)


def summary(nodes):
    """
    Mean, population variance and the derived a0, a of a node multiset.

    Raises:
        ArgumentError: for a single node (n = 0).

    Example:
        summary([1, 2, 6]) -> SummaryStats(n=2, mu=3.0, sigma2=4.666..., ...)
    """
    multiset = NodeMultiset.coerce(nodes)
    n = multiset.order()
    if n < 1:
        raise ArgumentError("summary statistics need at least two nodes")
    if multiset.is_constant:
        mu, sigma2 = multiset.values[0], 0.0
    else:
        mu = math.fsum(v * m for v, m in multiset.entries) / multiset.count
        sigma2 = math.fsum(m * (v - mu) ** 2 for v, m in multiset.entries) / multiset.count
    sigma = math.sqrt(sigma2)
    return SummaryStats(n, mu, sigma2, math.sqrt(n) * sigma, (n + 1) * sigma / math.sqrt(n))


def _log_positive_series(first, ratio):
    """
    log of sum_k term_k for positive terms with term_0 = first and
    term_{k+1} = term_k * ratio(k). Terms are rescaled to stay finite.
    """
    log_scale = 0.0
    term = first
    accumulator = CompensatedSum(first)
    for k in range(SERIES_CAP):
        r = ratio(k)
        term *= r
        accumulator.add(term)
        if accumulator.total > RESCALE_AT:
            term /= RESCALE_AT
            accumulator.total /= RESCALE_AT
            accumulator.correction /= RESCALE_AT
            log_scale += math.log(RESCALE_AT)
        if r < 1.0 and term <= SERIES_EPS * (1.0 - r) * accumulator.total:
            return log_scale + math.log(accumulator.value)
    raise ConvergenceError(f"series did not converge within {SERIES_CAP} terms")


def log_lower_incomplete_gamma(n, z):
    """
    Sign and log magnitude of the lower incomplete gamma function gamma(n, z).

    Positive z uses gamma(n, z) = z^n e^-z sum_k z^k / (n (n+1) ... (n+k)).
    Negative z = -a uses gamma(n, -a) = (-1)^n sum_m a^(n+m) / ((n+m) m!).
    Both sums have positive terms.

    Returns:
        tuple[int, float]: (sign, log|gamma(n, z)|); (0, -inf) at z = 0.
    """
    n = _check_order(n)
    if not math.isfinite(z):
        raise DomainError(f"z={z!r} is not finite")
    if z == 0.0:
        return 0, -math.inf
    if z > 0.0:
        log_sum = _log_positive_series(1.0 / n, lambda k: z / (n + k + 1))
        return 1, n * math.log(z) - z + log_sum
    a = -z
    log_sum = _log_positive_series(1.0 / n, lambda m: a / (m + 1) * (n + m) / (n + m + 1))
    return (-1) ** n, n * math.log(a) + log_sum


def lower_incomplete_gamma(n, z):
    """
    Lower incomplete gamma function gamma(n, z) = int_0^z t^(n-1) e^-t dt for integer n >= 1.

    Args:
        n (int): order, >= 1.
        z (float): finite upper limit; negative values are allowed.

    Returns:
        float: gamma(n, z).

    Raises:
        ArgumentError: if n is not an integer >= 1.
        RangeError: if the value overflows a double.

    Example:
        lower_incomplete_gamma(1, -2.0) -> -6.38905609893065  (1 - e^2)
    """
    sign, log_abs = log_lower_incomplete_gamma(n, z)
    return ScaledValue.from_log(log_abs, sign).to_float()


def log_bound_L(n, sigma):
    """log L_n(sigma) from the positive series e^-a0 sum_m n/(n+m) a^m/m!."""
    n = _check_order(n)
    sigma = _check_sigma(sigma)
    if sigma == 0.0:
        return 0.0
    a0 = math.sqrt(n) * sigma
    a = (n + 1) * sigma / math.sqrt(n)
    return -a0 + _log_positive_series(1.0, lambda m: a / (m + 1) * (n + m) / (n + m + 1))


def log_bound_M(n, sigma):
    """log M_n(sigma) from the positive series e^(a0-a) sum_k a^k/((n+1)...(n+k))."""
    n = _check_order(n)
    sigma = _check_sigma(sigma)
    if sigma == 0.0:
        return 0.0
    a0 = math.sqrt(n) * sigma
    a = (n + 1) * sigma / math.sqrt(n)
    return a0 - a + _log_positive_series(1.0, lambda k: a / (n + k + 1))


def _exp_or_range_error(log_value, name):
    try:
        return math.exp(log_value)
    except OverflowError as e:
        raise RangeError(f"{name} = e**{log_value:.6g} overflows a double") from e


def bound_L(n, sigma):
    """
    Lower sandwich factor L_n(sigma); L_n(0) = 1.

    Example:
        bound_L(1, 1.0) -> 1.1752011936438014  (sinh 1)
    """
    return _exp_or_range_error(log_bound_L(n, sigma), "L_n")


def bound_M(n, sigma):
    """
    Upper sandwich factor M_n(sigma); M_n(0) = 1.

    Example:
        bound_M(1, 1.0) -> 1.1752011936438014  (sinh 1)
    """
    return _exp_or_range_error(log_bound_M(n, sigma), "M_n")


def _check_side(side):
    if side not in SIDES:
        raise ArgumentError(f"side must be one of {', '.join(SIDES)}, got {side!r}")
    return side


def extremal_config(n, mu, sigma, side="upper"):
    """
    Two-level node configuration attaining a sandwich bound.

    Args:
        n (int): order (n+1 nodes).
        mu (float): mean.
        sigma (float): standard deviation, >= 0.
        side (str): "upper" for (mu + a0, (mu - a0/n)^n), "lower" for (mu - a0, (mu + a0/n)^n).

    Returns:
        NodeMultiset: the configuration, with mean mu and variance sigma^2.
    """
    n = _check_order(n)
    sigma = _check_sigma(sigma)
    _check_side(side)
    if not math.isfinite(mu):
        raise DomainError(f"mu={mu!r} is not finite")
    a0 = math.sqrt(n) * sigma
    spike = a0 if side == "upper" else -a0
    return NodeMultiset.from_pairs([(mu + spike, 1), (mu - spike / n, n)])


def extremal_value(n, mu, sigma, side="upper"):
    """e^mu M_n(sigma) for side "upper", e^mu L_n(sigma) for side "lower", as a ScaledValue."""
    _check_side(side)
    log_bound = log_bound_M(n, sigma) if side == "upper" else log_bound_L(n, sigma)
    return ScaledValue.from_log(mu + log_bound)


def sandwich_check(nodes, tolerance=SANDWICH_TOLERANCE):
    """
    Check e^mu L_n(sigma) <= n! exp[x_0..x_n] <= e^mu M_n(sigma) in the log domain.

    Args:
        nodes: at least two nodes.
        tolerance (float): admissible negative log slack.

    Returns:
        SandwichReport: the three values and both log slacks.
    """
    if not tolerance > 0:
        raise ArgumentError(f"tolerance must be > 0, got {tolerance!r}")
    multiset = NodeMultiset.coerce(nodes)
    stats = summary(multiset)
    value = dd_exp_factorial(multiset)
    log_lower = stats.mu + log_bound_L(stats.n, stats.sigma)
    log_upper = stats.mu + log_bound_M(stats.n, stats.sigma)
    log_value = value.log()
    slack_lower = log_value - log_lower
    slack_upper = log_upper - log_value
    passed = slack_lower >= -tolerance and slack_upper >= -tolerance
    if not passed:
        logger.info("sandwich violated for %s: slacks %.3g, %.3g", multiset, slack_lower, slack_upper)
    return SandwichReport(ScaledValue.from_log(log_lower), value, ScaledValue.from_log(log_upper),
                          slack_lower, slack_upper, passed, tolerance, stats)


def top_cap_margin(nodes):
    """
    Room left to the largest deviation a node can have at fixed variance.

    Returns:
        tuple[float, float]: (a0 - max(x - mu), min(x - mu) + a0); both >= 0, and the first
        (second) is zero exactly at the upper (lower) extremal configuration.
    """
    multiset = NodeMultiset.coerce(nodes)
    stats = summary(multiset)
    return stats.a0 - (multiset.values[-1] - stats.mu), (multiset.values[0] - stats.mu) + stats.a0


def asymptotic_estimate(nodes):
    """
    Large-n estimate exp(mu + sigma^2/(2n)) of n! exp[x_0..x_n], as a ScaledValue.

    The remainder is O(n^(-3/2)) for bounded sigma.
    """
    stats = summary(nodes)
    return ScaledValue.from_log(stats.mu + stats.sigma2 / (2 * stats.n))


def bound_expansion(n, sigma):
    """
    Three-term expansions of L_n and M_n.

    Returns:
        tuple[float, float]: 1 + sigma^2/(2n) - sigma^3/(3 n^1.5) and 1 + sigma^2/(2n) + sigma^3/(3 n^1.5).

    Example:
        bound_expansion(100, 1.0) -> (1.004666..., 1.005333...)
    """
    n = _check_order(n)
    sigma = _check_sigma(sigma)
    second = sigma ** 2 / (2 * n)
    third = sigma ** 3 / (3 * n ** 1.5)
    return 1.0 + second - third, 1.0 + second + third
