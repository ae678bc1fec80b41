"""
Independent reference evaluators for exponential divided differences.

Nothing in this module calls the ddcore engine. Three references are kept:

- a confluent Newton divided-difference table in arbitrary precision (mpmath),
  refined until two working precisions agree;
- a Hermite-Genocchi Monte Carlo estimator: exp[x_0..x_n] is 1/n! times the
  mean of exp(lambda . x) over lambda uniform on the standard simplex;
- a Gauss-Legendre quadrature of the beta-type integral that represents the
  two-level kernel exp[x^(p), y^(q)].

Simplex points are drawn as normalized standard exponentials. Every block of
Monte Carlo samples owns a Philox generator keyed by (seed, block index), so
estimates do not depend on the thread count.

Classes:
    Estimate: Monte Carlo mean with its standard error.

Functions:
    newton_highprec_mpf(nodes, precision_bits, t): raw mpmath reference value.
    newton_highprec(nodes, precision_bits, t): reference value as a ScaledValue.
    simplex_sample(n, rng): one uniform point on the n-simplex.
    block_generator(seed, index): the generator of one sample block.
    hg_monte_carlo(nodes, samples, seed, threads, block_size): Monte Carlo estimate.
    gauss_legendre_rule(a, b, points): quadrature nodes and weights on [a, b].
    kernel_beta_integral(p, q, x, y, quad_points): exp[x^(p), y^(q)] by quadrature.

Dependencies:
    mpmath: arbitrary-precision arithmetic for the Newton table.
    numpy: Philox generators, vectorized sampling and Legendre nodes.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import mpmath
import numpy as np

from exp_divdiff.errors import ArgumentError, ConvergenceError, DomainError, RangeError
from exp_divdiff.nodes import NodeMultiset
from exp_divdiff.scaled import ScaledValue

logger = logging.getLogger(__name__)

MIN_PRECISION = 64
PRECISION_STEP = 64
MAX_ROUNDS = 8
GUARD_BITS = 20
MC_THRESHOLD = 4.0


def _newton_table(sequence, t, working_bits):
    with mpmath.workprec(working_bits):
        x = [mpmath.mpf(v) for v in sequence]
        scale = mpmath.mpf(t)
        column = [mpmath.exp(scale * v) for v in x]
        for k in range(1, len(x)):
            next_column = []
            for i in range(len(x) - k):
                if x[i + k] == x[i]:
                    # sorted input: x[i..i+k] all equal
                    next_column.append(scale ** k * mpmath.exp(scale * x[i]) / mpmath.factorial(k))
                else:
                    next_column.append((column[i + 1] - column[i]) / (x[i + k] - x[i]))
            column = next_column
        return column[0]


def _agrees(a, b, bits):
    if a == b:
        return True
    return abs(a - b) <= mpmath.ldexp(max(abs(a), abs(b)), -bits)


def newton_highprec_mpf(nodes, precision_bits=200, t=1.0):
    """
    Reference value of e^{t[x_0..x_q]} as an mpmath number.

    The Newton table is evaluated at precision_bits + 64 and again with 64
    more bits each round until consecutive values agree to precision_bits - 20
    bits.

    Args:
        nodes: anything `NodeMultiset.coerce` accepts.
        precision_bits (int): requested precision, at least 64.
        t (float): finite scale.

    Returns:
        mpmath.mpf: the reference value.

    Raises:
        ArgumentError: if precision_bits is below 64.
        DomainError: if t is not finite.
        ConvergenceError: if the precision loop does not settle.
    """
    if int(precision_bits) != precision_bits or precision_bits < MIN_PRECISION:
        raise ArgumentError(f"oracle precision must be an integer >= {MIN_PRECISION} bits, got {precision_bits!r}")
    if not math.isfinite(t):
        raise DomainError(f"scale t={t!r} is not finite")
    multiset = NodeMultiset.coerce(nodes)
    sequence = multiset.flat()
    target = int(precision_bits) - GUARD_BITS
    working = int(precision_bits) + PRECISION_STEP
    previous = _newton_table(sequence, t, working)
    for _ in range(MAX_ROUNDS):
        working += PRECISION_STEP
        current = _newton_table(sequence, t, working)
        if _agrees(previous, current, target):
            logger.debug("oracle settled at %d bits for %d nodes", working, len(sequence))
            return current
        previous = current
    raise ConvergenceError(f"oracle did not settle below {working} bits")


def newton_highprec(nodes, precision_bits=200, t=1.0):
    """
    Reference value of e^{t[x_0..x_q]} as a ScaledValue.

    Example:
        float(newton_highprec([0, 1, 1])) -> 1.0
    """
    value = newton_highprec_mpf(nodes, precision_bits, t)
    if value == 0:
        return ScaledValue.zero()
    sign = 1 if value > 0 else -1
    return ScaledValue.from_log(float(mpmath.log(abs(value))), sign)


@dataclass(frozen=True)
class Estimate:
    """
    Monte Carlo estimate.

    Attributes:
        mean (float): sample mean.
        stderr (float): standard error of the mean, >= 0.
        samples (int): number of samples, >= 1.
    """
    mean: float
    stderr: float
    samples: int

    def interval(self, k=MC_THRESHOLD):
        return self.mean - k * self.stderr, self.mean + k * self.stderr

    def contains(self, value, k=MC_THRESHOLD):
        """True when value lies within k standard errors of the mean, up to rounding of the mean."""
        slack = k * self.stderr + 8 * np.finfo(float).eps * abs(self.mean)
        return abs(float(value) - self.mean) <= slack


def simplex_sample(n, rng):
    """
    One point uniform on the standard n-simplex.

    Args:
        n (int): simplex dimension, >= 0.
        rng (numpy.random.Generator): source of randomness.

    Returns:
        numpy.ndarray: n+1 nonnegative barycentric coordinates summing to 1.
    """
    if n < 0:
        raise ArgumentError(f"simplex dimension must be >= 0, got {n}")
    draws = rng.standard_exponential(n + 1)
    return draws / draws.sum()


def block_generator(seed, index):
    """Philox generator for sample block `index` under `seed`."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(index,))))


def _block_moments(y, seed, index, size):
    rng = block_generator(seed, index)
    draws = rng.standard_exponential((size, len(y)))
    weights = draws / draws.sum(axis=1, keepdims=True)
    values = np.exp(weights @ y)
    mean = float(values.mean())
    return size, mean, float(np.sum((values - mean) ** 2))


def hg_monte_carlo(nodes, samples, seed=0, threads=1, block_size=2 ** 16):
    """
    Hermite-Genocchi Monte Carlo estimate of exp[x_0..x_n].

    Args:
        nodes: anything `NodeMultiset.coerce` accepts.
        samples (int): number of simplex samples, >= 1.
        seed (int): master seed.
        threads (int): worker threads for the sample blocks.
        block_size (int): samples per block.

    Returns:
        Estimate: mean and standard error of exp[x_0..x_n].

    Raises:
        ArgumentError: if samples or block_size is below 1.
        RangeError: if the estimate overflows a double.
    """
    if samples < 1:
        raise ArgumentError(f"samples must be >= 1, got {samples}")
    if block_size < 1:
        raise ArgumentError(f"block_size must be >= 1, got {block_size}")
    multiset = NodeMultiset.coerce(nodes)
    x = np.array(multiset.flat())
    top = float(x.max())
    y = x - top
    n = multiset.order()

    blocks = [(index, min(block_size, samples - index * block_size))
              for index in range(math.ceil(samples / block_size))]
    if threads and threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            moments = list(pool.map(lambda block: _block_moments(y, seed, *block), blocks))
    else:
        moments = [_block_moments(y, seed, index, size) for index, size in blocks]

    # pairwise moment merge in block order
    count, mean, m2 = 0, 0.0, 0.0
    for size, block_mean, block_m2 in moments:
        total = count + size
        delta = block_mean - mean
        mean += delta * size / total
        m2 += block_m2 + delta * delta * count * size / total
        count = total
    variance = m2 / (count - 1) if count > 1 else 0.0

    try:
        factor = math.exp(top - math.lgamma(n + 1))
    except OverflowError as e:
        raise RangeError(f"Monte Carlo estimate e**{top:.6g} overflows a double") from e
    logger.debug("Monte Carlo: %d samples in %d blocks", samples, len(blocks))
    return Estimate(mean * factor, math.sqrt(variance / count) * factor, samples)


def gauss_legendre_rule(a, b, points):
    """
    Gauss-Legendre nodes and weights mapped to [a, b].

    Returns:
        tuple[numpy.ndarray, numpy.ndarray]: nodes and weights.
    """
    if points < 1:
        raise ArgumentError(f"quadrature needs at least one point, got {points}")
    nodes, weights = np.polynomial.legendre.leggauss(points)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    return mid + half * nodes, half * weights


def kernel_beta_integral(p, q, x, y, quad_points=64):
    """
    exp[x^(p), y^(q)] as a one-dimensional integral.

    Grouping the first p simplex coordinates gives
    exp[x^(p), y^(q)] = int_0^1 tau^(p-1) (1-tau)^(q-1) e^(tau x + (1-tau) y) dtau / ((p-1)! (q-1)!).

    Args:
        p (int): multiplicity of x, >= 1.
        q (int): multiplicity of y, >= 1.
        x (float): first node.
        y (float): second node.
        quad_points (int): Gauss-Legendre points on [0, 1].

    Returns:
        float: the kernel value.
    """
    if p < 1 or q < 1:
        raise ArgumentError(f"multiplicities must be >= 1, got p={p}, q={q}")
    if not (math.isfinite(x) and math.isfinite(y)):
        raise DomainError("kernel nodes must be finite")
    tau, weights = gauss_legendre_rule(0.0, 1.0, quad_points)
    top = max(x, y)
    integrand = tau ** (p - 1) * (1.0 - tau) ** (q - 1) * np.exp(tau * x + (1.0 - tau) * y - top)
    log_norm = top - math.lgamma(p) - math.lgamma(q)
    return float(np.sum(weights * integrand)) * math.exp(log_norm)
