"""
Closed-form identities for e^{-tau[x_0, ..., x_q]} as residual evaluators.

Each function evaluates both sides of an identity through the ddcore engine
and returns a `Residual`. The identities hold exactly, so the residual
measures engine error (plus quadrature or finite-difference error where
noted). Node order matters for the identities that single out x_0, so nodes
are taken as a sequence in the caller's order.

Identities:
    convolution      int_0^beta e^{-tau[x_{j+1}..x_q]} e^{-(beta-tau)[x_0..x_j]} dtau = -e^{-beta[x_0..x_q]}
    repeated_sum     sum_j e^{-tau[x_0..x_q, x_j]} = -tau e^{-tau[x_0..x_q]}
    weighted_sum     sum_j x_j e^{-tau[x_0..x_q, x_j]} = (-x_0 tau - q) e^{-tau[x..]} - tau e^{-tau[x_1..x_q]}
    weighted_sum_derivative  same left side = (tau d/dtau - q) e^{-tau[x..]}
    parametric_derivative d/dtau e^{-tau[x..]} = -x_0 e^{-tau[x..]} - e^{-tau[x_1..x_q]}   (q > 0)
    double_sum       sum_{i<=j} x_i e^{-tau[x.., x_i, x_j]} =
                     (tau^2 x_0/2) e^{-tau[x..]} + (tau^2/2) e^{-tau[x_1..x_q]} - sum_{i>=1} i e^{-tau[x.., x_i]}
    leibniz          e^{(t1+t2)[x..]} = sum_j e^{t1[x_0..x_j]} e^{t2[x_j..x_q]}
    rescaling        alpha^q e^{t[alpha x..]} = e^{alpha t[x..]}

The relative residual is |lhs - rhs| / max(|lhs|, |rhs|, largest summand, FLOOR)
with FLOOR the smallest normal double times 1e10, so identities whose sides
both vanish pass instead of producing NaN.
"""

import math
import sys
from dataclasses import dataclass

from exp_divdiff.ddcore import dd_exp
from exp_divdiff.errors import ArgumentError, DomainError
from exp_divdiff.nodes import as_sequence
from exp_divdiff.oracle import gauss_legendre_rule
from exp_divdiff.scaled import ScaledValue, common_frame

FLOOR = sys.float_info.min * 1e10
IDENTITY_TOLERANCE = 1e-8
FD_TOLERANCE = 1e-7
DEFAULT_QUAD_POINTS = 64
MIN_QUAD_POINTS = 8
DEFAULT_FD_STEP = 1e-5


@dataclass(frozen=True)
class Residual:
    """
    Attributes:
        identity (str): identity name.
        lhs (float): left side.
        rhs (float): right side.
        abs_residual (float): |lhs - rhs|.
        rel_residual (float): abs_residual relative to the residual scale.
        passed (bool): rel_residual <= tolerance.
        scale (float): max(|lhs|, |rhs|, largest summand, FLOOR).
        tolerance (float): tolerance applied.
    """
    identity: str
    lhs: float
    rhs: float
    abs_residual: float
    rel_residual: float
    passed: bool
    scale: float
    tolerance: float


def _plain(value):
    try:
        return value.to_float()
    except ArithmeticError:
        return math.copysign(math.inf, value.sign)


def _exp_capped(log_value):
    try:
        return math.exp(log_value)
    except OverflowError:
        return math.inf


def residual(identity, lhs, rhs, terms=(), tolerance=IDENTITY_TOLERANCE):
    """
    Build a Residual from both sides of an identity.

    The scale is max(|lhs|, |rhs|, largest |term|, FLOOR), so an identity whose
    sides nearly cancel is measured against its largest summand.

    Args:
        identity (str): name.
        lhs (ScaledValue | float): left side.
        rhs (ScaledValue | float): right side.
        terms (Iterable[ScaledValue | float]): summands whose size also sets the scale.
        tolerance (float): relative tolerance.
    """
    values = [lhs, rhs] + list(terms)
    frame, mantissas = common_frame(values)
    gap = abs(mantissas[0] - mantissas[1])
    top = max(abs(m) for m in mantissas)
    log_floor = math.log(FLOOR)
    log_scale = max(math.log(top) + frame, log_floor) if top > 0 else log_floor
    log_gap = math.log(gap) + frame if gap > 0 else -math.inf
    rel = math.exp(log_gap - log_scale) if gap > 0 else 0.0
    lhs = lhs if isinstance(lhs, ScaledValue) else ScaledValue.from_float(lhs)
    rhs = rhs if isinstance(rhs, ScaledValue) else ScaledValue.from_float(rhs)
    return Residual(identity, _plain(lhs), _plain(rhs), _exp_capped(log_gap) if gap > 0 else 0.0,
                    rel, rel <= tolerance, _exp_capped(log_scale), tolerance)


def _total(values):
    values = list(values)
    if not values:
        return ScaledValue.zero()
    frame, mantissas = common_frame(values)
    return ScaledValue.from_float(math.fsum(mantissas)) * ScaledValue.from_log(frame)


def _dd(sequence, t):
    return dd_exp(sequence, t)


def _check_tau(tau):
    if not math.isfinite(tau):
        raise DomainError(f"tau={tau!r} is not finite")
    return float(tau)


def _check_step(fd_step):
    if not fd_step > 0:
        raise ArgumentError(f"finite-difference step must be > 0, got {fd_step!r}")
    return float(fd_step)


def _tau_derivative(sequence, tau, step):
    # fourth-order central difference of tau -> e^{-tau[x..]}
    samples = [_dd(sequence, -(tau + k * step)) for k in (2, 1, -1, -2)]
    combination = (samples[1] - samples[2]) * 8.0 - (samples[0] - samples[3])
    return combination / (12.0 * step)


def convolution_residual(nodes, j, beta, quad_points=DEFAULT_QUAD_POINTS, tolerance=IDENTITY_TOLERANCE):
    """
    Convolution identity, left side by Gauss-Legendre quadrature on [0, beta].

    Args:
        nodes: node sequence x_0..x_q with q >= 1.
        j (int): split index, 0 <= j <= q-1.
        beta (float): upper limit, >= 0.
        quad_points (int): quadrature points, >= 8.

    Raises:
        ArgumentError: for j out of range, negative beta or fewer than 8 points.
    """
    sequence = as_sequence(nodes)
    q = len(sequence) - 1
    if isinstance(j, bool) or int(j) != j or not 0 <= j <= q - 1:
        raise ArgumentError(f"split index j must be in [0, {q - 1}], got {j!r}")
    beta = _check_tau(beta)
    if beta < 0:
        raise ArgumentError(f"beta must be >= 0, got {beta!r}")
    if quad_points < MIN_QUAD_POINTS:
        raise ArgumentError(f"convolution quadrature needs >= {MIN_QUAD_POINTS} points, got {quad_points}")
    j = int(j)
    head, tail = sequence[:j + 1], sequence[j + 1:]
    taus, weights = gauss_legendre_rule(0.0, beta, quad_points)
    products = [_dd(tail, -float(tau)) * _dd(head, -(beta - float(tau))) * float(weight)
                for tau, weight in zip(taus, weights)]
    lhs = _total(products)
    rhs = -_dd(sequence, -beta)
    return residual("convolution", lhs, rhs, tolerance=tolerance)


def repeated_sum_residual(nodes, tau, tolerance=IDENTITY_TOLERANCE):
    """sum_j e^{-tau[x_0..x_q, x_j]} = -tau e^{-tau[x_0..x_q]}."""
    sequence = as_sequence(nodes)
    tau = _check_tau(tau)
    terms = [_dd(sequence + (x,), -tau) for x in sequence]
    rhs = _dd(sequence, -tau) * (-tau)
    return residual("repeated_sum", _total(terms), rhs, terms, tolerance)


def _weighted_terms(sequence, tau):
    return [_dd(sequence + (x,), -tau) * x for x in sequence]


def weighted_sum_residual(nodes, tau, tolerance=IDENTITY_TOLERANCE):
    """
    sum_j x_j e^{-tau[x_0..x_q, x_j]} against its derivative-free right side.

    q = 0 uses -tau x_0 e^{-tau x_0}; q > 0 uses
    (-x_0 tau - q) e^{-tau[x_0..x_q]} - tau e^{-tau[x_1..x_q]}.
    """
    sequence = as_sequence(nodes)
    tau = _check_tau(tau)
    q = len(sequence) - 1
    x0 = sequence[0]
    terms = _weighted_terms(sequence, tau)
    if q == 0:
        parts = [_dd(sequence, -tau) * (-tau * x0)]
    else:
        parts = [_dd(sequence, -tau) * (-x0 * tau - q), _dd(sequence[1:], -tau) * (-tau)]
    return residual("weighted_sum", _total(terms), _total(parts), terms + parts, tolerance)


def weighted_sum_derivative_residual(nodes, tau, fd_step=DEFAULT_FD_STEP, tolerance=FD_TOLERANCE):
    """sum_j x_j e^{-tau[x_0..x_q, x_j]} = (tau d/dtau - q) e^{-tau[x..]}, derivative by central difference."""
    sequence = as_sequence(nodes)
    tau = _check_tau(tau)
    step = _check_step(fd_step)
    q = len(sequence) - 1
    terms = _weighted_terms(sequence, tau)
    parts = [_tau_derivative(sequence, tau, step) * tau, _dd(sequence, -tau) * (-q)]
    return residual("weighted_sum_derivative", _total(terms), _total(parts), terms + parts, tolerance)


def parametric_derivative_residual(nodes, tau, fd_step=DEFAULT_FD_STEP, tolerance=FD_TOLERANCE):
    """
    d/dtau e^{-tau[x_0..x_q]} = -x_0 e^{-tau[x_0..x_q]} - e^{-tau[x_1..x_q]} for q > 0.

    The left side is a fourth-order central difference with step fd_step.

    Raises:
        ArgumentError: for a single node or a non-positive step.
    """
    sequence = as_sequence(nodes)
    if len(sequence) < 2:
        raise ArgumentError("the parametric derivative identity needs at least two nodes")
    tau = _check_tau(tau)
    step = _check_step(fd_step)
    lhs = _tau_derivative(sequence, tau, step)
    parts = [_dd(sequence, -tau) * (-sequence[0]), -_dd(sequence[1:], -tau)]
    return residual("parametric_derivative", lhs, _total(parts), parts, tolerance)


def double_sum_residual(nodes, tau, tolerance=IDENTITY_TOLERANCE):
    """
    sum_{i<=j} x_i e^{-tau[x_0..x_q, x_i, x_j]} against its derivative-free right side.

    q = 0 uses (tau^2 x_0/2) e^{-tau x_0}; q > 0 uses
    (tau^2 x_0/2) e^{-tau[x..]} + (tau^2/2) e^{-tau[x_1..x_q]} - sum_{i=1}^q i e^{-tau[x.., x_i]}.
    """
    sequence = as_sequence(nodes)
    tau = _check_tau(tau)
    q = len(sequence) - 1
    x0 = sequence[0]
    terms = [_dd(sequence + (sequence[i], sequence[k]), -tau) * sequence[i]
             for i in range(q + 1) for k in range(i, q + 1)]
    half_square = 0.5 * tau * tau
    if q == 0:
        parts = [_dd(sequence, -tau) * (half_square * x0)]
    else:
        parts = [_dd(sequence, -tau) * (half_square * x0), _dd(sequence[1:], -tau) * half_square]
        parts += [_dd(sequence + (sequence[i],), -tau) * (-i) for i in range(1, q + 1)]
    return residual("double_sum", _total(terms), _total(parts), terms + parts, tolerance)


def leibniz_residual(nodes, t1, t2, tolerance=IDENTITY_TOLERANCE):
    """e^{(t1+t2)[x_0..x_q]} = sum_j e^{t1[x_0..x_j]} e^{t2[x_j..x_q]}."""
    sequence = as_sequence(nodes)
    t1, t2 = _check_tau(t1), _check_tau(t2)
    terms = [_dd(sequence[:j + 1], t1) * _dd(sequence[j:], t2) for j in range(len(sequence))]
    return residual("leibniz", _dd(sequence, t1 + t2), _total(terms), terms, tolerance)


def rescaling_residual(nodes, alpha, t=1.0, tolerance=IDENTITY_TOLERANCE):
    """
    alpha^q e^{t[alpha x_0..alpha x_q]} = e^{alpha t[x_0..x_q]}.

    Raises:
        ArgumentError: for alpha = 0.
    """
    sequence = as_sequence(nodes)
    alpha, t = _check_tau(alpha), _check_tau(t)
    if alpha == 0.0:
        raise ArgumentError("rescaling needs alpha != 0")
    q = len(sequence) - 1
    lhs = _dd([alpha * x for x in sequence], t) * float(alpha ** q)
    rhs = _dd(sequence, alpha * t)
    return residual("rescaling", lhs, rhs, tolerance=tolerance)
