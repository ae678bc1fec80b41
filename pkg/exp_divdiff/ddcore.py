"""
Exponential divided differences e^{t[x_0, ..., x_q]}.

The value is computed without dividing by node gaps. Nodes are centred on
their mean mu and scaled by t, z_i = t * (x_i - mu), and then shifted by
c = max z_i so that every z'_i = z_i - c lies in [-spread, 0]. The lower
bidiagonal matrix Z with diagonal z' and unit subdiagonal satisfies

    exp(Z)[i, j] = exp[z'_j, ..., z'_i]            (i >= j)

so the first column of exp(Z) holds the divided differences of every prefix.
The engine works with the similar matrix D Z D^-1, D = diag(i!), whose
exponential has entries (i!/j!) exp[z'_j..z'_i]. These stay between e^-spread
and binomial size, which keeps them in range even for hundreds of nodes.

Two evaluation paths share that formulation:

- dense (up to DENSE_LIMIT nodes): Taylor series of the scaled matrix with
  compensated accumulation, followed by repeated squaring. The number of
  squarings brings the scaled spread to at most 1/2.
- streaming (more nodes): only the first column is advanced from tau = 0 to
  tau = 1 in Taylor steps. The state is kept in a rescaled form, so memory is
  O(q) and no component underflows.

dd_exp orders the frame nodes from the top down, so every prefix contains the
top node and decays only polynomially however wide the spread is. When U_q
itself falls below the double range, a log-domain squaring of the same matrix
takes over; its entries are all positive, so sums of logarithms lose nothing.

Finally e^{t[x]} = e^{t mu + c} * t^q * U_q / q!, where U_q = q! exp[z'], with
the sign (-1)^q when t < 0.

Tables keep unscaled frame entries and therefore a frame of at most MAX_SPREAD.
An append runs one Newton sweep with a running error bound; when the bound
exceeds APPEND_TOL the suffix diagonal is rebuilt by the engine instead.

Functions:
    shift_normalize(nodes): centre nodes on their mean.
    dd_exp(nodes, t): e^{t[x_0..x_q]} as a ScaledValue.
    dd_exp_log(nodes, t): (sign, log|value|).
    dd_exp_factorial(nodes): q! exp[x_0..x_q].
    dd_exp_many(node_lists, t, threads): thread-pooled batch evaluation.
    dd_table(nodes, t): DDTable over a node sequence in the given order.
    dd_append(table, x): DDTable extended by one node.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from exp_divdiff.compensated import two_sum
from exp_divdiff.errors import ConvergenceError, DomainError, RangeError
from exp_divdiff.nodes import NodeMultiset, as_sequence
from exp_divdiff.scaled import ScaledValue

logger = logging.getLogger(__name__)

DENSE_LIMIT = 64
MAX_SPREAD = 700.0
TAYLOR_EPS = 2.0 ** -56
SCALED_SPREAD = 0.5
EXTRA_TERMS = 60
TINY = 1e-290
LOG_PATH_LIMIT = 512
STREAMING_REACH = 4096.0
LOG_ROW_BLOCK = 16
ROUNDOFF = 2.0 ** -53
ENGINE_REL = 2.0 ** -48
APPEND_TOL = 1e-12


def shift_normalize(nodes):
    """
    Centre a node multiset on its mean.

    Args:
        nodes: anything `NodeMultiset.coerce` accepts.

    Returns:
        tuple[NodeMultiset, float]: the centred multiset and the mean mu, so that
        dd_exp(nodes, 1) = e^mu * dd_exp(centred, 1).

    Example:
        shift_normalize([1, 2, 6]) -> (NodeMultiset {-2, -1, 3}, 3.0)
    """
    multiset = NodeMultiset.coerce(nodes)
    mu = _mean(multiset)
    return NodeMultiset.from_pairs((value - mu, multiplicity) for value, multiplicity in multiset.entries), mu


def _mean(multiset):
    if multiset.is_constant:
        return multiset.values[0]
    return math.fsum(v * m for v, m in multiset.entries) / multiset.count


def _frame(sequence, mu, t, limit=MAX_SPREAD):
    z = np.array([t * (x - mu) for x in sequence], dtype=float)
    if not np.all(np.isfinite(z)):
        raise RangeError("scaled nodes t*(x - mu) overflow")
    shift = float(z.max())
    spread = shift - float(z.min())
    if not math.isfinite(spread):
        raise RangeError("scaled node spread overflows")
    if limit is not None and spread > limit:
        raise RangeError(f"scaled node spread {spread:.6g} exceeds the table frame of {limit:g}")
    return z - shift, shift


def _taylor_dense(zp):
    """Scaled-matrix exponential exp(D Z' D^-1) of the bidiagonal node matrix."""
    size = len(zp)
    reach = float(np.max(np.abs(zp))) if size else 0.0
    squarings = max(0, math.ceil(math.log2(reach / SCALED_SPREAD))) if reach > SCALED_SPREAD else 0
    m = 2.0 ** squarings
    diagonal = zp / m
    subdiagonal = np.arange(1, size, dtype=float) / m

    term = np.eye(size)
    total = np.eye(size)
    correction = np.zeros((size, size))
    k = 0
    while True:
        k += 1
        # term @ A for A lower bidiagonal: diagonal part plus the shifted subdiagonal part
        product = term * diagonal[None, :]
        product[:, :-1] += term[:, 1:] * subdiagonal[None, :]
        term = product / k
        total, error = two_sum(total, term)
        correction += error
        if k >= size - 1 and np.all(np.abs(term) <= TAYLOR_EPS * np.maximum(np.abs(total), TINY)):
            break
        if k > size + EXTRA_TERMS:
            raise ConvergenceError(f"dense Taylor series did not settle after {k} terms")
    result = np.tril(total + correction)
    for _ in range(squarings):
        result = result @ result
    logger.debug("dense path: %d nodes, %d terms, %d squarings", size, k, squarings)
    return result


def _column_dense(zp):
    return _taylor_dense(zp)[:, 0]


def _column_streaming(zp):
    """
    First column U_i = i! exp[z'_0..z'_i] by Taylor time-stepping tau: 0 -> 1.

    The state after a step ending at rho is y_i = U_i(rho), where U_i(tau) is
    i! exp[tau z'_0 .. tau z'_i]. At the start of a step it is rescaled to
    (tau/rho)^i U_i(tau), and the recurrence is
    term_k = (h/k) (z' * term + (i/rho) * shift(term)).
    """
    size = len(zp)
    q = size - 1
    index = np.arange(size, dtype=float)
    reach = float(np.max(np.abs(zp)))
    h_max = 1.0 if reach <= SCALED_SPREAD else SCALED_SPREAD / reach
    ratio_cap = min(0.5, 300.0 / max(q, 1))

    tau = 0.0
    state = np.zeros(size)
    state[0] = 1.0
    steps = 0
    while tau < 1.0:
        if tau == 0.0:
            h = min(h_max, 1.0)
        else:
            h = min(h_max, ratio_cap * tau / (1.0 - ratio_cap))
        if 1.0 - (tau + h) < 1e-12:
            h = 1.0 - tau
            rho = 1.0
        else:
            rho = tau + h
        if tau == 0.0:
            start = np.zeros(size)
            start[0] = 1.0
            k_min = q
        else:
            start = state * np.exp(index * math.log(tau / rho))
            k_min = math.ceil(q * h / rho)

        term = start
        total = start.copy()
        correction = np.zeros(size)
        coupling = index / rho
        cap = k_min + EXTRA_TERMS + int(10 * math.sqrt(k_min))
        k = 0
        while True:
            k += 1
            shifted = np.empty(size)
            shifted[0] = 0.0
            shifted[1:] = term[:-1]
            term = (h / k) * (zp * term + coupling * shifted)
            total, error = two_sum(total, term)
            correction += error
            if k >= k_min and np.all(np.abs(term) <= TAYLOR_EPS * np.maximum(np.abs(total), TINY)):
                break
            if k > cap:
                raise ConvergenceError(f"streaming Taylor step did not settle after {k} terms")
        state = total + correction
        tau = rho
        steps += 1
    logger.debug("streaming path: %d nodes, %d steps", size, steps)
    return state


def _prefix_column(zp):
    if len(zp) == 1:
        return np.array([math.exp(zp[0])])
    if len(zp) <= DENSE_LIMIT:
        return _column_dense(zp)
    return _column_streaming(zp)


def _log_matmul(a, b):
    """c[i, j] = log sum_k exp(a[i, k] + b[k, j]) for matrices of logarithms."""
    size = a.shape[0]
    result = np.empty((size, b.shape[1]))
    for start in range(0, size, LOG_ROW_BLOCK):
        terms = a[start:start + LOG_ROW_BLOCK, :, None] + b[None, :, :]
        peak = terms.max(axis=1)
        base = np.where(np.isfinite(peak), peak, 0.0)
        with np.errstate(divide="ignore"):
            result[start:start + LOG_ROW_BLOCK] = base + np.log(np.exp(terms - base[:, None, :]).sum(axis=1))
    return result


def _log_dense(zp):
    """
    log U_q by squaring exp(Z'/m) in log space.

    Entries of exp(Z'/m) are all positive. The base comes from the dense Taylor
    series at spread 1/2 and is brought back from the D-scaled form.
    """
    size = len(zp)
    if size > LOG_PATH_LIMIT:
        raise RangeError(f"U_q of {size} nodes is below the double range")
    reach = float(np.max(np.abs(zp)))
    squarings = max(0, math.ceil(math.log2(reach / SCALED_SPREAD))) if reach > SCALED_SPREAD else 0
    m = 2.0 ** squarings
    index = np.arange(size, dtype=float)
    log_factorial = np.array([math.lgamma(i + 1.0) for i in range(size)])
    with np.errstate(divide="ignore"):
        logs = np.log(np.tril(_taylor_dense(zp / m)))
    steps = index[:, None] - index[None, :]
    logs = logs - log_factorial[:, None] + log_factorial[None, :] - np.where(steps > 0, steps, 0.0) * math.log(m)
    for _ in range(squarings):
        logs = _log_matmul(logs, logs)
    logger.debug("log-domain path: %d nodes, %d squarings", size, squarings)
    return float(logs[-1, 0]) + log_factorial[-1]


def _two_point(zp):
    # exp[z0, z1] via expm1 so equal and close nodes lose nothing
    gap = zp[1] - zp[0]
    factor = 1.0 if gap == 0.0 else math.expm1(gap) / gap
    return math.exp(zp[0]) * factor


def _log_value(log_u, order, t, mu, shift):
    return t * mu + shift + order * math.log(abs(t)) + log_u - math.lgamma(order + 1)


def _sign(t, order):
    return -1 if (t < 0 and order % 2 == 1) else 1


def _check_scale(t):
    t = float(t)
    if not math.isfinite(t):
        raise DomainError(f"scale t={t!r} is not finite")
    return t


def dd_exp_log(nodes, t=1.0):
    """
    Sign and natural logarithm of |e^{t[x_0..x_q]}|.

    Returns:
        tuple[int, float]: (sign, log magnitude); (0, -inf) for an exact zero.
    """
    value = dd_exp(nodes, t)
    return value.sign, value.log()


def dd_exp(nodes, t=1.0):
    """
    Divided difference of x -> e^{t x} over a node multiset.

    Args:
        nodes: NodeMultiset, flat sequence of floats or (value, multiplicity) pairs.
        t (float): finite scale.

    Returns:
        ScaledValue: e^{t[x_0..x_q]}; positive for t > 0, sign (-1)^q for t < 0,
        exactly zero for t = 0 and q >= 1.

    Raises:
        DomainError: non-finite node or scale.
        RangeError: overflow of the scaled nodes or of the logarithm of the result.

    Example:
        float(dd_exp([0, 1])) -> 1.718281828459045
    """
    multiset = NodeMultiset.coerce(nodes)
    t = _check_scale(t)
    order = multiset.order()
    if t == 0.0:
        return ScaledValue.one() if order == 0 else ScaledValue.zero()
    mu = _mean(multiset)
    if multiset.is_constant:
        # exp[x^(q+1)] at scale t is t^q e^{t x} / q!
        return ScaledValue.from_log(_log_value(0.0, order, t, mu, 0.0), _sign(t, order))
    zp, shift = _frame(multiset.flat(), mu, t, limit=None)
    zp = np.sort(zp)[::-1]
    if order == 1:
        u = _two_point(zp)
    elif len(zp) <= DENSE_LIMIT or -zp[-1] <= STREAMING_REACH:
        u = float(_prefix_column(zp)[-1])
    else:
        # streaming steps grow with the spread; go to the log domain directly
        u = 0.0
    if u >= TINY and math.isfinite(u):
        log_u = math.log(u)
    else:
        log_u = _log_dense(zp)
    log_value = _log_value(log_u, order, t, mu, shift)
    if not math.isfinite(log_value):
        raise RangeError(f"log of the divided difference is not representable: {log_value!r}")
    return ScaledValue.from_log(log_value, _sign(t, order))


def dd_exp_factorial(nodes):
    """
    q! exp[x_0..x_q] at t = 1.

    For n+1 equal nodes x this is e^x.
    """
    multiset = NodeMultiset.coerce(nodes)
    value = dd_exp(multiset, 1.0)
    return value * ScaledValue.from_log(math.lgamma(multiset.count))


def dd_exp_many(node_lists, t=1.0, threads=1):
    """
    Evaluate dd_exp over many multisets, preserving input order.

    Args:
        node_lists (Iterable): node inputs accepted by dd_exp.
        t (float): common scale.
        threads (int): worker threads; 1 evaluates in the calling thread.

    Returns:
        list[ScaledValue]: results in input order.
    """
    node_lists = list(node_lists)
    if threads is None or threads <= 1:
        return [dd_exp(nodes, t) for nodes in node_lists]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda nodes: dd_exp(nodes, t), node_lists))


@dataclass(frozen=True)
class DDTable:
    """
    Newton-style divided-difference table supporting O(q) appends.

    Attributes:
        nodes (tuple[float, ...]): nodes in append order.
        t (float): scale.
        mu (float): centre fixed when the table was built.
        shift (float): frame offset c fixed when the table was built.
        frontier (tuple[ScaledValue, ...]): frontier[j] = e^{t[x_0..x_j]} over the
            first j+1 appended nodes.
        order (tuple[float, ...]): frame nodes z' in the internal suffix order.
        diagonal (tuple[float, ...]): diagonal[i] = (q-i)! exp[order[i..q]] in the frame.
        bounds (tuple[float, ...]): relative error bound of each diagonal entry.
    """
    nodes: tuple
    t: float
    mu: float
    shift: float
    frontier: tuple
    order: tuple
    diagonal: tuple
    bounds: tuple

    @property
    def value(self):
        """e^{t[...]} over all nodes of the table."""
        return self.frontier[-1]

    def multiset(self):
        return NodeMultiset.from_values(self.nodes)

    def append(self, x):
        return dd_append(self, x)

    def __len__(self):
        return len(self.nodes)


def _frontier_entry(table_t, mu, shift, order, u):
    if table_t == 0.0:
        return ScaledValue.one() if order == 0 else ScaledValue.zero()
    if not (u > 0.0 and math.isfinite(u)):
        raise RangeError(f"table entry {u!r} is not a positive finite number")
    return ScaledValue.from_log(_log_value(math.log(u), order, table_t, mu, shift), _sign(table_t, order))


def _suffix_diagonal(order):
    """diagonal[i] = (q-i)! exp[order[i..q]], one engine run over the reversed order."""
    reverse = _prefix_column(np.array(order[::-1], dtype=float))
    return tuple(float(v) for v in reverse[::-1]), (ENGINE_REL,) * len(order)


def dd_table(nodes, t=1.0):
    """
    Build a DDTable over a node sequence, keeping its order.

    The frontier is the first column of the engine matrix in the given order;
    the trailing diagonal comes from the same engine run over the reversed order.
    """
    sequence = as_sequence(nodes)
    t = _check_scale(t)
    mu = math.fsum(sequence) / len(sequence)
    if len(set(sequence)) == 1:
        mu = sequence[0]
    if t == 0.0:
        zp, shift = np.zeros(len(sequence)), 0.0
    else:
        zp, shift = _frame(sequence, mu, t)
    column = _prefix_column(zp)
    order = tuple(float(v) for v in zp)
    diagonal, bounds = _suffix_diagonal(order)
    frontier = tuple(_frontier_entry(t, mu, shift, j, float(column[j])) for j in range(len(sequence)))
    return DDTable(tuple(sequence), t, mu, shift, frontier, order, diagonal, bounds)


def _newton_sweep(order, diagonal, bounds, v):
    """
    Diagonal of order + (v,) from the stored one, or None once the error bound passes APPEND_TOL.

    Copies of v must already sit at the end of order.
    """
    q = len(order) - 1
    new_diagonal = [0.0] * (q + 2)
    new_bounds = [0.0] * (q + 2)
    new_diagonal[q + 1] = math.exp(v)
    new_bounds[q + 1] = ROUNDOFF
    for i in range(q, -1, -1):
        if order[i] == v:
            # all-equal tail
            new_diagonal[i] = math.exp(v)
            new_bounds[i] = ROUNDOFF
            continue
        numerator = new_diagonal[i + 1] - diagonal[i]
        if numerator == 0.0:
            return None
        error = new_bounds[i + 1] * abs(new_diagonal[i + 1]) + bounds[i] * abs(diagonal[i])
        bound = error / abs(numerator) + 3.0 * ROUNDOFF
        if bound > APPEND_TOL:
            logger.debug("append sweep stopped at %d of %d: bound %.3g", i, q, bound)
            return None
        new_diagonal[i] = (q - i + 1) * numerator / (v - order[i])
        new_bounds[i] = bound
    return tuple(new_diagonal), tuple(new_bounds)


def dd_append(table, x):
    """
    Extend a DDTable by one node.

    One Newton sweep over the stored diagonal costs O(q). It carries a running
    relative error bound per entry; when close nodes make the bound exceed
    APPEND_TOL, or a copy of x sits inside the suffix order, the suffix diagonal
    is rebuilt by the engine in one run over the new order.

    Raises:
        DomainError: if x is not finite.
        RangeError: if the new entry is not representable in the table frame.
    """
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"node {x!r} is not finite")
    x += 0.0
    t = table.t
    order = table.order
    v = 0.0 if t == 0.0 else t * (x - table.mu) - table.shift
    if not math.isfinite(v) or v > MAX_SPREAD:
        raise RangeError(f"appended node {x!r} leaves the table frame")

    tail = len(order)
    while tail > 0 and order[tail - 1] == v:
        tail -= 1
    swept = None
    if v in order[:tail]:
        copies = order.count(v)
        order = tuple(z for z in order if z != v) + (v,) * copies
    else:
        swept = _newton_sweep(order, table.diagonal, table.bounds, v)
    new_order = order + (v,)
    if swept is None:
        logger.debug("append rebuilds the suffix diagonal of %d nodes", len(new_order))
        swept = _suffix_diagonal(new_order)
    new_diagonal, new_bounds = swept
    if not all(math.isfinite(d) for d in new_diagonal):
        raise RangeError("append produced a non-finite table entry")
    entry = _frontier_entry(t, table.mu, table.shift, len(order), new_diagonal[0])
    return DDTable(table.nodes + (x,), t, table.mu, table.shift, table.frontier + (entry,),
                   new_order, new_diagonal, new_bounds)
