"""
Inequality margins for exponential divided differences.

Kernel checks
-------------
For fixed prefix nodes a_1 <= ... <= a_n and multiplicities p, q >= 1,

    K(x, y) = exp[a_1, ..., a_n, x^(p), y^(q)]

is log-submodular (TN2): K(x1, y1) K(x2, y2) <= K(x1, y2) K(x2, y1) for
x1 <= x2, y1 <= y2. It is also supermodular, with mixed partial
p q exp[a..., x^(p+1), y^(q+1)].

Four-point checks
-----------------
f(a, b, c, d) = exp[a,a,b,c] exp[d,d,b,c] + exp[b,b,a,d] exp[c,c,a,d] - exp[a,b,c,d]^2 >= 0,
together with the helpers it is built from:

    phi(u) = cosh u - sinh(u)/u,  phi(0) = 0
    h(x, y) = e^x + e^y - 2 exp[x, y] = 2 e^((x+y)/2) phi((x-y)/2)
    Q(x, y, z) = phi(x+y) phi(y+z) - phi(y) phi(x+y+z) - phi(x) phi(z)

Every margin is returned as a `Margin`. Log-domain margins have scale 1.
Linear margins rebase all their terms to one shared e**frame before
subtracting, and report value and scale in that frame; the true margin is
value * e**frame.

Functions:
    kernel_eval, mixed_partial, tn2_margin, tn2_diagonal_margin, log_submodular_margin,
    supermodular_margin, phi, phi_taylor, phi_direct, log_phi, h, h_scaled, h_direct, Q,
    four_point_f, four_point_orbits, triangle_h_margin, phi_product_margin, h_product_margin.
"""

import enum
import logging
import math
from dataclasses import dataclass, field

from exp_divdiff.ddcore import dd_exp
from exp_divdiff.errors import ArgumentError, DomainError
from exp_divdiff.nodes import NodeMultiset
from exp_divdiff.scaled import ScaledValue, common_frame

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-10
PHI_SWITCH = 0.5
PHI_EXP_FORM = 20.0
H_FORM_MIN_GAP = 1e-6
LOG2 = math.log(2.0)

# argument positions (a, b, c, d) -> permuted tuple; f is invariant under all eight
FOUR_POINT_GROUP = (
    (0, 1, 2, 3),
    (3, 1, 2, 0),
    (0, 2, 1, 3),
    (3, 2, 1, 0),
    (1, 0, 3, 2),
    (2, 3, 0, 1),
    (1, 3, 0, 2),
    (2, 0, 3, 1),
)


class MarginKind(str, enum.Enum):
    TN2 = "tn2"
    TN2_DIAGONAL = "tn2_diagonal"
    LOG_SUBMODULAR = "log_submodular"
    SUPERMODULAR = "supermodular"
    FOUR_POINT = "four_point"
    TRIANGLE_H = "triangle_h"
    PHI_PRODUCT = "phi_product"
    H_PRODUCT = "h_product"
    SANDWICH = "sandwich"


@dataclass(frozen=True)
class KernelSpec:
    """
    Prefix nodes and multiplicities defining K(x, y) = exp[prefix, x^(p), y^(q)].

    Attributes:
        prefix (tuple[float, ...]): prefix nodes, stored sorted; may be empty.
        p (int): multiplicity of x, >= 1.
        q (int): multiplicity of y, >= 1.
    """
    prefix: tuple = ()
    p: int = 1
    q: int = 1

    def __post_init__(self):
        for name in ("p", "q"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise ArgumentError(f"multiplicity {name} must be an integer >= 1, got {value!r}")
        prefix = tuple(sorted(float(a) + 0.0 for a in self.prefix))
        if not all(math.isfinite(a) for a in prefix):
            raise DomainError("kernel prefix nodes must be finite")
        object.__setattr__(self, "prefix", prefix)
        object.__setattr__(self, "p", int(self.p))
        object.__setattr__(self, "q", int(self.q))

    def multiset(self, x, y, extra=0):
        """The node multiset of K(x, y), with `extra` more copies of both x and y."""
        return NodeMultiset.from_pairs([(a, 1) for a in self.prefix] + [(x, self.p + extra), (y, self.q + extra)])


@dataclass(frozen=True)
class Margin:
    """
    Outcome of one inequality check.

    Attributes:
        value (float): the margin; >= 0 when the inequality holds.
        kind (MarginKind): which inequality.
        inputs (dict): the arguments, by name.
        passed (bool): value >= -tolerance * scale.
        scale (float): magnitude the tolerance is relative to.
        tolerance (float): relative tolerance applied.
        frame (float): log shift of linear margins; true margin is value * e**frame.
        reference (float | None): closed-form value of the same margin in the same frame, if any.
    """
    value: float
    kind: MarginKind
    inputs: dict
    passed: bool
    scale: float
    tolerance: float
    frame: float = 0.0
    reference: float = None
    terms: tuple = field(default=(), compare=False)

    @property
    def relative(self):
        """value / scale, or value when the scale is zero."""
        return self.value / self.scale if self.scale else self.value

    @property
    def scaled(self):
        """The true margin value * e**frame as a ScaledValue."""
        return ScaledValue.from_float(self.value) * ScaledValue.from_log(self.frame)

    def reference_gap(self):
        """Relative distance between the margin and its closed-form reference."""
        if self.reference is None:
            return None
        top = max(abs(self.value), abs(self.reference))
        return abs(self.value - self.reference) / top if top else 0.0


def _margin(value, kind, inputs, scale, tolerance, frame=0.0, reference=None, terms=()):
    passed = value >= -tolerance * scale
    if not passed:
        logger.info("%s margin %.6g below -%.1g * %.3g for %s", kind.value, value, tolerance, scale, inputs)
    return Margin(value, kind, inputs, passed, scale, tolerance, frame, reference, tuple(terms))


def _linear_margin(positive, negative, kind, inputs, tolerance, reference=None, scale_term=None):
    """Margin sum(positive) - sum(negative) over ScaledValues, rebased to one frame."""
    values = list(positive) + list(negative)
    if reference is not None:
        values.append(reference)
    frame, mantissas = common_frame(values)
    pos = mantissas[:len(positive)]
    neg = mantissas[len(positive):len(positive) + len(negative)]
    value = math.fsum(pos + [-m for m in neg])
    if scale_term is None:
        scale = max(abs(m) for m in pos + neg)
    else:
        scale = abs(mantissas[scale_term])
    ref = mantissas[-1] if reference is not None else None
    return _margin(value, kind, inputs, scale, tolerance, frame, ref, pos + neg)


def kernel_eval(spec, x, y):
    """
    K(x, y) = exp[prefix, x^(p), y^(q)] as a ScaledValue.

    Example:
        float(kernel_eval(KernelSpec((0.0,)), 0.0, 0.0)) -> 0.5
    """
    return dd_exp(spec.multiset(x, y))


def mixed_partial(spec, x, y):
    """d^2 K / dx dy = p q exp[prefix, x^(p+1), y^(q+1)]."""
    return dd_exp(spec.multiset(x, y, extra=1)) * (spec.p * spec.q)


def _check_rectangle(x1, x2, y1, y2):
    if not (x1 <= x2 and y1 <= y2):
        raise ArgumentError(f"rectangle needs x1 <= x2 and y1 <= y2, got ({x1}, {x2}) x ({y1}, {y2})")


def tn2_margin(spec, x1, x2, y1, y2, tolerance=DEFAULT_TOLERANCE):
    """
    log K(x1, y2) + log K(x2, y1) - log K(x1, y1) - log K(x2, y2), >= 0.

    Zero exactly when x1 == x2 or y1 == y2.

    Raises:
        ArgumentError: unless x1 <= x2 and y1 <= y2.
    """
    _check_rectangle(x1, x2, y1, y2)
    off = kernel_eval(spec, x1, y2).log() + kernel_eval(spec, x2, y1).log()
    on = kernel_eval(spec, x1, y1).log() + kernel_eval(spec, x2, y2).log()
    inputs = {"prefix": spec.prefix, "p": spec.p, "q": spec.q, "x1": x1, "x2": x2, "y1": y1, "y2": y2}
    return _margin(off - on, MarginKind.TN2, inputs, 1.0, tolerance)


def tn2_diagonal_margin(spec, x, y, tolerance=DEFAULT_TOLERANCE):
    """log K(x, y) + log K(y, x) - log K(x, x) - log K(y, y), >= 0."""
    off = kernel_eval(spec, x, y).log() + kernel_eval(spec, y, x).log()
    on = kernel_eval(spec, x, x).log() + kernel_eval(spec, y, y).log()
    inputs = {"prefix": spec.prefix, "p": spec.p, "q": spec.q, "x": x, "y": y}
    return _margin(off - on, MarginKind.TN2_DIAGONAL, inputs, 1.0, tolerance)


def log_submodular_margin(spec, u, v, tolerance=DEFAULT_TOLERANCE):
    """
    log K(u) + log K(v) - log K(u meet v) - log K(u join v) for points u, v of the plane.

    Zero when u and v are comparable; equal to tn2_margin otherwise.
    """
    (ux, uy), (vx, vy) = u, v
    meet = (min(ux, vx), min(uy, vy))
    join = (max(ux, vx), max(uy, vy))
    outer = kernel_eval(spec, ux, uy).log() + kernel_eval(spec, vx, vy).log()
    lattice = kernel_eval(spec, *meet).log() + kernel_eval(spec, *join).log()
    inputs = {"prefix": spec.prefix, "p": spec.p, "q": spec.q, "u": (ux, uy), "v": (vx, vy)}
    return _margin(outer - lattice, MarginKind.LOG_SUBMODULAR, inputs, 1.0, tolerance)


def supermodular_margin(spec, x1, x2, y1, y2, tolerance=DEFAULT_TOLERANCE):
    """
    K(x1, y1) + K(x2, y2) - K(x1, y2) - K(x2, y1), >= 0, in a common frame.

    The scale is the largest of the four kernel values.
    """
    _check_rectangle(x1, x2, y1, y2)
    inputs = {"prefix": spec.prefix, "p": spec.p, "q": spec.q, "x1": x1, "x2": x2, "y1": y1, "y2": y2}
    return _linear_margin(
        [kernel_eval(spec, x1, y1), kernel_eval(spec, x2, y2)],
        [kernel_eval(spec, x1, y2), kernel_eval(spec, x2, y1)],
        MarginKind.SUPERMODULAR, inputs, tolerance)


def phi_taylor(u):
    """phi(u) from its series sum_{k>=1} u^(2k) 2k/(2k+1)!; accurate for small |u|."""
    v = u * u
    term = v / 3.0
    total = 0.0
    k = 1
    while term > 1e-17 * total or k == 1:
        total += term
        term *= v / (2 * k * (2 * k + 3))
        k += 1
        if k > 200:
            break
    return total


def phi_direct(u):
    """phi(u) = cosh u - sinh(u)/u; loses digits near zero."""
    if u == 0.0:
        return 0.0
    return math.cosh(u) - math.sinh(u) / u


def log_phi(u):
    """log phi(u), usable where phi itself overflows; -inf at u = 0."""
    w = abs(u)
    if w == 0.0:
        return -math.inf
    if w <= PHI_EXP_FORM:
        return math.log(phi(w))
    decay = math.exp(-2.0 * w)
    return w - LOG2 + math.log((1.0 + decay) - (1.0 - decay) / w)


def phi(u):
    """
    phi(u) = cosh u - sinh(u)/u with phi(0) = 0.

    Even and positive away from zero. The series is used below |u| = 0.5.

    Example:
        phi(1.0) -> 0.36787944117144233
    """
    if not math.isfinite(u):
        raise DomainError(f"phi argument {u!r} is not finite")
    w = abs(u)
    if w < PHI_SWITCH:
        return phi_taylor(w)
    return phi_direct(w)


def h_scaled(x, y):
    """h(x, y) = 2 e^((x+y)/2) phi((x-y)/2) as a ScaledValue."""
    if not (math.isfinite(x) and math.isfinite(y)):
        raise DomainError("h arguments must be finite")
    return ScaledValue.from_log(LOG2 + 0.5 * (x + y) + log_phi(0.5 * (x - y)))


def h(x, y):
    """
    h(x, y) = e^x + e^y - 2 exp[x, y], >= 0, via the phi form.

    Example:
        h(0.0, 2.0) -> 2.0
    """
    return h_scaled(x, y).to_float()


def h_direct(x, y):
    """h(x, y) = e^x + e^y - 2 exp[x, y] evaluated as written."""
    return math.exp(x) + math.exp(y) - 2.0 * float(dd_exp([x, y]))


def Q(x, y, z):
    """phi(x+y) phi(y+z) - phi(y) phi(x+y+z) - phi(x) phi(z)."""
    return phi(x + y) * phi(y + z) - phi(y) * phi(x + y + z) - phi(x) * phi(z)


def four_point_f(a, b, c, d, tolerance=DEFAULT_TOLERANCE):
    """
    f(a, b, c, d) = exp[a,a,b,c] exp[d,d,b,c] + exp[b,b,a,d] exp[c,c,a,d] - exp[a,b,c,d]^2.

    Evaluated directly from five engine calls in a common frame; the scale is
    exp[a,b,c,d]^2. When |a-b|, |a-c|, |b-d| and |c-d| are all at least 1e-6
    the reference holds the h-form
    (h(a,c) h(b,d) + h(a,b) h(c,d) - h(b,c) h(a,d)) / (2 (a-b)(a-c)(b-d)(c-d)).
    """
    first = dd_exp([a, a, b, c]) * dd_exp([d, d, b, c])
    second = dd_exp([b, b, a, d]) * dd_exp([c, c, a, d])
    center = dd_exp([a, b, c, d])
    square = center * center
    reference = None
    gaps = (a - b, a - c, b - d, c - d)
    if min(abs(g) for g in gaps) >= H_FORM_MIN_GAP:
        numerator = h_scaled(a, c) * h_scaled(b, d) + h_scaled(a, b) * h_scaled(c, d) - h_scaled(b, c) * h_scaled(a, d)
        reference = numerator / (2.0 * gaps[0] * gaps[1] * gaps[2] * gaps[3])
    inputs = {"a": a, "b": b, "c": c, "d": d}
    return _linear_margin([first, second], [square], MarginKind.FOUR_POINT, inputs, tolerance,
                          reference=reference, scale_term=2)


def four_point_orbits(a, b, c, d, tolerance=DEFAULT_TOLERANCE):
    """
    f at the three orbit representatives of the sorted quadruple alpha <= beta <= gamma <= delta:
    (alpha, beta, gamma, delta), (alpha, gamma, delta, beta), (alpha, beta, delta, gamma).
    """
    s = sorted((a, b, c, d))
    return [four_point_f(s[0], s[1], s[2], s[3], tolerance),
            four_point_f(s[0], s[2], s[3], s[1], tolerance),
            four_point_f(s[0], s[1], s[3], s[2], tolerance)]


def triangle_h_margin(a, b, c, tolerance=DEFAULT_TOLERANCE):
    """
    h(a, c) - h(a, b) - h(b, c), >= 0 for a <= b <= c.

    The reference is the closed form 2 (b-a)(c-b) exp[a, b, b, c].

    Raises:
        ArgumentError: unless a <= b <= c.
    """
    if not (a <= b <= c):
        raise ArgumentError(f"triangle needs a <= b <= c, got ({a}, {b}, {c})")
    reference = dd_exp([a, b, b, c]) * (2.0 * (b - a) * (c - b))
    return _linear_margin([h_scaled(a, c)], [h_scaled(a, b), h_scaled(b, c)], MarginKind.TRIANGLE_H,
                          {"a": a, "b": b, "c": c}, tolerance, reference=reference)


def phi_product_margin(x, y, z, tolerance=DEFAULT_TOLERANCE):
    """
    phi(x+y) phi(y+z) - phi(x) phi(z) - phi(y) phi(x+y+z), >= 0 for x, y, z >= 0.

    Exactly zero when y = 0 or x = z = 0.

    Raises:
        ArgumentError: for a negative argument.
    """
    if min(x, y, z) < 0:
        raise ArgumentError(f"phi product needs x, y, z >= 0, got ({x}, {y}, {z})")
    outer = phi(x + y) * phi(y + z)
    sides = phi(x) * phi(z)
    inner = phi(y) * phi(x + y + z)
    value = (outer - sides) - inner
    return _margin(value, MarginKind.PHI_PRODUCT, {"x": x, "y": y, "z": z},
                   max(outer, sides, inner), tolerance, terms=(outer, sides, inner))


def h_product_margin(a, b, c, d, tolerance=DEFAULT_TOLERANCE):
    """
    h(a,c) h(b,d) - h(b,c) h(a,d) - h(a,b) h(c,d), >= 0 for a < b < c < d.

    The reference is 4 e^((a+b+c+d)/2) Q((b-a)/2, (c-b)/2, (d-c)/2).

    Raises:
        ArgumentError: unless a < b < c < d.
    """
    if not (a < b < c < d):
        raise ArgumentError(f"h product needs a < b < c < d, got ({a}, {b}, {c}, {d})")
    q_value = Q((b - a) / 2, (c - b) / 2, (d - c) / 2)
    reference = ScaledValue.from_float(4.0 * q_value) * ScaledValue.from_log((a + b + c + d) / 2)
    return _linear_margin([h_scaled(a, c) * h_scaled(b, d)],
                          [h_scaled(b, c) * h_scaled(a, d), h_scaled(a, b) * h_scaled(c, d)],
                          MarginKind.H_PRODUCT, {"a": a, "b": b, "c": c, "d": d}, tolerance,
                          reference=reference)
