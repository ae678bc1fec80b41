"""
Node multisets and the node-list syntax.

A divided difference exp[x_0, ..., x_q] depends only on the multiset of its
nodes. `NodeMultiset` stores that multiset canonically: strictly increasing
finite values, each with a multiplicity of at least one. Two nodes are the
same node only when they are bit-identical after canonical rounding (-0.0
becomes 0.0); near-duplicates are kept apart.

Node lists are written as whitespace-separated decimals. A token `v^m`
stands for the value v repeated m times, and in node files everything after
a `#` on a line is a comment.

Classes:
    NodeMultiset: canonical sorted multiset of finite real nodes.

Functions:
    parse_token(token): parse one `v` or `v^m` token into (value, multiplicity).
    parse_nodes(tokens): parse CLI arguments or strings into a NodeMultiset.
    read_node_file(path): read a node file into a NodeMultiset.
    as_sequence(nodes): flat tuple of floats in the caller's order.
"""

import math
from dataclasses import dataclass
from itertools import groupby

from exp_divdiff.errors import ArgumentError, DomainError, ParseError


def _canonical(value):
    try:
        value = float(value)
    except (TypeError, ValueError) as e:
        raise ParseError(f"not a number: {value!r}") from e
    if not math.isfinite(value):
        raise DomainError(f"node {value!r} is not finite")
    return value + 0.0


@dataclass(frozen=True)
class NodeMultiset:
    """
    Sorted real nodes with multiplicities.

    Attributes:
        entries (tuple[tuple[float, int], ...]): (value, multiplicity) pairs with
            strictly increasing values and multiplicities >= 1.
    """
    entries: tuple

    def __post_init__(self):
        if not self.entries:
            raise ArgumentError("a node multiset needs at least one node")
        previous = None
        for value, multiplicity in self.entries:
            if not math.isfinite(value):
                raise DomainError(f"node {value!r} is not finite")
            if not isinstance(multiplicity, int) or multiplicity < 1:
                raise ArgumentError(f"multiplicity must be a positive integer, got {multiplicity!r}")
            if previous is not None and value <= previous:
                raise ArgumentError("multiset entries must be strictly increasing")
            previous = value

    @classmethod
    def from_values(cls, values):
        """Build a multiset from a flat iterable of node values."""
        flat = sorted(_canonical(v) for v in values)
        if not flat:
            raise ArgumentError("a node multiset needs at least one node")
        return cls(tuple((value, len(list(group))) for value, group in groupby(flat)))

    @classmethod
    def from_pairs(cls, pairs):
        """Build a multiset from (value, multiplicity) pairs in any order; equal values merge."""
        counts = {}
        for value, multiplicity in pairs:
            if isinstance(multiplicity, bool) or int(multiplicity) != multiplicity or multiplicity < 1:
                raise ArgumentError(f"multiplicity must be a positive integer, got {multiplicity!r}")
            value = _canonical(value)
            counts[value] = counts.get(value, 0) + int(multiplicity)
        return cls(tuple(sorted(counts.items())))

    @classmethod
    def coerce(cls, nodes):
        """
        Accept a NodeMultiset, a flat sequence of numbers, or a sequence of (value, multiplicity) pairs.
        """
        if isinstance(nodes, cls):
            return nodes
        if isinstance(nodes, (int, float)):
            return cls.from_values([nodes])
        items = list(nodes)
        if items and all(isinstance(item, (tuple, list)) and len(item) == 2 for item in items):
            return cls.from_pairs(items)
        return cls.from_values(items)

    def flat(self):
        """The expanded sorted node sequence x_0 <= ... <= x_q."""
        return tuple(value for value, multiplicity in self.entries for _ in range(multiplicity))

    @property
    def count(self):
        return sum(multiplicity for _, multiplicity in self.entries)

    def order(self):
        """Total node count minus one: the q in exp[x_0, ..., x_q]."""
        return self.count - 1

    @property
    def values(self):
        return tuple(value for value, _ in self.entries)

    @property
    def is_constant(self):
        return len(self.entries) == 1

    def shifted(self, offset):
        return NodeMultiset.from_values(x + offset for x in self.flat())

    def scaled(self, factor):
        return NodeMultiset.from_values(factor * x for x in self.flat())

    def with_node(self, value, multiplicity=1):
        return NodeMultiset.from_pairs(list(self.entries) + [(value, multiplicity)])

    def __iter__(self):
        return iter(self.flat())

    def __len__(self):
        return self.count

    def __str__(self):
        return " ".join(repr(v) if m == 1 else f"{v!r}^{m}" for v, m in self.entries)


def as_sequence(nodes):
    """
    Flat tuple of finite floats, keeping the caller's order.

    Identities that single out x_0 need the order; a NodeMultiset yields its
    sorted expansion.
    """
    if isinstance(nodes, NodeMultiset):
        return nodes.flat()
    sequence = tuple(_canonical(x) for x in nodes)
    if not sequence:
        raise ArgumentError("at least one node is required")
    return sequence


def parse_token(token):
    """
    Parse one node token.

    Args:
        token (str | int | float): `v` or `v^m`, e.g. "0.5" or "0^4".

    Returns:
        tuple[float, int]: the value and its multiplicity.

    Raises:
        ParseError: if the value or multiplicity is malformed.
        DomainError: if the value is not finite.
    """
    if isinstance(token, bool):
        raise ParseError(f"not a node: {token!r}")
    if isinstance(token, (int, float)):
        return _canonical(token), 1
    text = str(token).strip()
    value_text, caret, multiplicity_text = text.partition("^")
    if caret:
        try:
            multiplicity = int(multiplicity_text)
        except ValueError as e:
            raise ParseError(f"bad multiplicity in {text!r}") from e
        if multiplicity < 1:
            raise ParseError(f"multiplicity must be >= 1 in {text!r}")
    else:
        multiplicity = 1
    if not value_text:
        raise ParseError(f"missing value in {text!r}")
    return _canonical(value_text), multiplicity


def _tokens(item):
    if isinstance(item, (list, tuple)):
        for inner in item:
            yield from _tokens(inner)
    elif isinstance(item, str):
        yield from item.replace(",", " ").split()
    else:
        yield item


def parse_nodes(items):
    """
    Parse node tokens given as CLI arguments, strings or numbers.

    Strings may hold several whitespace- or comma-separated tokens.

    Returns:
        NodeMultiset: the parsed multiset.

    Raises:
        ParseError: if nothing parseable is given or a token is malformed.
    """
    pairs = [parse_token(token) for item in items for token in _tokens(item)]
    if not pairs:
        raise ParseError("no nodes given")
    return NodeMultiset.from_pairs(pairs)


def read_node_file(path):
    """
    Read a node file: whitespace-separated tokens, `#` starts a comment.

    Raises:
        ParseError: if the file cannot be read or holds no nodes.
    """
    try:
        with open(path, encoding="utf-8") as node_file:
            lines = node_file.readlines()
    except OSError as e:
        raise ParseError(f"cannot read node file {path}: {e}") from e
    tokens = [token for line in lines for token in line.split("#", 1)[0].split()]
    if not tokens:
        raise ParseError(f"node file {path} holds no nodes")
    return parse_nodes(tokens)
