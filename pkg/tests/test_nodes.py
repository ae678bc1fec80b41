import pytest
from exp_divdiff.errors import ArgumentError, DomainError, ParseError
from exp_divdiff.nodes import *

@pytest.mark.parametrize("token, expected", [
    ("1.5", (1.5, 1)),
    ("0^4", (0.0, 4)),
    ("-2.5^2", (-2.5, 2)),
    (3, (3.0, 1)),
    ("-0", (0.0, 1)),
])
def test_parse_token(token, expected):
    assert parse_token(token) == expected

@pytest.mark.parametrize("token", ["x", "1^0", "1^a", "^3", True])
def test_parse_token_errors(token):
    with pytest.raises(ParseError):
        parse_token(token)

def test_parse_token_non_finite():
    with pytest.raises(DomainError):
        parse_token("inf")

def test_parse_nodes_mixed_items():
    multiset = parse_nodes(["0^2", "1, 2", 1])
    assert multiset.flat() == (0.0, 0.0, 1.0, 1.0, 2.0)
    assert multiset.entries == ((0.0, 2), (1.0, 2), (2.0, 1))
    assert multiset.order() == 4

def test_parse_nodes_empty():
    with pytest.raises(ParseError, match="no nodes given"):
        parse_nodes([])

def test_read_node_file(tmp_path):
    path = tmp_path / "nodes.txt"
    path.write_text("# extremal configuration\n0.5 1.5  # two nodes\n\n-1^3\n", encoding="utf-8")
    assert read_node_file(str(path)).flat() == (-1.0, -1.0, -1.0, 0.5, 1.5)

def test_read_node_file_errors(tmp_path):
    empty = tmp_path / "empty.txt"
    empty.write_text("# nothing here\n", encoding="utf-8")
    with pytest.raises(ParseError):
        read_node_file(str(empty))
    with pytest.raises(ParseError):
        read_node_file(str(tmp_path / "missing.txt"))

def test_multiset_is_canonical():
    assert NodeMultiset.from_values([2, 1, 2]).entries == ((1.0, 1), (2.0, 2))
    assert NodeMultiset.from_values([-0.0, 0.0]).entries == ((0.0, 2),)
    assert NodeMultiset.from_values([1.0, 1.0 + 1e-15]).count == 2
    assert NodeMultiset.from_pairs([(1, 2), (0, 1), (1, 1)]).entries == ((0.0, 1), (1.0, 3))

def test_multiset_validation():
    with pytest.raises(ArgumentError):
        NodeMultiset.from_values([])
    with pytest.raises(ArgumentError):
        NodeMultiset(((1.0, 1), (0.0, 1)))
    with pytest.raises(ArgumentError):
        NodeMultiset.from_pairs([(0.0, 0)])
    with pytest.raises(DomainError):
        NodeMultiset.from_values([float("nan")])

def test_coerce():
    multiset = NodeMultiset.from_values([1, 2])
    assert NodeMultiset.coerce(multiset) is multiset
    assert NodeMultiset.coerce([(0.0, 3)]).flat() == (0.0, 0.0, 0.0)
    assert NodeMultiset.coerce(5).flat() == (5.0,)

def test_multiset_helpers():
    multiset = NodeMultiset.from_values([0, 0, 3])
    assert multiset.values == (0.0, 3.0)
    assert not multiset.is_constant
    assert multiset.shifted(1).flat() == (1.0, 1.0, 4.0)
    assert multiset.scaled(-1).flat() == (-3.0, 0.0, 0.0)
    assert multiset.with_node(3.0, 2).entries == ((0.0, 2), (3.0, 3))
    assert list(multiset) == [0.0, 0.0, 3.0]
    assert len(multiset) == 3
    assert str(multiset) == "0.0^2 3.0"

def test_as_sequence_keeps_order():
    assert as_sequence([3, 1, 2]) == (3.0, 1.0, 2.0)
    assert as_sequence(NodeMultiset.from_values([3, 1, 2])) == (1.0, 2.0, 3.0)
    with pytest.raises(ArgumentError):
        as_sequence([])
