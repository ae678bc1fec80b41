import math
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from exp_divdiff import ddcore
from exp_divdiff.ddcore import *
from exp_divdiff.errors import DomainError, RangeError
from exp_divdiff.nodes import NodeMultiset
from exp_divdiff.oracle import newton_highprec

E = math.e

@pytest.mark.parametrize("nodes, expected", [
    ([0.0], 1.0),
    ([2.0], math.exp(2.0)),
    ([0, 1], E - 1),
    ([0, 0], 1.0),
    ([0, 0, 0, 0], 1.0 / 6.0),
    ([1, 2, 3], (math.exp(3) - 2 * math.exp(2) + E) / 2),
    ([0, 1, 1], 1.0),
])
def test_dd_exp_closed_forms(nodes, expected):
    assert float(dd_exp(nodes)) == pytest.approx(expected, rel=1e-13)

def test_dd_exp_negative_scale_is_signed():
    # e^{-1[0,1]} = e^-1 - 1
    assert float(dd_exp([0, 1], t=-1.0)) == pytest.approx(math.exp(-1.0) - 1.0, rel=1e-14)
    assert dd_exp([0, 1, 2], t=-1.0).sign == 1

def test_dd_exp_zero_scale():
    assert dd_exp([1, 2], t=0.0).is_zero
    assert float(dd_exp([1], t=0.0)) == 1.0

def test_dd_exp_factorial():
    assert float(dd_exp_factorial([0, 0, 0, 0, 0])) == pytest.approx(1.0, rel=1e-14)
    assert float(dd_exp_factorial([2.0] * 7)) == pytest.approx(math.exp(2.0), rel=1e-14)
    assert float(dd_exp_factorial([0, 1])) == pytest.approx(E - 1, rel=1e-14)

def test_dd_exp_log():
    sign, log_value = dd_exp_log([0, 1])
    assert sign == 1
    assert log_value == pytest.approx(math.log(E - 1), rel=1e-14)
    assert dd_exp_log([1, 2], t=0.0) == (0, -math.inf)

def test_large_nodes_do_not_overflow():
    value = dd_exp([1000.0, 1001.0])
    assert not value.is_representable
    assert value.log() == pytest.approx(1000.0 + math.log(E - 1), rel=1e-14)

def test_wide_spread_two_nodes():
    # (e^800 - 1) / 800 and (e^800 - 1) / 1
    assert dd_exp([0.0, 800.0]).log() == pytest.approx(800.0 - math.log(800.0), rel=1e-14)
    assert dd_exp([0.0, 1.0], t=800.0).log() == pytest.approx(800.0, rel=1e-14)
    assert dd_exp([0.0, 1.0], t=-800.0).sign == -1

@pytest.mark.parametrize("nodes", [
    [0.0, 1.0, 2.0, 900.0],
    [-500.0, -499.0, 0.0, 0.5, 400.0, 401.0],
    [(0.0, 3), (1200.0, 2)],
])
def test_wide_spread_matches_oracle(nodes):
    assert dd_exp(nodes).rel_diff(newton_highprec(nodes, 400)) <= 1e-10

def test_wide_streaming_matches_oracle():
    nodes = list(np.linspace(-400.0, 400.0, 70))
    assert dd_exp(nodes).rel_diff(newton_highprec(nodes, 400)) <= 1e-10

def test_underflowing_column_switches_to_log_domain():
    # exp[0^(63), S] = (e^S - sum_{k<63} S^k/k!) / S^63, the sum being negligible
    spread = 2.0e6
    value = dd_exp([(0.0, 63), (spread, 1)])
    assert value.sign == 1
    assert value.log() == pytest.approx(spread - 63 * math.log(spread), rel=1e-12)

def test_log_domain_matches_dense_path():
    zp = np.array([0.0, -3.0, -3.5, -40.0, -41.0])
    assert ddcore._log_dense(zp) == pytest.approx(math.log(ddcore._prefix_column(zp)[-1]), rel=1e-12)

def test_overflowing_scaled_nodes():
    with pytest.raises(RangeError):
        dd_exp([0.0, 1e308], t=10.0)

@pytest.mark.parametrize("nodes, t", [([0.0, math.nan], 1.0), ([0.0], math.inf), ([0.0, 1.0], math.nan)])
def test_non_finite_input(nodes, t):
    with pytest.raises(DomainError):
        dd_exp(nodes, t)

def test_permutation_invariance():
    assert dd_exp([3, -1, 2]) == dd_exp([-1, 2, 3])
    assert dd_exp([(1.0, 2), (0.5, 1)]) == dd_exp([0.5, 1.0, 1.0])

def test_near_confluent_continuity():
    # exp[0, eps] = 1 + eps/2 + ...
    assert float(dd_exp([0.0, 1e-9])) == pytest.approx(1.0 + 5e-10, rel=1e-14)
    close = float(dd_exp([0.0, 1e-7, 2e-7, 3e-7]))
    assert close == pytest.approx(1.0 / 6.0, rel=1e-6)

def test_shift_normalize():
    centred, mu = shift_normalize([1, 2, 6])
    assert mu == 3.0
    assert centred.flat() == (-2.0, -1.0, 3.0)
    assert float(dd_exp([1, 2, 6])) == pytest.approx(math.exp(mu) * float(dd_exp(centred)), rel=1e-13)

@pytest.mark.parametrize("size", [10, 63, 64, 65, 90])
def test_dense_and_streaming_paths_match_oracle(size):
    nodes = list(np.linspace(-20.0, 20.0, size))
    assert dd_exp(nodes).rel_diff(newton_highprec(nodes)) <= 1e-10

def test_streaming_many_nodes_wide_spread():
    nodes = list(np.linspace(-150.0, 150.0, 200))
    assert dd_exp(nodes).rel_diff(newton_highprec(nodes, 400)) <= 1e-10

@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(min_value=-80, max_value=80), min_size=1, max_size=12),
       st.sampled_from([1.0, 0.5, -1.0]))
def test_engine_matches_oracle(grid, t):
    # nodes on a 1/8 grid, so coincident draws give confluent nodes
    nodes = [k / 8.0 for k in grid]
    assert dd_exp(nodes, t).rel_diff(newton_highprec(nodes, 200, t)) <= 1e-10

def test_dd_exp_many_preserves_order():
    node_lists = [[0, 1], [0, 0, 0, 0], [1, 2, 3], [5.0]]
    expected = [dd_exp(nodes) for nodes in node_lists]
    assert dd_exp_many(node_lists, threads=4) == expected
    assert dd_exp_many(node_lists) == expected

def test_dd_table_frontier():
    nodes = [0.5, -1.0, 2.0, 0.5]
    table = dd_table(nodes)
    assert len(table) == 4
    for j in range(4):
        assert table.frontier[j].rel_diff(dd_exp(nodes[:j + 1])) <= 1e-12
    assert table.value == table.frontier[-1]
    assert table.multiset() == NodeMultiset.from_values(nodes)

@pytest.mark.parametrize("start, extra", [
    ([0.5, -1.0, 2.0], 0.7),
    ([0.5, -1.0, 2.0], 0.5),
    ([1.0, 1.0], 1.0),
    ([0.0, 3.0, -2.0, 1.0], 3.0),
])
def test_dd_append_matches_recompute(start, extra):
    appended = dd_append(dd_table(start), extra)
    assert appended.nodes == tuple(start) + (extra,)
    assert appended.value.rel_diff(dd_exp(start + [extra])) <= 1e-10

def test_repeated_appends():
    table = dd_table([0.0])
    nodes = [0.0]
    for x in [1.0, -0.5, 1.0, 2.5, 0.0, 1.0]:
        table = table.append(x)
        nodes.append(x)
        assert table.value.rel_diff(dd_exp(nodes)) <= 1e-10

def test_dd_append_rejects_bad_nodes():
    table = dd_table([0.0, 1.0])
    with pytest.raises(DomainError):
        dd_append(table, math.inf)
    with pytest.raises(RangeError):
        dd_append(table, 1000.0)

@pytest.mark.parametrize("start, extra", [
    ([-4.0, 0.0, 1e-6, 2e-6], 3e-6),
    ([0.0, 1e-6, 2.0, -3.0, 5.0], 2e-6),
    ([0.0, 1.0, 2.0, 3.0], 1e-6),
    ([1.0, 1.0 + 1e-9, 1.0 - 1e-9], 1.0 + 2e-9),
])
def test_append_to_clustered_table_matches_recompute(start, extra):
    appended = dd_append(dd_table(start), extra)
    assert appended.value.rel_diff(dd_exp(start + [extra])) <= 1e-13
    assert max(appended.bounds) <= APPEND_TOL

def test_append_above_separated_nodes_keeps_the_sweep():
    start = [0.0, 8.0, 16.0, 24.0]
    table = dd_table(start)
    appended = dd_append(table, 32.0)
    assert appended.value.rel_diff(dd_exp(start + [32.0])) <= 1e-13
    assert appended.order == table.order + (8.0,)
    # swept entries carry their own bound, rebuilt ones the engine bound
    assert appended.bounds[0] != ENGINE_REL

def test_append_moves_every_copy_to_the_tail():
    start = [1.0, 2.0, 1.0, 3.0, 1.0]
    appended = dd_append(dd_table(start), 1.0)
    v = appended.order[-1]
    assert appended.order[-4:] == (v,) * 4
    assert v not in appended.order[:-4]
    assert appended.value.rel_diff(dd_exp(start + [1.0])) <= 1e-13

def test_clustered_appends_stay_accurate():
    nodes = [0.0]
    table = dd_table(nodes)
    for k in range(1, 9):
        x = k * 1e-7
        table = table.append(x)
        nodes.append(x)
        assert table.value.rel_diff(dd_exp(nodes)) <= 1e-13

@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(min_value=-80, max_value=80), min_size=1, max_size=8),
       st.floats(min_value=-50.0, max_value=50.0),
       st.sampled_from([1.0, 0.5, -1.0]))
def test_translation_covariance(grid, c, t):
    nodes = [k / 8.0 for k in grid]
    moved = dd_exp([x + c for x in nodes], t)
    assert moved.rel_diff(dd_exp(nodes, t) * ScaledValue.from_log(t * c)) <= 1e-12

@pytest.mark.parametrize("eps", [10.0 ** -k for k in range(3, 10)])
def test_confluent_limit_sweep(eps):
    nodes = [0.3, 0.3 + eps, -1.2, 2.0]
    value = dd_exp(nodes)
    assert value.rel_diff(newton_highprec(nodes, 200)) <= 1e-10
    # d/dx_j log exp[x] lies in [0, 1]
    assert value.rel_diff(dd_exp([0.3, 0.3, -1.2, 2.0])) <= 10.0 * eps + 1e-14
