import math
import pytest
from hypothesis import given, settings, strategies as st
from exp_divdiff.errors import ArgumentError, DomainError
from exp_divdiff.inequalities import *

grid = st.integers(min_value=-24, max_value=24).map(lambda k: k / 4)

@pytest.fixture
def spec():
    return KernelSpec(prefix=(0.5, -1.0), p=2, q=1)

def test_kernel_spec_sorts_prefix(spec):
    assert spec.prefix == (-1.0, 0.5)
    assert spec.multiset(0.0, 2.0).count == 5

@pytest.mark.parametrize("kwargs, error", [
    ({"p": 0}, ArgumentError),
    ({"q": 1.5}, ArgumentError),
    ({"p": True}, ArgumentError),
    ({"prefix": (math.nan,)}, DomainError),
])
def test_kernel_spec_validation(kwargs, error):
    with pytest.raises(error):
        KernelSpec(**kwargs)

def test_kernel_eval():
    assert float(kernel_eval(KernelSpec((0.0,)), 0.0, 0.0)) == pytest.approx(0.5, rel=1e-15)
    assert float(kernel_eval(KernelSpec(), 0.0, 1.0)) == pytest.approx(math.e - 1, rel=1e-15)

def test_mixed_partial_matches_finite_difference():
    spec = KernelSpec()
    x, y, step = 0.3, 1.1, 1e-3
    k = lambda u, v: float(kernel_eval(spec, u, v))
    estimate = (k(x + step, y + step) - k(x + step, y - step) - k(x - step, y + step) + k(x - step, y - step)) / (4 * step * step)
    assert float(mixed_partial(spec, x, y)) == pytest.approx(estimate, rel=1e-5)

@pytest.mark.parametrize("x1, x2, y1, y2", [(1.0, 1.0, -2.0, 3.0), (-2.0, 3.0, 0.5, 0.5)])
def test_tn2_degenerate_rectangle_is_zero(spec, x1, x2, y1, y2):
    margin = tn2_margin(spec, x1, x2, y1, y2)
    assert margin.value == 0.0
    assert margin.passed
    assert margin.kind is MarginKind.TN2

def test_tn2_proper_rectangle(spec):
    margin = tn2_margin(spec, 0.0, 1.0, 0.0, 2.0)
    assert margin.value > 0
    assert margin.passed
    assert margin.inputs["x2"] == 1.0

def test_rectangle_order_is_checked(spec):
    with pytest.raises(ArgumentError):
        tn2_margin(spec, 1.0, 0.0, 0.0, 1.0)
    with pytest.raises(ArgumentError):
        supermodular_margin(spec, 0.0, 1.0, 1.0, 0.0)

def test_tn2_diagonal(spec):
    assert tn2_diagonal_margin(spec, 0.0, 0.0).value == 0.0
    assert tn2_diagonal_margin(spec, -1.0, 2.0).passed

def test_log_submodular_margin(spec):
    assert log_submodular_margin(spec, (0.0, 0.0), (1.0, 1.0)).value == 0.0
    crossed = log_submodular_margin(spec, (0.0, 2.0), (1.0, 0.0))
    assert crossed.value == tn2_margin(spec, 0.0, 1.0, 0.0, 2.0).value

def test_supermodular_margin(spec):
    margin = supermodular_margin(spec, -1.0, 1.5, 0.0, 2.0)
    assert margin.value > 0
    assert margin.passed
    assert margin.relative == margin.value / margin.scale

def test_phi_values():
    assert phi(0.0) == 0.0
    assert phi(1.0) == pytest.approx(math.exp(-1.0), rel=1e-15)
    assert phi(-2.0) == phi(2.0)
    assert phi_taylor(0.6) == pytest.approx(phi_direct(0.6), rel=1e-13)
    assert log_phi(30.0) == pytest.approx(math.log(phi(30.0)), rel=1e-14)
    assert log_phi(0.0) == -math.inf
    with pytest.raises(DomainError):
        phi(math.inf)

def test_h_values():
    assert h(0.0, 2.0) == pytest.approx(2.0, rel=1e-14)
    assert h(1.0, 1.0) == 0.0
    assert h(0.5, 1.5) == pytest.approx(h_direct(0.5, 1.5), rel=1e-12)
    assert h(-3.0, 4.0) == h(4.0, -3.0)
    # overflows a double but not the scaled form
    assert h_scaled(800.0, 805.0).log() == pytest.approx(805.0, rel=1e-3)

def test_four_point_value_and_reference():
    margin = four_point_f(0.0, 1.0, 2.0, 3.0)
    assert float(margin.scaled) == pytest.approx(0.6320185, rel=1e-6)
    assert margin.reference_gap() <= 1e-10
    assert margin.passed

def test_four_point_skips_reference_for_close_nodes():
    margin = four_point_f(0.0, 1e-8, 2.0, 3.0)
    assert margin.reference is None
    assert margin.reference_gap() is None
    assert margin.passed

def test_four_point_group():
    assert len(set(FOUR_POINT_GROUP)) == 8
    args = (-0.7, 0.4, 1.9, 2.6)
    base = float(four_point_f(*args).scaled)
    for permutation in FOUR_POINT_GROUP:
        permuted = [args[i] for i in permutation]
        assert float(four_point_f(*permuted).scaled) == pytest.approx(base, rel=1e-12)

def test_four_point_orbits():
    margins = four_point_orbits(2.0, -1.0, 0.5, 3.5)
    assert len(margins) == 3
    assert all(margin.passed for margin in margins)
    assert margins[0].inputs == {"a": -1.0, "b": 0.5, "c": 2.0, "d": 3.5}

@pytest.mark.parametrize("a, b, c", [(0.0, 1.0, 2.0), (-3.0, -2.5, 4.0), (10.0, 12.0, 12.5)])
def test_triangle_h_margin(a, b, c):
    margin = triangle_h_margin(a, b, c)
    assert margin.passed
    assert margin.reference_gap() <= 1e-10

def test_triangle_h_margin_order():
    with pytest.raises(ArgumentError):
        triangle_h_margin(0.0, 2.0, 1.0)

@pytest.mark.parametrize("x, y, z", [(1.0, 0.0, 2.0), (0.0, 1.5, 0.0)])
def test_phi_product_faces_are_zero(x, y, z):
    margin = phi_product_margin(x, y, z)
    assert margin.value == 0.0
    assert margin.passed

def test_phi_product_margin():
    margin = phi_product_margin(0.5, 1.0, 2.0)
    assert margin.value > 0
    assert margin.passed
    with pytest.raises(ArgumentError):
        phi_product_margin(-0.1, 1.0, 1.0)

@pytest.mark.parametrize("a, b, c, d", [(0.0, 1.0, 2.5, 4.0), (-5.0, -1.0, 0.0, 3.0)])
def test_h_product_margin(a, b, c, d):
    margin = h_product_margin(a, b, c, d)
    assert margin.passed
    assert margin.reference_gap() <= 1e-10

def test_h_product_margin_order():
    with pytest.raises(ArgumentError):
        h_product_margin(0.0, 1.0, 1.0, 2.0)

@settings(max_examples=60, deadline=None)
@given(st.lists(grid, max_size=3), st.integers(1, 3), st.integers(1, 3),
       grid, grid, grid, grid)
def test_tn2_holds_on_grid(prefix, p, q, a, b, c, d):
    spec = KernelSpec(tuple(prefix), p, q)
    x1, x2 = sorted((a, b))
    y1, y2 = sorted((c, d))
    assert tn2_margin(spec, x1, x2, y1, y2).passed
    assert supermodular_margin(spec, x1, x2, y1, y2).passed

@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(min_value=-12, max_value=12), min_size=4, max_size=4, unique=True))
def test_four_point_direct_and_h_form_agree(ks):
    a, b, c, d = (k / 4 for k in ks)
    margin = four_point_f(a, b, c, d)
    assert margin.reference_gap() <= 1e-8

@pytest.mark.slow
def test_phi_product_grid():
    points = [5.0 * i / 49 for i in range(50)]
    for x in points:
        for y in points:
            for z in points:
                assert phi_product_margin(x, y, z).passed
