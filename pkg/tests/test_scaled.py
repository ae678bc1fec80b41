import math
import pytest
from hypothesis import given, strategies as st
from exp_divdiff.errors import DomainError, RangeError
from exp_divdiff.scaled import *

def test_from_float_normalizes_mantissa():
    value = ScaledValue.from_float(20.0)
    assert 1.0 <= value.mantissa < math.e
    assert value.log_shift == 2.0
    assert value.to_float() == pytest.approx(20.0, rel=1e-15)

def test_zero_is_exact():
    assert ScaledValue.from_float(0.0) == ScaledValue.zero()
    assert ScaledValue.from_log(-math.inf) == ScaledValue.zero()
    assert ScaledValue.zero().log() == -math.inf
    assert ScaledValue.zero().sign == 0

def test_negative_values_keep_their_sign():
    value = ScaledValue.from_float(-0.25)
    assert value.sign == -1
    assert value.to_float() == pytest.approx(-0.25, rel=1e-15)
    assert (-value).sign == 1
    assert abs(value).to_float() == pytest.approx(0.25, rel=1e-15)

@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_from_float_rejects_non_finite(bad):
    with pytest.raises(DomainError):
        ScaledValue.from_float(bad)

def test_from_log_rejects_overflowing_logs():
    with pytest.raises(RangeError):
        ScaledValue.from_log(math.inf)
    with pytest.raises(RangeError):
        ScaledValue.from_log(math.nan)

def test_huge_value_is_kept_but_not_representable():
    value = ScaledValue.from_log(1000.0)
    assert value.log() == pytest.approx(1000.0, rel=1e-15)
    assert not value.is_representable
    with pytest.raises(RangeError):
        value.to_float()

def test_tiny_value_underflows_to_zero():
    assert ScaledValue.from_log(-1000.0).to_float() == 0.0
    assert math.copysign(1.0, ScaledValue.from_log(-1000.0, -1).to_float()) == -1.0

def test_products_stay_in_range():
    product = ScaledValue.from_log(800.0) * ScaledValue.from_log(-790.0)
    assert product.to_float() == pytest.approx(math.exp(10.0), rel=1e-13)
    quotient = ScaledValue.from_log(800.0) / ScaledValue.from_log(799.0)
    assert quotient.to_float() == pytest.approx(math.e, rel=1e-13)

def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        ScaledValue.one() / ScaledValue.zero()

def test_sums_and_differences():
    assert (ScaledValue.from_float(3.0) - 1.0).to_float() == pytest.approx(2.0, rel=1e-15)
    assert (2.0 + ScaledValue.from_float(0.5)).to_float() == pytest.approx(2.5, rel=1e-15)
    assert (ScaledValue.from_float(1.5) - ScaledValue.from_float(1.5)).is_zero
    big = ScaledValue.from_log(900.0)
    assert (big + ScaledValue.one()) == big

def test_ordering():
    values = [ScaledValue.from_log(800.0), ScaledValue.from_float(-2.0), ScaledValue.zero(),
              ScaledValue.from_float(1.0), ScaledValue.from_log(900.0, -1)]
    ordered = sorted(values)
    assert ordered[0].log() == pytest.approx(900.0)
    assert ordered[0].sign == -1
    assert ordered[2].is_zero
    assert ordered[-1].log() == pytest.approx(800.0)

def test_rel_diff():
    a = ScaledValue.from_log(500.0)
    b = a * 1.000001
    assert a.rel_diff(b) == pytest.approx(1e-6 / 1.000001, rel=1e-6)
    assert ScaledValue.zero().rel_diff(ScaledValue.zero()) == 0.0

def test_common_frame():
    shift, mantissas = common_frame([ScaledValue.from_log(10.0), ScaledValue.from_log(8.0), ScaledValue.zero()])
    assert shift == 10.0
    assert mantissas[0] == pytest.approx(1.0)
    assert mantissas[1] == pytest.approx(math.exp(-2.0))
    assert mantissas[2] == 0.0
    assert common_frame([ScaledValue.zero()]) == (0.0, [0.0])

@given(st.floats(min_value=-700, max_value=700), st.floats(min_value=-700, max_value=700))
def test_product_adds_logs(a, b):
    product = ScaledValue.from_log(a) * ScaledValue.from_log(b)
    assert product.log() == pytest.approx(a + b, rel=1e-14, abs=1e-12)
    assert 1.0 <= product.mantissa < math.e
