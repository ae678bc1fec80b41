"""
Compensated (two-term) summation helpers.

`two_sum` is the error-free transformation of Knuth: for floats a and b it
returns s = fl(a + b) and the exact rounding error e, so that a + b = s + e.
The same transformation works elementwise on numpy arrays, which is how the
Taylor recurrences in `ddcore` accumulate their terms.

Functions:
    two_sum(a, b): error-free sum of two floats or arrays.
    CompensatedSum: running accumulator carrying a correction term.
"""


def two_sum(a, b):
    """
    Return (s, e) with s = fl(a + b) and a + b = s + e exactly.

    Works for Python floats and, elementwise, for numpy arrays.
    """
    s = a + b
    z = s - a
    e = (a - (s - z)) + (b - z)
    return s, e


class CompensatedSum:
    """
    Running sum with a compensation term.

    Attributes:
        total: the rounded running sum.
        correction: accumulated rounding errors, added back by `value`.
    """

    def __init__(self, start=0.0):
        self.total = start
        self.correction = 0.0 * start

    def add(self, term):
        self.total, error = two_sum(self.total, term)
        self.correction = self.correction + error
        return self

    @property
    def value(self):
        return self.total + self.correction
