"""
exp_divdiff: exponential divided differences over real node multisets.

The engine lives in `ddcore`, independent references in `oracle`, the sharp
sandwich bounds in `bounds`, inequality margins in `inequalities` and identity
residuals in `identities`. The `expdd` command line is `exp_divdiff.main:main`.
"""

from exp_divdiff.ddcore import DDTable, dd_append, dd_exp, dd_exp_factorial, dd_exp_log, dd_table, shift_normalize
from exp_divdiff.nodes import NodeMultiset
from exp_divdiff.scaled import ScaledValue

__version__ = "0.1.0"
