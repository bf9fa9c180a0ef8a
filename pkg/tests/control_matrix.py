"""Ground-truth matrix for the control-function classifiers.

Six families, five parameter choices each.  Expected verdicts were derived
by closed-form analysis of the class definitions:

* comparison class: non-decreasing, f(t) < t for t > 0, and right-limits
  strictly below the identity;
* altering class: monotone non-decreasing, continuous, f(t) = 0 iff t = 0.

Step functions that stay strictly below the identity are genuine comparison
functions despite the jump (the class permits discontinuities); none of
them are altering functions because they vanish on an initial segment and
jump. Capped-linear ramps are comparison functions but never altering
(the cap introduces a jump).
"""

from __future__ import annotations

from fractions import Fraction

from couplefix.controls import (
    ControlClass,
    expr_control,
    identity_control,
    make_capped_linear,
    make_linear,
    make_power,
)
from couplefix.expr import parse_expression


def _ramp(s1: str, s2: str):
    text = f"piecewise {{ t <= 1 => {s1} * t ; else => {s1} + {s2} * (t - 1) ; }}"
    return expr_control(parse_expression(text), ControlClass.UNCLASSIFIED)


def _step(at: str, height: str):
    text = f"piecewise {{ t < {at} => 0 ; else => {height} ; }}"
    return expr_control(parse_expression(text), ControlClass.UNCLASSIFIED)


# rows: (label, function, t_max, expect_comparison, expect_altering)
MATRIX = [
    # linear k*t: comparison iff k < 1, altering iff k > 0
    ("linear-0", make_linear(0), 4.0, True, False),
    ("linear-1/4", make_linear(Fraction(1, 4)), 4.0, True, True),
    ("linear-1/2", make_linear(Fraction(1, 2)), 4.0, True, True),
    ("linear-9/10", make_linear(Fraction(9, 10)), 4.0, True, True),
    ("linear-2", make_linear(2), 4.0, False, True),
    # powers t^p: never comparison, always altering for p > 0
    ("power-0.5", make_power(0.5), 4.0, False, True),
    ("power-1", make_power(1.0), 4.0, False, True),
    ("power-1.5", make_power(1.5), 4.0, False, True),
    ("power-2", make_power(2.0), 4.0, False, True),
    ("power-3", make_power(3.0), 4.0, False, True),
    # capped linear ramps: comparison, never altering (jump at the cap)
    ("capped-2/3-47/24", make_capped_linear(Fraction(2, 3), Fraction(47, 24)),
     2 * float(Fraction(47, 24)), True, False),
    ("capped-1/2-1", make_capped_linear(Fraction(1, 2), 1), 2.0, True, False),
    ("capped-1/4-2", make_capped_linear(Fraction(1, 4), 2), 4.0, True, False),
    ("capped-9/10-1", make_capped_linear(Fraction(9, 10), 1), 2.0, True, False),
    ("capped-1/10-1/2", make_capped_linear(Fraction(1, 10), Fraction(1, 2)), 1.0, True, False),
    # identity at several ranges: never comparison, always altering
    ("identity-0.5", identity_control(), 0.5, False, True),
    ("identity-1", identity_control(), 1.0, False, True),
    ("identity-2", identity_control(), 2.0, False, True),
    ("identity-5", identity_control(), 5.0, False, True),
    ("identity-10", identity_control(), 10.0, False, True),
    # continuous two-slope ramps below the identity: comparison and altering
    ("ramp-1/2-1/4", _ramp("1/2", "1/4"), 4.0, True, True),
    ("ramp-1/4-1/2", _ramp("1/4", "1/2"), 4.0, True, True),
    ("ramp-3/4-1/2", _ramp("3/4", "1/2"), 4.0, True, True),
    ("ramp-2/3-1/3", _ramp("2/3", "1/3"), 4.0, True, True),
    ("ramp-1/5-4/5", _ramp("1/5", "4/5"), 4.0, True, True),
    # steps 0 -> height at t = at: comparison iff height < at, never altering
    ("step-1-1", _step("1", "1"), 4.0, False, False),
    ("step-2-1", _step("2", "1"), 4.0, True, False),
    ("step-1-1/2", _step("1", "1/2"), 4.0, True, False),
    ("step-3-2", _step("3", "2"), 4.0, True, False),
    ("step-2-3", _step("2", "3"), 4.0, False, False),
]
