from __future__ import annotations

from fractions import Fraction

import pytest

from dfcert.dfinite import DFiniteFunction
from dfcert.interval import ComplexInterval, RealInterval, real_pi, set_precision, get_precision


def two_over_sqrt_pi() -> ComplexInterval:
    return ComplexInterval(RealInterval.exact(2) / real_pi().sqrt())


def make_erf() -> DFiniteFunction:
    """erf: g'' + 2t g' = 0, g(0) = 0, g'(0) = 2/sqrt(pi)."""
    return DFiniteFunction([[0], [0, 2], [1]], [ComplexInterval.zero(), two_over_sqrt_pi], 0, "erf")


def make_exp4() -> DFiniteFunction:
    """e^{4t}: g' - 4g = 0, g(0) = 1."""
    return DFiniteFunction([[-4], [1]], [ComplexInterval.one()], 0, "exp4")


def frac_of(x) -> Fraction:
    from dfcert.interval import to_fraction
    return to_fraction(x)


@pytest.fixture
def prec128():
    old = get_precision()
    set_precision(128)
    yield 128
    set_precision(old)


@pytest.fixture
def erf():
    return make_erf()


@pytest.fixture
def exp4():
    return make_exp4()
