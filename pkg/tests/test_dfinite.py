from __future__ import annotations

import math
import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dfcert.dfinite import (
    BoxTooLarge,
    DFiniteFunction,
    PathBlocked,
    SingularExpansionPoint,
    continue_to,
    derive_recurrence,
    disk_max_bound,
    eval_box,
    eval_deriv_point,
    eval_point,
    expand_at,
    radius_lower_bound,
)
from dfcert.exact import QQi
from dfcert.interval import ComplexInterval, RealInterval, to_fraction, working_precision
from dfcert.parsing import load_system

from conftest import make_erf, make_exp4


def mp(x) -> mpmath.mpf:
    return mpmath.mpf(to_fraction(x).numerator) / to_fraction(x).denominator


def encloses(z: ComplexInterval, value) -> bool:
    v = mpmath.mpc(value)
    return (mp(z.re.lo) <= v.real <= mp(z.re.hi)) and (mp(z.im.lo) <= v.imag <= mp(z.im.hi))


def bessel9() -> DFiniteFunction:
    return load_system("bessel-erf").system.ingredients[1].func


# ---- recurrence ----------------------------------------------------------

def test_erf_recurrence():
    rec = derive_recurrence(make_erf(), 0)
    # (n+2)(n+1) c_{n+2} + 2n c_n = 0
    for n in range(12):
        assert rec.coefficient(2, n) == QQi((n + 2) * (n + 1))
        assert rec.coefficient(0, n) == QQi(2 * n)
        assert rec.coefficient(1, n) == QQi(0)


def test_exp_recurrence():
    rec = derive_recurrence(make_exp4(), 0)
    for n in range(12):
        assert rec.coefficient(1, n) == QQi(n + 1)
        assert rec.coefficient(0, n) == QQi(-4)


def test_recurrence_singular_point():
    with pytest.raises(SingularExpansionPoint):
        derive_recurrence(bessel9(), 0)


def test_recurrence_polynomial_matches_values():
    rec = derive_recurrence(bessel9(), Fraction(7, 3))
    for e in rec.offsets():
        p = rec.coefficient_poly(e)
        for n in range(5, 10):
            val = QQi(0)
            for k, c in enumerate(p):
                val = val + c * n ** k
            assert val == rec.coefficient(e, n)


def test_coefficients_satisfy_recurrence_mpmath():
    """Taylor coefficients of J_9 at 3 from mpmath satisfy the derived recurrence."""
    rec = derive_recurrence(bessel9(), 3)
    with mpmath.workdps(50):
        c = mpmath.taylor(lambda t: mpmath.besselj(9, t), 3, 30)
        for n in range(rec.max_degree, 20):
            total = mpmath.mpf(0)
            for e in rec.offsets():
                if n + e < 0:
                    continue
                q = rec.coefficient(e, n)
                total += mpmath.mpf(q.real.numerator) / q.real.denominator * c[n + e]
            assert abs(total) < mpmath.mpf(10) ** -35


# ---- radius oracle -------------------------------------------------------

def test_radius_entire():
    assert radius_lower_bound(make_erf(), Fraction(3, 7)) == float("inf")
    assert radius_lower_bound(make_exp4(), -1) == float("inf")


def test_radius_bessel():
    x = Fraction("4.64481")
    R = mp(radius_lower_bound(bessel9(), x))
    assert R <= mpmath.mpf("4.64481")
    assert R >= mpmath.mpf("4.64481") * mpmath.mpf("0.99")


def test_radius_singular_point():
    with pytest.raises(SingularExpansionPoint):
        radius_lower_bound(bessel9(), 0)


gauss = st.builds(lambda a, b: QQi(Fraction(a, 4), Fraction(b, 4)),
                  st.integers(-12, 12), st.integers(-12, 12))


@settings(max_examples=80, deadline=None)
@given(st.lists(gauss, min_size=1, max_size=4), gauss)
def test_radius_never_exceeds_root_distance(roots, x):
    if any(x == z for z in roots):
        return
    coeffs = [QQi(1)]
    for z in roots:
        new = [QQi(0)] * (len(coeffs) + 1)
        for k, c in enumerate(coeffs):
            new[k + 1] = new[k + 1] + c
            new[k] = new[k] - c * z
        coeffs = new
    g = DFiniteFunction([[1], coeffs], [ComplexInterval.one()], x + QQi(Fraction(1, 1000)), "g")
    R = to_fraction(radius_lower_bound(g, x))
    assert R > 0
    dist2 = min(((x - z).real ** 2 + (x - z).imag ** 2) for z in roots)
    assert R * R <= dist2


# ---- expansions ----------------------------------------------------------

def test_exp_coefficients_and_tail(prec128):
    ex = expand_at(make_exp4(), 0, Fraction(1, 2), N=30)
    with mpmath.workdps(60):
        for k in range(31):
            assert encloses(ex.coeffs[k], mpmath.mpf(4) ** k / mpmath.factorial(k))
    assert ex.tail(Fraction(1, 2)) < 1e-20


@pytest.mark.parametrize("N", [5, 10, 20, 30, 45])
@pytest.mark.parametrize("rho", ["0.1", "0.5", "1", "2"])
def test_exp_tail_bound_valid(prec128, N, rho):
    rho = Fraction(rho)
    ex = expand_at(make_exp4(), 0, rho, N=N)
    with mpmath.workdps(60):
        r = mpmath.mpf(rho.numerator) / rho.denominator
        true_tail = mpmath.nsum(lambda k: (4 * r) ** k / mpmath.factorial(k), [N + 1, mpmath.inf])
        assert mp(ex.tail(rho)) >= true_tail


def test_erf_coefficients(prec128):
    ex = expand_at(make_erf(), 0, Fraction(1, 2), N=10)
    with mpmath.workdps(50):
        s = mpmath.sqrt(mpmath.pi)
        assert encloses(ex.coeffs[0], 0)
        assert encloses(ex.coeffs[1], 2 / s)
        assert encloses(ex.coeffs[2], 0)
        assert encloses(ex.coeffs[3], -2 / (3 * s))


def test_tail_tends_to_zero():
    g = make_exp4()
    tails = [expand_at(g, 0, Fraction(1, 2 ** k), N=0).tail(Fraction(1, 2 ** k)) for k in (2, 6, 12, 20)]
    assert all(a > b for a, b in zip(tails, tails[1:]))
    assert tails[-1] < 1e-4


def test_expand_beyond_radius():
    with pytest.raises(BoxTooLarge):
        expand_at(bessel9(), 3, 3)


# ---- continuation and point evaluation -----------------------------------

def test_erf_at_one(prec128):
    z = eval_point(make_erf(), 1)
    with mpmath.workdps(50):
        assert encloses(z, mpmath.erf(1))
    assert z.width() <= 1e-10
    assert z.im.lo == 0 and z.im.hi == 0


def test_exp_at_minus_one(prec128):
    g = make_exp4()
    with mpmath.workdps(50):
        assert encloses(eval_point(g, -1), mpmath.exp(-4))
        assert encloses(eval_deriv_point(g, -1, 1), 4 * mpmath.exp(-4))
        assert encloses(eval_deriv_point(g, -1, 3), 64 * mpmath.exp(-4))


def test_base_point_returns_initial_values(prec128):
    g = make_erf()
    vals = continue_to(g, 0)
    assert vals == g.initial_enclosures()
    assert eval_point(g, 0) == ComplexInterval.zero()
    with mpmath.workdps(50):
        assert encloses(eval_deriv_point(g, 0, 1), 2 / mpmath.sqrt(mpmath.pi))


def test_continuation_blocked_at_singular_point():
    with pytest.raises(PathBlocked):
        continue_to(bessel9(), 0)


def test_bessel_detour_and_value(prec128):
    g = bessel9()
    with mpmath.workdps(50):
        # -0.5+0.1i needs a detour: the straight segment from 1 runs close to 0
        for x, t in (("3.5", mpmath.mpc("3.5")), ("4.64481", mpmath.mpc("4.64481")),
                     ("0.5+2i", mpmath.mpc("0.5", "2")), ("-0.5+0.1i", mpmath.mpc("-0.5", "0.1"))):
            ref = mpmath.besselj(9, t) + mpmath.bessely(9, t)
            assert encloses(eval_point(g, x), ref), x


def test_no_detour_through_branch_point():
    # every axis-parallel route from 1 to -2 crosses the singular point 0
    with pytest.raises(PathBlocked):
        continue_to(bessel9(), -2)


def test_precision_monotonicity():
    g = make_erf()
    widths = []
    for bits in (64, 128, 256):
        with working_precision(bits):
            widths.append(eval_point(g, Fraction(3, 2)).width())
    assert widths[0] > widths[1] > widths[2]
    assert widths[2] < 1e-60


@settings(max_examples=40, deadline=None)
@given(st.integers(-300, 300), st.integers(-300, 300))
def test_point_soundness_fuzz(a, b):
    x = QQi(Fraction(a, 100), Fraction(b, 100))
    with working_precision(96):
        z_erf = eval_point(make_erf(), x)
        z_exp = eval_deriv_point(make_exp4(), x, 1)
    with mpmath.workdps(50):
        t = mpmath.mpc(mpmath.mpf(a) / 100, mpmath.mpf(b) / 100)
        assert encloses(z_erf, mpmath.erf(t))
        assert encloses(z_exp, 4 * mpmath.exp(4 * t))


def test_derivative_matches_finite_difference(prec128):
    g = make_erf()
    x = Fraction(7, 10)
    h = Fraction(1, 10**4)
    d1 = eval_deriv_point(g, x, 1)
    diff = (eval_point(g, x + h) - eval_point(g, x - h)) / RealInterval.exact(2 * h)
    # |D - g'(x)| <= h^2/6 max |g'''| on the disk of radius h
    corr = RealInterval.exact(h * h / 6) * RealInterval(disk_max_bound(g, x, h, j=3))
    widened = diff.blow(corr.hi)
    assert widened.intersect(d1) is not None
    assert d1.width() < 1e-30


# ---- box evaluation ------------------------------------------------------

def test_degenerate_box_matches_point(prec128):
    g = make_erf()
    x = Fraction(3, 8)
    assert eval_box(g, ComplexInterval.exact(x)) == eval_point(g, x)


def test_erf_box(prec128):
    J = ComplexInterval(RealInterval(Fraction(2, 5), Fraction(3, 5)))
    z = eval_box(make_erf(), J)
    with mpmath.workdps(40):
        assert mp(z.re.lo) <= mpmath.erf(mpmath.mpf("0.4"))
        assert mp(z.re.hi) >= mpmath.erf(mpmath.mpf("0.6"))
    assert z.re.hi - z.re.lo < 0.2


def test_box_sampling_fuzz(prec128):
    rng = random.Random(11)
    g = make_erf()
    b = bessel9()
    J = ComplexInterval(RealInterval(Fraction(1, 5), Fraction(1, 2)), RealInterval(Fraction(-1, 10), Fraction(1, 4)))
    K = ComplexInterval(RealInterval(Fraction(4), Fraction(9, 2)), RealInterval(Fraction(-1, 5), Fraction(1, 5)))
    zg, zb = eval_box(g, J), eval_box(b, K)
    with mpmath.workdps(30):
        for _ in range(1000):
            t = mpmath.mpc(0.2 + 0.3 * rng.random(), -0.1 + 0.35 * rng.random())
            assert encloses(zg, mpmath.erf(t))
            s = mpmath.mpc(4 + 0.5 * rng.random(), -0.2 + 0.4 * rng.random())
            assert encloses(zb, mpmath.besselj(9, s) + mpmath.bessely(9, s))


def test_box_too_large():
    J = ComplexInterval(RealInterval(Fraction(-1), Fraction(3)))
    with pytest.raises(BoxTooLarge):
        eval_box(bessel9(), J)


# ---- disk maximum --------------------------------------------------------

@pytest.mark.parametrize("r", ["0.25", "0.5", "1"])
def test_disk_max_exp(prec128, r):
    M = mp(disk_max_bound(make_exp4(), -1, Fraction(r)))
    with mpmath.workdps(30):
        exact = mpmath.exp(-4 + 4 * mpmath.mpf(r))
        assert exact <= M <= exact * mpmath.mpf("1.05")


def test_disk_max_constant(prec128):
    g = DFiniteFunction([[0], [1]], [ComplexInterval.one()], 0, "one")
    M = mp(disk_max_bound(g, Fraction(1, 3), Fraction(2)))
    assert 1 <= M <= 1 + 1e-20


@pytest.mark.parametrize("x,r,j", [("-1", "0.5", 0), ("0.3", "0.8", 2), ("4.64481", "1.5", 1)])
def test_disk_max_refinement_monotone(prec128, x, r, j):
    g = bessel9() if x == "4.64481" else make_erf()
    r = Fraction(r)
    ex = expand_at(g, x, r, rel_tol=2.0 ** -40)
    bounds = [disk_max_bound(g, x, r, arcs=k, j=j, expansion=ex) for k in (16, 64, 128)]
    assert bounds[0] >= bounds[1] >= bounds[2]


def test_disk_max_bounds_samples(prec128):
    g = bessel9()
    x, r = Fraction("4.64481"), Fraction(3, 2)
    M = mp(disk_max_bound(g, x, r, j=2))
    with mpmath.workdps(30):
        f2 = lambda t: mpmath.diff(lambda s: mpmath.besselj(9, s) + mpmath.bessely(9, s), t, 2)
        best = max(abs(f2(mpmath.mpf(x.numerator) / x.denominator + r * mpmath.expjpi(2 * k / 97.0)))
                   for k in range(97))
    assert best <= M <= 3 * best
