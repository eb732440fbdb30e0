from __future__ import annotations

import random
from fractions import Fraction

import gmpy2
import mpmath
import pytest

from dfcert.exact import QQi
from dfcert.interval import ComplexInterval, IntervalBox, RealInterval, to_fraction, working_precision
from dfcert.krawczyk import krawczyk_image, krawczyk_test, refine_root
from dfcert.parsing import load_system, parse_polynomial
from dfcert.system import IngredientRow, IngredientSystem

import corpus
from conftest import make_erf


def one_var(expr: str, mode: str = "real") -> IngredientSystem:
    return IngredientSystem([parse_polynomial(expr, ["x"])], [], mode=mode)


def rbox(lo, hi) -> IntervalBox:
    return IntervalBox([ComplexInterval(RealInterval(Fraction(lo), Fraction(hi)))])


def test_linear_image_is_point():
    sys = one_var("x - 3/4")
    I = rbox("0.5", "1")
    img = krawczyk_image(sys, I, [QQi(Fraction(3, 4))], [[1]])
    assert img[0] == ComplexInterval.exact(Fraction(3, 4))


def test_sqrt2_image():
    sys = one_var("x^2 - 2")
    I = rbox("1.40", "1.42")
    with working_precision(128):
        img = krawczyk_image(sys, I, [QQi(Fraction(141, 100))], [[gmpy2.mpfr(1) / gmpy2.mpfr("2.82")]])
    assert I[0].re.interior_contains(img[0].re)
    with mpmath.workdps(40):
        s = mpmath.sqrt(2)
        assert mpmath.mpf(str(img[0].re.lo)) <= s <= mpmath.mpf(str(img[0].re.hi))


def test_default_preconditioner_sqrt2_pass():
    cert = krawczyk_test(one_var("x^2 - 2"), rbox("1.40", "1.42"))
    assert cert.passed and cert.failure_reason is None
    assert cert.contraction < 1


def test_known_root_always_in_image():
    rng = random.Random(17)
    for c in corpus.build_corpus(3, 8):
        for root in c.roots[:3]:
            centre = corpus.round_point(root, 2)
            box = IntervalBox.around(centre, Fraction(1, 20))
            if not corpus.in_box(box, root):
                continue
            cert = krawczyk_test(c.system, box)
            if cert.image is not None:
                assert corpus.in_box(cert.image, root)


@pytest.mark.parametrize("digits,expected", [(0, "fail"), (1, "pass"), (2, "pass"), (3, "pass")])
def test_erf_rounded_digit_rows(digits, expected):
    from dfcert.cli import run_certify
    from dfcert.report import round_decimal

    pt = [round_decimal(v, digits) for v in ("0.480322", "1.94147", "0.503058", "0.993961")]
    side = 2 * Fraction(1, 10 ** digits)
    rep = run_certify("erf", ",".join(pt), "krawczyk", 128, None, str(side), None)
    assert rep.verdict == expected


def test_elliptic_two_digits():
    from dfcert.cli import run_certify

    pt = load_system("elliptic").point("default")
    rounded = ",".join(str(round(Fraction(v), 2)) for v in pt)
    rep = run_certify("elliptic", rounded, "krawczyk", 128, None, "0.02", None)
    assert rep.verdict == "pass"


def test_oracle_error_reason():
    sys = load_system("bessel-erf").system
    # the Bessel ingredient cannot be evaluated on a box around its singular point 0
    box = IntervalBox.around([Fraction(0)] * 5, Fraction(1, 2), complex_mode=False)
    cert = krawczyk_test(sys, box)
    assert not cert.passed and cert.failure_reason == "oracle-error"


def test_singular_jacobian_reason():
    sys = one_var("x^2")
    cert = krawczyk_test(sys, rbox("-0.1", "0.1"), y=["0"])
    assert cert.failure_reason == "contraction-failed"


def test_subset_failure_reason():
    cert = krawczyk_test(one_var("x^2 - 2"), rbox("1.5", "1.6"))
    assert cert.failure_reason == "subset-failed"


def test_refine_sqrt2():
    sys = one_var("x^2 - 2")
    with working_precision(128):
        cert = krawczyk_test(sys, rbox("1.3", "1.5"))
        assert cert.passed
        box = refine_root(sys, cert, max_iter=8)
    assert box.width() < 1e-10
    with mpmath.workdps(50):
        s = mpmath.sqrt(2)
        assert mpmath.mpf(str(box[0].re.lo)) <= s <= mpmath.mpf(str(box[0].re.hi))


def test_refine_fixed_point():
    sys = one_var("x^2 - 2")
    with working_precision(128):
        cert = krawczyk_test(sys, rbox("1.3", "1.5"))
        tight = refine_root(sys, cert)
        cert2 = krawczyk_test(sys, tight)
        if cert2.passed:
            again = refine_root(sys, cert2)
            assert again.width() <= tight.width()
            assert tight.contains(again)


def test_refine_keeps_root_for_corpus():
    for c in corpus.build_corpus(4, 6):
        for root in c.roots[:2]:
            box = IntervalBox.around(corpus.round_point(root, 3), Fraction(1, 100))
            cert = krawczyk_test(c.system, box)
            if cert.passed:
                assert corpus.in_box(refine_root(c.system, cert), root)


def test_soundness_on_corpus():
    rng = random.Random(21)
    tally = corpus.SoundnessTally()
    for c in corpus.build_corpus(8, 15):
        corpus.check_krawczyk(c, rng, tally)
    assert tally.krawczyk_passes > 0
    assert tally.violations == []


def test_two_roots_never_pass():
    sys = one_var("x^2 - 1/100", mode="complex")
    for half in ("0.2", "0.5", "1"):
        cert = krawczyk_test(sys, IntervalBox.around([Fraction(0)], Fraction(half)))
        assert not cert.passed


def test_worse_preconditioner_never_helps():
    rng = random.Random(2)
    flipped = 0
    for c in corpus.build_corpus(12, 8):
        for root in c.roots[:2]:
            box = IntervalBox.around(corpus.round_point(root, 3), Fraction(1, 200))
            good = krawczyk_test(c.system, box)
            if good.preconditioner is None:
                continue
            bad = [[z * (1 + 0.5 * rng.uniform(-1, 1)) + 0.3 * rng.uniform(-1, 1) for z in row]
                   for row in good.preconditioner]
            worse = krawczyk_test(c.system, box, Y=bad)
            if worse.passed and not good.passed:
                flipped += 1
    assert flipped == 0


def test_real_mode_consistency():
    sf = load_system("erf")
    cx = IngredientSystem(sf.system.polys, sf.system.ingredients, mode="complex")
    centre = [Fraction(s) for s in ("0.48", "1.94", "0.5", "0.99")]
    for half in (Fraction(1, 100), Fraction(1, 10)):
        real_box = IntervalBox.around(centre, half, complex_mode=False)
        cx_box = IntervalBox.around(centre, half, complex_mode=True)
        c_cert = krawczyk_test(cx, cx_box)
        r_cert = krawczyk_test(sf.system, real_box)
        assert c_cert.passed
        assert r_cert.passed


def test_center_must_lie_in_box():
    with pytest.raises(ValueError):
        krawczyk_test(one_var("x - 1"), rbox("0", "1"), y=["2"])


def test_ingredient_row_with_erf():
    from dfcert.system import MultivariatePolynomial as MP

    x = [MP.variable(2, k) for k in range(2)]
    # x - 1/2 = 0, y - erf(x) = 0
    sys = IngredientSystem([x[0] - MP.constant(2, Fraction(1, 2))], [IngredientRow(1, make_erf(), 0)], mode="real")
    cert = krawczyk_test(sys, IntervalBox.around([Fraction(1, 2), Fraction(52, 100)], Fraction(1, 100), False))
    assert cert.passed
    with mpmath.workdps(30):
        v = mpmath.erf(mpmath.mpf(1) / 2)
        assert mpmath.mpf(str(cert.image[1].re.lo)) <= v <= mpmath.mpf(str(cert.image[1].re.hi))
    assert to_fraction(cert.region[1].re.lo) < Fraction(52, 100)
