"""Krawczyk existence and uniqueness test for ingredient systems."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import gmpy2
from gmpy2 import mpfr

from .dfinite import DFiniteError, snap_center
from .exact import QQi
from .interval import (IntervalBox, IntervalMatrix, NotDiagonallyDominated, approx_inverse,
                       identity_minus, max_norm_bound, rounding_contexts, strict_subset)
from .system import IngredientSystem, OracleError, eval_F, eval_jacobian


@dataclass
class KrawczykCertificate:
    region: IntervalBox
    center: list
    preconditioner: list | None
    image: IntervalBox | None
    contraction: mpfr
    verdict: str
    failure_reason: str | None = None
    message: str = ""
    complex_mode: bool = True

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


def default_center(sys: IngredientSystem, I: IntervalBox) -> list[QQi]:
    """A short dyadic point near mid(I); any y in I is admissible."""
    out = []
    for e in I:
        c = snap_center(e)
        if not sys.complex_mode:
            c = QQi(c.real, 0)
        out.append(c)
    return out


def default_preconditioner(sys: IngredientSystem, y: Sequence[QQi]) -> list[list]:
    """Approximate inverse of the midpoint of F'(y)."""
    jac = eval_jacobian(sys, y)
    inv = approx_inverse(jac.mid_points())
    if not sys.complex_mode:
        inv = [[gmpy2.mpc(z.real, 0) for z in row] for row in inv]
    return inv


def krawczyk_image(sys: IngredientSystem, I: IntervalBox, y: Sequence, Y: Sequence[Sequence]) -> IntervalBox:
    """y - Y F(y) + (I_n - Y F'(I)) (I - y), all in interval arithmetic."""
    return _image_and_contraction(sys, I, y, Y)[0]


def _image_and_contraction(sys, I, y, Y):
    ymat = IntervalMatrix.from_points(Y)
    ybox = IntervalBox([QQi.coerce(v).enclosure() for v in y])
    fy = eval_F(sys, list(y))
    a = identity_minus(ymat @ eval_jacobian(sys, I))
    image = ybox - ymat.matvec(fy) + a.matvec(I - ybox)
    return image, max_norm_bound(a)


def _contraction_factor(norm: mpfr, complex_mode: bool) -> mpfr:
    if not complex_mode:
        return norm
    _, up, _ = rounding_contexts()
    return up.mul(norm, up.sqrt(mpfr(2)))


def krawczyk_test(sys: IngredientSystem, I: IntervalBox, y: Sequence | None = None,
                  Y: Sequence[Sequence] | None = None) -> KrawczykCertificate:
    """Pass certifies a unique root of F in I; fail is inconclusive."""
    if len(I) != sys.size:
        raise ValueError(f"box has {len(I)} coordinates, system has {sys.size} variables")
    cmode = sys.complex_mode
    try:
        if y is None:
            y = default_center(sys, I)
        else:
            y = sys.check_point(y)
        if not I.contains([v.enclosure() for v in y]):
            raise ValueError("center y must lie in the box")
        if Y is None:
            Y = default_preconditioner(sys, y)
        image, norm = _image_and_contraction(sys, I, y, Y)
    except (OracleError, DFiniteError) as exc:
        return KrawczykCertificate(I, list(y or []), Y, None, mpfr("inf"), "fail", "oracle-error",
                                   str(exc), cmode)
    except (ZeroDivisionError, NotDiagonallyDominated) as exc:
        return KrawczykCertificate(I, list(y), Y, None, mpfr("inf"), "fail", "contraction-failed",
                                   f"singular midpoint Jacobian: {exc}", cmode)
    contraction = _contraction_factor(norm, cmode)
    subset = strict_subset(image, I)
    if not subset:
        verdict, reason = "fail", "subset-failed"
    elif not contraction < 1:
        verdict, reason = "fail", "contraction-failed"
    else:
        verdict, reason = "pass", None
    return KrawczykCertificate(I, list(y), Y, image, contraction, verdict, reason, "", cmode)


def refine_root(sys: IngredientSystem, certificate: KrawczykCertificate, max_iter: int = 64) -> IntervalBox:
    """Shrink a certified box by iterating I <- K_y(I) ∩ I until progress stalls."""
    if not certificate.passed:
        raise ValueError("refine_root needs a passing certificate")
    box = certificate.region
    for _ in range(max_iter):
        try:
            y = default_center(sys, box)
            Y = default_preconditioner(sys, y)
            image, _ = _image_and_contraction(sys, box, y, Y)
        except (OracleError, DFiniteError, ZeroDivisionError, NotDiagonallyDominated):
            return box
        new = image.intersect(box)
        if new is None:
            return box
        old_w, new_w = box.width(), new.width()
        box = new
        if not new_w < old_w * mpfr("0.9"):
            break
    return box
