"""Exact Gaussian rationals and dense univariate polynomials over them."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .interval import ComplexInterval, RealInterval


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    raise TypeError(f"cannot make an exact rational from {type(x).__name__}")


class QQi:
    """Gaussian rational ``real + imag*i`` with :class:`Fraction` parts."""

    __slots__ = ("real", "imag")

    def __init__(self, real=0, imag=0):
        if isinstance(real, QQi):
            real, imag = real.real, real.imag + _frac(imag)
        self.real = _frac(real)
        self.imag = _frac(imag)

    @classmethod
    def coerce(cls, x) -> "QQi":
        if isinstance(x, QQi):
            return x
        if isinstance(x, complex):
            return cls(Fraction(x.real), Fraction(x.imag))
        return cls(x)

    def is_real(self) -> bool:
        return self.imag == 0

    def is_zero(self) -> bool:
        return self.real == 0 and self.imag == 0

    def abs2(self) -> Fraction:
        return self.real * self.real + self.imag * self.imag

    def conjugate(self) -> "QQi":
        return QQi(self.real, -self.imag)

    def __add__(self, other):
        o = QQi.coerce(other)
        return QQi(self.real + o.real, self.imag + o.imag)

    __radd__ = __add__

    def __sub__(self, other):
        o = QQi.coerce(other)
        return QQi(self.real - o.real, self.imag - o.imag)

    def __rsub__(self, other):
        return QQi.coerce(other) - self

    def __mul__(self, other):
        o = QQi.coerce(other)
        if o.imag == 0:
            return QQi(self.real * o.real, self.imag * o.real)
        return QQi(self.real * o.real - self.imag * o.imag, self.real * o.imag + self.imag * o.real)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = QQi.coerce(other)
        if o.is_zero():
            raise ZeroDivisionError("division by zero Gaussian rational")
        if o.imag == 0:
            return QQi(self.real / o.real, self.imag / o.real)
        d = o.abs2()
        n = self * o.conjugate()
        return QQi(n.real / d, n.imag / d)

    def __rtruediv__(self, other):
        return QQi.coerce(other) / self

    def __neg__(self):
        return QQi(-self.real, -self.imag)

    def __pow__(self, k: int):
        out = QQi(1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        try:
            o = QQi.coerce(other)
        except TypeError:
            return NotImplemented
        return self.real == o.real and self.imag == o.imag

    def __hash__(self):
        return hash((self.real, self.imag))

    def __complex__(self):
        return complex(float(self.real), float(self.imag))

    def enclosure(self) -> ComplexInterval:
        return ComplexInterval(RealInterval.exact(self.real), RealInterval.exact(self.imag))

    def __repr__(self):
        if self.imag == 0:
            return f"QQi({self.real})"
        return f"QQi({self.real}, {self.imag})"

    def __str__(self):
        if self.imag == 0:
            return str(self.real)
        return f"{self.real}{'+' if self.imag >= 0 else '-'}{abs(self.imag)}i"


ZERO = QQi(0)
ONE = QQi(1)


# Dense univariate polynomials: list of QQi, index = power, no trailing zeros.

def poly(coeffs: Sequence) -> list[QQi]:
    out = [QQi.coerce(c) for c in coeffs]
    while out and out[-1].is_zero():
        out.pop()
    return out


def poly_eval(p: Sequence[QQi], x) -> QQi:
    x = QQi.coerce(x)
    acc = QQi(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def poly_eval_interval(p: Sequence[QQi], x: ComplexInterval) -> ComplexInterval:
    acc = ComplexInterval.zero()
    for c in reversed(p):
        acc = acc * x + c.enclosure()
    return acc


def poly_shift(p: Sequence[QQi], c) -> list[QQi]:
    """Coefficients of q(u) = p(u + c) (Taylor shift, Horner scheme)."""
    c = QQi.coerce(c)
    q = [QQi(0)] * len(p)
    for a in reversed(p):
        # q <- q*(u + c) + a
        new = [QQi(0)] * len(p)
        for i, qi in enumerate(q):
            if qi.is_zero():
                continue
            if i + 1 < len(new):
                new[i + 1] = new[i + 1] + qi
            new[i] = new[i] + qi * c
        new[0] = new[0] + a
        q = new
    return poly(q)


def poly_derivative(p: Sequence[QQi]) -> list[QQi]:
    return poly([c * i for i, c in enumerate(p)][1:])


def poly_divmod(a: Sequence[QQi], b: Sequence[QQi]) -> tuple[list[QQi], list[QQi]]:
    a = list(poly(a))
    b = poly(b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    if len(a) < len(b):
        return [], a
    quot = [QQi(0)] * (len(a) - len(b) + 1)
    lead = b[-1]
    while len(a) >= len(b) and a:
        shift = len(a) - len(b)
        f = a[-1] / lead
        quot[shift] = f
        for i, bc in enumerate(b):
            a[i + shift] = a[i + shift] - f * bc
        a = poly(a)
    return poly(quot), a


def poly_gcd(a: Sequence[QQi], b: Sequence[QQi]) -> list[QQi]:
    a, b = poly(a), poly(b)
    while b:
        _, r = poly_divmod(a, b)
        a, b = b, r
    if not a:
        return []
    lead = a[-1]
    return [c / lead for c in a]


def squarefree_part(p: Sequence[QQi]) -> list[QQi]:
    """p / gcd(p, p'): same roots, all simple."""
    p = poly(p)
    if len(p) <= 2:
        return p
    g = poly_gcd(p, poly_derivative(p))
    if len(g) <= 1:
        return p
    q, r = poly_divmod(p, g)
    assert not r
    return q


def parse_exact(x) -> QQi:
    """Exact value from int, Fraction, decimal/rational string, complex, or QQi."""
    if isinstance(x, QQi):
        return x
    if isinstance(x, str):
        s = x.strip().replace(" ", "")
        if s.endswith("i") or s.endswith("j"):
            body = s[:-1]
            # split at the last sign that is not an exponent sign
            for k in range(len(body) - 1, 0, -1):
                if body[k] in "+-" and body[k - 1] not in "eE":
                    re_s, im_s = body[:k], body[k:]
                    break
            else:
                re_s, im_s = "0", body
            if im_s in ("", "+"):
                im_s = "1"
            elif im_s == "-":
                im_s = "-1"
            return QQi(Fraction(re_s), Fraction(im_s))
        return QQi(Fraction(s))
    return QQi.coerce(x)
