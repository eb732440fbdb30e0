"""Outward-rounded real and complex interval arithmetic.

Endpoints are MPFR numbers (through gmpy2).  Every endpoint operation is done
in a rounding context pointing away from the interval interior, so each result
encloses the exact result for all members of the operands.

Working precision is held in a context variable; use :func:`working_precision`
to change it for a block of code.
"""

from __future__ import annotations

import contextvars
from contextlib import contextmanager
from fractions import Fraction
from typing import Iterable, Sequence

import gmpy2
from gmpy2 import mpfr, mpq

DEFAULT_PRECISION = 53

_PRECISION = contextvars.ContextVar("dfcert_precision", default=DEFAULT_PRECISION)
_CONTEXTS: dict[int, tuple] = {}


class IntervalError(ArithmeticError):
    pass


class DivisionByZeroInterval(IntervalError):
    pass


class NotDiagonallyDominated(IntervalError):
    """Raised when ||I - Y A|| >= 1, so the residual solve gives no enclosure."""


def _contexts(prec: int):
    try:
        return _CONTEXTS[prec]
    except KeyError:
        kw = dict(precision=prec, emax=gmpy2.get_emax_max(), emin=gmpy2.get_emin_min(),
                  subnormalize=False, trap_underflow=False, trap_overflow=False,
                  trap_inexact=False, trap_invalid=False, trap_divzero=False)
        pair = (gmpy2.context(round=gmpy2.RoundDown, **kw),
                gmpy2.context(round=gmpy2.RoundUp, **kw),
                gmpy2.context(round=gmpy2.RoundToNearest, **kw))
        _CONTEXTS[prec] = pair
        return pair


def get_precision() -> int:
    return _PRECISION.get()


def set_precision(bits: int) -> None:
    if bits < 2:
        raise ValueError("precision must be at least 2 bits")
    _PRECISION.set(int(bits))


@contextmanager
def working_precision(bits: int):
    """Temporarily run interval operations at ``bits`` bits of precision."""
    if bits < 2:
        raise ValueError("precision must be at least 2 bits")
    token = _PRECISION.set(int(bits))
    try:
        yield
    finally:
        _PRECISION.reset(token)


def rounding_contexts():
    """(down, up, nearest) gmpy2 contexts at the current precision."""
    return _contexts(_PRECISION.get())


_ZERO = mpfr(0)
_INF = mpfr("inf")


def _q(x) -> mpq:
    if isinstance(x, mpq):
        return x
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, int):
        return mpq(x)
    if isinstance(x, str):
        return mpq(Fraction(x))
    if isinstance(x, float):
        return mpq(Fraction(x))
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


def round_down(x) -> mpfr:
    """Largest working-precision float <= exact rational ``x``."""
    down, _, _ = rounding_contexts()
    q = _q(x)
    return down.div(q.numerator, q.denominator)


def round_up(x) -> mpfr:
    _, up, _ = rounding_contexts()
    q = _q(x)
    return up.div(q.numerator, q.denominator)


def to_fraction(x: mpfr) -> Fraction:
    """Exact rational value of a finite MPFR number."""
    q = mpq(x)
    return Fraction(int(q.numerator), int(q.denominator))


class RealInterval:
    """Closed interval ``[lo, hi]`` with MPFR endpoints."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        if hi is None:
            hi = lo
        if not isinstance(lo, type(_ZERO)):
            lo = round_down(lo)
        if not isinstance(hi, type(_ZERO)):
            hi = round_up(hi)
        if gmpy2.is_nan(lo) or gmpy2.is_nan(hi):
            raise IntervalError("NaN endpoint")
        if lo > hi:
            raise IntervalError(f"empty interval [{lo}, {hi}]")
        self.lo = lo
        self.hi = hi

    @classmethod
    def _raw(cls, lo, hi) -> "RealInterval":
        obj = object.__new__(cls)
        obj.lo = lo
        obj.hi = hi
        return obj

    @classmethod
    def exact(cls, x) -> "RealInterval":
        """Tightest enclosure of the exact rational (or decimal string) ``x``."""
        return cls._raw(round_down(x), round_up(x))

    @classmethod
    def entire(cls) -> "RealInterval":
        return cls._raw(-_INF, _INF)

    # ---- queries -------------------------------------------------------
    def is_finite(self) -> bool:
        return gmpy2.is_finite(self.lo) and gmpy2.is_finite(self.hi)

    def is_point(self) -> bool:
        return self.lo == self.hi

    def width(self) -> mpfr:
        _, up, _ = rounding_contexts()
        return up.sub(self.hi, self.lo)

    def mid(self) -> mpfr:
        """Midpoint rounded to nearest; always a member of the interval."""
        _, _, near = rounding_contexts()
        if not self.is_finite():
            raise IntervalError("midpoint of unbounded interval")
        m = near.div(near.add(self.lo, self.hi), 2)
        if m < self.lo:
            return self.lo
        if m > self.hi:
            return self.hi
        return m

    def rad(self) -> mpfr:
        _, up, _ = rounding_contexts()
        m = self.mid()
        return max(up.sub(self.hi, m), up.sub(m, self.lo))

    def mag(self) -> mpfr:
        _, up, _ = rounding_contexts()
        return max(up.abs(self.lo), up.abs(self.hi))

    def mig(self) -> mpfr:
        if self.lo > 0:
            return self.lo
        if self.hi < 0:
            down, _, _ = rounding_contexts()
            return down.minus(self.hi)
        return _ZERO

    def contains(self, x) -> bool:
        if isinstance(x, RealInterval):
            return self.lo <= x.lo and x.hi <= self.hi
        q = _q(x) if not isinstance(x, type(_ZERO)) else x
        return self.lo <= q <= self.hi

    def __contains__(self, x) -> bool:
        return self.contains(x)

    def interior_contains(self, other: "RealInterval") -> bool:
        return self.lo < other.lo and other.hi < self.hi

    def contains_zero(self) -> bool:
        return self.lo <= 0 <= self.hi

    def hull(self, other: "RealInterval") -> "RealInterval":
        return RealInterval._raw(min(self.lo, other.lo), max(self.hi, other.hi))

    def intersect(self, other: "RealInterval") -> "RealInterval | None":
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        if lo > hi:
            return None
        return RealInterval._raw(lo, hi)

    # ---- arithmetic ----------------------------------------------------
    def _coerce(self, other) -> "RealInterval":
        if isinstance(other, RealInterval):
            return other
        if isinstance(other, type(_ZERO)):
            return RealInterval._raw(other, other)
        return RealInterval.exact(other)

    def __neg__(self):
        # Python's unary minus on mpfr rounds to the global context; use directed contexts
        down, up, _ = rounding_contexts()
        return RealInterval._raw(down.minus(self.hi), up.minus(self.lo))

    def __pos__(self):
        return self

    def __add__(self, other):
        if isinstance(other, ComplexInterval):
            return NotImplemented
        o = self._coerce(other)
        down, up, _ = rounding_contexts()
        return RealInterval._raw(down.add(self.lo, o.lo), up.add(self.hi, o.hi))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, ComplexInterval):
            return NotImplemented
        o = self._coerce(other)
        down, up, _ = rounding_contexts()
        return RealInterval._raw(down.sub(self.lo, o.hi), up.sub(self.hi, o.lo))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, ComplexInterval):
            return NotImplemented
        o = self._coerce(other)
        down, up, _ = rounding_contexts()
        a, b, c, d = self.lo, self.hi, o.lo, o.hi
        if a >= 0:
            if c >= 0:
                return RealInterval._raw(down.mul(a, c), up.mul(b, d))
            if d <= 0:
                return RealInterval._raw(down.mul(b, c), up.mul(a, d))
            return RealInterval._raw(down.mul(b, c), up.mul(b, d))
        if b <= 0:
            if c >= 0:
                return RealInterval._raw(down.mul(a, d), up.mul(b, c))
            if d <= 0:
                return RealInterval._raw(down.mul(b, d), up.mul(a, c))
            return RealInterval._raw(down.mul(a, d), up.mul(a, c))
        if c >= 0:
            return RealInterval._raw(down.mul(a, d), up.mul(b, d))
        if d <= 0:
            return RealInterval._raw(down.mul(b, c), up.mul(a, c))
        lo = min(down.mul(a, d), down.mul(b, c))
        hi = max(up.mul(a, c), up.mul(b, d))
        return RealInterval._raw(lo, hi)

    __rmul__ = __mul__

    def reciprocal(self) -> "RealInterval":
        if self.contains_zero():
            raise DivisionByZeroInterval(f"reciprocal of interval containing 0: {self}")
        down, up, _ = rounding_contexts()
        return RealInterval._raw(down.div(1, self.hi), up.div(1, self.lo))

    def __truediv__(self, other):
        if isinstance(other, ComplexInterval):
            return NotImplemented
        o = self._coerce(other)
        if o.contains_zero():
            raise DivisionByZeroInterval(f"division by interval containing 0: {o}")
        down, up, _ = rounding_contexts()
        a, b, c, d = self.lo, self.hi, o.lo, o.hi
        cands_lo = (down.div(a, c), down.div(a, d), down.div(b, c), down.div(b, d))
        cands_hi = (up.div(a, c), up.div(a, d), up.div(b, c), up.div(b, d))
        return RealInterval._raw(min(cands_lo), max(cands_hi))

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def sqr(self) -> "RealInterval":
        down, up, _ = rounding_contexts()
        if self.lo >= 0:
            return RealInterval._raw(down.mul(self.lo, self.lo), up.mul(self.hi, self.hi))
        if self.hi <= 0:
            return RealInterval._raw(down.mul(self.hi, self.hi), up.mul(self.lo, self.lo))
        m = self.mag()
        return RealInterval._raw(_ZERO, up.mul(m, m))

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only nonnegative integer powers are supported")
        if k == 0:
            return RealInterval._raw(mpfr(1), mpfr(1))
        if k % 2 == 0:
            return self.sqr() ** (k // 2) if k > 2 else self.sqr()
        result = self
        for _ in range(k - 1):
            result = result * self
        return result

    def sqrt(self) -> "RealInterval":
        if self.hi < 0:
            raise IntervalError("sqrt of negative interval")
        down, up, _ = rounding_contexts()
        lo = down.sqrt(self.lo) if self.lo > 0 else _ZERO
        return RealInterval._raw(lo, up.sqrt(self.hi))

    def exp(self) -> "RealInterval":
        down, up, _ = rounding_contexts()
        return RealInterval._raw(down.exp(self.lo), up.exp(self.hi))

    def log(self) -> "RealInterval":
        if self.lo <= 0:
            raise IntervalError("log of non-positive interval")
        down, up, _ = rounding_contexts()
        return RealInterval._raw(down.log(self.lo), up.log(self.hi))

    def blow(self, eps) -> "RealInterval":
        """Widen symmetrically by ``eps`` >= 0 (rounded outward)."""
        down, up, _ = rounding_contexts()
        e = eps if isinstance(eps, type(_ZERO)) else round_up(eps)
        return RealInterval._raw(down.sub(self.lo, e), up.add(self.hi, e))

    def __eq__(self, other):
        if not isinstance(other, RealInterval):
            return NotImplemented
        return self.lo == other.lo and self.hi == other.hi

    def __hash__(self):
        return hash((self.lo, self.hi))

    def __repr__(self):
        return f"RealInterval({self.lo}, {self.hi})"

    def __str__(self):
        return f"[{self.lo}, {self.hi}]"


def real_pi() -> RealInterval:
    down, up, _ = rounding_contexts()
    return RealInterval._raw(down.const_pi(), up.const_pi())


def upper_sqrt(x) -> mpfr:
    """Upward-rounded square root of a nonnegative MPFR value."""
    _, up, _ = rounding_contexts()
    return up.sqrt(x)


def upper_sum(values: Iterable) -> mpfr:
    _, up, _ = rounding_contexts()
    total = _ZERO
    for v in values:
        total = up.add(total, v)
    return total


class ComplexInterval:
    """Axis-aligned rectangle ``re + i*im`` in the complex plane."""

    __slots__ = ("re", "im")

    def __init__(self, re: RealInterval, im: RealInterval | None = None):
        if not isinstance(re, RealInterval):
            re = RealInterval.exact(re)
        if im is None:
            im = RealInterval._raw(_ZERO, _ZERO)
        elif not isinstance(im, RealInterval):
            im = RealInterval.exact(im)
        self.re = re
        self.im = im

    @classmethod
    def exact(cls, x) -> "ComplexInterval":
        """Enclosure of an exact value: rational, decimal string, or something with
        ``.real``/``.imag`` exact parts (e.g. :class:`dfcert.exact.QQi`)."""
        if isinstance(x, ComplexInterval):
            return x
        if isinstance(x, RealInterval):
            return cls(x)
        if hasattr(x, "real") and hasattr(x, "imag") and not isinstance(x, (int, Fraction)):
            return cls(RealInterval.exact(x.real), RealInterval.exact(x.imag))
        return cls(RealInterval.exact(x))

    @classmethod
    def zero(cls) -> "ComplexInterval":
        return cls(RealInterval._raw(_ZERO, _ZERO))

    @classmethod
    def one(cls) -> "ComplexInterval":
        one = mpfr(1)
        return cls(RealInterval._raw(one, one))

    def is_real(self) -> bool:
        return self.im.lo == 0 and self.im.hi == 0

    def is_finite(self) -> bool:
        return self.re.is_finite() and self.im.is_finite()

    def mag(self) -> mpfr:
        """sup |z| over the rectangle, rounded up (attained at a corner)."""
        _, up, _ = rounding_contexts()
        a = self.re.mag()
        b = self.im.mag()
        if b == 0:
            return a
        if a == 0:
            return b
        return up.sqrt(up.add(up.mul(a, a), up.mul(b, b)))

    def mig(self) -> mpfr:
        """inf |z| over the rectangle, rounded down."""
        down, _, _ = rounding_contexts()
        a = self.re.mig()
        b = self.im.mig()
        if b == 0:
            return a
        if a == 0:
            return b
        return down.sqrt(down.add(down.mul(a, a), down.mul(b, b)))

    def abs(self) -> RealInterval:
        return RealInterval._raw(self.mig(), self.mag())

    def mid(self) -> tuple[mpfr, mpfr]:
        return self.re.mid(), self.im.mid()

    def mid_interval(self) -> "ComplexInterval":
        a, b = self.mid()
        return ComplexInterval(RealInterval._raw(a, a), RealInterval._raw(b, b))

    def rad(self) -> mpfr:
        """Upper bound on the distance from mid() to any point of the rectangle."""
        _, up, _ = rounding_contexts()
        a, b = self.re.rad(), self.im.rad()
        return up.sqrt(up.add(up.mul(a, a), up.mul(b, b)))

    def width(self) -> mpfr:
        return max(self.re.width(), self.im.width())

    def contains(self, z) -> bool:
        if isinstance(z, ComplexInterval):
            return self.re.contains(z.re) and self.im.contains(z.im)
        if isinstance(z, RealInterval):
            return self.re.contains(z) and self.im.contains_zero()
        if isinstance(z, complex):
            return self.re.contains(z.real) and self.im.contains(z.imag)
        if hasattr(z, "real") and hasattr(z, "imag") and not isinstance(z, (int, Fraction)):
            return self.re.contains(z.real) and self.im.contains(z.imag)
        return self.re.contains(z) and self.im.contains_zero()

    def __contains__(self, z) -> bool:
        return self.contains(z)

    def interior_contains(self, other: "ComplexInterval") -> bool:
        return self.re.interior_contains(other.re) and self.im.interior_contains(other.im)

    def contains_zero(self) -> bool:
        return self.re.contains_zero() and self.im.contains_zero()

    def hull(self, other: "ComplexInterval") -> "ComplexInterval":
        return ComplexInterval(self.re.hull(other.re), self.im.hull(other.im))

    def intersect(self, other: "ComplexInterval") -> "ComplexInterval | None":
        re = self.re.intersect(other.re)
        im = self.im.intersect(other.im)
        if re is None or im is None:
            return None
        return ComplexInterval(re, im)

    def conj(self) -> "ComplexInterval":
        return ComplexInterval(self.re, -self.im)

    def blow(self, eps) -> "ComplexInterval":
        """Add the square [-eps, eps] + [-eps, eps]i."""
        return ComplexInterval(self.re.blow(eps), self.im.blow(eps))

    def _coerce(self, other) -> "ComplexInterval":
        if isinstance(other, ComplexInterval):
            return other
        if isinstance(other, RealInterval):
            return ComplexInterval(other)
        if isinstance(other, type(_ZERO)):
            return ComplexInterval(RealInterval._raw(other, other))
        return ComplexInterval.exact(other)

    def __neg__(self):
        return ComplexInterval(-self.re, -self.im)

    def __pos__(self):
        return self

    def __add__(self, other):
        o = self._coerce(other)
        return ComplexInterval(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return ComplexInterval(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        return cmul(self, o)

    __rmul__ = __mul__

    def sqr(self) -> "ComplexInterval":
        return cmul(self, self)

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only nonnegative integer powers are supported")
        result = ComplexInterval.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __truediv__(self, other):
        o = self._coerce(other)
        if o.is_real():
            return ComplexInterval(self.re / o.re, self.im / o.re)
        denom = o.re.sqr() + o.im.sqr()
        if denom.lo <= 0:
            raise DivisionByZeroInterval(f"division by rectangle containing 0: {o}")
        num = cmul(self, o.conj())
        return ComplexInterval(num.re / denom, num.im / denom)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __eq__(self, other):
        if not isinstance(other, ComplexInterval):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __repr__(self):
        return f"ComplexInterval({self.re!r}, {self.im!r})"

    def __str__(self):
        return f"{self.re} + {self.im}i"


def cmul(a: ComplexInterval, b: ComplexInterval) -> ComplexInterval:
    """Rectangle product: (ac - bd) + (ad + bc)i on the real interval parts."""
    if a.im.lo == 0 and a.im.hi == 0:
        if b.im.lo == 0 and b.im.hi == 0:
            return ComplexInterval(a.re * b.re)
        return ComplexInterval(a.re * b.re, a.re * b.im)
    if b.im.lo == 0 and b.im.hi == 0:
        return ComplexInterval(a.re * b.re, a.im * b.re)
    return ComplexInterval(a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re)


def mag(a: ComplexInterval) -> mpfr:
    return a.mag()


class IntervalBox:
    """Vector of complex rectangles."""

    __slots__ = ("entries",)

    def __init__(self, entries: Iterable):
        ents = tuple(e if isinstance(e, ComplexInterval) else ComplexInterval.exact(e) for e in entries)
        if not ents:
            raise ValueError("an interval box must be nonempty")
        self.entries = ents

    @classmethod
    def around(cls, center: Sequence, half_side, complex_mode: bool = True) -> "IntervalBox":
        """Box of side ``2*half_side`` centered at an exact point."""
        ents = []
        for c in center:
            z = ComplexInterval.exact(c)
            if complex_mode:
                ents.append(z.blow(half_side))
            else:
                ents.append(ComplexInterval(z.re.blow(half_side), z.im))
        return cls(ents)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def mid(self) -> list[tuple[mpfr, mpfr]]:
        return [e.mid() for e in self.entries]

    def width(self) -> mpfr:
        return max(e.width() for e in self.entries)

    def contains(self, other) -> bool:
        if isinstance(other, IntervalBox):
            _check_dims(self, other)
            return all(a.contains(b) for a, b in zip(self.entries, other.entries))
        other = list(other)
        if len(other) != len(self.entries):
            raise ValueError("dimension mismatch")
        return all(a.contains(b) for a, b in zip(self.entries, other))

    def __contains__(self, other) -> bool:
        return self.contains(other)

    def intersect(self, other: "IntervalBox") -> "IntervalBox | None":
        _check_dims(self, other)
        out = []
        for a, b in zip(self.entries, other.entries):
            c = a.intersect(b)
            if c is None:
                return None
            out.append(c)
        return IntervalBox(out)

    def __add__(self, other: "IntervalBox") -> "IntervalBox":
        _check_dims(self, other)
        return IntervalBox(a + b for a, b in zip(self.entries, other.entries))

    def __sub__(self, other: "IntervalBox") -> "IntervalBox":
        _check_dims(self, other)
        return IntervalBox(a - b for a, b in zip(self.entries, other.entries))

    def __neg__(self):
        return IntervalBox(-a for a in self.entries)

    def norm2_upper(self) -> mpfr:
        """Upper bound on the Euclidean norm of every member vector."""
        _, up, _ = rounding_contexts()
        total = _ZERO
        for e in self.entries:
            m = e.mag()
            total = up.add(total, up.mul(m, m))
        return up.sqrt(total)

    def norm_inf_upper(self) -> mpfr:
        return max(e.mag() for e in self.entries)

    def __repr__(self):
        return f"IntervalBox({list(self.entries)!r})"


def _check_dims(a: IntervalBox, b: IntervalBox) -> None:
    if len(a) != len(b):
        raise ValueError(f"dimension mismatch: {len(a)} vs {len(b)}")


def strict_subset(inner: IntervalBox, outer: IntervalBox) -> bool:
    """True iff every rectangle of ``inner`` lies in the interior of ``outer``'s.

    For a coordinate whose outer rectangle is degenerate in the imaginary
    direction (real-mode boxes) interiority is only required of the real part,
    and the imaginary parts must agree exactly.
    """
    _check_dims(inner, outer)
    for a, b in zip(inner.entries, outer.entries):
        if not b.re.interior_contains(a.re):
            return False
        if b.im.is_point():
            if not (a.im.is_point() and a.im.lo == b.im.lo):
                return False
        elif not b.im.interior_contains(a.im):
            return False
    return True


class IntervalMatrix:
    """Rectangular matrix of complex rectangles (list of rows)."""

    __slots__ = ("rows",)

    def __init__(self, rows: Iterable[Iterable]):
        rs = tuple(tuple(e if isinstance(e, ComplexInterval) else ComplexInterval.exact(e) for e in row)
                   for row in rows)
        if not rs or not rs[0]:
            raise ValueError("matrix must be nonempty")
        if any(len(r) != len(rs[0]) for r in rs):
            raise ValueError("ragged matrix")
        self.rows = rs

    @classmethod
    def identity(cls, n: int) -> "IntervalMatrix":
        z, o = ComplexInterval.zero(), ComplexInterval.one()
        return cls([[o if i == j else z for j in range(n)] for i in range(n)])

    @classmethod
    def from_points(cls, rows) -> "IntervalMatrix":
        """Degenerate matrix from MPFR/gmpy2 mpc point entries."""
        out = []
        for row in rows:
            r = []
            for z in row:
                re, im = (z.real, z.imag) if isinstance(z, type(gmpy2.mpc(0))) else (z, _ZERO)
                r.append(ComplexInterval(RealInterval._raw(mpfr(re), mpfr(re)),
                                         RealInterval._raw(mpfr(im), mpfr(im))))
            out.append(r)
        return cls(out)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.rows[0])

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def column(self, j: int) -> IntervalBox:
        return IntervalBox(row[j] for row in self.rows)

    def matvec(self, v: IntervalBox) -> IntervalBox:
        if self.shape[1] != len(v):
            raise ValueError("dimension mismatch")
        out = []
        for row in self.rows:
            acc = row[0] * v[0]
            for a, x in zip(row[1:], v.entries[1:]):
                acc = acc + a * x
            out.append(acc)
        return IntervalBox(out)

    def __matmul__(self, other):
        if isinstance(other, IntervalBox):
            return self.matvec(other)
        n, k = self.shape
        k2, m = other.shape
        if k != k2:
            raise ValueError("dimension mismatch")
        out = []
        for row in self.rows:
            r = []
            for j in range(m):
                acc = row[0] * other.rows[0][j]
                for t in range(1, k):
                    acc = acc + row[t] * other.rows[t][j]
                r.append(acc)
            out.append(r)
        return IntervalMatrix(out)

    def __sub__(self, other: "IntervalMatrix") -> "IntervalMatrix":
        if self.shape != other.shape:
            raise ValueError("dimension mismatch")
        return IntervalMatrix([[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)])

    def mid_points(self) -> list[list]:
        """Midpoint matrix as gmpy2 mpc values."""
        return [[gmpy2.mpc(*e.mid()) for e in row] for row in self.rows]

    def is_real(self) -> bool:
        return all(e.is_real() for row in self.rows for e in row)

    def __repr__(self):
        return f"IntervalMatrix({[list(r) for r in self.rows]!r})"


def max_norm_bound(a: IntervalMatrix) -> mpfr:
    """max_i sum_j mag(A_ij): bounds the infinity-operator norm of every member."""
    _, up, _ = rounding_contexts()
    best = _ZERO
    for row in a.rows:
        s = _ZERO
        for e in row:
            s = up.add(s, e.mag())
        if s > best:
            best = s
    return best


def approx_inverse(points: Sequence[Sequence]) -> list[list]:
    """Gauss-Jordan inverse (partial pivoting) of a point matrix of mpc values.

    Accuracy only affects the effectiveness of the preconditioner, never the
    soundness of anything built on it.
    """
    n = len(points)
    _, _, near = rounding_contexts()
    with gmpy2.context(near):
        a = [[gmpy2.mpc(points[i][j]) for j in range(n)] + [gmpy2.mpc(1 if i == j else 0) for j in range(n)]
             for i in range(n)]
        for col in range(n):
            piv = max(range(col, n), key=lambda r: abs(a[r][col]))
            if a[piv][col] == 0:
                raise ZeroDivisionError("singular midpoint matrix")
            a[col], a[piv] = a[piv], a[col]
            p = a[col][col]
            a[col] = [x / p for x in a[col]]
            for r in range(n):
                if r != col and a[r][col] != 0:
                    f = a[r][col]
                    a[r] = [x - f * y for x, y in zip(a[r], a[col])]
        return [row[n:] for row in a]


def solve_enclosure(a: IntervalMatrix, b: IntervalBox, y: Sequence[Sequence] | None = None) -> IntervalBox:
    """Box containing A'^{-1} b' for every point A' in ``a`` and b' in ``b``.

    With an approximate inverse Y and kappa = ||I - Y A||_inf < 1, an approximate
    solution x~ and residual r = b - A x~ give A'^{-1}b' - x~ = A'^{-1} r' and
    |(A'^{-1} r')_i - (Y r')_i| <= kappa * ||Y r||_inf / (1 - kappa).
    """
    n, m = a.shape
    if n != m or n != len(b):
        raise ValueError("dimension mismatch")
    if y is None:
        try:
            y = approx_inverse(a.mid_points())
        except ZeroDivisionError as exc:
            raise NotDiagonallyDominated("midpoint matrix is singular") from exc
    ymat = IntervalMatrix.from_points(y)
    kappa = max_norm_bound(IntervalMatrix.identity(n) - ymat @ a)
    if not kappa < 1:
        raise NotDiagonallyDominated(f"||I - Y A|| = {kappa} >= 1")
    _, _, near = rounding_contexts()
    with gmpy2.context(near):
        bmid = [gmpy2.mpc(*e.mid()) for e in b]
        xt = [sum((y[i][j] * bmid[j] for j in range(n)), gmpy2.mpc(0)) for i in range(n)]
    real = a.is_real() and all(e.is_real() for e in b)
    if real:
        xt = [gmpy2.mpc(z.real, 0) for z in xt]
    xbox = _box_from_mpc(xt)
    resid = b - a.matvec(xbox)
    yr = ymat.matvec(resid)
    _, up, _ = rounding_contexts()
    one_minus = RealInterval._raw(mpfr(1), mpfr(1)) - RealInterval._raw(kappa, kappa)
    delta = up.div(up.mul(kappa, yr.norm_inf_upper()), one_minus.lo)
    if real:
        return IntervalBox(x + ComplexInterval(e.re.blow(delta)) for x, e in zip(xbox.entries, yr.entries))
    return IntervalBox(x + e.blow(delta) for x, e in zip(xbox.entries, yr.entries))


def _box_from_mpc(values) -> IntervalBox:
    return IntervalBox(ComplexInterval(RealInterval._raw(mpfr(z.real), mpfr(z.real)),
                                       RealInterval._raw(mpfr(z.imag), mpfr(z.imag))) for z in values)


def identity_minus(prod: IntervalMatrix) -> IntervalMatrix:
    return IntervalMatrix.identity(prod.shape[0]) - prod
