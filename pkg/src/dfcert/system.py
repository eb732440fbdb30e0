"""Square systems made of polynomial rows and D-finite ingredient rows.

Variables x_0..x_{n+m-1}.  Rows 0..n-1 are polynomials p_i(x); row n+j is
x_out - g_j(x_in) for an ingredient g_j.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .dfinite import DFiniteError, DFiniteFunction, eval_box, eval_deriv_point
from .exact import QQi, parse_exact
from .interval import (ComplexInterval, IntervalBox, IntervalMatrix, RealInterval,
                       to_fraction)


class SystemError_(ValueError):
    """Malformed system (non-square, bad indices, non-real data in real mode)."""


class OracleError(ArithmeticError):
    """A D-finite oracle failed while evaluating a given row."""

    def __init__(self, row: int, cause: Exception):
        super().__init__(f"row {row}: {type(cause).__name__}: {cause}")
        self.row = row
        self.cause = cause


class MultivariatePolynomial:
    """Sparse polynomial: exponent tuple -> exact Gaussian-rational coefficient."""

    __slots__ = ("nvars", "terms", "_enc")

    def __init__(self, nvars: int, terms: Mapping[Sequence[int], object] | Iterable = ()):
        self.nvars = nvars
        items = terms.items() if isinstance(terms, Mapping) else terms
        clean: dict[tuple[int, ...], QQi] = {}
        for nu, c in items:
            nu = tuple(int(e) for e in nu)
            if len(nu) != nvars or any(e < 0 for e in nu):
                raise SystemError_(f"bad exponent vector {nu} for {nvars} variables")
            c = parse_exact(c)
            total = clean.get(nu, QQi(0)) + c
            if total.is_zero():
                clean.pop(nu, None)
            else:
                clean[nu] = total
        self.terms = clean
        self._enc = None

    @classmethod
    def variable(cls, nvars: int, k: int) -> "MultivariatePolynomial":
        nu = [0] * nvars
        nu[k] = 1
        return cls(nvars, {tuple(nu): 1})

    @classmethod
    def constant(cls, nvars: int, c) -> "MultivariatePolynomial":
        return cls(nvars, {(0,) * nvars: c})

    def degree(self) -> int:
        return max((sum(nu) for nu in self.terms), default=0)

    def is_real(self) -> bool:
        return all(c.is_real() for c in self.terms.values())

    def __add__(self, other: "MultivariatePolynomial") -> "MultivariatePolynomial":
        return MultivariatePolynomial(self.nvars, list(self.terms.items()) + list(other.terms.items()))

    def __neg__(self):
        return MultivariatePolynomial(self.nvars, {nu: -c for nu, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other: "MultivariatePolynomial") -> "MultivariatePolynomial":
        out = []
        for a, ca in self.terms.items():
            for b, cb in other.terms.items():
                out.append((tuple(x + y for x, y in zip(a, b)), ca * cb))
        return MultivariatePolynomial(self.nvars, out)

    def scale(self, c) -> "MultivariatePolynomial":
        c = parse_exact(c)
        return MultivariatePolynomial(self.nvars, {nu: a * c for nu, a in self.terms.items()})

    def __pow__(self, k: int):
        out = MultivariatePolynomial.constant(self.nvars, 1)
        for _ in range(k):
            out = out * self
        return out

    def partial(self, k: int) -> "MultivariatePolynomial":
        out = {}
        for nu, c in self.terms.items():
            if nu[k]:
                mu = list(nu)
                mu[k] -= 1
                out[tuple(mu)] = c * nu[k]
        return MultivariatePolynomial(self.nvars, out)

    def evaluate_exact(self, point: Sequence) -> QQi:
        pt = [parse_exact(v) for v in point]
        total = QQi(0)
        for nu, c in self.terms.items():
            t = c
            for v, e in zip(pt, nu):
                if e:
                    t = t * v ** e
            total = total + t
        return total

    def __eq__(self, other):
        return isinstance(other, MultivariatePolynomial) and self.nvars == other.nvars \
            and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __repr__(self):
        return f"MultivariatePolynomial({self.nvars}, {self.terms!r})"


def _horner_eval(terms: list, var: int, values: Sequence[ComplexInterval]) -> ComplexInterval:
    """Recursive Horner: group by the exponent of ``var`` and recurse on the rest."""
    if not terms:
        return ComplexInterval.zero()
    if var == len(values):
        acc = ComplexInterval.zero()
        for _, c in terms:
            acc = acc + c.enclosure()
        return acc
    groups: dict[int, list] = {}
    for nu, c in terms:
        groups.setdefault(nu[var], []).append((nu, c))
    top = max(groups)
    x = values[var]
    acc = ComplexInterval.zero()
    for e in range(top, -1, -1):
        inner = _horner_eval(groups.get(e, []), var + 1, values)
        acc = acc * x + inner if e != top else inner
    return acc


def eval_poly_box(p: MultivariatePolynomial, I: IntervalBox | Sequence, centered: bool = False) -> ComplexInterval:
    """Enclosure of p over the box ``I`` (recursive Horner).

    With ``centered`` the mean-value form p(m) + sum_k dp/dx_k(I)(I_k - m_k) is
    also computed and intersected with the Horner enclosure.
    """
    values = list(_as_box(I))
    if len(values) != p.nvars:
        raise SystemError_(f"box has {len(values)} coordinates, polynomial has {p.nvars} variables")
    plain = _horner_eval(list(p.terms.items()), 0, values)
    if not centered:
        return plain
    mids = [v.mid_interval() for v in values]
    form = _horner_eval(list(p.terms.items()), 0, mids)
    for k in range(p.nvars):
        dk = p.partial(k)
        if dk.terms:
            form = form + _horner_eval(list(dk.terms.items()), 0, values) * (values[k] - mids[k])
    meet = plain.intersect(form)
    return meet if meet is not None else plain


def _as_box(x) -> IntervalBox:
    if isinstance(x, IntervalBox):
        return x
    return IntervalBox([v if isinstance(v, ComplexInterval) else parse_exact(v).enclosure() for v in x])


@dataclass(frozen=True)
class IngredientRow:
    """Equation x[output_index] - func(x[input_index]) = 0."""

    output_index: int
    func: DFiniteFunction
    input_index: int


@dataclass(frozen=True)
class IngredientSystem:
    polys: tuple
    ingredients: tuple
    mode: str = "complex"
    names: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "polys", tuple(self.polys))
        object.__setattr__(self, "ingredients", tuple(self.ingredients))
        if self.mode not in ("real", "complex"):
            raise SystemError_(f"mode must be 'real' or 'complex', not {self.mode!r}")
        n, m = len(self.polys), len(self.ingredients)
        nv = n + m
        if nv == 0:
            raise SystemError_("empty system")
        for i, p in enumerate(self.polys):
            if p.nvars != nv:
                raise SystemError_(f"polynomial row {i} has {p.nvars} variables; system is {nv}x{nv}")
        outs = set()
        for j, row in enumerate(self.ingredients):
            if not n <= row.output_index < nv:
                raise SystemError_(f"ingredient {j}: output index {row.output_index} outside [{n}, {nv})")
            if not 0 <= row.input_index < nv:
                raise SystemError_(f"ingredient {j}: input index {row.input_index} outside [0, {nv})")
            if row.input_index == row.output_index:
                raise SystemError_(f"ingredient {j}: input and output index coincide")
            if row.output_index in outs:
                raise SystemError_(f"ingredient {j}: output index {row.output_index} used twice")
            outs.add(row.output_index)
        if self.mode == "real":
            for i, p in enumerate(self.polys):
                if not p.is_real():
                    raise SystemError_(f"real mode: polynomial row {i} has non-real coefficients")
            for j, row in enumerate(self.ingredients):
                if not row.func.is_real():
                    raise SystemError_(f"real mode: ingredient {j} ODE is not real")
        if self.names and len(self.names) != nv:
            raise SystemError_("variable names do not match the variable count")

    @property
    def n(self) -> int:
        return len(self.polys)

    @property
    def m(self) -> int:
        return len(self.ingredients)

    @property
    def size(self) -> int:
        return self.n + self.m

    @property
    def complex_mode(self) -> bool:
        return self.mode == "complex"

    def variable_names(self) -> tuple[str, ...]:
        return self.names or tuple(f"x{k + 1}" for k in range(self.size))

    def check_point(self, point: Sequence) -> list[QQi]:
        pt = [parse_exact(v) for v in point]
        if len(pt) != self.size:
            raise SystemError_(f"point has {len(pt)} coordinates, system has {self.size} variables")
        if self.mode == "real" and not all(v.is_real() for v in pt):
            raise SystemError_("real mode: candidate point has non-real coordinates")
        return pt

    def degrees(self) -> list[int]:
        return [p.degree() for p in self.polys]


def _ingredient_value(row: IngredientRow, x: ComplexInterval, j: int, r: int) -> ComplexInterval:
    try:
        if x.re.is_point() and x.im.is_point():
            return eval_deriv_point(row.func, QQi(to_fraction(x.re.lo), to_fraction(x.im.lo)), j)
        return eval_box(row.func, x, j)
    except DFiniteError as exc:
        raise OracleError(r, exc) from exc


def _point_box(sys: IngredientSystem, x) -> IntervalBox:
    if isinstance(x, IntervalBox):
        if len(x) != sys.size:
            raise SystemError_(f"box has {len(x)} coordinates, system has {sys.size} variables")
        return x
    return IntervalBox([v.enclosure() for v in sys.check_point(x)])


def eval_F(sys: IngredientSystem, x, centered: bool = False) -> IntervalBox:
    """Enclosure of F over a point or box."""
    box = _point_box(sys, x)
    vals = list(box)
    out = [eval_poly_box(p, box, centered) for p in sys.polys]
    for j, row in enumerate(sys.ingredients):
        gval = _ingredient_value(row, vals[row.input_index], 0, sys.n + j)
        out.append(vals[row.output_index] - gval)
    return IntervalBox(out)


def eval_jacobian(sys: IngredientSystem, x) -> IntervalMatrix:
    """Enclosure of F' over a point or box."""
    box = _point_box(sys, x)
    vals = list(box)
    nv = sys.size
    rows = []
    for p in sys.polys:
        rows.append([eval_poly_box(p.partial(k), box) if p.partial(k).terms else ComplexInterval.zero()
                     for k in range(nv)])
    for j, row in enumerate(sys.ingredients):
        r = [ComplexInterval.zero() for _ in range(nv)]
        r[row.output_index] = ComplexInterval.one()
        d = _ingredient_value(row, vals[row.input_index], 1, sys.n + j)
        r[row.input_index] = r[row.input_index] - d
        rows.append(r)
    return IntervalMatrix(rows)
