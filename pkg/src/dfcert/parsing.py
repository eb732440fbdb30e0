"""Parsers for polynomial expressions, exact constants and system files."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Callable, Sequence

from .dfinite import DFiniteFunction, SingularExpansionPoint
from .exact import QQi, parse_exact
from .interval import ComplexInterval, RealInterval, get_precision, real_pi
from .system import (IngredientRow, IngredientSystem, MultivariatePolynomial, SystemError_)

SCHEMA_VERSION = 1


class ParseError(ValueError):
    """Syntax or validation error with a 1-based line/column position."""

    def __init__(self, message: str, line: int = 1, column: int = 1, where: str = ""):
        self.message = message
        self.line = line
        self.column = column
        self.where = where
        prefix = f"{where}: " if where else ""
        super().__init__(f"{prefix}line {line}, column {column}: {message}")


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\*\*|[-+*/^(),\[\]])
""", re.VERBOSE)


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def _position(src: str, pos: int) -> tuple[int, int]:
    line = src.count("\n", 0, pos) + 1
    col = pos - (src.rfind("\n", 0, pos) + 1) + 1
    return line, col


def _tokenize(src: str, where: str) -> list[_Tok]:
    out = []
    pos = 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if not m:
            raise ParseError(f"unexpected character {src[pos]!r}", *_position(src, pos), where)
        kind = m.lastgroup
        if kind != "ws":
            text = m.group()
            out.append(_Tok("op" if kind == "op" else kind, "^" if text == "**" else text, pos))
        pos = m.end()
    out.append(_Tok("end", "", len(src)))
    return out


class _Parser:
    """Recursive-descent parser over a token list; subclasses build values."""

    def __init__(self, src: str, where: str = ""):
        self.src = src
        self.where = where
        self.toks = _tokenize(src, where)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, message: str, tok: _Tok | None = None) -> ParseError:
        tok = tok or self.peek()
        return ParseError(message, *_position(self.src, tok.pos), self.where)

    def expect(self, text: str) -> _Tok:
        t = self.peek()
        if t.text != text or t.kind == "end":
            raise self.error(f"expected {text!r}, found {t.text or 'end of input'!r}")
        return self.take()

    def parse(self):
        if self.peek().kind == "end":
            raise self.error("empty expression")
        value = self.expr()
        if self.peek().kind != "end":
            raise self.error(f"unexpected {self.peek().text!r}")
        return value

    def expr(self):
        value = self.term()
        while self.peek().text in ("+", "-") and self.peek().kind == "op":
            op = self.take().text
            rhs = self.term()
            value = self.add(value, rhs) if op == "+" else self.sub(value, rhs)
        return value

    def term(self):
        value = self.unary()
        while self.peek().text in ("*", "/") and self.peek().kind == "op":
            tok = self.take()
            rhs = self.unary()
            value = self.mul(value, rhs) if tok.text == "*" else self.div(value, rhs, tok)
        return value

    def unary(self):
        t = self.peek()
        if t.kind == "op" and t.text in ("+", "-"):
            self.take()
            v = self.unary()
            return self.neg(v) if t.text == "-" else v
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek().text == "^":
            self.take()
            sign = 1
            if self.peek().text == "-":
                self.take()
                sign = -1
            t = self.take()
            if t.kind != "num" or not t.text.isdigit():
                raise self.error("exponent must be a nonnegative integer literal", t)
            return self.pow(base, sign * int(t.text), t)
        return base

    def atom(self):
        t = self.take()
        if t.kind == "num":
            return self.number(Fraction(t.text))
        if t.kind == "name":
            return self.name(t)
        if t.text == "(":
            v = self.expr()
            self.expect(")")
            return v
        if t.text == "[":
            return self.bracket(t)
        raise self.error(f"unexpected {t.text or 'end of input'!r}", t)

    def bracket(self, tok):
        raise self.error("interval literals are not allowed here", tok)


class _PolyParser(_Parser):
    def __init__(self, src: str, variables: Sequence[str], where: str = ""):
        super().__init__(src, where)
        self.vars = {v: k for k, v in enumerate(variables)}
        self.nv = len(variables)

    def number(self, q):
        return MultivariatePolynomial.constant(self.nv, q)

    def name(self, tok):
        if tok.text in self.vars:
            return MultivariatePolynomial.variable(self.nv, self.vars[tok.text])
        if tok.text == "i":
            return MultivariatePolynomial.constant(self.nv, QQi(0, 1))
        raise self.error(f"unknown variable {tok.text!r}", tok)

    add = staticmethod(lambda a, b: a + b)
    sub = staticmethod(lambda a, b: a - b)
    mul = staticmethod(lambda a, b: a * b)
    neg = staticmethod(lambda a: -a)

    def div(self, a, b, tok):
        if any(any(nu) for nu in b.terms) or not b.terms:
            raise self.error("division is only allowed by a nonzero constant", tok)
        c = next(iter(b.terms.values()))
        return a.scale(QQi(1) / c)

    def pow(self, a, k, tok):
        if k < 0:
            raise self.error("negative exponents are not polynomial", tok)
        return a ** k


def parse_polynomial(src: str, variables: Sequence[str], where: str = "") -> MultivariatePolynomial:
    """Parse +, -, *, /constant, ^int over variable names and exact literals."""
    return _PolyParser(src, variables, where).parse()


# constants ----------------------------------------------------------------

def _real(z: ComplexInterval, what: str, parser, tok) -> RealInterval:
    if not z.is_real():
        raise parser.error(f"{what} needs a real argument", tok)
    return z.re


class _ConstParser(_Parser):
    """Builds a closure that evaluates the constant at the current precision."""

    functions = ("sqrt", "exp", "log")

    def number(self, q):
        return lambda: ComplexInterval(RealInterval.exact(q))

    def name(self, tok):
        if tok.text == "pi":
            return lambda: ComplexInterval(real_pi())
        if tok.text == "e":
            return lambda: ComplexInterval(RealInterval.exact(1).exp())
        if tok.text == "i":
            return lambda: ComplexInterval(RealInterval.exact(0), RealInterval.exact(1))
        if tok.text in self.functions:
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            fname = tok.text

            def call():
                x = arg()
                if not x.is_real():
                    raise ParseError(f"{fname} needs a real argument", *_position(self.src, tok.pos),
                                     self.where)
                return ComplexInterval(getattr(x.re, fname)())
            return call
        raise self.error(f"unknown constant {tok.text!r}", tok)

    add = staticmethod(lambda a, b: (lambda: a() + b()))
    sub = staticmethod(lambda a, b: (lambda: a() - b()))
    mul = staticmethod(lambda a, b: (lambda: a() * b()))
    neg = staticmethod(lambda a: (lambda: -a()))

    def div(self, a, b, tok):
        return lambda: a() / b()

    def pow(self, a, k, tok):
        if k >= 0:
            return lambda: a() ** k
        return lambda: ComplexInterval.one() / (a() ** (-k))

    def bracket(self, tok):
        lo = self.expr()
        self.expect(",")
        hi = self.expr()
        self.expect("]")

        def hull():
            a, b = lo(), hi()
            if not (a.is_real() and b.is_real()):
                raise ParseError("interval endpoints must be real", *_position(self.src, tok.pos), self.where)
            if a.re.lo > b.re.hi:
                raise ParseError("interval lower endpoint exceeds upper endpoint",
                                 *_position(self.src, tok.pos), self.where)
            return ComplexInterval(a.re.hull(b.re))
        return hull


def parse_constant(src: str, where: str = "") -> Callable[[], ComplexInterval]:
    """Parse a constant expression (rationals, pi, e, i, sqrt/exp/log, field
    operations, interval literals ``[lo, hi]``) into a zero-argument function
    that returns an enclosure at the current working precision."""
    return _ConstParser(src, where).parse()


def evaluate_constant(src: str) -> ComplexInterval:
    return parse_constant(src)()


class _CachedConstant:
    """Constant closure memoized per working precision."""

    def __init__(self, fn, text):
        self.fn = fn
        self.text = text
        self._cache = {}

    def __call__(self):
        p = get_precision()
        if p not in self._cache:
            self._cache[p] = self.fn()
        return self._cache[p]

    def __repr__(self):
        return f"<constant {self.text}>"


# system files ---------------------------------------------------------------

def _exact(s, where) -> QQi:
    try:
        return parse_exact(str(s))
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"not an exact number: {s!r}", 1, 1, where) from exc


def build_function(spec: dict, where: str) -> DFiniteFunction:
    ode = spec.get("ode")
    if not isinstance(ode, dict):
        raise ParseError("missing 'ode' object", 1, 1, where)
    coeffs = ode.get("coefficients", ode.get("coeff_polys"))
    if not isinstance(coeffs, list) or len(coeffs) < 2:
        raise ParseError("'ode.coefficients' must list p_0..p_r", 1, 1, where)
    order = ode.get("order", len(coeffs) - 1)
    if order != len(coeffs) - 1:
        raise ParseError(f"order {order} does not match {len(coeffs)} coefficient polynomials", 1, 1, where)
    polys = [[_exact(c, f"{where}.ode.coefficients[{j}]") for c in p] for j, p in enumerate(coeffs)]
    base = _exact(spec.get("base_point", "0"), f"{where}.base_point")
    inits = spec.get("initial_values")
    if not isinstance(inits, list):
        raise ParseError("'initial_values' must be a list of constant strings", 1, 1, where)
    values = [_CachedConstant(parse_constant(str(v), f"{where}.initial_values[{k}]"), str(v))
              for k, v in enumerate(inits)]
    try:
        return DFiniteFunction(polys, values, base, spec.get("name", where))
    except SingularExpansionPoint:
        raise
    except ValueError as exc:
        raise ParseError(str(exc), 1, 1, where) from exc


@dataclass
class SystemFile:
    name: str
    variables: list
    polynomials: list
    ingredients: list
    mode: str
    system: IngredientSystem
    points: dict
    data: dict
    text: str

    def point(self, key: str = "default") -> list:
        if key not in self.points:
            raise ParseError(f"no point named {key!r} in the system file", 1, 1, "points")
        return self.points[key]


def load_system_data(data: dict, text: str = "") -> SystemFile:
    if not isinstance(data, dict):
        raise ParseError("system file must be a JSON object")
    version = data.get("version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ParseError(f"unsupported schema version {version}", 1, 1, "version")
    variables = data.get("variables")
    if not isinstance(variables, list) or not variables or len(set(variables)) != len(variables):
        raise ParseError("'variables' must be a list of distinct names", 1, 1, "variables")
    for v in variables:
        if not isinstance(v, str) or not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", v) or v in ("i", "pi", "e"):
            raise ParseError(f"invalid variable name {v!r}", 1, 1, "variables")
    index = {v: k for k, v in enumerate(variables)}
    polys = [parse_polynomial(str(p), variables, f"polynomials[{k}]")
             for k, p in enumerate(data.get("polynomials", []))]
    functions = {}
    for fname, fspec in (data.get("functions") or {}).items():
        fspec = dict(fspec)
        fspec.setdefault("name", fname)
        functions[fname] = build_function(fspec, f"functions.{fname}")
    rows = []
    for k, ing in enumerate(data.get("ingredients", [])):
        where = f"ingredients[{k}]"
        for key in ("output", "input"):
            if ing.get(key) not in index:
                raise ParseError(f"{key} {ing.get(key)!r} is not a declared variable", 1, 1, where)
        if "function" in ing:
            if ing["function"] not in functions:
                raise ParseError(f"unknown function {ing['function']!r}", 1, 1, where)
            func = functions[ing["function"]]
        else:
            func = build_function(ing, where)
        rows.append(IngredientRow(index[ing["output"]], func, index[ing["input"]]))
    mode = data.get("mode", "complex")
    try:
        system = IngredientSystem(polys, rows, mode, tuple(variables))
    except SystemError_ as exc:
        raise ParseError(str(exc), 1, 1, "system") from exc
    points = {}
    for key, pt in (data.get("points") or {}).items():
        if not isinstance(pt, list) or len(pt) != len(variables):
            raise ParseError(f"point {key!r} must have {len(variables)} coordinates", 1, 1, f"points.{key}")
        points[key] = [str(v) for v in pt]
    return SystemFile(data.get("name", "system"), variables, data.get("polynomials", []),
                      data.get("ingredients", []), mode, system, points, data, text)


def load_system_text(text: str) -> SystemFile:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno, "json") from exc
    return load_system_data(data, text)


BUNDLED = {
    "erf": "erf_system.json",
    "bessel-erf": "bessel_erf_system.json",
    "exponential": "exponential_system.json",
    "elliptic": "elliptic_system.json",
}


def bundled_text(name: str) -> str:
    return resources.files("dfcert").joinpath("data", BUNDLED[name]).read_text()


def load_system(source: str) -> SystemFile:
    """Load a system from a file path or a bundled name (erf, bessel-erf, exponential, elliptic)."""
    path = Path(source)
    if path.exists():
        return load_system_text(path.read_text())
    if source in BUNDLED:
        return load_system_text(bundled_text(source))
    raise FileNotFoundError(f"no such system file or bundled system: {source}")


def parse_point(text: str, nvars: int | None = None) -> list[str]:
    """Comma-separated exact coordinates (decimals, rationals, a+bi)."""
    parts = [p.strip() for p in text.split(",") if p.strip()]
    for k, p in enumerate(parts):
        try:
            parse_exact(p)
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"bad coordinate {p!r}", 1, 1, f"point[{k}]") from exc
    if nvars is not None and len(parts) != nvars:
        raise ParseError(f"point has {len(parts)} coordinates, expected {nvars}", 1, 1, "point")
    return parts
