"""Rigorous evaluation of D-finite functions.

A D-finite function is given by a linear ODE

    p_r(t) g^(r)(t) + ... + p_1(t) g'(t) + p_0(t) g(t) = 0

with exact polynomial coefficients and interval initial values
g(b), ..., g^(r-1)(b) at an ordinary base point b.

Values away from b are obtained by analytic continuation: Taylor expansions
whose coefficients come from the ODE's recurrence, with a tail bound obtained
by geometric domination of the recurrence (see :class:`TaylorExpansion`).
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence, Union

import gmpy2
from gmpy2 import mpfr

from .exact import (QQi, parse_exact, poly, poly_eval, poly_shift, squarefree_part)
from .interval import (ComplexInterval, RealInterval, get_precision, rounding_contexts,
                       round_down, round_up, to_fraction)

_INF = mpfr("inf")


class DFiniteError(ArithmeticError):
    """Base class for oracle failures."""


class SingularExpansionPoint(DFiniteError):
    pass


class PathBlocked(DFiniteError):
    pass


class TailNotDominated(DFiniteError):
    pass


class BoxTooLarge(DFiniteError):
    pass


InitialValue = Union[ComplexInterval, Callable[[], ComplexInterval]]


class DFiniteFunction:
    """Solution family of a linear ODE with polynomial coefficients.

    ``coeffs[j]`` is the coefficient list (lowest power first) of p_j.
    ``initial_values[j]`` encloses g^(j)(base_point); an entry may also be a
    zero-argument callable producing the enclosure at the current working
    precision (used for constants like 2/sqrt(pi)).
    """

    max_step = Fraction(1)
    max_steps = 400

    def __init__(self, coeffs: Sequence[Sequence], initial_values: Sequence[InitialValue],
                 base_point=0, name: str | None = None):
        polys = [poly([parse_exact(c) for c in p]) for p in coeffs]
        if len(polys) < 2:
            raise ValueError("ODE order must be at least 1")
        if not polys[-1]:
            raise ValueError("leading coefficient p_r is the zero polynomial")
        self.coeffs = tuple(tuple(p) for p in polys)
        self.order = len(polys) - 1
        self.base_point = parse_exact(base_point)
        if poly_eval(self.coeffs[-1], self.base_point).is_zero():
            raise SingularExpansionPoint(f"p_r vanishes at the base point {self.base_point}")
        if len(initial_values) != self.order:
            raise ValueError(f"need {self.order} initial values, got {len(initial_values)}")
        self._initial = tuple(initial_values)
        self.name = name or "g"
        self._lead_sqfree = squarefree_part(self.coeffs[-1])
        self._lock = threading.Lock()
        self._states: dict = {}
        self._coeff_cache: dict = {}
        self._recurrences: dict = {}

    def __repr__(self):
        return f"DFiniteFunction({self.name!r}, order={self.order}, base={self.base_point})"

    def is_real(self) -> bool:
        return (all(c.is_real() for p in self.coeffs for c in p) and self.base_point.is_real())

    def initial_enclosures(self) -> tuple[ComplexInterval, ...]:
        key = ("init", get_precision())
        with self._lock:
            hit = self._states.get(key)
        if hit is not None:
            return hit
        vals = tuple(v() if callable(v) else v for v in self._initial)
        with self._lock:
            self._states[key] = vals
        return vals

    def lead_at(self, x) -> QQi:
        return poly_eval(self.coeffs[-1], x)


# ---------------------------------------------------------------------------
# recurrence

@dataclass(frozen=True)
class Recurrence:
    """Linear recurrence for Taylor coefficients at ``center``.

    For every n >= 0:  sum_{e} P_e(n) c_{n+e} = 0, with the leading term
    e = order having P_order(n) = q_{r,0} (n+1)(n+2)...(n+r), q_{r,0} = p_r(center) != 0.
    ``shifted`` holds the ODE coefficients re-expanded around ``center``.
    """

    center: QQi
    order: int
    shifted: tuple[tuple[QQi, ...], ...]

    @property
    def lead_constant(self) -> QQi:
        return self.shifted[self.order][0]

    @property
    def max_degree(self) -> int:
        return max(len(q) for q in self.shifted) - 1

    @property
    def span(self) -> int:
        """Number of earlier coefficients each new one depends on (order + max degree)."""
        return self.order + self.max_degree

    def offsets(self) -> range:
        return range(-self.max_degree, self.order + 1)

    def terms(self):
        """Yield (j, i, q_{j,i}) for every nonzero shifted coefficient."""
        for j, q in enumerate(self.shifted):
            for i, c in enumerate(q):
                if not c.is_zero():
                    yield j, i, c

    def coefficient(self, e: int, n: int) -> QQi:
        """P_e(n) = sum_{j - i = e} q_{j,i} (n-i+1)(n-i+2)...(n-i+j)."""
        total = QQi(0)
        for j, i, c in self.terms():
            if j - i != e:
                continue
            prod = 1
            for m in range(1, j + 1):
                prod *= n - i + m
            if prod:
                total = total + c * prod
        return total

    def coefficient_poly(self, e: int) -> list[QQi]:
        """P_e as a polynomial in n (lowest degree first)."""
        total: list[QQi] = []
        for j, i, c in self.terms():
            if j - i != e:
                continue
            p = [QQi(1)]
            for m in range(1, j + 1):
                # multiply by (n + (m - i))
                a = m - i
                new = [QQi(0)] * (len(p) + 1)
                for k, pk in enumerate(p):
                    new[k] = new[k] + pk * a
                    new[k + 1] = new[k + 1] + pk
                p = new
            p = [c * x for x in p]
            if len(total) < len(p):
                total = total + [QQi(0)] * (len(p) - len(total))
            for k, pk in enumerate(p):
                total[k] = total[k] + pk
        return poly(total)

    def theta_limit(self, rho_star) -> mpfr:
        """Limit of :meth:`theta_bound` as n0 -> infinity (only j = r terms survive)."""
        _, up, _ = rounding_contexts()
        r = self.order
        lead = self.lead_constant.enclosure().mig()
        rho = rho_star if isinstance(rho_star, type(_INF)) else round_up(rho_star)
        total = mpfr(0)
        for j, i, c in self.terms():
            if j == r and i > 0:
                total = up.add(total, up.mul(up.div(c.enclosure().mag(), lead), up.pow(rho, i)))
        return total

    def theta_bound(self, rho_star, n0: int) -> mpfr:
        """Upper bound, valid for all n >= n0, on sum_e |a_e(n)| rho*^(r-e),
        where c_{n+r} = sum_e a_e(n) c_{n+e}.

        Uses |(n-i+1)_j| / |(n+1)_r| <= 1 / prod_{m=j+1..r}(n+m) for n >= i,
        which is nonincreasing in n.
        """
        if n0 < self.max_degree:
            raise ValueError("n0 must be at least the maximal shifted degree")
        _, up, _ = rounding_contexts()
        r = self.order
        lead = self.lead_constant.enclosure().mig()
        if lead <= 0:
            raise SingularExpansionPoint("leading recurrence coefficient vanishes")
        rho = rho_star if isinstance(rho_star, type(_INF)) else round_up(rho_star)
        total = mpfr(0)
        for j, i, c in self.terms():
            if j == r and i == 0:
                continue
            term = up.div(c.enclosure().mag(), lead)
            term = up.mul(term, up.pow(rho, r - j + i))
            denom = 1
            for m in range(j + 1, r + 1):
                denom *= n0 + m
            if denom > 1:
                down, _, _ = rounding_contexts()
                term = up.div(term, down.div(denom, 1))
            total = up.add(total, term)
        return total


def derive_recurrence(g: DFiniteFunction, center=0) -> Recurrence:
    """Recurrence satisfied by the Taylor coefficients of any solution at ``center``."""
    center = parse_exact(center)
    key = center
    with g._lock:
        hit = g._recurrences.get(key)
    if hit is not None:
        return hit
    if g.lead_at(center).is_zero():
        raise SingularExpansionPoint(f"p_r vanishes at {center}")
    shifted = tuple(tuple(poly_shift(p, center)) for p in g.coeffs)
    rec = Recurrence(center=center, order=g.order, shifted=shifted)
    with g._lock:
        g._recurrences[key] = rec
    return rec


# ---------------------------------------------------------------------------
# radius oracle

def _abs_lower(z: QQi) -> mpfr:
    return z.enclosure().mig()


def _abs_upper(z: QQi) -> mpfr:
    return z.enclosure().mag()


def radius_lower_bound(g: DFiniteFunction, x) -> mpfr:
    """Positive lower bound on the distance from ``x`` to the roots of p_r.

    Every solution analytic near ``x`` extends to the open disk of this radius.
    Returns +inf when p_r is a nonzero constant.  Two rigorous bounds are
    combined on the square-free part p of p_r (degree s, leading coefficient a_s):

    * ``(|p(x)|/|a_s|) / (|x| + B)^(s-1)``, B = 1 + max|a_i/a_s| (Cauchy root bound);
    * the largest rho with sum_{i>=1} |q_i| rho^i < |q_0| where q(u) = p(x+u).
    """
    x = parse_exact(x)
    p = g._lead_sqfree
    if len(p) <= 1:
        return _INF
    q0 = poly_eval(p, x)
    if q0.is_zero():
        raise SingularExpansionPoint(f"p_r vanishes at {x}")
    down, up, _ = rounding_contexts()
    s = len(p) - 1
    a_s = p[-1]
    # coarse bound
    cauchy_b = mpfr(1)
    for a in p[:-1]:
        cauchy_b = max(cauchy_b, up.add(1, up.div(_abs_upper(a), _abs_lower(a_s))))
    base = up.add(_abs_upper(x), cauchy_b)
    coarse = down.div(down.div(_abs_lower(q0), _abs_upper(a_s)), up.pow(base, s - 1))
    # shifted Cauchy-type bound
    q = poly_shift(p, x)
    mags = [_abs_upper(c) for c in q]
    q0_low = _abs_lower(q[0])

    def excess(rho: mpfr) -> mpfr:
        tot = mpfr(0)
        for i in range(1, len(mags)):
            tot = up.add(tot, up.mul(mags[i], up.pow(rho, i)))
        return tot

    lo, hi = mpfr(0), coarse
    while excess(hi) < q0_low:
        lo, hi = hi, up.mul(hi, 2)
    for _ in range(60):
        midv = down.div(down.add(lo, hi), 2)
        if midv <= lo:
            break
        if excess(midv) < q0_low:
            lo = midv
        else:
            hi = midv
    return max(coarse, lo)


# ---------------------------------------------------------------------------
# Taylor coefficients and expansions

def _factorial_enclosure(k: int) -> RealInterval:
    return RealInterval.exact(math.factorial(k))


def _coefficients(g: DFiniteFunction, center: QQi, count: int) -> list[ComplexInterval]:
    """Enclosures of c_0..c_{count-1} at ``center`` (cached, extended on demand)."""
    key = (get_precision(), center)
    with g._lock:
        cached = g._coeff_cache.get(key)
    if cached is not None and len(cached) >= count:
        return cached[:count]
    rec = derive_recurrence(g, center)
    r = g.order
    if cached is None:
        derivs = continue_to(g, center)
        cached = [derivs[k] / _factorial_enclosure(k) for k in range(r)]
    coeffs = list(cached)
    lead_poly = rec.coefficient_poly(r)
    others = {e: rec.coefficient_poly(e) for e in rec.offsets() if e != r}
    others = {e: p for e, p in others.items() if p}
    while len(coeffs) < count:
        n = len(coeffs) - r
        lead = poly_eval(lead_poly, n)
        acc = ComplexInterval.zero()
        for e, pe in others.items():
            idx = n + e
            if idx < 0:
                continue
            val = poly_eval(pe, n)
            if val.is_zero():
                continue
            acc = acc + (-(val / lead)).enclosure() * coeffs[idx]
        coeffs.append(acc)
    with g._lock:
        prev = g._coeff_cache.get(key)
        if prev is None or len(prev) < len(coeffs):
            g._coeff_cache[key] = coeffs
    return coeffs[:count]


def _derivative_coeffs(coeffs: Sequence[ComplexInterval], j: int) -> list[ComplexInterval]:
    """Coefficients of the j-th derivative: c_k -> (k+1)...(k+j) c_{k+j}."""
    if j == 0:
        return list(coeffs)
    out = []
    for k in range(len(coeffs) - j):
        f = 1
        for m in range(1, j + 1):
            f *= k + m
        out.append(coeffs[k + j] * RealInterval.exact(f))
    return out


def _horner(coeffs: Sequence[ComplexInterval], u: ComplexInterval) -> ComplexInterval:
    acc = ComplexInterval.zero()
    for c in reversed(coeffs):
        acc = acc * u + c
    return acc


@dataclass
class TaylorExpansion:
    """Truncated Taylor series at ``center`` with a rigorous tail bound.

    ``coeffs`` holds c_0..c_M; the polynomial part uses c_0..c_N (N = ``degree``,
    N <= M).  For every k > M: |c_k| <= W / rho_star^k (geometric domination
    verified on the recurrence), hence for |u| = rho < rho_star

        |sum_{k>N} c_k u^k| <= sum_{N<k<=M} |c_k| rho^k + W q^(M+1) / (1 - q),  q = rho / rho_star,

    and similarly for derivatives (see :meth:`tail`).
    """

    center: QQi
    coeffs: list
    r_max: Fraction
    rho_star: mpfr
    W: mpfr
    theta: mpfr
    degree: int | None = None

    @property
    def N(self) -> int:
        return len(self.coeffs) - 1 if self.degree is None else self.degree

    @property
    def M(self) -> int:
        return len(self.coeffs) - 1

    def _geometric_tail(self, rho: mpfr, j: int) -> mpfr:
        down, up, _ = rounding_contexts()
        M = self.M
        if M + 1 <= j:
            raise TailNotDominated("expansion too short for this derivative order")
        q = up.div(rho, self.rho_star)
        growth = up.pow(up.add(1, up.div(1, M + 1)), j)
        qp = up.mul(q, growth)
        if not qp < 1:
            raise TailNotDominated(f"radius {rho} too close to rho* = {self.rho_star}")
        val = up.mul(self.W, up.pow(mpfr(M + 1), j))
        val = up.mul(val, up.pow(rho, M + 1 - j))
        val = up.div(val, down.pow(self.rho_star, M + 1))
        return up.div(val, down.sub(1, qp))

    def tail(self, rho, j: int = 0) -> mpfr:
        """Upper bound on |sum_{k>N} c_k k!/(k-j)! u^(k-j)| for |u| <= rho."""
        _, up, _ = rounding_contexts()
        rho = rho if isinstance(rho, type(_INF)) else round_up(rho)
        if rho == 0:
            return mpfr(0)
        total = self._geometric_tail(rho, j)
        for k in range(max(self.N + 1, j), self.M + 1):
            f = math.factorial(k) // math.factorial(k - j)
            term = up.mul(up.mul(self.coeffs[k].mag(), f), up.pow(rho, k - j))
            total = up.add(total, term)
        return total

    def evaluate(self, u: ComplexInterval, j: int = 0) -> ComplexInterval:
        """Enclosure of g^(j)(center + u) for all u in the rectangle."""
        rho = u.mag()
        if rho > round_up(self.r_max):
            raise BoxTooLarge(f"|u| <= {rho} exceeds expansion radius {self.r_max}")
        part = _horner(_derivative_coeffs(self.coeffs[:self.N + 1], j), u)
        tail = self.tail(rho, j)
        if self.is_real() and u.is_real():
            # real series at a real argument: the value is real
            return ComplexInterval(part.re.blow(tail), part.im)
        return part.blow(tail)

    def is_real(self) -> bool:
        return self.center.is_real() and all(c.is_real() for c in self.coeffs)

    def coefficient_majorant(self, rho, j: int = 0) -> mpfr:
        """sum_k |c_k^(j)| rho^k + tail: a bound on |g^(j)| over the closed disk."""
        _, up, _ = rounding_contexts()
        rho = rho if isinstance(rho, type(_INF)) else round_up(rho)
        total = mpfr(0)
        for k, c in enumerate(_derivative_coeffs(self.coeffs[:self.N + 1], j)):
            total = up.add(total, up.mul(c.mag(), up.pow(rho, k)))
        return up.add(total, self.tail(rho, j))


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, type(_INF)):
        return to_fraction(x)
    return Fraction(x)


def _dyadic_down(x: float, bits: int = 24) -> Fraction:
    if x <= 0:
        return Fraction(0)
    e = math.floor(math.log2(x)) - bits
    return Fraction(math.floor(x / 2.0 ** e)) * Fraction(2) ** e


def _rho_candidates(r_max: Fraction, R) -> list[Fraction]:
    rm = float(r_max)
    if gmpy2.is_finite(R):
        Rf = float(R)
        cands = [math.sqrt(max(rm, 1e-300) * Rf)]
        cands += [rm + (Rf - rm) * f for f in (0.05, 0.15, 0.3, 0.5, 0.7, 0.85, 0.95)]
    else:
        base = max(rm, 1e-12)
        cands = [base * f for f in (1.25, 1.5, 2, 3, 4, 6, 8, 16)] + [base + 1, base + 2, base + 4]
    out = []
    for c in cands:
        d = _dyadic_down(c)
        if d > r_max and (not gmpy2.is_finite(R) or d < to_fraction(R)) and d not in out:
            out.append(d)
    return sorted(out)


def _min_terms(rec: Recurrence) -> int:
    """Smallest M for which domination from index M can be checked (and j <= 2 tails exist)."""
    return max(rec.span - 1, rec.max_degree + rec.order - 1, 3)


def _build_expansion(g, center, rec, coeffs, r_max: Fraction, rho: Fraction,
                     degree: int | None = None) -> TaylorExpansion | None:
    N = len(coeffs) - 1
    r = rec.order
    s = rec.span
    n0 = N - r + 1
    if n0 < rec.max_degree or N + 1 < s:
        return None
    down, up, _ = rounding_contexts()
    rho_m = round_down(rho)
    theta = rec.theta_bound(rho_m, n0)
    if not theta <= 1:
        return None
    W = mpfr(0)
    for k in range(N - s + 1, N + 1):
        W = max(W, up.mul(coeffs[k].mag(), up.pow(rho_m, k)))
    return TaylorExpansion(center=center, coeffs=coeffs, r_max=r_max, rho_star=rho_m, W=W, theta=theta,
                           degree=degree)


def expand_at(g: DFiniteFunction, center, r_max, N: int | None = None,
              rel_tol: float | None = None, max_terms: int = 1024) -> TaylorExpansion:
    """Taylor expansion of ``g`` at ``center`` valid on the closed disk of radius ``r_max``.

    With ``N`` given the expansion has exactly N+1 terms; otherwise N doubles
    until the tail at ``r_max`` is below ``rel_tol`` (default 2^(-prec/2))
    times the scale of the function on the disk.
    """
    center = parse_exact(center)
    r_max = _as_fraction(r_max)
    if r_max < 0:
        raise ValueError("r_max must be nonnegative")
    R = radius_lower_bound(g, center)
    if gmpy2.is_finite(R) and not r_max < to_fraction(R):
        raise BoxTooLarge(f"radius {float(r_max):.6g} not below convergence bound {float(R):.6g}")
    rec = derive_recurrence(g, center)
    cands = _rho_candidates(r_max, R) if r_max > 0 else _rho_candidates(Fraction(1, 2**20), R)
    cands = [c for c in cands if rec.theta_limit(round_down(c)) < 1]
    if not cands:
        raise TailNotDominated(f"domination cannot hold for any rho* above r_max={float(r_max):.6g}")
    if rel_tol is None:
        rel_tol = 2.0 ** (-get_precision() / 2)

    def best_for(coeffs, degree=None):
        best = None
        best_tail = None
        for rho in cands:
            ex = _build_expansion(g, center, rec, coeffs, r_max, rho, degree)
            if ex is None:
                continue
            try:
                t = ex.tail(r_max)
            except TailNotDominated:
                continue
            if best_tail is None or t < best_tail:
                best, best_tail = ex, t
        return best, best_tail

    if N is not None:
        if N < 0:
            raise ValueError("N must be nonnegative")
        # the polynomial part has degree N; further coefficients only serve the
        # explicit part of the tail and the domination check
        m = max(N, _min_terms(rec))
        while True:
            best, _ = best_for(_coefficients(g, center, m + 1), N)
            if best is not None:
                return best
            if m >= max_terms:
                raise TailNotDominated(f"no verified domination at N={N}, r_max={float(r_max):.6g}")
            m = min(2 * m, max_terms)

    n = max(16, 2 * rec.span + 2)
    best = None
    while True:
        coeffs = _coefficients(g, center, n + 1)
        cand, tail = best_for(coeffs)
        if cand is not None:
            best = cand
            _, up, _ = rounding_contexts()
            scale = mpfr(1)
            rho_up = round_up(r_max)
            for k, c in enumerate(coeffs):
                scale = max(scale, up.mul(c.mag(), up.pow(rho_up, k)))
            if tail <= up.mul(scale, rel_tol):
                return best
        if n >= max_terms:
            if best is None:
                raise TailNotDominated(f"no verified domination up to N={n} at r_max={float(r_max):.6g}")
            return best
        n = min(2 * n, max_terms)


# ---------------------------------------------------------------------------
# analytic continuation

def _step_towards(z: QQi, target: QQi, h: Fraction) -> QQi:
    """Point on the segment z -> target at distance <= h from z."""
    d = target - z
    dist2 = d.abs2()
    if dist2 <= h * h:
        return target
    t = float(h) / math.sqrt(float(dist2)) * (1 - 1e-9)
    if t <= 0:
        raise PathBlocked("continuation step underflow")
    # offsets live on a dyadic grid so that waypoint denominators stay small
    unit = Fraction(2) ** (math.floor(math.log2(float(h))) - 40)

    def snapped(tt: float) -> QQi:
        off = d * _dyadic_down(tt, bits=50)
        return z + QQi(Fraction(math.floor(off.real / unit)) * unit, Fraction(math.floor(off.imag / unit)) * unit)

    nxt = snapped(t)
    while (nxt - z).abs2() > h * h:
        t *= 1023 / 1024
        nxt = snapped(t)
    if nxt == z:
        raise PathBlocked("continuation step underflow")
    return nxt


def _segment(g: DFiniteFunction, start: QQi, target: QQi, state: tuple) -> tuple:
    z = start
    steps = 0
    key_prec = get_precision()
    while z != target:
        steps += 1
        if steps > g.max_steps:
            raise PathBlocked(f"too many continuation steps towards {target}")
        R = radius_lower_bound(g, z)
        h = g.max_step if not gmpy2.is_finite(R) else min(g.max_step, _as_fraction(R) / 2)
        h = _dyadic_down(float(h), bits=30) if h > 0 else h
        if h <= 0 or h < Fraction(1, 2**60):
            raise PathBlocked(f"continuation stalled near a singularity at {z}")
        _seed_state(g, z, state)
        for _ in range(12):
            nxt = _step_towards(z, target, h)
            with g._lock:
                cached = g._states.get((key_prec, nxt))
            if cached is not None:
                break
            u = nxt - z
            try:
                ex = expand_at(g, z, _upper_abs_fraction(u), rel_tol=2.0 ** -key_prec)
            except TailNotDominated:
                # the domination check needs a margin below the radius bound
                h = h / 2
                continue
            uc = u.enclosure()
            cached = tuple(ex.evaluate(uc, j) for j in range(g.order))
            with g._lock:
                g._states[(key_prec, nxt)] = cached
            break
        else:
            raise PathBlocked(f"no verifiable continuation step from {z}")
        state = cached
        z = nxt
    return state


def _upper_abs_fraction(u: QQi) -> Fraction:
    """Exact rational >= |u|."""
    return to_fraction(u.enclosure().mag())


def _seed_state(g: DFiniteFunction, z: QQi, state: tuple) -> None:
    key = (get_precision(), z)
    with g._lock:
        if key not in g._states:
            g._states[key] = state


def continue_to(g: DFiniteFunction, target) -> tuple[ComplexInterval, ...]:
    """Enclosures of g(target), g'(target), ..., g^(r-1)(target)."""
    target = parse_exact(target)
    prec = get_precision()
    if target == g.base_point:
        return g.initial_enclosures()
    with g._lock:
        hit = g._states.get((prec, target))
    if hit is not None:
        return hit
    if g.lead_at(target).is_zero():
        raise PathBlocked(f"target {target} is a singular point of the ODE")
    init = g.initial_enclosures()
    base = g.base_point
    try:
        return _segment(g, base, target, init)
    except PathBlocked as first:
        for corner in (QQi(target.real, base.imag), QQi(base.real, target.imag)):
            if corner in (base, target) or g.lead_at(corner).is_zero():
                continue
            try:
                mid_state = _segment(g, base, corner, init)
                return _segment(g, corner, target, mid_state)
            except PathBlocked:
                continue
        raise first


# ---------------------------------------------------------------------------
# point and box oracles

def eval_point(g: DFiniteFunction, x) -> ComplexInterval:
    return eval_deriv_point(g, x, 0)


def eval_deriv_point(g: DFiniteFunction, x, j: int = 0) -> ComplexInterval:
    """Enclosure of g^(j)(x)."""
    x = parse_exact(x)
    if j < g.order:
        return continue_to(g, x)[j]
    coeffs = _coefficients(g, x, j + 1)
    return coeffs[j] * _factorial_enclosure(j)


def snap_center(z: ComplexInterval) -> QQi:
    """Short dyadic point near the midpoint of ``z`` (cheap exact arithmetic)."""
    rad = float(z.rad())
    mr, mi = z.mid()
    if rad == 0:
        return QQi(to_fraction(mr), to_fraction(mi))
    e = math.floor(math.log2(rad)) - 12
    unit = Fraction(2) ** e

    def snap(v):
        f = to_fraction(v)
        return Fraction(round(f / unit)) * unit

    return QQi(snap(mr), snap(mi))


def eval_box(g: DFiniteFunction, J: ComplexInterval, j: int = 0) -> ComplexInterval:
    """Enclosure of {g^(j)(t) : t in J}."""
    if J.re.is_point() and J.im.is_point():
        return eval_deriv_point(g, QQi(to_fraction(J.re.lo), to_fraction(J.im.lo)), j)
    center = snap_center(J)
    u = J - center.enclosure()
    rad = to_fraction(u.mag())
    R = radius_lower_bound(g, center)
    if gmpy2.is_finite(R) and not rad < to_fraction(R):
        raise BoxTooLarge(f"box of radius {float(rad):.6g} exceeds convergence bound {float(R):.6g}")
    ex = expand_at(g, center, rad)
    return ex.evaluate(u, j)


# ---------------------------------------------------------------------------
# maximum modulus on a circle

def _quadrant_params(count: int) -> list[Fraction]:
    """Nested rational parameters t in [0, 1]; t -> ((1-t^2) + 2ti)/(1+t^2) sweeps
    the first quadrant of the unit circle monotonically."""
    out = []
    for k in range(count + 1):
        if k == 0:
            out.append(Fraction(0))
        elif k == count:
            out.append(Fraction(1))
        else:
            out.append(_dyadic_down(math.tan(math.pi * k / (4 * count)), bits=30)
                       if k * 2 != count else _dyadic_down(math.tan(math.pi / 8), bits=30))
    return out


def _unit_point(t: Fraction, quadrant: int) -> QQi:
    d = 1 + t * t
    z = QQi((1 - t * t) / d, 2 * t / d)
    for _ in range(quadrant):
        z = z * QQi(0, 1)
    return z


def _arc_boxes(arcs: int) -> list[tuple[QQi, QQi]]:
    """Pairs of exact unit-circle points bounding ``arcs`` arcs (4 | arcs);
    each arc lies in the axis-aligned box spanned by its endpoints."""
    if arcs % 4:
        raise ValueError("number of arcs must be a multiple of 4")
    per = arcs // 4
    ts = _quadrant_params(per)
    out = []
    for q in range(4):
        pts = [_unit_point(t, q) for t in ts]
        out.extend(zip(pts[:-1], pts[1:]))
    return out


def disk_max_bound(g: DFiniteFunction, x, r, arcs: int = 64, j: int = 0,
                   expansion: TaylorExpansion | None = None) -> mpfr:
    """Upper bound on max |g^(j)| over the closed disk of radius ``r`` about ``x``.

    By the maximum-modulus principle only the circle matters; it is covered by
    ``arcs`` rectangles on which the truncated series is evaluated, then the
    tail bound is added.  The result is also capped by the coefficient
    majorant sum |c_k| r^k + tail, which is itself a valid bound.
    """
    x = parse_exact(x)
    r = _as_fraction(r)
    ex = expansion or expand_at(g, x, r, rel_tol=2.0 ** -40)
    if r == 0:
        return eval_deriv_point(g, x, j).mag()
    dcoeffs = _derivative_coeffs(ex.coeffs[:ex.N + 1], j)
    _, up, _ = rounding_contexts()
    tail = ex.tail(r, j)
    r_enc = RealInterval.exact(r)
    best = mpfr(0)
    for a, b in _arc_boxes(arcs):
        re = RealInterval.exact(min(a.real, b.real)).hull(RealInterval.exact(max(a.real, b.real)))
        im = RealInterval.exact(min(a.imag, b.imag)).hull(RealInterval.exact(max(a.imag, b.imag)))
        u = ComplexInterval(re * r_enc, im * r_enc)
        val = _horner(dcoeffs, u).mag()
        if val > best:
            best = val
    arc_bound = up.add(best, tail)
    return min(arc_bound, ex.coefficient_majorant(r, j))
