"""Alpha-theory point test for ingredient systems.

beta = ||F'(x)^{-1} F(x)||, and gamma is bounded by

    mu * (d^{3/2} / (2 ||(1,x)||) + sum_i C_i),   mu = max(1, ||F'(x)^{-1} Delta_F||),

where C_i = (1/r_i) max{1, min{M_i/r_i, M_i'/2, M_i'' r_i/2}} comes from Cauchy
estimates of the ingredient g_i on a disk of radius r_i about its argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import gmpy2
from gmpy2 import mpfr

from .dfinite import (DFiniteError, DFiniteFunction, disk_max_bound, expand_at,
                      radius_lower_bound)
from .exact import QQi, parse_exact
from .interval import (ComplexInterval, IntervalBox, IntervalMatrix, NotDiagonallyDominated,
                       RealInterval, approx_inverse, rounding_contexts, solve_enclosure, to_fraction)
from .system import IngredientSystem, MultivariatePolynomial, OracleError, eval_F, eval_jacobian

_INF = mpfr("inf")
UNIQUENESS_ALPHA = Fraction(3, 100)


class RadiusExceeded(DFiniteError):
    """Requested Cauchy radius is not below the convergence radius bound."""


def alpha_threshold() -> RealInterval:
    """Enclosure of (13 - 3 sqrt(17)) / 4 ~ 0.157671."""
    return (RealInterval.exact(13) - RealInterval.exact(3) * RealInterval.exact(17).sqrt()) / RealInterval.exact(4)


# ---------------------------------------------------------------------------
# norms and scaling matrices

def _bw_norm_squared(p: MultivariatePolynomial) -> Fraction:
    d = p.degree()
    total = Fraction(0)
    for nu, c in p.terms.items():
        w = math.factorial(d - sum(nu))
        for e in nu:
            w *= math.factorial(e)
        total += w * c.abs2()
    return total / math.factorial(d)


def bw_norm_enclosure(p: MultivariatePolynomial) -> RealInterval:
    return RealInterval.exact(_bw_norm_squared(p)).sqrt()


def bw_norm(p: MultivariatePolynomial) -> mpfr:
    """Upper bound on the Bombieri-Weyl norm of ``p``."""
    return bw_norm_enclosure(p).hi


def bw_norm_system_enclosure(polys: Sequence[MultivariatePolynomial]) -> RealInterval:
    return RealInterval.exact(sum((_bw_norm_squared(p) for p in polys), Fraction(0))).sqrt()


def bw_norm_system(polys: Sequence[MultivariatePolynomial]) -> mpfr:
    return bw_norm_system_enclosure(polys).hi


def point_norm(x: Sequence) -> RealInterval:
    """Enclosure of ||(1, x)|| = sqrt(1 + sum |x_i|^2)."""
    pts = [parse_exact(v) for v in x]
    return RealInterval.exact(1 + sum((v.abs2() for v in pts), Fraction(0))).sqrt()


def delta_P(polys: Sequence[MultivariatePolynomial], x: Sequence) -> list[RealInterval]:
    """Diagonal entries sqrt(d_i) ||(1,x)||^(d_i - 1)."""
    nx = point_norm(x)
    out = []
    for p in polys:
        d = p.degree()
        if d == 0:
            # constant rows carry no derivative information; keep a harmless unit scale
            out.append(RealInterval.exact(1))
            continue
        out.append(RealInterval.exact(d).sqrt() * nx ** (d - 1))
    return out


def delta_F(sys: IngredientSystem, x: Sequence) -> list[RealInterval]:
    """Diagonal of diag(Delta_P ||P||, I_m)."""
    x = sys.check_point(x)
    norm_p = bw_norm_system_enclosure(sys.polys) if sys.polys else RealInterval.exact(1)
    return [e * norm_p for e in delta_P(sys.polys, x)] + [RealInterval.exact(1)] * sys.m


# ---------------------------------------------------------------------------
# beta and mu

def _point_data(sys: IngredientSystem, x):
    jac = eval_jacobian(sys, x)
    try:
        y = approx_inverse(jac.mid_points())
    except ZeroDivisionError as exc:
        raise NotDiagonallyDominated("singular Jacobian at the point") from exc
    return jac, y


def beta_upper(sys: IngredientSystem, x: Sequence, _data=None) -> mpfr:
    """Upper bound on ||F'(x)^{-1} F(x)||_2; +inf if the solve cannot be verified."""
    x = sys.check_point(x)
    try:
        jac, y = _data or _point_data(sys, x)
        step = solve_enclosure(jac, eval_F(sys, x), y)
    except NotDiagonallyDominated:
        return _INF
    return step.norm2_upper()


def mu_upper(sys: IngredientSystem, x: Sequence, _data=None) -> mpfr:
    """max(1, Frobenius-norm bound of F'(x)^{-1} Delta_F); bounds the operator norm."""
    x = sys.check_point(x)
    try:
        jac, y = _data or _point_data(sys, x)
        diag = delta_F(sys, x)
        _, up, _ = rounding_contexts()
        total = mpfr(0)
        nv = sys.size
        for k in range(nv):
            e_k = IntervalBox([ComplexInterval.one() if i == k else ComplexInterval.zero() for i in range(nv)])
            col = solve_enclosure(jac, e_k, y).norm2_upper()
            scaled = up.mul(col, diag[k].hi)
            total = up.add(total, up.mul(scaled, scaled))
    except NotDiagonallyDominated:
        return _INF
    return max(mpfr(1), up.sqrt(total))


# ---------------------------------------------------------------------------
# ingredient constants

@dataclass
class IngredientBound:
    r: Fraction
    R: mpfr
    M: mpfr
    M1: mpfr
    M2: mpfr
    C: mpfr

    def components(self) -> tuple[mpfr, mpfr, mpfr]:
        """The three candidate bounds (1/r) max{1, .} built from M/r, M'/2, M''r/2 alone."""
        down, up, _ = rounding_contexts()
        r_lo, r_hi = _fraction_bounds(self.r)
        parts = (up.div(self.M, r_lo), up.div(self.M1, 2), up.div(up.mul(self.M2, r_hi), 2))
        return tuple(up.div(max(mpfr(1), p), r_lo) for p in parts)


def _fraction_bounds(r: Fraction) -> tuple[mpfr, mpfr]:
    e = RealInterval.exact(r)
    return e.lo, e.hi


def convergence_radius(g: DFiniteFunction, x) -> mpfr:
    """Radius bound used for C_i.

    g, g' and g'' are all computed from the expansion of g, so they share its
    convergence disk and one radius bound serves all three.
    """
    return radius_lower_bound(g, x)


def ingredient_C(g: DFiniteFunction, x_in, r) -> IngredientBound:
    """C = (1/r) max{1, min{M/r, M'/2, M'' r/2}} with M^(j) >= max |g^(j)| on |t - x_in| <= r."""
    x_in = parse_exact(x_in)
    r = Fraction(r) if not isinstance(r, Fraction) else r
    if r <= 0:
        raise ValueError("radius must be positive")
    R = convergence_radius(g, x_in)
    if gmpy2.is_finite(R) and not r < to_fraction(R):
        raise RadiusExceeded(f"r = {float(r):.6g} is not below the radius bound {float(R):.6g}")
    ex = expand_at(g, x_in, r, rel_tol=2.0 ** -40)
    Ms = [disk_max_bound(g, x_in, r, j=j, expansion=ex) for j in range(3)]
    down, up, _ = rounding_contexts()
    r_lo, r_hi = _fraction_bounds(r)
    inner = min(up.div(Ms[0], r_lo), up.div(Ms[1], 2), up.div(up.mul(Ms[2], r_hi), 2))
    C = up.div(max(mpfr(1), inner), r_lo)
    return IngredientBound(r, R, Ms[0], Ms[1], Ms[2], C)


def _poly_degree_term(sys: IngredientSystem, x) -> mpfr:
    """d^{3/2} / (2 ||(1,x)||), rounded up; d floored at 1."""
    d = max([1] + sys.degrees())
    val = RealInterval.exact(d) ** 3
    val = val.sqrt() / (RealInterval.exact(2) * point_norm(x))
    return val.hi


def gamma_upper(sys: IngredientSystem, x: Sequence, radii: Sequence, _mu=None,
                _bounds=None) -> mpfr:
    x = sys.check_point(x)
    mu = _mu if _mu is not None else mu_upper(sys, x)
    bounds = _bounds if _bounds is not None else [
        ingredient_C(row.func, x[row.input_index], r) for row, r in zip(sys.ingredients, radii)]
    _, up, _ = rounding_contexts()
    total = _poly_degree_term(sys, x)
    for b in bounds:
        total = up.add(total, b.C)
    return up.mul(mu, total)


# ---------------------------------------------------------------------------
# the test

@dataclass
class AlphaCertificate:
    point: list
    beta_upper: mpfr
    mu_upper: mpfr
    bounds: list
    gamma_upper: mpfr
    alpha_upper: mpfr
    verdict: str
    uniqueness_radius: mpfr | None = None
    nonreal: bool | None = None
    message: str = ""
    radii: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


def _fail(x, radii, message, beta=_INF, mu=_INF, bounds=()):
    return AlphaCertificate(list(x), beta, mu, list(bounds), _INF, _INF, "fail", None, None,
                            message, list(radii))


def alpha_test(sys: IngredientSystem, x: Sequence, radii: Sequence | None = None,
               grid: Sequence | None = None) -> AlphaCertificate:
    """Pass certifies that x is an approximate solution of F (quadratic Newton convergence)."""
    x = sys.check_point(x)
    if radii is None:
        radii = radius_search(sys, x, grid)
    radii = [_as_fraction(r) for r in radii]
    if len(radii) != sys.m:
        raise ValueError(f"need {sys.m} radii, got {len(radii)}")
    try:
        data = _point_data(sys, x)
        beta = beta_upper(sys, x, data)
        mu = mu_upper(sys, x, data)
        bounds = [ingredient_C(row.func, x[row.input_index], r) for row, r in zip(sys.ingredients, radii)]
    except NotDiagonallyDominated as exc:
        return _fail(x, radii, f"Jacobian solve not verified: {exc}")
    except (DFiniteError, OracleError) as exc:
        return _fail(x, radii, f"{type(exc).__name__}: {exc}")
    gamma = gamma_upper(sys, x, radii, mu, bounds)
    _, up, _ = rounding_contexts()
    alpha = up.mul(beta, gamma)
    verdict = "pass" if alpha < alpha_threshold().lo else "fail"
    uniq = None
    if alpha < RealInterval.exact(UNIQUENESS_ALPHA).lo:
        down, _, _ = rounding_contexts()
        uniq = down.div(1, up.mul(20, gamma))
    cert = AlphaCertificate(list(x), beta, mu, bounds, gamma, alpha, verdict, uniq, None, "", radii)
    if sys.complex_mode:
        cert.nonreal = _nonreal_from(x, beta)
    return cert


def _as_fraction(r) -> Fraction:
    if isinstance(r, Fraction):
        return r
    if isinstance(r, mpfr):
        return to_fraction(r)
    if isinstance(r, str):
        return Fraction(r)
    return Fraction(r)


def _distance_upper(x: Sequence[QQi], y: Sequence[QQi]) -> mpfr:
    return RealInterval.exact(sum(((a - b).abs2() for a, b in zip(x, y)), Fraction(0))).sqrt().hi


def same_root_test(sys: IngredientSystem, x: Sequence, y: Sequence, radii: Sequence | None = None) -> bool:
    """True only if x is certified with alpha < 0.03 and ||x - y|| < 1/(20 gamma)."""
    x, y = sys.check_point(x), sys.check_point(y)
    cert = alpha_test(sys, x, radii)
    if cert.uniqueness_radius is None:
        return False
    return _distance_upper(x, y) < cert.uniqueness_radius


def _nonreal_from(x: Sequence[QQi], beta: mpfr) -> bool:
    # ||x - conj(x)|| = 2 sqrt(sum Im(x_i)^2)
    dist = RealInterval.exact(4 * sum((v.imag ** 2 for v in x), Fraction(0))).sqrt().lo
    _, up, _ = rounding_contexts()
    return bool(dist > up.mul(4, beta))


def nonreal_test(sys: IngredientSystem, x: Sequence, radii: Sequence | None = None) -> bool:
    """True only if the associated root is provably non-real (needs alpha to pass)."""
    x = sys.check_point(x)
    cert = alpha_test(sys, x, radii)
    if not cert.passed:
        return False
    return _nonreal_from(x, cert.beta_upper)


# ---------------------------------------------------------------------------
# radius selection

RELATIVE_GRID = (Fraction(1, 10**6), Fraction(1, 10**5), Fraction(1, 10**4), Fraction(1, 10**3),
                 Fraction(1, 100), Fraction(1, 10), Fraction(3, 10), Fraction(1, 2), Fraction(4, 5))
ABSOLUTE_GRID = (Fraction(1, 1000), Fraction(1, 100), Fraction(1, 20), Fraction(1, 10), Fraction(1, 5),
                 Fraction(3, 10), Fraction(2, 5), Fraction(1, 2), Fraction(3, 5), Fraction(4, 5),
                 Fraction(1), Fraction(3, 2), Fraction(2), Fraction(3), Fraction(4))


def _short(r: Fraction) -> Fraction:
    """Round a positive radius down to a 24-bit dyadic (cheap exact arithmetic)."""
    e = math.floor(math.log2(float(r))) - 24
    unit = Fraction(2) ** e
    return Fraction(math.floor(r / unit)) * unit


def radius_candidates(g: DFiniteFunction, x_in, grid: Sequence | None = None) -> list[Fraction]:
    R = convergence_radius(g, x_in)
    if gmpy2.is_finite(R):
        Rf = to_fraction(R)
        return [_short(f * Rf) for f in (grid or RELATIVE_GRID)]
    return [_as_fraction(r) for r in (grid or ABSOLUTE_GRID)]


def radius_search(sys: IngredientSystem, x: Sequence, grid: Sequence | None = None) -> list[Fraction]:
    """Per-ingredient radii minimizing the alpha bound over the grid.

    alpha = beta * mu * (const + sum_i C_i(r_i)) is separable, so minimizing
    each C_i on its own grid gives the exact minimizer over the product grid.
    ``grid`` holds multipliers of R (finite R) or absolute radii (R = inf).
    """
    x = sys.check_point(x)
    radii = []
    for row in sys.ingredients:
        xin = x[row.input_index]
        best, best_c = None, None
        cands = radius_candidates(row.func, xin, grid)
        for r in cands:
            try:
                c = ingredient_C(row.func, xin, r).C
            except (DFiniteError, OracleError):
                continue
            if best_c is None or c < best_c:
                best, best_c = r, c
        radii.append(best if best is not None else cands[0])
    return radii
