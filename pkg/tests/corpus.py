"""Random polynomial systems with reference roots located by high-precision Newton."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from dfcert.exact import QQi
from dfcert.system import IngredientSystem, MultivariatePolynomial

DPS = 60


@dataclass
class Corpus:
    system: IngredientSystem
    roots: list = field(default_factory=list)  # mpmath mpc vectors

    @property
    def n(self) -> int:
        return self.system.size


def random_system(rng: random.Random, n: int | None = None) -> IngredientSystem:
    """Square complex system, n <= 3 unknowns, each row of degree <= 3 with Gaussian-integer coefficients."""
    n = n or rng.randint(1, 3)
    polys = []
    for _ in range(n):
        d = rng.randint(1, 3)
        monos = [nu for nu in itertools.product(range(d + 1), repeat=n) if sum(nu) <= d]
        top = [nu for nu in monos if sum(nu) == d]
        chosen = set(rng.sample(monos, min(len(monos), rng.randint(2, 5))))
        chosen.add(rng.choice(top))
        chosen.add((0,) * n)
        terms = []
        for nu in sorted(chosen):
            c = QQi(rng.randint(-4, 4), rng.randint(-4, 4))
            if c.is_zero():
                c = QQi(1)
            terms.append((nu, c))
        polys.append(MultivariatePolynomial(n, terms))
    return IngredientSystem(polys, [], mode="complex")


def _coeffs(p: MultivariatePolynomial):
    return [(nu, complex(float(c.real), float(c.imag))) for nu, c in p.terms.items()]


def _eval(terms, x):
    total = 0
    for nu, c in terms:
        v = c
        for xi, e in zip(x, nu):
            if e:
                v = v * xi ** e
        total += v
    return total


def _partial_terms(terms, k):
    out = []
    for nu, c in terms:
        if nu[k]:
            mu = list(nu)
            mu[k] -= 1
            out.append((tuple(mu), c * nu[k]))
    return out


def _solve(a, b):
    n = len(b)
    a = [row[:] + [b[i]] for i, row in enumerate(a)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(a[r][col]))
        if a[piv][col] == 0:
            raise ZeroDivisionError
        a[col], a[piv] = a[piv], a[col]
        for r in range(n):
            if r != col:
                f = a[r][col] / a[col][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [a[i][n] / a[i][i] for i in range(n)]


class NewtonMap:
    """Newton map of a polynomial system, in double precision or with mpmath."""

    def __init__(self, system: IngredientSystem):
        self.terms = [_coeffs(p) for p in system.polys]
        self.mp_terms = [[(nu, mpmath.mpc(int(c.real), int(c.imag))) for nu, c in p.terms.items()]
                         for p in system.polys]
        self.n = system.size

    def _step(self, terms, x):
        f = [_eval(t, x) for t in terms]
        jac = [[_eval(_partial_terms(t, k), x) for k in range(self.n)] for t in terms]
        dx = _solve(jac, f)
        return [xi - di for xi, di in zip(x, dx)], max(abs(v) for v in dx)

    def float_step(self, x):
        return self._step(self.terms, x)

    def iterate(self, x, k: int):
        """The first k Newton iterates of x at high precision (x itself first)."""
        with mpmath.workdps(DPS):
            pts = [list(x)]
            for _ in range(k):
                pts.append(self._step(self.mp_terms, pts[-1])[0])
            return pts

    def polish(self, x, steps: int = 40):
        with mpmath.workdps(DPS):
            y = [mpmath.mpc(v) for v in x]
            for _ in range(steps):
                try:
                    y, size = self._step(self.mp_terms, y)
                except ZeroDivisionError:
                    return None
                if size < mpmath.mpf(10) ** (-DPS + 8):
                    break
            res = max(abs(_eval(t, y)) for t in self.mp_terms)
            if res > mpmath.mpf(10) ** (-DPS + 15):
                return None
            return y


def mp_distance(a, b) -> mpmath.mpf:
    with mpmath.workdps(DPS):
        return mpmath.sqrt(sum(abs(x - y) ** 2 for x, y in zip(a, b)))


def find_roots(system: IngredientSystem, rng: random.Random, starts: int = 40) -> list:
    nm = NewtonMap(system)
    roots: list = []
    for _ in range(starts):
        x = [complex(rng.uniform(-3, 3), rng.uniform(-3, 3)) for _ in range(system.size)]
        ok = False
        for _ in range(60):
            try:
                x, size = nm.float_step(x)
            except (ZeroDivisionError, OverflowError):
                break
            if any(abs(v) > 1e8 for v in x):
                break
            if size < 1e-12:
                ok = True
                break
        if ok:
            add_root(nm, roots, x)
    return roots


def add_root(nm: NewtonMap, roots: list, x) -> list | None:
    y = nm.polish(x)
    if y is None:
        return None
    for r in roots:
        if mp_distance(r, y) < mpmath.mpf(10) ** -30:
            return r
    roots.append(y)
    return y


def build_corpus(seed: int, count: int) -> list[Corpus]:
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        sys = random_system(rng)
        roots = find_roots(sys, rng)
        if roots:
            out.append(Corpus(sys, roots))
    return out


def round_point(x, digits: int) -> list[QQi]:
    """Round each complex coordinate to ``digits`` decimals (as exact rationals)."""
    scale = 10 ** digits
    out = []
    with mpmath.workdps(DPS):
        for v in x:
            re = Fraction(int(mpmath.nint(v.real * scale)), scale)
            im = Fraction(int(mpmath.nint(v.imag * scale)), scale)
            out.append(QQi(re, im))
    return out


def to_mp(x) -> list:
    with mpmath.workdps(DPS):
        return [mpmath.mpc(mpmath.mpf(v.real.numerator) / v.real.denominator,
                           mpmath.mpf(v.imag.numerator) / v.imag.denominator) for v in x]


def in_box(box, root) -> bool:
    """Exact membership test of an mpmath point in an interval box."""
    from dfcert.interval import to_fraction

    with mpmath.workdps(DPS):
        for e, v in zip(box, root):
            lo_r, hi_r = to_fraction(e.re.lo), to_fraction(e.re.hi)
            lo_i, hi_i = to_fraction(e.im.lo), to_fraction(e.im.hi)
            f = lambda q: mpmath.mpf(q.numerator) / q.denominator
            if not (f(lo_r) <= v.real <= f(hi_r) and f(lo_i) <= v.imag <= f(hi_i)):
                return False
        return True


def halving_pattern_holds(nm: NewtonMap, x: list, root: list, kmax: int = 4) -> bool:
    """||N^k(x) - x*|| <= (1/2)^(2^k - 1) ||x - x*|| for k = 1..kmax."""
    with mpmath.workdps(DPS):
        d0 = mp_distance(x, root)
        if d0 == 0:
            return True
        pts = nm.iterate(x, kmax)
        for k in range(1, kmax + 1):
            if mp_distance(pts[k], root) > mpmath.mpf(2) ** (-(2 ** k - 1)) * d0:
                return False
        return True


@dataclass
class SoundnessTally:
    krawczyk_runs: int = 0
    krawczyk_passes: int = 0
    alpha_runs: int = 0
    alpha_passes: int = 0
    violations: list = field(default_factory=list)


def _perturbed(rng: random.Random, root, scale: float, digits: int) -> list[QQi]:
    with mpmath.workdps(DPS):
        moved = [v + mpmath.mpc(rng.uniform(-scale, scale), rng.uniform(-scale, scale)) for v in root]
    return round_point(moved, digits)


def check_krawczyk(c: Corpus, rng: random.Random, tally: SoundnessTally) -> None:
    """Boxes around (perturbed) roots and around pairs of roots; a pass must hold exactly one root."""
    from dfcert.interval import IntervalBox
    from dfcert.krawczyk import krawczyk_test

    sys = c.system
    nm = NewtonMap(sys)
    boxes = []
    for root in list(c.roots):
        for k in (1, 2, 3, 5):
            half = Fraction(1, 10 ** k)
            centre = _perturbed(rng, root, 0.3 * 10.0 ** -k, k + 2)
            boxes.append(IntervalBox.around(centre, half))
    for a, b in itertools.combinations(list(c.roots)[:6], 2):
        with mpmath.workdps(DPS):
            mid = [(x + y) / 2 for x, y in zip(a, b)]
            spread = max(max(abs((x - y).real), abs((x - y).imag)) for x, y in zip(a, b))
        half = Fraction(int(mpmath.ceil(spread * 10 ** 6)), 10 ** 6) * Fraction(3, 5) + Fraction(1, 10 ** 6)
        boxes.append(IntervalBox.around(round_point(mid, 6), half))
    for box in boxes:
        cert = krawczyk_test(sys, box)
        tally.krawczyk_runs += 1
        if not cert.passed:
            continue
        tally.krawczyk_passes += 1
        # make sure the reference set knows the root(s) near this box
        for start in (box.mid(), [(e.re.lo, e.im.lo) for e in box], [(e.re.hi, e.im.hi) for e in box]):
            add_root(nm, c.roots, [complex(float(re), float(im)) for re, im in start])
        inside = [r for r in c.roots if in_box(box, r)]
        if len(inside) != 1:
            tally.violations.append(("krawczyk", box, len(inside)))


def check_alpha(c: Corpus, rng: random.Random, tally: SoundnessTally) -> None:
    """Rounded roots; a pass must show Newton's quadratic halving pattern towards a reference root."""
    from dfcert.alpha import alpha_test

    sys = c.system
    nm = NewtonMap(sys)
    for root in list(c.roots):
        for digits in (1, 2, 3, 5, 8):
            x = _perturbed(rng, root, 0.4 * 10.0 ** -digits, digits)
            cert = alpha_test(sys, x, radii=[])
            tally.alpha_runs += 1
            if not cert.passed:
                continue
            tally.alpha_passes += 1
            xm = to_mp(x)
            limit = nm.polish(xm, steps=80)
            if limit is None:
                tally.violations.append(("alpha-no-limit", x))
                continue
            # compare against the limit itself: a deduplicated reference root may sit
            # 1e-50 away from an exactly representable root, which breaks beta = 0 cases
            add_root(nm, c.roots, limit)
            ref = limit
            with mpmath.workdps(DPS):
                beta = mpmath.mpf(str(cert.beta_upper))
                if mp_distance(xm, ref) > 2 * beta * (1 + mpmath.mpf(10) ** -20):
                    tally.violations.append(("alpha-distance", x))
            if not halving_pattern_holds(nm, xm, ref):
                tally.violations.append(("alpha-halving", x))
