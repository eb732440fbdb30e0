"""Machine-readable reports for certificates and experiment sweeps."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal

from gmpy2 import mpfr

from .alpha import AlphaCertificate
from .interval import ComplexInterval, IntervalBox, RealInterval
from .krawczyk import KrawczykCertificate

REPORT_VERSION = 1
ROUNDING_RULE = "round-half-even on the decimal string"


def num(x) -> str | None:
    """Exact decimal-scientific string of a bound (mpfr repr round-trips exactly)."""
    if x is None:
        return None
    if isinstance(x, mpfr):
        return str(x) if x.is_finite() else ("inf" if x > 0 else "-inf")
    return str(x)


def interval_dict(x: RealInterval) -> list[str]:
    return [num(x.lo), num(x.hi)]


def complex_dict(z: ComplexInterval) -> dict:
    return {"re": interval_dict(z.re), "im": interval_dict(z.im)}


def box_dict(b: IntervalBox | None) -> list | None:
    if b is None:
        return None
    return [complex_dict(e) for e in b]


def alpha_dict(cert: AlphaCertificate) -> dict:
    return {
        "method": "alpha",
        "point": [str(v) for v in cert.point],
        "radii": [str(r) for r in cert.radii],
        "beta_upper": num(cert.beta_upper),
        "mu_upper": num(cert.mu_upper),
        "ingredients": [
            {"r": str(b.r), "R": num(b.R), "M": num(b.M), "M1": num(b.M1), "M2": num(b.M2), "C": num(b.C)}
            for b in cert.bounds
        ],
        "gamma_upper": num(cert.gamma_upper),
        "alpha_upper": num(cert.alpha_upper),
        "verdict": cert.verdict,
        "uniqueness_radius": num(cert.uniqueness_radius),
        "nonreal": cert.nonreal,
        "message": cert.message,
    }


def krawczyk_dict(cert: KrawczykCertificate) -> dict:
    return {
        "method": "krawczyk",
        "region": box_dict(cert.region),
        "center": [str(v) for v in cert.center],
        "image": box_dict(cert.image),
        "contraction": num(cert.contraction),
        "complex_mode": cert.complex_mode,
        "verdict": cert.verdict,
        "failure_reason": cert.failure_reason,
        "message": cert.message,
    }


def round_decimal(value: str, digits: int) -> str:
    """Round a decimal string to ``digits`` places, ties to even."""
    q = Decimal(value).quantize(Decimal(1).scaleb(-digits), rounding=ROUND_HALF_EVEN)
    if q == 0:
        q = abs(q)
    return format(q, "f")


def digest(*parts: str) -> str:
    h = hashlib.sha256()
    for p in parts:
        h.update(p.encode())
        h.update(b"\0")
    return h.hexdigest()


@dataclass
class Report:
    command: str
    system: str
    input_digest: str
    config: dict
    results: list
    verdict: str
    wall_time: float = 0.0
    version: int = REPORT_VERSION
    notes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "Report":
        if data.get("version") != REPORT_VERSION:
            raise ValueError(f"unsupported report version {data.get('version')}")
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Report":
        return cls.from_dict(json.loads(text))

    def deterministic_dict(self) -> dict:
        d = self.to_dict()
        d.pop("wall_time")
        return d
