"""Regenerate the bundled system files in src/dfcert/data.

Initial values that are not closed-form constants (the Bessel combination
Y_9 + J_9 and the complete elliptic integral E with its derivative at 1/2)
are computed here with mpmath at 80 digits and stored as interval literals
with a relative half-width of 1e-55.  They are inputs to the certificates,
not outputs of them.
"""

from __future__ import annotations

import json
from pathlib import Path

import mpmath as mp

mp.mp.dps = 80
OUT = Path(__file__).resolve().parent.parent / "src" / "dfcert" / "data"


def interval(v) -> str:
    v = mp.mpf(v)
    eps = abs(v) * mp.mpf("1e-55")
    return f"[{mp.nstr(v - eps, 70, min_fixed=-1, max_fixed=1)}, {mp.nstr(v + eps, 70, min_fixed=-1, max_fixed=1)}]"


ERF = {
    "ode": {"order": 2, "coefficients": [["0"], ["0", "2"], ["1"]]},
    "base_point": "0",
    "initial_values": ["0", "2/sqrt(pi)"],
    "note": "erf satisfies g'' + 2t g' = 0 with erf(0) = 0, erf'(0) = 2/sqrt(pi)",
}


def write(name: str, data: dict) -> None:
    data = {"format": "dfcert-system", "version": 1, **data}
    (OUT / name).write_text(json.dumps(data, indent=2) + "\n")


def main() -> None:
    write("erf_system.json", {
        "name": "erf-circle",
        "description": "Intersection of the circle t1^2 + t2^2 = 4 with erf(t1) erf(t2) = 1/2.",
        "mode": "real",
        "variables": ["t1", "t2", "t3", "t4"],
        "polynomials": ["t1^2 + t2^2 - 4", "t3*t4 - 1/2"],
        "functions": {"erf": ERF},
        "ingredients": [
            {"output": "t3", "input": "t1", "function": "erf"},
            {"output": "t4", "input": "t2", "function": "erf"},
        ],
        "points": {"default": ["0.480322", "1.94147", "0.503058", "0.993961"]},
    })

    h = lambda t: mp.bessely(9, t) + mp.besselj(9, t)
    one = mp.mpf(1)
    write("bessel_erf_system.json", {
        "name": "bessel-erf",
        "description": "t1^2 + t2^2 = 61 and 2 erf(h(t2)/2 + t1) h(t2) = 11 with h = Y_9 + J_9.",
        "mode": "real",
        "variables": ["t1", "t2", "t3", "t4", "t5"],
        "polynomials": ["t1^2 + t2^2 - 61", "2*t4*t5 - 11", "t3 - t5/2 - t1"],
        "functions": {
            "erf": ERF,
            "bessel9": {
                "ode": {"order": 2, "coefficients": [["-81", "0", "1"], ["0", "1"], ["0", "0", "1"]]},
                "base_point": "1",
                "initial_values": [interval(h(one)), interval(mp.diff(h, one))],
                "note": "h = Y_9 + J_9 solves t^2 y'' + t y' + (t^2 - 81) y = 0; values of h(1), h'(1) "
                        "computed with mpmath (80 digits) and supplied as input enclosures",
            },
        },
        "ingredients": [
            {"output": "t4", "input": "t3", "function": "erf"},
            {"output": "t5", "input": "t2", "function": "bessel9"},
        ],
        "points": {
            "default": ["6.27898967", "4.64481310", "-0.38382379", "-0.41273856", "-13.32562692"],
            "printed": ["6.27899", "4.64481", "-0.38382", "-0.41274", "-13.32563"],
        },
        "radius_reference": "8.2923",
    })

    write("exponential_system.json", {
        "name": "exponential",
        "description": "e^{4 t1} = 0.0183 written as t2 - 0.0183 = 0, t2 - e^{4 t1} = 0.",
        "mode": "real",
        "variables": ["t1", "t2"],
        "polynomials": ["t2 - 0.0183"],
        "functions": {
            "exp4": {
                "ode": {"order": 1, "coefficients": [["-4"], ["1"]]},
                "base_point": "0",
                "initial_values": ["1"],
                "note": "g = e^{4t} solves g' - 4 g = 0, g(0) = 1",
            },
        },
        "ingredients": [{"output": "t2", "input": "t1", "function": "exp4"}],
        "points": {"default": ["-1", "0.018316"]},
    })

    E = lambda t: mp.ellipe(t ** 2)
    K = lambda t: mp.ellipk(t ** 2)
    dE = lambda t: (E(t) - K(t)) / t
    half = mp.mpf(1) / 2
    d2E = -((1 - half ** 2) * dE(half) + half * E(half)) / (half - half ** 3)
    write("elliptic_system.json", {
        "name": "ellipse-perimeters",
        "description": "Lagrange system for maximizing e1 b1 + 2 e2 b2 subject to e1^2 + b1^2 = 1, "
                       "4 e2^2 + b2^2 = 4 and 4 E(e1) + 8 E(e2) = 17, with the multiplier of the "
                       "perimeter constraint scaled by 4.",
        "mode": "real",
        "variables": ["b1", "b2", "e1", "e2", "l1", "l2", "l3", "E1", "E2", "D1", "D2"],
        "polynomials": [
            "e1 + 2*l1*b1",
            "2*e2 + 2*l2*b2",
            "b1 + 2*l1*e1 + 16*l3*D1",
            "2*b2 + 8*l2*e2 + 32*l3*D2",
            "e1^2 + b1^2 - 1",
            "4*e2^2 + b2^2 - 4",
            "4*E1 + 8*E2 - 17",
        ],
        "functions": {
            "E": {
                "ode": {"order": 2, "coefficients": [["0", "1"], ["1", "0", "-1"], ["0", "1", "0", "-1"]]},
                "base_point": "1/2",
                "initial_values": [interval(E(half)), interval(dE(half))],
                "note": "complete elliptic integral of the second kind in the modulus, "
                        "(t - t^3) E'' + (1 - t^2) E' + t E = 0; E(1/2), E'(1/2) from mpmath",
            },
            "dE": {
                "ode": {"order": 2, "coefficients": [["-1"], ["0", "1", "0", "-3"], ["0", "0", "1", "0", "-1"]]},
                "base_point": "1/2",
                "initial_values": [interval(dE(half)), interval(d2E)],
                "note": "u = E' solves t^2 (1 - t^2) u'' + t (1 - 3 t^2) u' - u = 0; values from mpmath",
            },
        },
        "ingredients": [
            {"output": "E1", "input": "e1", "function": "E"},
            {"output": "E2", "input": "e2", "function": "E"},
            {"output": "D1", "input": "e1", "function": "dE"},
            {"output": "D2", "input": "e2", "function": "dE"},
        ],
        "points": {"default": _elliptic_point(E, dE)},
    })


def _elliptic_point(E, dE) -> list[str]:
    b = ["0.8337853", "1.5601133"]
    e = ["0.5520888", "0.6257089"]
    lam = ["-0.3310737", "-0.4010663", "0.0590727"]
    vals = [mp.mpf(v) for v in e]
    aux = [E(vals[0]), E(vals[1]), dE(vals[0]), dE(vals[1])]
    return b + e + lam + [mp.nstr(v, 7, strip_zeros=False) for v in aux]


if __name__ == "__main__":
    main()
