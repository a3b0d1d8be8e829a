"""Benchmark plants with known reference values."""

from dataclasses import dataclass, field

import numpy as np

from .rational import Polynomial, RationalFunction, classify_plant

__all__ = [
    "BenchmarkCase",
    "builtin_cases",
    "get_case",
    "ex1_plant",
    "ex2_plant",
    "ex3_plant",
    "ex4_plant",
    "tight_bound",
]


@dataclass(frozen=True)
class BenchmarkCase:
    """A named plant with optional reference values and parameter sweep.

    ``reference`` maps a quantity name to ``(value, tolerance, tag)``; the
    tag says where the number comes from (closed form, reference design).
    """

    id: str
    plant: object
    description: str = ""
    reference: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    spec: dict = field(default_factory=dict)


def tight_bound(p, z):
    """``2/p - 2/z``: tight delay margin for one real pole ``p < z`` zero."""
    return 2.0 / p - 2.0 / z


def ex1_plant():
    """``0.1 (0.1 s - 1)(s + 0.1659) / ((s - 0.1081)(s^2 + 0.2981 s + 0.06281))``."""
    num = Polynomial([-1.0, 0.1]) * Polynomial([0.1659, 1.0]) * 0.1
    den = Polynomial([-0.1081, 1.0]) * Polynomial([0.06281, 0.2981, 1.0])
    return classify_plant(RationalFunction(num, den))


def ex2_plant(p, z=2.0):
    """``(s - z) / (s - p)``."""
    return classify_plant(RationalFunction([-z, 1.0], [-p, 1.0]))


def ex3_plant(p2, p1=0.2):
    """``1 / ((s - p1)(s - p2))``."""
    return classify_plant(RationalFunction([1.0], Polynomial.from_roots([p1, p2])))


def ex4_plant(r, theta, z):
    """``(s - z) / ((s - r e^{i theta})(s - r e^{-i theta}))``."""
    den = Polynomial([r * r, -2.0 * r * np.cos(theta), 1.0])
    return classify_plant(RationalFunction([-z, 1.0], den))


def builtin_cases():
    ex1_tight = tight_bound(0.1081, 10.0)
    cases = [
        BenchmarkCase(
            "EX1", ex1_plant(),
            "one real unstable pole 0.1081, nonminimum-phase zero 10",
            reference={"tight": (ex1_tight, 1e-3, "closed form 2/p - 2/z"),
                       "shift_-50_min": (0.9 * ex1_tight, 0.0, "90% of the tight value")},
            sweep={"shift": [0.0, -1.0, -10.0, -50.0]},
        ),
        BenchmarkCase(
            "EX2", ex2_plant(0.5),
            "(s - 2)/(s - p), default p = 0.5",
            reference={"tight": (tight_bound(0.5, 2.0), 1e-3, "closed form 2/p - 2/z, valid for p < z")},
            sweep={"p": list(np.round(np.linspace(0.3, 4.0, 38), 4)), "z": 2.0},
        ),
        BenchmarkCase(
            "EX3", ex3_plant(1.0),
            "1/((s - 0.2)(s - p2)), default p2 = 1",
            sweep={"p2": list(np.round(np.linspace(0.1, 3.0, 30), 4)), "p1": 0.2},
        ),
    ]
    for i, (r, th) in enumerate([(1.0, np.pi / 4), (1.0, np.pi / 3), (2.0, np.pi / 3)]):
        cases.append(BenchmarkCase(
            f"EX4{'abc'[i]}", ex4_plant(r, th, 1.0),
            f"(s - z)/((s - r e^(i th))(s - r e^(-i th))), r={r}, th={th:.4f}, default z = 1",
            sweep={"z": list(np.round(np.linspace(0.01, 4.0, 40), 4)), "r": r, "theta": th},
        ))
    cases.append(BenchmarkCase(
        "EX5", ex1_plant(),
        "EX1 plant with simultaneous gain 1.5 and phase pi/12",
        reference={"guaranteed": (1.870, 0.0, "reference design, guaranteed delay margin"),
                   "achieved": (2.254, 0.0, "reference design, achieved delay margin"),
                   "omega_c": (0.7188, 0.0, "reference design, tangency frequency"),
                   "acceptance_min": (1.5, 0.0, "acceptance threshold")},
        spec={"mode": "simultaneous", "gain_k": 1.5, "phase_phi": np.pi / 12,
              "improper_rolloff": 1},
    ))
    return cases


def get_case(case_id):
    for c in builtin_cases():
        if c.id.lower() == case_id.lower():
            return c
    raise KeyError(f"unknown case {case_id!r}")
