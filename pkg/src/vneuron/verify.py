"""Adder verification harnesses: exhaustive and seeded random sweeps."""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator

import numpy as np

from .builder import build_adder_circuit
from .codec import DyadicValue, PrecisionVector, TimingViolation
from .metrics import random_rail_values

PRECISION_FOR_BITS = {
    8: PrecisionVector(2, 2, 2, 2),
    16: PrecisionVector(4, 4, 4, 4),
    32: PrecisionVector(8, 8, 8, 8),
}


@dataclass
class Failure:
    x: DyadicValue
    y: DyadicValue
    expected: DyadicValue
    got: DyadicValue | None
    reason: str = ""


@dataclass
class VerificationReport:
    precision: PrecisionVector
    mode: str
    seed: int | None
    cases: int = 0
    failures: list[Failure] = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures

    def summary(self, show: int = 10) -> str:
        lines = [
            f"precision={self.precision}",
            f"mode={self.mode}",
            f"seed={'none' if self.seed is None else self.seed}",
            f"cases={self.cases}",
            f"failures={len(self.failures)}",
            f"result={'PASS' if self.passed else 'FAIL'}",
        ]
        for f in self.failures[:show]:
            got = "timing" if f.got is None else str(f.got)
            lines.append(f"failure x={f.x} y={f.y} expected={f.expected} got={got} {f.reason}".rstrip())
        return "\n".join(lines)


def all_values(p: PrecisionVector) -> Iterator[DyadicValue]:
    dp, dn = 1 << p.pos_frac, 1 << p.neg_frac
    for a in range(1 << p.p_pos):
        for b in range(1 << p.p_neg):
            yield DyadicValue(Fraction(a, dp), -Fraction(b, dn))


def exhaustive_pairs(p: PrecisionVector) -> Iterator[tuple[DyadicValue, DyadicValue]]:
    values = list(all_values(p))
    return itertools.product(values, values)


def random_pairs(p: PrecisionVector, samples: int, seed: int) -> Iterator[tuple[DyadicValue, DyadicValue]]:
    rng = np.random.default_rng(seed)
    xs = random_rail_values(rng, p, samples)
    ys = random_rail_values(rng, p, samples)
    return zip(xs, ys)


def verify_adder(
    p: PrecisionVector,
    pairs: Iterable[tuple[DyadicValue, DyadicValue]],
    mode: str = "custom",
    seed: int | None = None,
) -> VerificationReport:
    """Simulate every pair and compare rail-wise against exact addition.

    Simulation runs to twice the ready step, so any output spike away from
    the ready step, early or late, counts as a failure.
    """
    circuit = build_adder_circuit(p)
    net = circuit.network
    horizon = 2 * circuit.output_handle.ready_step
    report = VerificationReport(p, mode, seed)
    start = time.perf_counter()
    for x, y in pairs:
        expected = x + y
        report.cases += 1
        try:
            got, _ = circuit.run({"x": x, "y": y}, net, horizon)
        except TimingViolation as exc:
            report.failures.append(Failure(x, y, expected, None, str(exc)))
            continue
        if got != expected:
            report.failures.append(Failure(x, y, expected, got))
    report.elapsed = time.perf_counter() - start
    return report


def verify_bits(bits: int, samples: int | None = None, seed: int = 0) -> VerificationReport:
    """``samples=None`` means exhaustive, which is only feasible at 8 bits."""
    if bits not in PRECISION_FOR_BITS:
        raise ValueError(f"bits must be one of {sorted(PRECISION_FOR_BITS)}, got {bits}")
    p = PRECISION_FOR_BITS[bits]
    if samples is None:
        if bits != 8:
            raise ValueError("exhaustive verification is only allowed at 8 bits")
        return verify_adder(p, exhaustive_pairs(p), "exhaustive")
    return verify_adder(p, random_pairs(p, samples, seed), f"samples:{samples}", seed)
