"""Dual-rail dyadic numbers and their bit-level encodings.

A value travels as two rails: a non-negative part and a non-positive part.
Each rail is plain unsigned binary fixed point, most significant bit first.
Rails are never merged or cancelled against each other.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, NamedTuple

from .snn import SpikeTrace, Stimulus, is_dyadic

if TYPE_CHECKING:
    from .builder import VirtualNeuronHandle


class NotRepresentable(ValueError):
    """A number does not fit the requested fixed-point precision."""

    def __init__(self, message: str, rail: str | None = None):
        super().__init__(message)
        self.rail = rail


class TimingViolation(RuntimeError):
    """An output neuron fired outside its virtual neuron's ready step."""


@dataclass(frozen=True)
class PrecisionVector:
    pos_int: int
    pos_frac: int
    neg_int: int
    neg_frac: int

    def __post_init__(self):
        for v in self:
            if not isinstance(v, int) or v < 0:
                raise ValueError(f"bit counts must be non-negative integers, got {tuple(self)}")

    def __iter__(self):
        return iter((self.pos_int, self.pos_frac, self.neg_int, self.neg_frac))

    @classmethod
    def parse(cls, text: str) -> PrecisionVector:
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 4:
            raise ValueError(f"precision needs four comma-separated bit counts, got {text!r}")
        return cls(*(int(p) for p in parts))

    @property
    def p_pos(self) -> int:
        return self.pos_int + self.pos_frac

    @property
    def p_neg(self) -> int:
        return self.neg_int + self.neg_frac

    @property
    def width(self) -> int:
        return max(self.p_pos, self.p_neg)

    @property
    def symmetric(self) -> bool:
        return self.pos_int == self.neg_int and self.pos_frac == self.neg_frac

    def rail(self, sign: int) -> tuple[int, int]:
        """(integer bits, fraction bits) of the positive (+1) or negative (-1) rail."""
        return (self.pos_int, self.pos_frac) if sign > 0 else (self.neg_int, self.neg_frac)

    def widened(self, extra: int = 1) -> PrecisionVector:
        """Integer side of every used rail grows by ``extra`` bits (adder output width)."""
        a, b, c, d = self
        return PrecisionVector(
            a + extra if a + b else 0, b, c + extra if c + d else 0, d
        )

    def __str__(self) -> str:
        return ",".join(str(v) for v in self)


@dataclass(frozen=True)
class DyadicValue:
    """Dual-rail number: ``pos >= 0``, ``neg <= 0``, value ``pos + neg``."""

    pos: Fraction = Fraction(0)
    neg: Fraction = Fraction(0)

    def __post_init__(self):
        pos, neg = Fraction(self.pos), Fraction(self.neg)
        if pos < 0:
            raise NotRepresentable(f"positive rail must be >= 0, got {pos}", "pos")
        if neg > 0:
            raise NotRepresentable(f"negative rail must be <= 0, got {neg}", "neg")
        object.__setattr__(self, "pos", pos)
        object.__setattr__(self, "neg", neg)

    def value(self) -> Fraction:
        return self.pos + self.neg

    @classmethod
    def of(cls, x) -> DyadicValue:
        """Minimal split: a negative number goes wholly to the negative rail."""
        q = Fraction(x)
        return cls(q, 0) if q >= 0 else cls(0, q)

    def __add__(self, other: DyadicValue) -> DyadicValue:
        return DyadicValue(self.pos + other.pos, self.neg + other.neg)

    def swapped(self) -> DyadicValue:
        return DyadicValue(-self.neg, -self.pos)

    def __str__(self) -> str:
        return f"{format_dyadic(self.pos)},{format_dyadic(self.neg)}"


class BitVector(NamedTuple):
    bits: tuple[int, ...]
    split: int  # number of integer bits; the rest are fraction bits

    def __str__(self) -> str:
        return "".join(map(str, self.bits))

    @property
    def frac_bits(self) -> int:
        return len(self.bits) - self.split


def encode_rail(x, int_bits: int, frac_bits: int) -> BitVector:
    q = Fraction(x)
    if q < 0:
        raise NotRepresentable(f"{q} is negative; rails hold magnitudes")
    if not is_dyadic(q):
        raise NotRepresentable(f"{q} is not a dyadic rational")
    scaled = q * (1 << frac_bits)
    if scaled.denominator != 1:
        raise NotRepresentable(f"{format_dyadic(q)} needs more than {frac_bits} fraction bits")
    k = scaled.numerator
    width = int_bits + frac_bits
    if k >= 1 << width:
        raise NotRepresentable(f"{format_dyadic(q)} does not fit {int_bits}.{frac_bits} bits")
    bits = tuple((k >> (width - 1 - j)) & 1 for j in range(width))
    return BitVector(bits, int_bits)


def decode_rail(bits: BitVector, sign: int = 1) -> Fraction:
    k = 0
    for b in bits.bits:
        k = (k << 1) | b
    return sign * Fraction(k, 1 << bits.frac_bits)


def encode_value(v: DyadicValue, p: PrecisionVector) -> tuple[BitVector, BitVector]:
    out = []
    for rail, mag, sign in (("pos", v.pos, 1), ("neg", -v.neg, -1)):
        try:
            out.append(encode_rail(mag, *p.rail(sign)))
        except NotRepresentable as exc:
            raise NotRepresentable(f"{rail} rail: {exc}", rail) from None
    return out[0], out[1]


def stimulus_for(vn: VirtualNeuronHandle, port: str, v: DyadicValue) -> Stimulus:
    """Charge-1 injections on the set bits of ``v`` at ``vn``'s injection step."""
    port = port.lower()
    if port not in ("x", "y"):
        raise ValueError(f"unknown port {port!r}; expected 'x' or 'y'")
    pos_bits, neg_bits = encode_value(v, vn.precision)
    inj = []
    for sign, bv in ((1, pos_bits), (-1, neg_bits)):
        rail = vn.rail(sign)
        if rail is None:
            continue
        ids = rail.x if port == "x" else rail.y
        inj.extend((vn.inject_step, n, 1) for n, b in zip(ids, bv.bits) if b)
    return Stimulus(tuple(inj))


def decode_output(vn: VirtualNeuronHandle, trace: SpikeTrace) -> DyadicValue:
    """Read ``vn``'s output port at its ready step; early or late spikes are errors."""
    if trace.horizon < vn.ready_step:
        raise ValueError(f"trace ends at {trace.horizon}, before ready step {vn.ready_step}")
    rails = [(s, vn.rail(s)) for s in (1, -1)]
    where = {n: (s, j) for s, r in rails if r is not None for j, n in enumerate(r.z)}
    fired: dict[int, set[int]] = {1: set(), -1: set()}
    for t, n in trace.events:
        hit = where.get(n)
        if hit is None:
            continue
        if t != vn.ready_step:
            raise TimingViolation(
                f"{vn.name}: output neuron {n} fired at step {t}, ready step is {vn.ready_step}"
            )
        fired[hit[0]].add(hit[1])
    parts = {}
    for s, r in rails:
        if r is None:
            parts[s] = Fraction(0)
            continue
        bits = tuple(int(j in fired[s]) for j in range(len(r.z)))
        parts[s] = decode_rail(BitVector(bits, r.z_int_bits), s)
    return DyadicValue(parts[1], parts[-1])


_DECIMAL = re.compile(r"^\s*([+-]?)(\d+)(?:\.(\d*))?\s*$|^\s*([+-]?)\.(\d+)\s*$")


def parse_decimal(text: str) -> Fraction:
    """Exact decimal string to Fraction; no rounding, no exponents."""
    text = text.replace("−", "-")
    m = _DECIMAL.match(text)
    if not m:
        raise ValueError(f"not a decimal number: {text!r}")
    if m.group(2) is not None:
        sign, whole, frac = m.group(1), m.group(2), m.group(3) or ""
    else:
        sign, whole, frac = m.group(4), "0", m.group(5)
    q = Fraction(int(whole + frac), 10 ** len(frac))
    return -q if sign == "-" else q


def parse_dual(text: str) -> DyadicValue:
    """``"pos,neg"`` to a dual-rail value; a lone number uses the minimal split."""
    parts = text.split(",")
    if len(parts) == 1:
        return DyadicValue.of(parse_decimal(parts[0]))
    if len(parts) != 2:
        raise ValueError(f"expected 'pos,neg', got {text!r}")
    pos, neg = parse_decimal(parts[0]), parse_decimal(parts[1])
    if pos < 0:
        raise NotRepresentable(f"positive rail {parts[0].strip()!r} is negative", "pos")
    if neg > 0:
        raise NotRepresentable(f"negative rail {parts[1].strip()!r} is positive", "neg")
    return DyadicValue(pos, neg)


def format_dyadic(q: Fraction) -> str:
    """Shortest exact decimal for a dyadic rational (always terminates)."""
    q = Fraction(q)
    if not is_dyadic(q):
        raise ValueError(f"{q} is not dyadic")
    sign = "-" if q < 0 else ""
    q = abs(q)
    e = q.denominator.bit_length() - 1
    if e == 0:
        return f"{sign}{q.numerator}"
    digits = str(q.numerator * 5**e).rjust(e + 1, "0")
    whole, frac = digits[:-e], digits[-e:].rstrip("0")
    return f"{sign}{whole}.{frac}"
