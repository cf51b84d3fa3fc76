"""Spike accounting and a calibrated energy model."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .builder import Circuit, VirtualNeuronHandle, build_adder, structural_counts
from .codec import DyadicValue, PrecisionVector, decode_output, encode_value, stimulus_for
from .snn import Network, SpikeTrace, Stimulus, simulate

# Calibration target for the average 16-bit addition:
# 23 nJ over 73 spikes, one addition per 1 us window at 20 MHz.
REFERENCE_ENERGY_J = 23e-9
REFERENCE_SPIKES = 73
DEFAULT_STEP_PERIOD_S = 50e-9
EVALUATION_WINDOW_STEPS = 20


@dataclass(frozen=True)
class EnergyModel:
    e_spike: float = REFERENCE_ENERGY_J / REFERENCE_SPIKES
    p_idle_neuron: float = 0.0
    p_idle_synapse: float = 0.0
    step_period: float = DEFAULT_STEP_PERIOD_S

    def __post_init__(self):
        for name in ("e_spike", "p_idle_neuron", "p_idle_synapse", "step_period"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


@dataclass(frozen=True)
class RunMetrics:
    total_spikes: int
    spikes_per_neuron: Counter = field(compare=False)
    steps: int
    energy: float
    power: float

    def as_pairs(self) -> list[tuple[str, object]]:
        return [
            ("total_spikes", self.total_spikes),
            ("active_neurons", len(self.spikes_per_neuron)),
            ("steps", self.steps),
            ("energy_j", f"{self.energy:.6e}"),
            ("power_w", f"{self.power:.6e}"),
        ]


def count_spikes(trace: SpikeTrace) -> tuple[int, Counter]:
    per_neuron = Counter(n for _, n in trace.events)
    return len(trace.events), per_neuron


def estimate_energy(
    trace: SpikeTrace, net: Network, model: EnergyModel | None = None, steps: int | None = None
) -> RunMetrics:
    """Active spike energy plus idle neuron/synapse power over the run.

    ``steps`` defaults to every simulated step, ``trace.horizon + 1``.
    """
    model = model or EnergyModel()
    total, per_neuron = count_spikes(trace)
    steps = trace.horizon + 1 if steps is None else steps
    duration = steps * model.step_period
    neurons, synapses = structural_counts(net)
    idle = duration * (neurons * model.p_idle_neuron + synapses * model.p_idle_synapse)
    energy = total * model.e_spike + idle
    power = energy / duration if duration > 0 else 0.0
    return RunMetrics(total, per_neuron, steps, energy, power)


def complexity_table(max_p: int) -> list[tuple[int, int, int, int]]:
    """Measured (P, neurons, synapses, steps) for positive-only adders, P doubling up to ``max_p``.

    Steps is the time of the last output spike on an all-ones input pair,
    observed in simulation rather than taken from the handle.
    """
    if max_p < 1:
        raise ValueError("max_p must be >= 1")
    sizes = []
    p = 1
    while p <= max_p:
        sizes.append(p)
        p *= 2
    if sizes[-1] != max_p:
        sizes.append(max_p)
    rows = []
    for p in sizes:
        net, vn = build_adder(PrecisionVector(p, 0, 0, 0))
        ones = DyadicValue((1 << p) - 1)
        stim = stimulus_for(vn, "x", ones) + stimulus_for(vn, "y", ones)
        trace = simulate(net, stim, 2 * vn.ready_step)
        out_ids = set(vn.pos.z)
        last = max(t for t, n in trace.events if n in out_ids)
        rows.append((p, *structural_counts(net), last))
    return rows


@dataclass
class IOHarness:
    """One adder wrapped in an input relay layer and an output relay layer.

    External spikes land on the input relays at step 0; each relay forwards
    to its adder input neuron after one step, and each adder output neuron
    forwards to an output relay after one step. This is the shape of a
    network that a host drives over real input and output neurons.
    """

    circuit: Circuit
    vn: VirtualNeuronHandle
    in_relays: dict[tuple[str, int], tuple[int, ...]]
    out_relays: dict[int, tuple[int, ...]]
    network: Network = field(init=False)

    def __post_init__(self):
        self.network = self.circuit.network

    @property
    def readout_step(self) -> int:
        return self.vn.ready_step + 1

    def stimulus(self, x: DyadicValue, y: DyadicValue) -> Stimulus:
        inj = []
        for port, v in (("x", x), ("y", y)):
            for sign, bv in zip((1, -1), encode_value(v, self.vn.precision)):
                ids = self.in_relays.get((port, sign), ())
                inj.extend((0, n, 1) for n, b in zip(ids, bv.bits) if b)
        return Stimulus(tuple(inj))

    def run(self, x: DyadicValue, y: DyadicValue, horizon: int | None = None) -> tuple[DyadicValue, SpikeTrace]:
        horizon = self.readout_step if horizon is None else horizon
        trace = simulate(self.network, self.stimulus(x, y), horizon)
        return decode_output(self.vn, trace), trace


def build_io_harness(p: PrecisionVector) -> IOHarness:
    c = Circuit()
    vn = c.add_virtual_neuron(p, inject_step=1, name="vn0")
    in_relays = {}
    out_relays = {}
    for sign, rail in vn.rails():
        tag = "+" if sign > 0 else "-"
        for port in ("x", "y"):
            relays = []
            for n in rail.port(port):
                r = c.add_neuron(0)
                c.add_synapse(r, n, 1, 1)
                relays.append(r)
            in_relays[(port, sign)] = tuple(relays)
            c.ports[f"in.{port}{tag}"] = tuple(relays)
        relays = []
        for n in rail.z:
            r = c.add_neuron(0)
            c.add_synapse(n, r, 1, 1)
            relays.append(r)
        out_relays[sign] = tuple(relays)
        c.ports[f"out.z{tag}"] = tuple(relays)
    c.set_output(vn)
    return IOHarness(c, vn, in_relays, out_relays)


def random_rail_values(rng: np.random.Generator, p: PrecisionVector, count: int) -> list[DyadicValue]:
    """Uniform draws over every representable (pos, neg) pair under ``p``."""
    pos = rng.integers(0, 1 << p.p_pos, size=count, dtype=np.uint64) if p.p_pos else np.zeros(count, np.uint64)
    neg = rng.integers(0, 1 << p.p_neg, size=count, dtype=np.uint64) if p.p_neg else np.zeros(count, np.uint64)
    dp, dn = 1 << p.pos_frac, 1 << p.neg_frac
    return [DyadicValue(Fraction(int(a), dp), -Fraction(int(b), dn)) for a, b in zip(pos, neg)]


@dataclass(frozen=True)
class SpikeSurvey:
    cases: int
    mean_spikes: float
    mean_adder_spikes: float
    mean_energy: float
    mean_power: float
    seed: int


def survey_additions(
    p: PrecisionVector = PrecisionVector(4, 4, 4, 4),
    cases: int = 1000,
    seed: int = 0,
    model: EnergyModel | None = None,
    window: int = EVALUATION_WINDOW_STEPS,
) -> SpikeSurvey:
    """Average spikes and energy per random addition on the relay-wrapped adder.

    ``mean_adder_spikes`` counts only the adder's own neurons (relays excluded).
    Each case is charged for a fixed ``window`` of steps.
    """
    model = model or EnergyModel()
    harness = build_io_harness(p)
    adder_ids = _adder_neurons(harness.vn)
    rng = np.random.default_rng(seed)
    xs = random_rail_values(rng, p, cases)
    ys = random_rail_values(rng, p, cases)
    totals = adder = 0
    energy = power = 0.0
    for x, y in zip(xs, ys):
        out, trace = harness.run(x, y, horizon=window - 1)
        if out != x + y:
            raise AssertionError(f"adder returned {out} for {x} + {y}")
        m = estimate_energy(trace, harness.network, model)
        totals += m.total_spikes
        adder += sum(1 for _, n in trace.events if n in adder_ids)
        energy += m.energy
        power += m.power
    return SpikeSurvey(cases, totals / cases, adder / cases, energy / cases, power / cases, seed)


def _adder_neurons(vn: VirtualNeuronHandle) -> set[int]:
    ids = set()
    for _, r in vn.rails():
        ids.update(r.x, r.y, r.z)
        for g in r.groups:
            ids.update(g)
    return ids


def mean_set_bits(bits: int, samples: int = 10_000, seed: int = 0) -> float:
    """Average spike count of encoding uniform ``bits``-wide rail values."""
    p = PrecisionVector(bits, 0, 0, 0)
    values = random_rail_values(np.random.default_rng(seed), p, samples)
    return sum(sum(encode_value(v, p)[0].bits) for v in values) / samples


def format_table(headers: Sequence[str], rows: Iterable[Sequence[object]]) -> str:
    rows = [[str(v) for v in r] for r in rows]
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(headers)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(headers, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines.extend("  ".join(v.rjust(w) for v, w in zip(r, widths)) for r in rows)
    return "\n".join(lines)


def format_kv(pairs: Iterable[tuple[str, object]]) -> str:
    return "\n".join(f"{k}={v}" for k, v in pairs)
