"""Virtual-neuron adder synthesis and composition into larger networks.

Neuron ids are handed out densely in a fixed order so that netlists and
traces are reproducible: per rail (positive first) the X inputs MSB to LSB,
then Y inputs, then the bit groups from the least significant group up
(each ordered by threshold 0, 1, 2), then the outputs MSB to LSB.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

from .codec import DyadicValue, PrecisionVector, decode_output, stimulus_for
from .snn import NeuronSpec, Network, SpikeTrace, Stimulus, SynapseSpec, simulate


class CompositionError(ValueError):
    """Virtual neurons cannot be wired together as requested."""


@dataclass(frozen=True)
class RailPorts:
    int_bits: int
    frac_bits: int
    x: tuple[int, ...]
    y: tuple[int, ...]
    z: tuple[int, ...]
    groups: tuple[tuple[int, ...], ...]  # groups[i] serves bit i (LSB = 0)

    @property
    def bits(self) -> int:
        return self.int_bits + self.frac_bits

    @property
    def z_int_bits(self) -> int:
        return self.int_bits + 1

    def port(self, name: str) -> tuple[int, ...]:
        return {"x": self.x, "y": self.y, "z": self.z}[name]

    def exponent(self, name: str, index: int) -> int:
        """Power of two carried by position ``index`` (MSB first) of a port."""
        top = self.z_int_bits if name == "z" else self.int_bits
        return top - 1 - index


@dataclass(frozen=True)
class VirtualNeuronHandle:
    name: str
    precision: PrecisionVector
    pos: RailPorts | None
    neg: RailPorts | None
    inject_step: int = 0

    @property
    def ready_step(self) -> int:
        return self.inject_step + self.precision.width + 2

    def rail(self, sign: int) -> RailPorts | None:
        return self.pos if sign > 0 else self.neg

    def rails(self) -> Iterator[tuple[int, RailPorts]]:
        for sign in (1, -1):
            r = self.rail(sign)
            if r is not None:
                yield sign, r

    @property
    def bit_groups(self) -> dict[str, tuple[tuple[int, ...], ...]]:
        return {("+" if s > 0 else "-"): r.groups for s, r in self.rails()}


@dataclass(frozen=True)
class Edge:
    producer: str
    consumer: str
    port: str
    weight: int
    swap_rails: bool = False
    truncate: bool = False


def _rail_tag(sign: int) -> str:
    return "+" if sign > 0 else "-"


@dataclass
class Circuit:
    """A composition graph of virtual neurons sharing one spiking network.

    Besides the neurons and synapses, a circuit records which virtual-neuron
    ports take external values (``inputs``), which are held at a fixed value
    (``drives``) and which virtual neuron is read as the result (``output``).
    """

    thresholds: list[int] = field(default_factory=list)
    synapses: list[SynapseSpec] = field(default_factory=list)
    ports: dict[str, tuple[int, ...]] = field(default_factory=dict)
    handles: dict[str, VirtualNeuronHandle] = field(default_factory=dict)
    edges: list[Edge] = field(default_factory=list)
    inputs: dict[str, tuple[str, str]] = field(default_factory=dict)
    drives: list[tuple[str, str, DyadicValue]] = field(default_factory=list)
    output: str | None = None
    _fed: dict[tuple[str, str], set[int]] = field(default_factory=dict, repr=False)

    # -- raw construction -------------------------------------------------

    def add_neuron(self, threshold: int) -> int:
        self.thresholds.append(threshold)
        return len(self.thresholds) - 1

    def add_synapse(self, pre: int, post: int, weight, delay: int = 1) -> None:
        self.synapses.append(SynapseSpec(pre, post, Fraction(weight), delay))

    @property
    def network(self) -> Network:
        neurons = tuple(NeuronSpec(i, th, -1) for i, th in enumerate(self.thresholds))
        return Network(neurons, tuple(self.synapses), dict(self.ports))

    # -- virtual neurons --------------------------------------------------

    def add_virtual_neuron(
        self, p: PrecisionVector, inject_step: int = 0, name: str | None = None
    ) -> VirtualNeuronHandle:
        if p.p_pos == 0 and p.p_neg == 0:
            raise ValueError("a virtual neuron needs at least one bit of precision")
        name = name or f"vn{len(self.handles)}"
        if name in self.handles:
            raise CompositionError(f"duplicate virtual neuron name {name!r}")
        width = p.width
        rails = {}
        for sign in (1, -1):
            ib, fb = p.rail(sign)
            rails[sign] = self._emit_rail(ib, fb, width) if ib + fb else None
        vn = VirtualNeuronHandle(name, p, rails[1], rails[-1], inject_step)
        self.handles[name] = vn
        for sign, r in vn.rails():
            tag = _rail_tag(sign)
            for port in ("x", "y", "z"):
                self.ports[f"{name}.{port}{tag}"] = r.port(port)
        return vn

    def _emit_rail(self, int_bits: int, frac_bits: int, width: int) -> RailPorts:
        n_bits = int_bits + frac_bits
        x = tuple(self.add_neuron(0) for _ in range(n_bits))
        y = tuple(self.add_neuron(0) for _ in range(n_bits))
        groups = tuple(
            tuple(self.add_neuron(th) for th in ((0, 1) if i == 0 else (0, 1, 2)))
            for i in range(n_bits + 1)
        )
        z = tuple(self.add_neuron(0) for _ in range(n_bits + 1))
        # x, y are MSB first; bit i sits at position n_bits - 1 - i
        for i in range(n_bits):
            for src in (x[n_bits - 1 - i], y[n_bits - 1 - i]):
                for g in groups[i]:
                    self.add_synapse(src, g, 1, i + 1)
        for i in range(n_bits):
            carry = groups[i][1]
            for g in groups[i + 1]:
                self.add_synapse(carry, g, 1, 1)
        for i, group in enumerate(groups):
            out = z[n_bits - i]
            for th, g in enumerate(group):
                self.add_synapse(g, out, -1 if th == 1 else 1, width - i + 1)
        return RailPorts(int_bits, frac_bits, x, y, z, groups)

    # -- composition ------------------------------------------------------

    def _reaches(self, src: str, dst: str) -> bool:
        stack, seen = [src], set()
        while stack:
            n = stack.pop()
            if n == dst:
                return True
            if n in seen:
                continue
            seen.add(n)
            stack.extend(e.consumer for e in self.edges if e.producer == n)
        return False

    def connect_weighted(
        self,
        producer: VirtualNeuronHandle,
        consumer: VirtualNeuronHandle,
        port: str,
        weight: int = 1,
        *,
        truncate: bool = False,
        swap_rails: bool = False,
    ) -> Circuit:
        """Bitwise delay-1 synapses from ``producer``'s output onto one input port.

        Bits are matched by binary-point position. ``weight`` 1 passes the value
        through; 0 keeps the synapses but delivers no charge.
        """
        port = port.lower()
        if port not in ("x", "y"):
            raise CompositionError(f"unknown port {port!r}")
        if weight not in (0, 1):
            raise CompositionError(f"edge weight must be 0 or 1, got {weight}")
        for vn in (producer, consumer):
            if self.handles.get(vn.name) is not vn:
                raise CompositionError(f"{vn.name} does not belong to this circuit")
        if self._reaches(consumer.name, producer.name):
            raise CompositionError(f"edge {producer.name}->{consumer.name} would close a cycle")
        if consumer.inject_step != producer.ready_step + 1:
            raise CompositionError(
                f"{consumer.name} takes inputs at step {consumer.inject_step} but "
                f"{producer.name} is ready at {producer.ready_step}; expected "
                f"{producer.ready_step + 1}"
            )
        if (consumer.name, port) in self.inputs.values():
            raise CompositionError(f"{consumer.name}.{port} is an external input")

        wiring = []
        for sign, src in producer.rails():
            dst = consumer.rail(-sign if swap_rails else sign)
            where = f"{producer.name}{_rail_tag(sign)} -> {consumer.name}.{port}"
            if dst is None:
                raise CompositionError(f"{where}: consumer has no such rail")
            if src.frac_bits > dst.frac_bits:
                raise CompositionError(f"{where}: {src.frac_bits} fraction bits do not fit {dst.frac_bits}")
            if src.z_int_bits > dst.int_bits and not truncate:
                raise CompositionError(
                    f"{where}: {src.z_int_bits} integer bits do not fit {dst.int_bits} "
                    "(widen the consumer or pass truncate=True)"
                )
            targets = dst.port(port)
            for j, n in enumerate(src.z):
                e = src.exponent("z", j)
                if e >= dst.int_bits:
                    continue  # truncated carry bit
                wiring.append((n, targets[dst.int_bits - 1 - e]))

        key = (consumer.name, port)
        fed = self._fed.setdefault(key, set())
        if fed & {post for _, post in wiring}:
            raise CompositionError(f"{consumer.name}.{port} already has a producer on those bits")
        fed.update(post for _, post in wiring)
        for pre, post in wiring:
            self.add_synapse(pre, post, weight, 1)
        self.edges.append(Edge(producer.name, consumer.name, port, weight, swap_rails, truncate))
        return self

    def connect(
        self,
        a: VirtualNeuronHandle,
        b: VirtualNeuronHandle,
        c: VirtualNeuronHandle,
        *,
        truncate: bool = False,
    ) -> Circuit:
        """Feed ``a`` into ``c``'s X port and ``b`` into its Y port."""
        self.connect_weighted(a, c, "x", 1, truncate=truncate)
        self.connect_weighted(b, c, "y", 1, truncate=truncate)
        return self

    # -- roles and evaluation ----------------------------------------------

    def declare_input(self, label: str, vn: VirtualNeuronHandle, port: str = "x") -> None:
        port = port.lower()
        if (vn.name, port) in self._fed:
            raise CompositionError(f"{vn.name}.{port} is already fed by another virtual neuron")
        self.inputs[label] = (vn.name, port)

    def drive(self, vn: VirtualNeuronHandle, port: str, value: DyadicValue) -> None:
        self.drives.append((vn.name, port.lower(), value))

    def set_output(self, vn: VirtualNeuronHandle) -> None:
        self.output = vn.name

    @property
    def output_handle(self) -> VirtualNeuronHandle:
        if self.output is None:
            raise CompositionError("circuit has no designated output")
        return self.handles[self.output]

    def stimulus(self, values: dict[str, DyadicValue]) -> Stimulus:
        unknown = set(values) - set(self.inputs)
        if unknown:
            raise KeyError(f"unknown inputs {sorted(unknown)}; circuit takes {sorted(self.inputs)}")
        stim = Stimulus()
        for label, (name, port) in self.inputs.items():
            if label in values:
                stim = stim + stimulus_for(self.handles[name], port, values[label])
        for name, port, v in self.drives:
            stim = stim + stimulus_for(self.handles[name], port, v)
        return stim

    def run(
        self, values: dict[str, DyadicValue], network: Network | None = None, horizon: int | None = None
    ) -> tuple[DyadicValue, SpikeTrace]:
        """Simulate to ``horizon`` (default: the output's ready step) and decode."""
        out = self.output_handle
        horizon = out.ready_step if horizon is None else horizon
        trace = simulate(network or self.network, self.stimulus(values), horizon)
        return decode_output(out, trace), trace

    def vn_count(self) -> int:
        return len(self.handles)


def build_adder_circuit(p: PrecisionVector) -> Circuit:
    if p.p_pos == 0 and p.p_neg == 0:
        raise ValueError(f"precision {p} has no bits")
    c = Circuit()
    vn = c.add_virtual_neuron(p)
    c.declare_input("x", vn, "x")
    c.declare_input("y", vn, "y")
    c.set_output(vn)
    return c


def build_adder(p: PrecisionVector) -> tuple[Network, VirtualNeuronHandle]:
    c = build_adder_circuit(p)
    return c.network, c.output_handle


def structural_counts(net: Network) -> tuple[int, int]:
    return len(net.neurons), len(net.synapses)


def ripple_carry_add(x_bits, y_bits) -> tuple[int, ...]:
    """Classical software ripple-carry adder over MSB-first bit sequences."""
    if len(x_bits) != len(y_bits):
        raise ValueError("operands must have the same width")
    out = []
    carry = 0
    for xb, yb in zip(reversed(x_bits), reversed(y_bits)):
        s = xb + yb + carry
        out.append(s & 1)
        carry = s >> 1
    out.append(carry)
    return tuple(reversed(out))
