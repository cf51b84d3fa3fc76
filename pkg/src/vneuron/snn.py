"""Discrete-time simulation of zero-leak integrate-and-fire networks.

Every neuron starts each step at its reset state, adds the charge that
arrives during that step, and spikes when the result reaches its
threshold. Nothing carries over to the next step, spike or no spike.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence, Union

Charge = Union[int, Fraction]


class StructuralError(ValueError):
    """A network or stimulus references something that does not exist."""


def is_dyadic(q: Fraction) -> bool:
    d = q.denominator
    return d & (d - 1) == 0


def as_dyadic(value) -> Fraction:
    q = Fraction(value)
    if not is_dyadic(q):
        raise ValueError(f"{value!r} is not a dyadic rational")
    return q


def _fast(q: Fraction) -> Charge:
    # ints keep the hot loop cheap; mixing int and Fraction stays exact
    return q.numerator if q.denominator == 1 else q


@dataclass(frozen=True)
class NeuronSpec:
    id: int
    threshold: int
    reset_state: int = -1


@dataclass(frozen=True)
class SynapseSpec:
    pre: int
    post: int
    weight: Fraction
    delay: int = 1

    def __post_init__(self):
        object.__setattr__(self, "weight", as_dyadic(self.weight))
        if self.delay < 1:
            raise StructuralError(f"synapse {self.pre}->{self.post}: delay {self.delay} < 1")


@dataclass(frozen=True)
class Network:
    """Immutable feed-forward netlist.

    ``ports`` maps a port name to its neuron ids, most significant bit first.
    Input port names start with an ``in`` role marker only by convention of the
    builders; the simulator itself does not care about ports.
    """

    neurons: tuple[NeuronSpec, ...] = ()
    synapses: tuple[SynapseSpec, ...] = ()
    ports: Mapping[str, tuple[int, ...]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "neurons", tuple(self.neurons))
        object.__setattr__(self, "synapses", tuple(self.synapses))
        object.__setattr__(self, "ports", {k: tuple(v) for k, v in self.ports.items()})
        self.validate()

    def validate(self) -> None:
        for i, n in enumerate(self.neurons):
            if n.id != i:
                raise StructuralError(f"neuron ids must be dense: position {i} holds id {n.id}")
        size = len(self.neurons)
        for s in self.synapses:
            if not (0 <= s.pre < size and 0 <= s.post < size):
                raise StructuralError(f"synapse {s.pre}->{s.post} references a missing neuron")
        for name, ids in self.ports.items():
            for i in ids:
                if not 0 <= i < size:
                    raise StructuralError(f"port {name!r} references missing neuron {i}")
        if _has_cycle(size, self.synapses):
            raise StructuralError("synapse graph has a cycle")

    @cached_property
    def fanout(self) -> tuple[tuple[tuple[int, int, Charge], ...], ...]:
        out: list[list[tuple[int, int, Charge]]] = [[] for _ in self.neurons]
        for s in self.synapses:
            out[s.pre].append((s.post, s.delay, _fast(s.weight)))
        return tuple(tuple(o) for o in out)

    @cached_property
    def spontaneous(self) -> tuple[int, ...]:
        """Neurons whose reset state alone reaches threshold (none in built circuits)."""
        return tuple(n.id for n in self.neurons if n.reset_state >= n.threshold)


def _has_cycle(size: int, synapses: Sequence[SynapseSpec]) -> bool:
    succ: list[list[int]] = [[] for _ in range(size)]
    indeg = [0] * size
    for s in synapses:
        succ[s.pre].append(s.post)
        indeg[s.post] += 1
    stack = [i for i in range(size) if indeg[i] == 0]
    seen = 0
    while stack:
        n = stack.pop()
        seen += 1
        for m in succ[n]:
            indeg[m] -= 1
            if indeg[m] == 0:
                stack.append(m)
    return seen != size


@dataclass(frozen=True)
class Stimulus:
    injections: tuple[tuple[int, int, Charge], ...] = ()

    def __post_init__(self):
        inj = []
        for t, n, q in self.injections:
            if t < 0:
                raise ValueError(f"injection at negative step {t}")
            inj.append((int(t), int(n), q if type(q) is int else as_dyadic(q)))
        object.__setattr__(self, "injections", tuple(inj))

    def __add__(self, other: Stimulus) -> Stimulus:
        return Stimulus(self.injections + other.injections)

    @property
    def last_step(self) -> int:
        return max((t for t, _, _ in self.injections), default=0)


@dataclass(frozen=True)
class SpikeTrace:
    events: tuple[tuple[int, int], ...]
    horizon: int

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(sorted(set(self.events))))

    def __len__(self) -> int:
        return len(self.events)

    def spikes_of(self, neuron: int) -> list[int]:
        return [t for t, n in self.events if n == neuron]

    def at(self, step: int) -> set[int]:
        return {n for t, n in self.events if t == step}


def simulate(net: Network, stim: Stimulus, horizon: int) -> SpikeTrace:
    """Run ``net`` for steps ``0..horizon`` and return every spike event."""
    if horizon < 0:
        raise ValueError(f"horizon must be >= 0, got {horizon}")
    size = len(net.neurons)
    pending: defaultdict[int, defaultdict[int, Charge]] = defaultdict(lambda: defaultdict(int))
    for t, n, q in stim.injections:
        if not 0 <= n < size:
            raise StructuralError(f"stimulus targets missing neuron {n}")
        if t > horizon:
            raise ValueError(f"injection at step {t} lies beyond horizon {horizon}")
        pending[t][n] += _fast(q)

    neurons = net.neurons
    fanout = net.fanout
    spontaneous = net.spontaneous
    events: list[tuple[int, int]] = []
    for t in range(horizon + 1):
        arriving = pending.pop(t, None)
        if arriving is None and not spontaneous:
            if not pending:
                break
            continue
        fired = []
        if arriving:
            for n, q in arriving.items():
                spec = neurons[n]
                if spec.reset_state + q >= spec.threshold:
                    fired.append(n)
        for n in spontaneous:
            if arriving is None or n not in arriving:
                fired.append(n)
        for n in fired:
            events.append((t, n))
            for post, delay, w in fanout[n]:
                pending[t + delay][post] += w
    return SpikeTrace(tuple(events), horizon)


def bit_group_response(s: int) -> tuple[int, int]:
    """Reference (sum, carry) of one bit-neuron group whose inputs total ``s``."""
    if not 0 <= s <= 3:
        raise ValueError(f"bit group input sum must lie in 0..3, got {s}")
    return s % 2, int(s >= 2)


def spiking_neurons(trace: SpikeTrace, ids: Iterable[int]) -> dict[int, list[int]]:
    wanted = set(ids)
    out: dict[int, list[int]] = {i: [] for i in wanted}
    for t, n in trace.events:
        if n in wanted:
            out[n].append(t)
    return out
