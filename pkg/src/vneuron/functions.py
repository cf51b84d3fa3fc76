"""Primitive function circuits assembled from virtual neurons.

Every circuit here follows the same pattern: holder virtual neurons take
values at step 0 (value on X, nothing on Y, so they act as identity), and
downstream virtual neurons add what the holders produce.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .builder import Circuit, VirtualNeuronHandle
from .codec import DyadicValue, PrecisionVector, encode_value
from .snn import Network, SpikeTrace

KINDS = ("constant", "successor", "predecessor", "negate", "sum_tree")


@dataclass
class FunctionCircuit:
    kind: str
    circuit: Circuit
    params: dict = field(default_factory=dict)
    depth: int = 1

    @property
    def network(self) -> Network:
        return self.circuit.network

    @property
    def output(self) -> VirtualNeuronHandle:
        return self.circuit.output_handle

    @property
    def input_labels(self) -> list[str]:
        return list(self.circuit.inputs)

    def evaluate(self, *args: DyadicValue, **kwargs: DyadicValue) -> DyadicValue:
        return self.run(*args, **kwargs)[0]

    def run(self, *args: DyadicValue, **kwargs: DyadicValue) -> tuple[DyadicValue, SpikeTrace]:
        values = dict(zip(self.input_labels, args))
        values.update(kwargs)
        return self.circuit.run(values, self._network)

    @property
    def _network(self) -> Network:
        cached = self.__dict__.get("_net")
        if cached is None:
            cached = self.__dict__["_net"] = self.circuit.network
        return cached


def _three_neuron(kind: str, p: PrecisionVector, fixed: DyadicValue, weight: int, params) -> FunctionCircuit:
    # holder 0 carries the fixed value, holder 1 carries x, neuron 2 adds them
    encode_value(fixed, p)
    c = Circuit()
    k_vn = c.add_virtual_neuron(p, 0, "n0")
    x_vn = c.add_virtual_neuron(p, 0, "n1")
    out = c.add_virtual_neuron(p.widened(), k_vn.ready_step + 1, "n2")
    c.connect_weighted(k_vn, out, "x", 1)
    c.connect_weighted(x_vn, out, "y", weight)
    c.drive(k_vn, "x", fixed)
    c.declare_input("x", x_vn, "x")
    c.set_output(out)
    return FunctionCircuit(kind, c, params)


def build_constant(k: DyadicValue, p: PrecisionVector) -> FunctionCircuit:
    """Output is ``k`` whatever ``x`` is: the x holder reaches the adder through weight 0."""
    return _three_neuron("constant", p, k, 0, {"k": k})


def build_successor(p: PrecisionVector) -> FunctionCircuit:
    if p.pos_int < 1:
        raise ValueError(f"successor needs an integer bit on the positive rail, got {p}")
    return _three_neuron("successor", p, DyadicValue(1, 0), 1, {})


def build_predecessor(p: PrecisionVector) -> FunctionCircuit:
    """Adds (0, -1): the 2^0 bit of the fixed holder's negative rail is set."""
    if p.neg_int < 1:
        raise ValueError(f"predecessor needs an integer bit on the negative rail, got {p}")
    return _three_neuron("predecessor", p, DyadicValue(0, -1), 1, {})


def build_negate(p: PrecisionVector) -> FunctionCircuit:
    """Rails of the holder's output cross over into the other rail of the result."""
    if not p.symmetric:
        raise ValueError(f"negate needs equal positive and negative precision, got {p}")
    c = Circuit()
    x_vn = c.add_virtual_neuron(p, 0, "n0")
    out = c.add_virtual_neuron(p.widened(), x_vn.ready_step + 1, "n1")
    c.connect_weighted(x_vn, out, "x", 1, swap_rails=True)
    c.declare_input("x", x_vn, "x")
    c.set_output(out)
    return FunctionCircuit("negate", c, {})


def build_sum_tree(n: int, p: PrecisionVector) -> FunctionCircuit:
    """Balanced pairwise reduction of ``n`` holders, ceil(log2 n) adder levels deep.

    A virtual neuron at level L has L extra integer bits. When a subtree runs
    out of pairs early, its lone value sits in a holder built at that level and
    injected when the level starts, so every edge stays one step long and the
    tree uses exactly 2n - 1 virtual neurons.
    """
    if n < 2:
        raise ValueError(f"sum tree needs at least 2 inputs, got {n}")
    depth = math.ceil(math.log2(n))
    c = Circuit()
    inject = [0]
    for level in range(depth):
        inject.append(inject[-1] + p.widened(level).width + 2 + 1)
    labels = iter(f"x{i}" for i in range(n))

    def build(count: int, level: int) -> VirtualNeuronHandle:
        if count == 1:
            vn = c.add_virtual_neuron(p.widened(level), inject[level], f"n{len(c.handles)}")
            c.declare_input(next(labels), vn, "x")
            return vn
        left = build((count + 1) // 2, level - 1)
        right = build(count // 2, level - 1)
        vn = c.add_virtual_neuron(p.widened(level), inject[level], f"n{len(c.handles)}")
        c.connect(left, right, vn)
        return vn

    root = build(n, depth)
    c.set_output(root)
    return FunctionCircuit("sum_tree", c, {"n": n}, depth)
