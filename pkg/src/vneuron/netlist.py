"""Line-oriented netlist and spike-trace files.

Netlist::

    VN-NETLIST 1
    NEURON <id> <threshold> <reset> 0
    SYNAPSE <pre> <post> <m>*2^<e> <delay>
    PORT <IN|OUT> <name> <id> ...
    VNEURON <name> <a> <b> <c> <d> <inject_step>
    EDGE <producer> <consumer> <port> <weight> <swap> <truncate>
    INPUT <label> <vn> <port>
    DRIVE <vn> <port> <pos>,<neg>
    OUTPUT <vn>

The trailing ``0`` on NEURON lines is a leak column that is always zero.
VNEURON/EDGE/INPUT/DRIVE/OUTPUT describe the virtual neurons laid over the
raw network so that a file can be run and decoded without the builder.

Trace::

    HORIZON <last step>
    SPIKE <time> <neuron>
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import TextIO

from .builder import Circuit, Edge, RailPorts, VirtualNeuronHandle
from .codec import DyadicValue, PrecisionVector, format_dyadic, parse_dual
from .snn import SpikeTrace, StructuralError, SynapseSpec, as_dyadic

MAGIC = "VN-NETLIST 1"


class NetlistError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


def format_weight(w: Fraction) -> str:
    w = as_dyadic(w)
    if w == 0:
        return "0*2^0"
    m, e = w.numerator, -(w.denominator.bit_length() - 1)
    while m % 2 == 0:
        m //= 2
        e += 1
    return f"{m}*2^{e}"


_WEIGHT = re.compile(r"^(-?\d+)\*2\^(-?\d+)$")


def parse_weight(text: str) -> Fraction:
    m = _WEIGHT.match(text)
    if not m:
        raise ValueError(f"bad weight {text!r}; expected <m>*2^<e>")
    mant, exp = int(m.group(1)), int(m.group(2))
    return Fraction(mant) * (Fraction(2) ** exp)


def _direction(port_name: str) -> str:
    tail = port_name.rsplit(".", 1)[-1]
    return "OUT" if port_name.startswith("out.") or tail[:1] == "z" else "IN"


def emit_netlist(c: Circuit) -> str:
    lines = [MAGIC]
    net = c.network
    for n in net.neurons:
        lines.append(f"NEURON {n.id} {n.threshold} {n.reset_state} 0")
    for s in net.synapses:
        lines.append(f"SYNAPSE {s.pre} {s.post} {format_weight(s.weight)} {s.delay}")
    for name, ids in net.ports.items():
        lines.append(f"PORT {_direction(name)} {name} " + " ".join(map(str, ids)))
    for vn in c.handles.values():
        a, b, cc, d = vn.precision
        lines.append(f"VNEURON {vn.name} {a} {b} {cc} {d} {vn.inject_step}")
    for e in c.edges:
        lines.append(f"EDGE {e.producer} {e.consumer} {e.port} {e.weight} {int(e.swap_rails)} {int(e.truncate)}")
    for label, (vn, port) in c.inputs.items():
        lines.append(f"INPUT {label} {vn} {port}")
    for vn, port, v in c.drives:
        lines.append(f"DRIVE {vn} {port} {v}")
    if c.output is not None:
        lines.append(f"OUTPUT {c.output}")
    return "\n".join(lines) + "\n"


def _recover_rail(c: Circuit, name: str, tag: str, int_bits: int, frac_bits: int) -> RailPorts:
    try:
        x, y, z = (c.ports[f"{name}.{p}{tag}"] for p in ("x", "y", "z"))
    except KeyError as exc:
        raise NetlistError(f"virtual neuron {name} lacks port {exc.args[0]}") from None
    n_bits = int_bits + frac_bits
    if len(x) != n_bits or len(y) != n_bits or len(z) != n_bits + 1:
        raise NetlistError(f"virtual neuron {name}{tag}: port widths disagree with precision")
    # bit groups sit between the last Y neuron and the first output neuron
    first = y[-1] + 1
    groups = []
    for i in range(n_bits + 1):
        size = 2 if i == 0 else 3
        group = tuple(range(first, first + size))
        if [c.thresholds[g] for g in group] != list(range(size)):
            raise NetlistError(f"virtual neuron {name}{tag}: bit group {i} is malformed")
        groups.append(group)
        first += size
    if first != z[0]:
        raise NetlistError(f"virtual neuron {name}{tag}: bit groups do not fill the gap before outputs")
    return RailPorts(int_bits, frac_bits, x, y, z, tuple(groups))


def parse_netlist(text: str) -> Circuit:
    c = Circuit()
    raw = text.splitlines()
    body = [(i + 1, ln.split("#", 1)[0].strip()) for i, ln in enumerate(raw)]
    body = [(i, ln) for i, ln in body if ln]
    if not body or body[0][1] != MAGIC:
        raise NetlistError(f"missing '{MAGIC}' header", 1)
    neurons: dict[int, tuple[int, int]] = {}
    vn_lines = []
    edge_lines = []
    for lineno, ln in body[1:]:
        kw, *args = ln.split()
        try:
            if kw == "NEURON":
                nid, th, reset, leak = (int(a) for a in args)
                if leak != 0:
                    raise NetlistError("leak column must be 0", lineno)
                if reset != -1:
                    raise NetlistError(f"reset state {reset} unsupported; builders use -1", lineno)
                neurons[nid] = (th, reset)
            elif kw == "SYNAPSE":
                pre, post, w, delay = args
                c.synapses.append(SynapseSpec(int(pre), int(post), parse_weight(w), int(delay)))
            elif kw == "PORT":
                direction, name, *ids = args
                if direction not in ("IN", "OUT"):
                    raise NetlistError(f"port direction must be IN or OUT, got {direction}", lineno)
                c.ports[name] = tuple(int(i) for i in ids)
            elif kw == "VNEURON":
                name, a, b, cc, d, inject = args
                vn_lines.append((lineno, name, PrecisionVector(int(a), int(b), int(cc), int(d)), int(inject)))
            elif kw == "EDGE":
                prod, cons, port, w, swap, trunc = args
                edge_lines.append(Edge(prod, cons, port, int(w), bool(int(swap)), bool(int(trunc))))
            elif kw == "INPUT":
                label, vn, port = args
                c.inputs[label] = (vn, port)
            elif kw == "DRIVE":
                vn, port, value = args
                c.drives.append((vn, port, parse_dual(value)))
            elif kw == "OUTPUT":
                (c.output,) = args
            else:
                raise NetlistError(f"unknown record {kw!r}", lineno)
        except NetlistError:
            raise
        except ValueError as exc:
            raise NetlistError(f"{kw}: {exc}", lineno) from None
    if sorted(neurons) != list(range(len(neurons))):
        raise NetlistError("neuron ids must be dense from 0")
    c.thresholds = [neurons[i][0] for i in range(len(neurons))]
    for lineno, name, p, inject in vn_lines:
        rails = {}
        for sign, tag in ((1, "+"), (-1, "-")):
            ib, fb = p.rail(sign)
            rails[sign] = _recover_rail(c, name, tag, ib, fb) if ib + fb else None
        c.handles[name] = VirtualNeuronHandle(name, p, rails[1], rails[-1], inject)
    c.edges = edge_lines
    for label, (vn, _) in c.inputs.items():
        if vn not in c.handles:
            raise NetlistError(f"input {label} names unknown virtual neuron {vn}")
    if c.output is not None and c.output not in c.handles:
        raise NetlistError(f"output names unknown virtual neuron {c.output}")
    try:
        c.network
    except StructuralError as exc:
        raise NetlistError(str(exc)) from None
    return c


def read_netlist(fh: TextIO) -> Circuit:
    return parse_netlist(fh.read())


def emit_trace(trace: SpikeTrace) -> str:
    lines = [f"HORIZON {trace.horizon}"]
    lines.extend(f"SPIKE {t} {n}" for t, n in trace.events)
    return "\n".join(lines) + "\n"


def parse_trace(text: str) -> SpikeTrace:
    events = []
    horizon = None
    for lineno, ln in enumerate(text.splitlines(), 1):
        ln = ln.split("#", 1)[0].strip()
        if not ln:
            continue
        kw, *args = ln.split()
        if kw == "HORIZON" and len(args) == 1:
            horizon = int(args[0])
        elif kw == "SPIKE" and len(args) == 2:
            events.append((int(args[0]), int(args[1])))
        else:
            raise NetlistError(f"bad trace record {ln!r}", lineno)
    if horizon is None:
        horizon = max((t for t, _ in events), default=0)
    return SpikeTrace(tuple(events), horizon)


def format_value(v: DyadicValue) -> str:
    return f"{format_dyadic(v.pos)},{format_dyadic(v.neg)}"
