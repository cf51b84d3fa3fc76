"""Command-line entry point: build, run, verify, complexity, energy, func.

Exit codes: 0 success, 1 verification failure, 2 usage or representability error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import functions
from .builder import Circuit, CompositionError, build_adder_circuit
from .codec import (
    DyadicValue,
    NotRepresentable,
    PrecisionVector,
    TimingViolation,
    format_dyadic,
    parse_dual,
)
from .metrics import (
    EVALUATION_WINDOW_STEPS,
    EnergyModel,
    complexity_table,
    estimate_energy,
    format_kv,
    format_table,
    survey_additions,
)
from .netlist import NetlistError, emit_netlist, emit_trace, format_value, parse_netlist, parse_trace
from .snn import StructuralError
from .verify import verify_bits

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _precision(text: str) -> PrecisionVector:
    try:
        p = PrecisionVector.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if p.p_pos == 0 and p.p_neg == 0:
        raise argparse.ArgumentTypeError(f"precision {text} has no bits")
    return p


def _dual(text: str, what: str) -> DyadicValue:
    try:
        return parse_dual(text)
    except NotRepresentable as exc:
        raise NotRepresentable(f"{what}: {exc}", exc.rail) from None
    except ValueError as exc:
        raise UsageError(f"{what}: {exc}") from None


def _write(text: str, dest: str | None) -> None:
    if dest is None or dest == "-":
        sys.stdout.write(text)
    else:
        Path(dest).write_text(text)


def build_circuit(kind: str, p: PrecisionVector, k: DyadicValue | None = None, n: int | None = None) -> Circuit:
    kind = kind.replace("-", "_")
    if kind == "adder":
        return build_adder_circuit(p)
    if kind == "constant":
        return functions.build_constant(k if k is not None else DyadicValue(), p).circuit
    if kind == "successor":
        return functions.build_successor(p).circuit
    if kind == "predecessor":
        return functions.build_predecessor(p).circuit
    if kind == "negate":
        return functions.build_negate(p).circuit
    if kind == "sum_tree":
        return functions.build_sum_tree(n or 2, p).circuit
    raise UsageError(f"unknown kind {kind!r}")


def _constant(args) -> DyadicValue | None:
    return None if args.k is None else _dual(args.k, "--k")


def cmd_build(args) -> int:
    c = build_circuit(args.kind, args.precision, _constant(args), args.n)
    _write(emit_netlist(c), args.output)
    return EXIT_OK


def _bind_inputs(c: Circuit, args) -> dict[str, DyadicValue]:
    values: dict[str, DyadicValue] = {}
    if args.x is not None:
        values["x"] = _dual(args.x, "--x")
    if args.y is not None:
        values["y"] = _dual(args.y, "--y")
    for item in args.input or ():
        label, _, text = item.partition("=")
        if not _:
            raise UsageError(f"--in expects label=value, got {item!r}")
        values[label] = _dual(text, f"--in {label}")
    unknown = sorted(set(values) - set(c.inputs))
    if unknown:
        raise UsageError(f"netlist has no input {unknown[0]!r}; inputs are {sorted(c.inputs)}")
    return values


def cmd_run(args) -> int:
    c = parse_netlist(Path(args.netlist).read_text())
    values = _bind_inputs(c, args)
    result, trace = c.run(values)
    if args.trace:
        Path(args.trace).write_text(emit_trace(trace))
    print(f"z={format_value(result)}")
    print(f"value={format_dyadic(result.value())}")
    print(f"ready_step={c.output_handle.ready_step}")
    print(f"spikes={len(trace)}")
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.exhaustive and args.samples is not None:
        raise UsageError("--exhaustive and --samples are mutually exclusive")
    samples = None if args.exhaustive else (args.samples if args.samples is not None else 100_000)
    if samples is None and args.bits != 8:
        raise UsageError("exhaustive verification is only allowed at --bits 8")
    report = verify_bits(args.bits, samples, args.seed)
    print(report.summary())
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_complexity(args) -> int:
    rows = complexity_table(args.max_p)
    print(format_table(("P+", "neurons", "synapses", "steps"), rows))
    return EXIT_OK


def _model(args) -> EnergyModel:
    base = EnergyModel()
    return EnergyModel(
        e_spike=base.e_spike if args.e_spike is None else args.e_spike,
        p_idle_neuron=args.p_idle_neuron,
        p_idle_synapse=args.p_idle_synapse,
        step_period=base.step_period if args.step_period is None else args.step_period,
    )


def cmd_energy(args) -> int:
    model = _model(args)
    if args.netlist or args.trace:
        if not (args.netlist and args.trace):
            raise UsageError("--netlist and --trace go together")
        c = parse_netlist(Path(args.netlist).read_text())
        trace = parse_trace(Path(args.trace).read_text())
        m = estimate_energy(trace, c.network, model, args.steps)
        print(format_table(("spikes", "steps", "energy_nJ", "power_mW"),
                           [(m.total_spikes, m.steps, f"{m.energy * 1e9:.3f}", f"{m.power * 1e3:.3f}")]))
        print(format_kv(m.as_pairs()))
        return EXIT_OK
    s = survey_additions(PrecisionVector(4, 4, 4, 4), args.samples, args.seed, model,
                         args.steps or EVALUATION_WINDOW_STEPS)
    print(format_table(
        ("cases", "mean_spikes", "adder_only", "energy_nJ", "power_mW"),
        [(s.cases, f"{s.mean_spikes:.2f}", f"{s.mean_adder_spikes:.2f}",
          f"{s.mean_energy * 1e9:.3f}", f"{s.mean_power * 1e3:.3f}")],
    ))
    print(format_kv([
        ("seed", s.seed), ("cases", s.cases), ("mean_spikes", f"{s.mean_spikes:.3f}"),
        ("mean_adder_spikes", f"{s.mean_adder_spikes:.3f}"),
        ("energy_j", f"{s.mean_energy:.6e}"), ("power_w", f"{s.mean_power:.6e}"),
    ]))
    return EXIT_OK


def cmd_func(args) -> int:
    c = build_circuit(args.kind, args.precision, _constant(args), args.n)
    values = _bind_inputs(c, args)
    result, trace = c.run(values)
    print(f"z={format_value(result)}")
    print(f"value={format_dyadic(result.value())}")
    print(f"virtual_neurons={c.vn_count()}")
    print(f"ready_step={c.output_handle.ready_step}")
    print(f"spikes={len(trace)}")
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vneuron", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    kinds = ("adder", "constant", "successor", "predecessor", "negate", "sum-tree")

    def circuit_flags(sp):
        sp.add_argument("--precision", type=_precision, required=True, help="a,b,c,d bit counts")
        sp.add_argument("--kind", choices=kinds, default="adder")
        sp.add_argument("--k", help="constant value for --kind constant")
        sp.add_argument("--n", type=int, help="number of inputs for --kind sum-tree")

    def input_flags(sp):
        sp.add_argument("--x", help="value for input x, 'pos,neg' or a single number")
        sp.add_argument("--y", help="value for input y")
        sp.add_argument("--in", dest="input", action="append", metavar="LABEL=VALUE",
                        help="value for any named input (repeatable)")

    sp = sub.add_parser("build", help="write a netlist")
    circuit_flags(sp)
    sp.add_argument("-o", "--output", help="output file (default stdout)")
    sp.set_defaults(func=cmd_build)

    sp = sub.add_parser("run", help="simulate a netlist and decode its output")
    sp.add_argument("--netlist", required=True)
    input_flags(sp)
    sp.add_argument("--trace", help="write the spike trace here")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("verify", help="check adders against exact arithmetic")
    sp.add_argument("--bits", type=int, choices=(8, 16, 32), default=8)
    sp.add_argument("--exhaustive", action="store_true")
    sp.add_argument("--samples", type=int)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("complexity", help="adder size and latency versus precision")
    sp.add_argument("--max-p", type=int, default=128)
    sp.set_defaults(func=cmd_complexity)

    sp = sub.add_parser("energy", help="spike-based energy and power estimate")
    sp.add_argument("--netlist")
    sp.add_argument("--trace")
    sp.add_argument("--e-spike", type=float, help="joules per spike")
    sp.add_argument("--p-idle-neuron", type=float, default=0.0, help="watts per neuron")
    sp.add_argument("--p-idle-synapse", type=float, default=0.0, help="watts per synapse")
    sp.add_argument("--step-period", type=float, help="seconds per time step")
    sp.add_argument("--steps", type=int, help="steps charged per run")
    sp.add_argument("--samples", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_energy)

    sp = sub.add_parser("func", help="build and evaluate a function circuit")
    circuit_flags(sp)
    input_flags(sp)
    sp.set_defaults(func=cmd_func)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except NotRepresentable as exc:
        print(f"error: not representable: {exc}", file=sys.stderr)
    except TimingViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (UsageError, CompositionError, NetlistError, StructuralError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
