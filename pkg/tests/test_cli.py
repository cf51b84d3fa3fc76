import pytest

from vneuron.cli import main
from vneuron.netlist import parse_trace


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def kv(text):
    return dict(ln.split("=", 1) for ln in text.splitlines() if "=" in ln)


@pytest.fixture
def adder8(tmp_path, capsys):
    path = tmp_path / "adder.net"
    assert run(capsys, "build", "--precision", "2,2,2,2", "-o", str(path))[0] == 0
    return path


def test_build_to_stdout(capsys):
    code, out, _ = run(capsys, "build", "--precision", "2,2,2,2")
    assert code == 0
    lines = out.splitlines()
    assert sum(ln.startswith("NEURON ") for ln in lines) == 54
    assert sum(ln.startswith("SYNAPSE ") for ln in lines) == 96


def test_build_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run(capsys, "build", "--precision", "4,4,4,4", "--kind", "sum-tree", "--n", "4", "-o", str(a))
    run(capsys, "build", "--precision", "4,4,4,4", "--kind", "sum-tree", "--n", "4", "-o", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_run_reference_row(capsys, adder8, tmp_path):
    trace = tmp_path / "t.trace"
    code, out, _ = run(capsys, "run", "--netlist", str(adder8), "--x", "0.75,-2.75", "--y", "1,-2.5",
                       "--trace", str(trace))
    assert code == 0
    got = kv(out)
    assert got["z"] == "1.75,-5.25"
    assert got["value"] == "-3.5"
    assert got["ready_step"] == "6"
    assert int(got["spikes"]) == len(parse_trace(trace.read_text()))


def test_run_32_bit_row(capsys, tmp_path):
    path = tmp_path / "a32.net"
    run(capsys, "build", "--precision", "8,8,8,8", "-o", str(path))
    code, out, _ = run(capsys, "run", "--netlist", str(path), "--x=212.56640625,-203.421875",
                       "--y=218.7265625,-98.91796875")
    assert code == 0
    assert kv(out)["z"] == "431.29296875,-302.33984375"


def test_single_number_input_uses_one_rail(capsys, adder8):
    code, out, _ = run(capsys, "run", "--netlist", str(adder8), "--x=-2.5", "--y", "1.25")
    assert code == 0
    assert kv(out)["z"] == "1.25,-2.5"


def test_not_representable_exits_2(capsys, adder8):
    code, _, err = run(capsys, "run", "--netlist", str(adder8), "--x", "5,0", "--y", "0,0")
    assert code == 2
    assert "not representable" in err and "pos" in err
    code, _, err = run(capsys, "run", "--netlist", str(adder8), "--x", "0.125", "--y", "0")
    assert code == 2


def test_usage_errors_exit_2(capsys, adder8):
    assert run(capsys, "run", "--netlist", str(adder8), "--x", "abc")[0] == 2
    assert run(capsys, "run", "--netlist", str(adder8), "--in", "q=1")[0] == 2
    assert run(capsys, "run", "--netlist", str(adder8) + ".missing", "--x", "1")[0] == 2
    assert run(capsys, "verify", "--bits", "16", "--exhaustive")[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["build", "--precision", "0,0,0,0"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_verify_sampled(capsys):
    code, out, _ = run(capsys, "verify", "--bits", "16", "--samples", "300", "--seed", "5")
    assert code == 0
    got = kv(out)
    assert got["cases"] == "300" and got["failures"] == "0"


def test_complexity(capsys):
    code, out, _ = run(capsys, "complexity", "--max-p", "8")
    assert code == 0
    rows = [ln.split() for ln in out.splitlines()[2:]]
    assert rows == [["1", "9", "12", "3"], ["2", "15", "24", "4"], ["4", "27", "48", "6"], ["8", "51", "96", "10"]]


def test_energy_from_files(capsys, adder8, tmp_path):
    trace = tmp_path / "t.trace"
    run(capsys, "run", "--netlist", str(adder8), "--x", "3.75,-3.75", "--y", "3.75,-3.75", "--trace", str(trace))
    code, out, _ = run(capsys, "energy", "--netlist", str(adder8), "--trace", str(trace), "--e-spike", "0")
    assert code == 0
    got = kv(out)
    assert float(got["energy_j"]) == 0 and float(got["power_w"]) == 0
    code, out, _ = run(capsys, "energy", "--netlist", str(adder8), "--trace", str(trace), "--e-spike", "1e-9",
                       "--steps", "10", "--step-period", "1e-6")
    got = kv(out)
    spikes = int(got["total_spikes"])
    assert float(got["energy_j"]) == pytest.approx(spikes * 1e-9)
    assert float(got["power_w"]) == pytest.approx(spikes * 1e-9 / 1e-5)
    assert run(capsys, "energy", "--netlist", str(adder8))[0] == 2


def test_energy_survey(capsys):
    code, out, _ = run(capsys, "energy", "--samples", "40", "--seed", "1")
    assert code == 0
    got = kv(out)
    assert got["cases"] == "40"
    assert 50 < float(got["mean_spikes"]) < 100


@pytest.mark.parametrize(
    "argv, z",
    [
        (["--kind", "constant", "--precision", "16,0,0,0", "--k", "7", "--x", "123"], "7,0"),
        (["--kind", "successor", "--precision", "16,0,0,0", "--x", "41"], "42,0"),
        (["--kind", "predecessor", "--precision", "16,0,16,0", "--x", "5"], "5,-1"),
        (["--kind", "negate", "--precision", "4,4,4,4", "--x", "2.25,-1"], "1,-2.25"),
        (["--kind", "sum-tree", "--n", "3", "--precision", "4,0,0,0", "--in", "x0=1", "--in", "x1=2",
          "--in", "x2=4"], "7,0"),
    ],
)
def test_func(capsys, argv, z):
    code, out, _ = run(capsys, "func", *argv)
    assert code == 0
    assert kv(out)["z"] == z


def test_func_reports_shape(capsys):
    code, out, _ = run(capsys, "func", "--kind", "sum-tree", "--n", "16", "--precision", "4,0,0,0")
    got = kv(out)
    assert got["virtual_neurons"] == "31"
    assert got["z"] == "0,0"


def test_module_entry_point():
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "vneuron", "complexity", "--max-p", "2"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert res.stdout.splitlines()[-1].split() == ["2", "15", "24", "4"]
