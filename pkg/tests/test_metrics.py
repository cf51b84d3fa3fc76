
import pytest

from vneuron.builder import build_adder, structural_counts
from vneuron.codec import DyadicValue, PrecisionVector, stimulus_for
from vneuron.metrics import (
    EnergyModel,
    build_io_harness,
    complexity_table,
    count_spikes,
    estimate_energy,
    format_kv,
    format_table,
    mean_set_bits,
    survey_additions,
)
from vneuron.snn import SpikeTrace, Stimulus, simulate


def two_bit_trace():
    net, vn = build_adder(PrecisionVector(2, 0, 0, 0))
    stim = stimulus_for(vn, "x", DyadicValue(3)) + stimulus_for(vn, "y", DyadicValue(1))
    return net, vn, simulate(net, stim, vn.ready_step)


def test_count_spikes_two_bit_example():
    # three input spikes, then group 0 (th0, th1), group 1 (th0, th1), group 2 (th0), then z2
    net, vn, trace = two_bit_trace()
    total, per = count_spikes(trace)
    assert total == 9
    assert set(per.values()) == {1}
    g = vn.pos.groups
    assert set(per) == {*vn.pos.x, vn.pos.y[1], g[0][0], g[0][1], g[1][0], g[1][1], g[2][0], vn.pos.z[0]}


def test_count_spikes_empty():
    total, per = count_spikes(SpikeTrace((), 5))
    assert total == 0 and not per


def test_energy_is_linear_in_spikes():
    net, vn, trace = two_bit_trace()
    model = EnergyModel(e_spike=2e-12, step_period=1e-6)
    m = estimate_energy(trace, net, model)
    assert m.energy == pytest.approx(9 * 2e-12)
    assert m.steps == vn.ready_step + 1
    assert m.power == pytest.approx(m.energy / (m.steps * 1e-6))
    doubled = estimate_energy(trace, net, EnergyModel(e_spike=4e-12, step_period=1e-6))
    assert doubled.energy == pytest.approx(2 * m.energy)


def test_idle_power_terms():
    net, vn, trace = two_bit_trace()
    neurons, synapses = structural_counts(net)
    model = EnergyModel(e_spike=0, p_idle_neuron=1e-6, p_idle_synapse=2e-6, step_period=1e-3)
    m = estimate_energy(trace, net, model, steps=10)
    assert m.energy == pytest.approx(10e-3 * (neurons * 1e-6 + synapses * 2e-6))
    assert m.power == pytest.approx(neurons * 1e-6 + synapses * 2e-6)


def test_zero_energy_model():
    net, _, trace = two_bit_trace()
    m = estimate_energy(trace, net, EnergyModel(e_spike=0))
    assert m.energy == 0 and m.power == 0
    assert m.total_spikes == 9


def test_energy_model_rejects_negative():
    with pytest.raises(ValueError):
        EnergyModel(e_spike=-1)


def test_default_model_calibration():
    model = EnergyModel()
    assert model.e_spike * 73 == pytest.approx(23e-9)
    assert 20 * model.step_period == pytest.approx(1e-6)


def test_complexity_table_matches_formulas():
    rows = complexity_table(128)
    assert [r[0] for r in rows] == [1, 2, 4, 8, 16, 32, 64, 128]
    for p, n, s, t in rows:
        assert (n, s, t) == (6 * p + 3, 12 * p, p + 2)
    assert complexity_table(5)[-1] == (5, 33, 60, 7)
    with pytest.raises(ValueError):
        complexity_table(0)


def test_io_harness_adds_and_relays():
    h = build_io_harness(PrecisionVector(2, 2, 2, 2))
    neurons, _ = structural_counts(h.network)
    assert neurons == 54 + 4 * 4 + 2 * 5
    x, y = DyadicValue(0.75, -2.75), DyadicValue(1, -2.5)
    out, trace = h.run(x, y)
    assert out == x + y
    fired = trace.at(h.readout_step)
    relayed = tuple(int(r in fired) for r in h.out_relays[1])
    assert relayed == (0, 0, 1, 1, 1)


def test_survey_small():
    s = survey_additions(cases=50, seed=3)
    assert s.cases == 50
    assert s.mean_adder_spikes < s.mean_spikes
    assert s.mean_energy == pytest.approx(s.mean_spikes * EnergyModel().e_spike)
    assert s.mean_power == pytest.approx(s.mean_energy / 1e-6)
    assert survey_additions(cases=50, seed=3) == s


def test_mean_set_bits_is_half_width():
    for bits in (4, 8, 16, 32):
        assert mean_set_bits(bits, 10_000, seed=bits) == pytest.approx(bits / 2, rel=0.05)


def test_formatting():
    assert format_kv([("a", 1), ("b", "x")]) == "a=1\nb=x"
    table = format_table(("P", "n"), [(1, 9), (16, 99)])
    lines = table.splitlines()
    assert lines[0].split() == ["P", "n"]
    assert lines[-1].split() == ["16", "99"]
    assert len({len(l) for l in lines}) == 1
