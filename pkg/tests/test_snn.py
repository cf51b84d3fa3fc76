from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vneuron.builder import build_adder
from vneuron.codec import DyadicValue, PrecisionVector, stimulus_for
from vneuron.snn import (
    NeuronSpec,
    Network,
    Stimulus,
    StructuralError,
    SynapseSpec,
    bit_group_response,
    simulate,
)


def brute_force_group(s, thresholds=(0, 1, 2), out_weights=(1, -1, 1)):
    """Fire each neuron independently against its threshold, then sum output synapses."""
    fired = [(-1 + s) >= th for th in thresholds]
    total = sum(w for f, w in zip(fired, out_weights) if f)
    return int(total >= 1), int(fired[1])


def single(threshold=0):
    return Network((NeuronSpec(0, threshold, -1),), (), {})


def test_two_bit_worked_example():
    net, vn = build_adder(PrecisionVector(2, 0, 0, 0))
    stim = stimulus_for(vn, "x", DyadicValue(3)) + stimulus_for(vn, "y", DyadicValue(1))
    trace = simulate(net, stim, vn.ready_step)
    z2, z1, z0 = vn.pos.z
    out_spikes = {(t, n) for t, n in trace.events if n in vn.pos.z}
    assert out_spikes == {(4, z2)}


def test_empty_stimulus_gives_empty_trace():
    net, vn = build_adder(PrecisionVector(4, 4, 4, 4))
    trace = simulate(net, Stimulus(), 20)
    assert trace.events == ()
    assert trace.horizon == 20


def test_single_neuron_fires_once_at_injection_step():
    trace = simulate(single(), Stimulus(((3, 0, 1),)), 10)
    assert trace.events == ((3, 0),)


def test_state_does_not_carry_between_steps():
    # two half-charges on different steps never add up
    net = single(threshold=0)
    stim = Stimulus(((1, 0, Fraction(1, 2)), (2, 0, Fraction(1, 2))))
    assert simulate(net, stim, 5).events == ()
    stim = Stimulus(((1, 0, Fraction(1, 2)), (1, 0, Fraction(1, 2))))
    assert simulate(net, stim, 5).events == ((1, 0),)


def test_threshold_comparison_is_non_strict():
    # state 1 reaches thresholds 0 and 1 but not 2
    net = Network(tuple(NeuronSpec(i, i, -1) for i in range(3)), (), {})
    stim = Stimulus(tuple((0, i, 2) for i in range(3)))
    assert {n for _, n in simulate(net, stim, 0).events} == {0, 1}


def test_synapse_delay_and_weight():
    net = Network(
        (NeuronSpec(0, 0), NeuronSpec(1, 0)),
        (SynapseSpec(0, 1, Fraction(1), 3),),
        {},
    )
    trace = simulate(net, Stimulus(((2, 0, 1),)), 10)
    assert trace.events == ((2, 0), (5, 1))


def test_fractional_weights_are_exact():
    net = Network(
        tuple(NeuronSpec(i, 0) for i in range(4)),
        (
            SynapseSpec(0, 3, Fraction(1, 4), 1),
            SynapseSpec(1, 3, Fraction(1, 2), 1),
            SynapseSpec(2, 3, Fraction(1, 4), 1),
        ),
        {},
    )
    trace = simulate(net, Stimulus(((0, 0, 1), (0, 1, 1), (0, 2, 1))), 2)
    assert (1, 3) in trace.events


@pytest.mark.parametrize("s, expected", [(0, (0, 0)), (1, (1, 0)), (2, (0, 1)), (3, (1, 1))])
def test_bit_group_response_matches_brute_force(s, expected):
    assert brute_force_group(s) == expected
    assert bit_group_response(s) == expected


@pytest.mark.parametrize("s", [-1, 4])
def test_bit_group_response_rejects_out_of_range(s):
    with pytest.raises(ValueError):
        bit_group_response(s)


def test_errors():
    with pytest.raises(StructuralError):
        Network((NeuronSpec(0, 0),), (SynapseSpec(0, 5, Fraction(1), 1),), {})
    with pytest.raises(StructuralError):
        SynapseSpec(0, 1, Fraction(1), 0)
    with pytest.raises(ValueError):
        SynapseSpec(0, 1, Fraction(1, 3), 1)
    with pytest.raises(StructuralError):
        Network(
            (NeuronSpec(0, 0), NeuronSpec(1, 0)),
            (SynapseSpec(0, 1, Fraction(1), 1), SynapseSpec(1, 0, Fraction(1), 1)),
            {},
        )
    with pytest.raises(ValueError):
        simulate(single(), Stimulus(), -1)
    with pytest.raises(StructuralError):
        simulate(single(), Stimulus(((0, 7, 1),)), 3)


def test_spontaneous_neuron_fires_every_step():
    net = Network((NeuronSpec(0, -2, -1),), (), {})
    assert simulate(net, Stimulus(), 3).events == ((0, 0), (1, 0), (2, 0), (3, 0))


P16 = PrecisionVector(4, 4, 4, 4)
NET16, VN16 = build_adder(P16)
rail = st.integers(0, 255).map(lambda k: Fraction(k, 16))
values16 = st.builds(lambda a, b: DyadicValue(a, -b), rail, rail)


def _stim(x, y, shift=0):
    s = stimulus_for(VN16, "x", x) + stimulus_for(VN16, "y", y)
    return Stimulus(tuple((t + shift, n, q) for t, n, q in s.injections))


@settings(max_examples=60, deadline=None)
@given(values16, values16, st.integers(0, 7))
def test_time_shift_equivariance(x, y, k):
    base = simulate(NET16, _stim(x, y), VN16.ready_step + 7)
    moved = simulate(NET16, _stim(x, y, k), VN16.ready_step + 7)
    assert moved.events == tuple((t + k, n) for t, n in base.events)


@settings(max_examples=40, deadline=None)
@given(values16, values16)
def test_determinism(x, y):
    a = simulate(NET16, _stim(x, y), VN16.ready_step)
    b = simulate(NET16, _stim(x, y), VN16.ready_step)
    assert a == b


@settings(max_examples=40, deadline=None)
@given(values16, values16)
def test_no_spike_without_positive_charge(x, y):
    trace = simulate(NET16, _stim(x, y), VN16.ready_step)
    charge = {}
    for t, n, q in _stim(x, y).injections:
        charge[(t, n)] = charge.get((t, n), 0) + q
    for t, n in trace.events:
        for s in NET16.synapses:
            if s.pre == n:
                key = (t + s.delay, s.post)
                charge[key] = charge.get(key, 0) + s.weight
    for t, n in trace.events:
        assert charge[(t, n)] > 0
