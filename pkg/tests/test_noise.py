import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qrecec.kernel import Timeline, make_stream
from qrecec.noise import (HardwareProfile, IdleRecord, NoiseParameterError, NoisyDevice,
                          apply_idle, corrupt_bell_pair, depolarize_prob_1q, depolarize_prob_2q,
                          flip_measurement, idle_channel_probs, noisy_init)
from qrecec.protocol import logical_fidelity
from qrecec.stabilizer.manager import QuantumManager


def sigma3(n, p):
    return 3 * math.sqrt(p * (1 - p) / n)


def test_gate_depolarizing_probabilities():
    assert depolarize_prob_1q(0.999) == pytest.approx(0.0015, abs=1e-15)
    assert depolarize_prob_1q(0.9995) == pytest.approx(0.00075, abs=1e-15)
    assert depolarize_prob_2q(0.9991) == pytest.approx(0.001125, abs=1e-15)
    assert depolarize_prob_2q(0.99955) == pytest.approx(0.0005625, abs=1e-15)
    with pytest.raises(NoiseParameterError):
        depolarize_prob_1q(0.5)


def test_idle_probabilities():
    px, py, pz = idle_channel_probs(0.0151, 100.0, 2.0)
    assert px == py == pytest.approx(3.7747150018e-05, rel=1e-9)
    assert pz == pytest.approx(3.7230380215e-03, rel=1e-9)


def test_idle_limits():
    assert idle_channel_probs(1e9, 10.0, 20.0) == pytest.approx((0.25, 0.25, 0.25))
    px, py, pz = idle_channel_probs(0.5, math.inf, 2.0)
    assert px == py == 0.0 and pz > 0
    with pytest.raises(NoiseParameterError):
        idle_channel_probs(1.0, 1.0, 3.0)
    with pytest.raises(NoiseParameterError):
        idle_channel_probs(-1.0, 1.0, 1.0)


@given(st.floats(0, 10), st.floats(0.01, 100), st.floats(0.01, 1.0))
def test_idle_probabilities_are_a_distribution(t, T1, frac):
    T2 = 2 * T1 * frac
    p = idle_channel_probs(t, T1, T2)
    assert all(v >= 0 for v in p) and sum(p) <= 0.75 + 1e-12


def test_measurement_flip_rate():
    rng = make_stream(4, "m")
    n = 100_000
    ones = sum(flip_measurement(0, 0.996, rng) for _ in range(n))
    assert abs(ones / n - 0.004) <= sigma3(n, 0.004)


def test_init_error_rate():
    rng = make_stream(5, "i")
    qm = QuantumManager()
    qm.new(["q"])
    n = 100_000
    ones = 0
    for _ in range(n):
        noisy_init(qm, "q", 0.99, rng)
        ones += qm.measure("q", "Z", rng)
    assert abs(ones / n - 0.01) <= sigma3(n, 0.01)


def _bell(qm):
    qm.reset("a")
    qm.reset("b")
    qm.h("a")
    qm.cnot("a", "b")


def test_perfect_pair_untouched():
    qm = QuantumManager()
    qm.new(["a", "b"])
    _bell(qm)
    assert corrupt_bell_pair(qm, ("a", "b"), 1.0, make_stream(0, "x")) == "I"
    assert qm.peek({"a": "X", "b": "X"}) == 1 and qm.peek({"a": "Z", "b": "Z"}) == 1


def test_z_branch_gives_phi_minus():
    qm = QuantumManager()
    qm.new(["a", "b"])
    _bell(qm)

    class Fixed:
        def random(self):
            return 0.5  # second third of [0, p) for p = 1

    assert corrupt_bell_pair(qm, ("a", "b"), 0.0, Fixed()) == "Z"
    assert qm.peek({"a": "Z", "b": "Z"}) == 1 and qm.peek({"a": "X", "b": "X"}) == -1


def test_pair_fidelity_average():
    qm = QuantumManager()
    qm.new(["a", "b"])
    rng = make_stream(8, "p")
    n = 100_000
    total = 0.0
    for _ in range(n):
        _bell(qm)
        corrupt_bell_pair(qm, ("a", "b"), 0.965, rng)
        total += logical_fidelity(qm.peek({"a": "X", "b": "X"}), qm.peek({"a": "Y", "b": "Y"}),
                                  qm.peek({"a": "Z", "b": "Z"}))
    assert abs(total / n - 0.965) <= sigma3(n, 0.965)


def test_profile_validation():
    with pytest.raises(NoiseParameterError):
        HardwareProfile(F_2q=1.2)
    with pytest.raises(NoiseParameterError):
        HardwareProfile(T1=1.0, T2=5.0)
    p = HardwareProfile.noiseless()
    assert math.isinf(p.T2) and p.F_2q == 1.0


def test_idle_applied_lazily_on_touch():
    qm = QuantumManager()
    qm.new(["q"])
    rec = IdleRecord()
    rec.mark("q", 0)
    prof = HardwareProfile(T1=1e-6, T2=2e-6)
    rng = make_stream(0, "idle")
    kinds = [apply_idle(qm, "q", 10**9 * (i + 1), rec, prof, rng) for i in range(2000)]
    # after a millisecond at microsecond T1/T2 the channel is fully depolarizing
    assert abs(kinds.count("I") / 2000 - 0.25) < 0.05
    with pytest.raises(NoiseParameterError):
        apply_idle(qm, "q", 0, rec, prof, rng)


def test_device_counts_and_noiseless_corrections():
    qm = QuantumManager()
    qm.new(["a", "b"])
    tl = Timeline(0)
    dev = NoisyDevice(qm, HardwareProfile.noiseless(), tl, tl.stream("noise"))
    for k in ("a", "b"):
        dev.idle.mark(k, 0)
    dev.h("a")
    dev.cnot("a", "b")
    dev.correct("b", "X")
    dev.measure("a", "X")
    c = dev.counters
    assert (c.one_qubit_gates, c.two_qubit_gates, c.measurements) == (1, 1, 1)


def test_two_qubit_gate_noise_frequencies():
    qm = QuantumManager()
    qm.new(["a", "b"])
    tl = Timeline(1)
    dev = NoisyDevice(qm, HardwareProfile.noiseless(F_2q=0.6), tl, tl.stream("noise"))
    dev.idle.mark("a", 0)
    dev.idle.mark("b", 0)
    n = 30_000
    flips = np.zeros(2)
    for _ in range(n):
        qm.reset("a")
        qm.reset("b")
        dev.cnot("a", "b")
        flips += [qm.peek({"a": "Z"}) == -1, qm.peek({"b": "Z"}) == -1]
    # p = 0.5, X or Y on a given qubit in 8 of the 15 Paulis
    p = 0.5 * 8 / 15
    assert np.all(np.abs(flips / n - p) <= sigma3(n, p))
