import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qrecec.stabilizer import (TWO_QUBIT_PAULIS, PauliString, TableauError, apply_clifford,
                               apply_pauli_channel_1, apply_pauli_channel_2, measure,
                               measure_detach, merge, new_zero_state, peek_expectation,
                               stabilizer_group_expectations)
from qrecec.stabilizer.manager import QuantumManager
from qrecec.stabilizer.oracle import sv_oracle_run
from qrecec.validation import compare_with_oracle, random_circuit


def bell():
    st_ = new_zero_state(2)
    apply_clifford(st_, "H", [0])
    apply_clifford(st_, "CNOT", [0, 1])
    return st_


def within_3sigma(count, n, p):
    return abs(count / n - p) <= 3 * np.sqrt(p * (1 - p) / n)


def test_bell_stabilizers():
    assert sorted(str(p) for p in bell().stabilizers()) == ["+XX", "+ZZ"]


def test_bell_peeks():
    b = bell()
    assert peek_expectation(b, PauliString.from_str("XX")) == 1
    assert peek_expectation(b, PauliString.from_str("ZZ")) == 1
    assert peek_expectation(b, PauliString.from_str("YY")) == -1
    assert peek_expectation(b, PauliString.from_str("XI")) == 0


def test_peek_does_not_mutate():
    b = bell()
    before = (b.xs.copy(), b.zs.copy(), b.r.copy())
    for text in ("XX", "ZI", "YY", "-ZZ"):
        peek_expectation(b, PauliString.from_str(text))
    assert all(np.array_equal(u, v) for u, v in zip(before, (b.xs, b.zs, b.r)))


def test_measuring_bell_half():
    rng = np.random.default_rng(3)
    ones = 0
    for _ in range(10_000):
        b = bell()
        out, single = measure_detach(b, 0, "Z", rng)
        assert b.n == 1 and single.n == 1
        # remaining qubit collapsed to the same computational state
        assert peek_expectation(b, PauliString.from_str("Z")) == (1 - 2 * out)
        ones += out
    assert within_3sigma(ones, 10_000, 0.5)


def test_x_measurement_of_plus_is_deterministic():
    st_ = new_zero_state(1)
    apply_clifford(st_, "H", [0])
    rng = np.random.default_rng(0)
    out, single = measure_detach(st_, 0, "X", rng)
    assert out == 0
    assert peek_expectation(single, PauliString.from_str("X")) == 1


def test_depolarizing_one_qubit_flip_rate():
    rng = np.random.default_rng(11)
    ones = 0
    for _ in range(40_000):
        st_ = new_zero_state(1)
        apply_pauli_channel_1(st_, 0, 0.25, 0.25, 0.25, rng)
        ones += measure(st_, 0, "Z", rng)
    assert within_3sigma(ones, 40_000, 0.5)


def test_two_qubit_channel_frequencies():
    rng = np.random.default_rng(5)
    p = 0.6
    counts = dict.fromkeys(TWO_QUBIT_PAULIS, 0)
    trials = 60_000
    st_ = new_zero_state(2)
    for _ in range(trials):
        got = apply_pauli_channel_2(st_, (0, 1), [p / 15] * 15, rng)
        if got != ("I", "I"):
            counts[got] += 1
    for c in counts.values():
        assert within_3sigma(c, trials, p / 15)


def test_channel_rejects_bad_probabilities():
    st_ = new_zero_state(1)
    with pytest.raises(TableauError):
        apply_pauli_channel_1(st_, 0, 0.5, 0.5, 0.5, np.random.default_rng())
    with pytest.raises(TableauError):
        apply_pauli_channel_2(new_zero_state(2), (0, 1), [0.1] * 14, np.random.default_rng())


def test_merge_keeps_bell_correlation():
    m = merge([bell(), new_zero_state(1, ["c"])])
    assert m.n == 3
    assert peek_expectation(m, PauliString.from_str("XXI")) == 1
    assert peek_expectation(m, PauliString.from_str("IIZ")) == 1


def test_merge_rejects_shared_keys():
    with pytest.raises(TableauError):
        merge([new_zero_state(1, ["a"]), new_zero_state(1, ["a"])])


@given(st.lists(st.sampled_from("HSXYZ0"), min_size=1, max_size=6))
def test_merge_of_singles_matches_oracle(prep):
    states, circuit = [], []
    for q, g in enumerate(prep):
        s = new_zero_state(1, [q])
        if g != "0":
            apply_clifford(s, g, [0])
            circuit.append((g, q))
        states.append(s)
    m = merge(states)
    ref = sv_oracle_run(circuit, len(prep)).expectations()
    assert np.allclose(stabilizer_group_expectations(m), ref)


def test_gate_argument_errors():
    st_ = new_zero_state(2)
    with pytest.raises(TableauError):
        apply_clifford(st_, "T", [0])
    with pytest.raises(TableauError):
        apply_clifford(st_, "H", [2])
    with pytest.raises(TableauError):
        apply_clifford(st_, "CNOT", [1, 1])
    with pytest.raises(TableauError):
        measure(st_, 0, "Y", np.random.default_rng())


def test_validate_flags_broken_tableau():
    st_ = bell()
    st_.validate()
    st_.xs[2, 0] ^= np.uint64(1)  # XX -> IX breaks the pairing
    with pytest.raises(TableauError):
        st_.validate()


@given(st.integers(min_value=0, max_value=2**31), st.integers(2, 8), st.integers(1, 60))
def test_random_circuits_match_oracle(seed, n, length):
    rng = np.random.default_rng(seed)
    ok, why = compare_with_oracle(random_circuit(rng, n, length), n, rng)
    assert ok, why


@given(st.integers(min_value=0, max_value=2**31))
def test_manager_keeps_valid_groups(seed):
    rng = np.random.default_rng(seed)
    qm = QuantumManager()
    keys = [f"q{i}" for i in range(6)]
    qm.new(keys)
    for _ in range(40):
        k = int(rng.integers(5))
        a, b = rng.choice(6, 2, replace=False)
        if k == 0:
            qm.cnot(keys[a], keys[b])
        elif k == 1:
            qm.h(keys[a])
        elif k == 2:
            qm.s(keys[a])
        elif k == 3:
            qm.measure(keys[a], "XZ"[int(b) % 2], rng)
        else:
            qm.reset(keys[a], rng)
        qm.validate()
    assert sorted(sum((g.keys for g in qm.groups()), [])) == sorted(keys)
