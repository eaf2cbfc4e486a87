import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qrecec.kernel import ProtocolError, seconds_to_ps
from qrecec.network import ProtocolSettings, Topology
from qrecec.noise import HardwareProfile
from qrecec.protocol import (TCNOT_ALICE_RESULT, TCNOT_BOB_RESULT, Episode, FrameContribution,
                             aggregate_frame, logical_fidelity, run_episode)
from qrecec.validation import inject_fault

NOISELESS = HardwareProfile.noiseless()


def test_fidelity_formula():
    assert logical_fidelity(1, -1, 1) == 1.0
    assert logical_fidelity(1, 1, -1) == 0.0  # logical Psi+
    assert logical_fidelity(-1, 1, 1) == 0.0  # logical Phi-
    assert logical_fidelity(0, 0, 0) == 0.25


def test_frame_aggregation():
    c = [FrameContribution(1, 0, "a"), FrameContribution(0, 1, "b"), FrameContribution(1, 1, "c")]
    assert aggregate_frame(c) == (0, 0)
    with pytest.raises(ProtocolError):
        aggregate_frame([FrameContribution(1, 0, "a"), FrameContribution(0, 0, "a")])


@pytest.mark.parametrize("n_nodes", [2, 3, 5])
def test_noiseless_chain_is_perfect(n_nodes):
    for seed in range(5):
        rec = run_episode(Topology.chain(n_nodes - 1, 20.0), NOISELESS, seed=seed)
        assert rec.success and rec.fidelity == 1.0
        assert rec.correlators == (1, -1, 1)
        assert all(sx == (0, 0, 0) and sz == (0, 0, 0) for _, sx, sz in rec.swap_syndromes)


def test_every_frame_case_is_sound():
    topo = Topology.chain(2, 20.0)
    seen = {}
    seed = 0
    while len(seen) < 4 and seed < 200:
        rec = run_episode(topo, NOISELESS, seed=seed)
        assert rec.fidelity == 1.0
        seen.setdefault(rec.frame, seed)
        seed += 1
    assert set(seen) == {(0, 0), (0, 1), (1, 0), (1, 1)}


def test_two_node_counters():
    c = run_episode(Topology.chain(1, 20.0), NOISELESS).counters
    assert (c["two_qubit_gates"], c["one_qubit_gates"], c["measurements"]) == (36, 13, 16)
    assert c["qubits"] == 30 and c["prep_attempts"] == 2


def test_bell_pair_bit_flip_is_recovered():
    topo = Topology.chain(1, 20.0)
    hook_hits = []

    def hook(stage, keys, dev):
        if stage == "link0:pairs_ready":
            dev.qm.pauli(("r1", "L", "c", 0), "X")
            hook_hits.append(stage)

    rec = run_episode(topo, NOISELESS, hook=hook)
    assert hook_hits and rec.fidelity == 1.0


def _z_before_swap(mode):
    topo = Topology.chain(2, 20.0)

    def hook(stage, keys, dev):
        if stage == "r1:swap_cnot":  # before the X-basis readout
            dev.qm.pauli(("r1", "L", "d", 3), "Z")

    return run_episode(topo, NOISELESS, ProtocolSettings(cec_mode=mode), seed=1, hook=hook)


def test_swap_phase_error_needs_classical_correction():
    good = _z_before_swap("cec")
    bad = _z_before_swap("none")
    assert good.fidelity == 1.0 and good.swap_syndromes[0][1] != (0, 0, 0)
    assert bad.fidelity < 1.0


def test_corrections_arrive_one_message_delay_later():
    ep = Episode(Topology.chain(1, 20.0), NOISELESS, seed=3)
    ep.run()
    msgs = [m for m in ep.messages if m.kind in (TCNOT_ALICE_RESULT, TCNOT_BOB_RESULT)]
    assert len(msgs) == 2
    assert all(m.arrival_time - m.send_time == seconds_to_ps(170e-6) for m in msgs)


def test_latency_identical_across_modes():
    topo = Topology.chain(3, 20.0)
    prof = HardwareProfile()
    for seed in range(10):
        a = run_episode(topo, prof, ProtocolSettings(cec_mode="cec"), seed)
        b = run_episode(topo, prof, ProtocolSettings(cec_mode="none"), seed)
        assert a.latency == b.latency


def test_same_seed_same_record():
    topo = Topology.chain(2, 20.0)
    a = run_episode(topo, HardwareProfile(), seed=42)
    b = run_episode(topo, HardwareProfile(), seed=42)
    assert a == b


def test_failure_modes_are_recorded():
    topo = Topology.chain(1, 20.0)
    rec = run_episode(topo, NOISELESS, ProtocolSettings(episode_timeout_s=1e-6))
    assert not rec.success and rec.failure == "timeout"
    bad_init = HardwareProfile.noiseless(F_init=0.5)
    fails = [run_episode(topo, bad_init, ProtocolSettings(prep_retry_cap=1), seed=s).failure
             for s in range(20)]
    assert "prep_cap" in fails


def test_injection_past_last_checkpoint_is_harmless():
    rec = inject_fault(Topology.chain(1, 20.0), 10**6, ("r0", "R", "d", 0), "X")
    assert rec.fidelity == 1.0


@given(st.integers(0, 2**32 - 1), st.integers(1, 3), st.sampled_from(["cec", "none"]))
def test_fidelity_takes_quarter_values(seed, links, mode):
    rec = run_episode(Topology.chain(links, 20.0), HardwareProfile(F_2q=0.99, F_m=0.99),
                      ProtocolSettings(cec_mode=mode), seed)
    assert rec.success
    assert rec.fidelity in (0.0, 0.25, 0.5, 0.75, 1.0)
    assert all(v in (-1, 0, 1) for v in rec.correlators)


@given(st.integers(0, 2**32 - 1))
def test_noiseless_any_seed_is_perfect(seed):
    rec = run_episode(Topology.chain(2, 35.0), NOISELESS, seed=seed)
    assert rec.fidelity == 1.0
    assert rec.latency > 0


_SITES = {}


def _sites(seed):
    from qrecec.validation import fault_sites

    if seed not in _SITES:
        _SITES[seed] = fault_sites(Topology.chain(2, 20.0), seed=seed)
    return _SITES[seed]


@given(st.integers(0, 3), st.data())
def test_random_single_fault_is_corrected(seed, data):
    occ, stage, keys = data.draw(st.sampled_from(_sites(seed)))
    key = data.draw(st.sampled_from(keys))
    pauli = data.draw(st.sampled_from("XYZ"))
    rec = inject_fault(Topology.chain(2, 20.0), occ, key, pauli, seed=seed)
    assert rec.fidelity == 1.0, (stage, key, pauli)


def test_single_faults_matter_without_correction():
    from qrecec.validation import single_fault_scan

    total, bad = single_fault_scan(n_links=2, cec_mode="none")
    # faults that reach the middle node's readout go uncorrected
    assert 0 < len(bad) < total
