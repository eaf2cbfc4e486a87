"""Self-checks shared by the ``validate`` command and the test suite."""
from __future__ import annotations

import itertools
from collections.abc import Iterator

import numpy as np

from .network import T2_CAP, ProtocolSettings, Topology, z_profile
from .noise import HardwareProfile
from .protocol import run_episode
from .stabilizer.manager import QuantumManager
from .stabilizer.oracle import sv_oracle_run
from .stabilizer.tableau import stabilizer_group_expectations
from .steane import STEANE_713, correct_and_extract

# coordinated sweep reference rows: z, F_1q, F_2q, F_m, F_init, F_phys, T2 [s]
Z_TABLE = (
    (0.00, 0.999000, 0.999100, 0.996000, 0.990000, 0.965000, 2.000),
    (0.25, 0.999250, 0.999325, 0.997000, 0.992500, 0.973750, 2.669),
    (0.50, 0.999500, 0.999550, 0.998000, 0.995000, 0.982500, 4.008),
    (0.65, 0.999650, 0.999685, 0.998600, 0.996500, 0.987750, 5.728),
    (0.80, 0.999800, 0.999820, 0.999200, 0.998000, 0.993000, 10.030),
    (0.90, 0.999900, 0.999910, 0.999600, 0.999000, 0.996500, 20.068),
    (0.95, 0.999950, 0.999955, 0.999800, 0.999500, 0.998250, 40.144),
    (1.00, 1.000000, 1.000000, 1.000000, 1.000000, 1.000000, T2_CAP),
)


def resource_closed_forms(n_nodes: int) -> dict[str, int]:
    n = n_nodes
    return {"qubits": 30 * (n - 1), "operations": 93 * n - 121, "two_qubit_gates": 43 * n - 50,
            "one_qubit_gates": 20 * n - 27, "measurements": 30 * n - 44}


def random_circuit(rng: np.random.Generator, n: int, length: int) -> list[tuple]:
    """Uniform mix of H, S, X, Y, Z, CNOT, MZ and MX on ``n >= 2`` qubits."""
    ops = []
    for _ in range(length):
        k = int(rng.integers(9))
        if k < 5:
            ops.append(("HSXYZ"[k], int(rng.integers(n))))
        elif k < 7:
            a, b = rng.choice(n, 2, replace=False)
            ops.append(("CNOT", int(a), int(b)))
        else:
            ops.append((("MZ", "MX")[k - 7], int(rng.integers(n))))
    return ops


def run_on_manager(circuit, n: int, rng) -> tuple[QuantumManager, list[int]]:
    qm = QuantumManager()
    qm.new(range(n))
    outs = []
    for op in circuit:
        name = op[0]
        if name == "CNOT":
            qm.cnot(op[1], op[2])
        elif name == "H":
            qm.h(op[1])
        elif name == "S":
            qm.s(op[1])
        elif name in ("X", "Y", "Z"):
            qm.pauli(op[1], name)
        else:
            outs.append(qm.measure(op[1], name[1], rng))
    return qm, outs


def compare_with_oracle(circuit, n: int, rng) -> tuple[bool, str]:
    """Tableau vs state vector on one trajectory, outcomes fed back to the oracle."""
    qm, outs = run_on_manager(circuit, n, rng)
    qm.validate()
    res = sv_oracle_run(circuit, n, forced=outs)
    for k, (o, p1) in enumerate(zip(outs, res.p_one)):
        if (p1 < 1e-9 and o == 1) or (p1 > 1 - 1e-9 and o == 0):
            return False, f"measurement {k} gave impossible outcome {o} (p1={p1})"
    mine = stabilizer_group_expectations(qm.snapshot(list(range(n))))
    if not np.array_equal(mine, np.rint(res.expectations()).astype(mine.dtype)) or \
            not np.allclose(res.expectations(), mine, atol=1e-9):
        return False, "Pauli expectations differ"
    return True, ""


def check_oracle(n_circuits: int = 30, seed: int = 0) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    for i in range(n_circuits):
        n = int(rng.integers(2, 9))
        c = random_circuit(rng, n, int(rng.integers(1, 61)))
        ok, why = compare_with_oracle(c, n, rng)
        if not ok:
            return False, f"circuit {i}: {why}"
    return True, f"{n_circuits} random circuits agree"


def check_decoder() -> tuple[bool, str]:
    code = STEANE_713
    for bits in itertools.product((0, 1), repeat=7):
        blk = correct_and_extract(bits)
        if any(code.syndrome(blk.m_prime)) or sum(a != b for a, b in zip(bits, blk.m_prime)) > 1:
            return False, f"input {bits} decoded badly"
    words = [w for w in itertools.product((0, 1), repeat=7) if not any(code.syndrome(w))]
    if len(words) != 16:
        return False, f"{len(words)} codewords"
    for w in words:
        for i in range(7):
            e = list(w)
            e[i] ^= 1
            if correct_and_extract(e).m_prime != w:
                return False, f"codeword {w} bit {i} not corrected"
    return True, "128 inputs and 112 single-bit errors"


def check_z_table() -> tuple[bool, str]:
    for z, *fids, t2 in Z_TABLE:
        p = z_profile(z)
        got = (p.F_1q, p.F_2q, p.F_m, p.F_init, p.F_phys)
        if any(round(g, 6) != round(f, 6) for g, f in zip(got, fids)):
            return False, f"z={z}: fidelities {got}"
        if round(p.T2, 3) != round(t2, 3):
            return False, f"z={z}: T2={p.T2}"
    return True, f"{len(Z_TABLE)} rows"


def check_zero_noise(node_counts=(2, 3, 5), seeds: int = 10) -> tuple[bool, str]:
    prof = HardwareProfile.noiseless()
    for n in node_counts:
        topo = Topology.chain(n - 1, 20.0)
        for s in range(seeds):
            rec = run_episode(topo, prof, seed=s)
            if not rec.success or rec.fidelity != 1.0:
                return False, f"N={n} seed={s}: F={rec.fidelity} ({rec.failure})"
            if any(sx != (0, 0, 0) or sz != (0, 0, 0) for _, sx, sz in rec.swap_syndromes):
                return False, f"N={n} seed={s}: nonzero swap syndrome"
    return True, f"N in {tuple(node_counts)}, {seeds} seeds each"


def episode_resources(n_nodes: int) -> dict[str, int]:
    rec = run_episode(Topology.chain(n_nodes - 1, 20.0), HardwareProfile.noiseless(), seed=0)
    c = rec.counters
    got = {k: c[k] for k in ("qubits", "two_qubit_gates", "one_qubit_gates", "measurements")}
    got["operations"] = got["two_qubit_gates"] + got["one_qubit_gates"] + got["measurements"]
    got["prep_attempts"] = c["prep_attempts"]
    return got


def check_resources(node_counts=(2, 3, 5, 10)) -> tuple[bool, str]:
    for n in node_counts:
        got = episode_resources(n)
        want = resource_closed_forms(n)
        diff = {k: (got[k], v) for k, v in want.items() if got[k] != v}
        if diff:
            return False, f"N={n}: (got, closed form) {diff}"
    return True, f"N in {tuple(node_counts)}"


def fault_sites(topology: Topology, settings: ProtocolSettings | None = None,
                seed: int = 0) -> list[tuple[int, str, tuple]]:
    """Checkpoints of a noiseless episode as ``(occurrence, stage, keys)``."""
    sites = []

    def record(stage, keys, device):
        sites.append((len(sites), stage, tuple(keys)))

    run_episode(topology, HardwareProfile.noiseless(), settings, seed, hook=record)
    return sites


def inject_fault(topology: Topology, occurrence: int, key, pauli: str,
                 settings: ProtocolSettings | None = None, seed: int = 0):
    """Noiseless episode with one Pauli applied at the given checkpoint."""
    count = [0]

    def hook(stage, keys, device):
        if count[0] == occurrence:
            device.qm.pauli(key, pauli)
        count[0] += 1

    return run_episode(topology, HardwareProfile.noiseless(), settings, seed, hook=hook)


def single_fault_scan(n_links: int = 2, cec_mode: str = "cec",
                      seed: int = 0) -> tuple[int, list]:
    """Every (checkpoint, qubit, Pauli); all checkpoints precede the swap readouts.

    Returns the number of injections and the ones that lost fidelity.
    """
    topo = Topology.chain(n_links, 20.0)
    settings = ProtocolSettings(cec_mode=cec_mode)
    total, bad = 0, []
    for occ, stage, keys in fault_sites(topo, settings, seed):
        for key in keys:
            for pauli in "XYZ":
                rec = inject_fault(topo, occ, key, pauli, settings, seed)
                total += 1
                if not rec.success or rec.fidelity != 1.0:
                    bad.append((occ, stage, key, pauli, rec.fidelity))
    return total, bad


def run_all(seed: int = 0) -> Iterator[tuple[str, bool, str]]:
    checks = [
        ("oracle", lambda: check_oracle(30, seed)),
        ("decoder", check_decoder),
        ("z-table", check_z_table),
        ("zero-noise", check_zero_noise),
        ("resources", check_resources),
    ]
    for name, fn in checks:
        ok, detail = fn()
        yield name, ok, detail


def latency_fit(distances_km, latencies_s) -> tuple[float, float, float]:
    """Ordinary least squares ``latency = a + b * km``; returns ``(a, b, R^2)``."""
    x = np.asarray(distances_km, dtype=float)
    y = np.asarray(latencies_s, dtype=float)
    b, a = np.polyfit(x, y, 1)
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum((y - (a + b * x)) ** 2)) / ss if ss > 0 else 1.0
    return float(a), float(b), r2


__all__ = ["Z_TABLE", "check_decoder", "check_oracle", "check_resources", "check_z_table",
           "check_zero_noise", "compare_with_oracle", "episode_resources", "fault_sites", "inject_fault",
           "latency_fit",
           "random_circuit", "resource_closed_forms", "run_all", "run_on_manager",
           "single_fault_scan"]
