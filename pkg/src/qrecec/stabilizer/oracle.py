"""Dense state-vector simulator used as a reference for the tableau backend.

Circuits are lists of tuples: ``("H", q)``, ``("S", q)``, ``("X"|"Y"|"Z", q)``,
``("CNOT", c, t)``, ``("MZ", q)`` and ``("MX", q)``. Fixed Pauli faults are
written as ordinary ``X``/``Y``/``Z`` entries. Qubit ``q`` is bit ``q`` of the
basis-state index.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .pauli import PauliString

MAX_QUBITS = 12
_S2 = 1.0 / np.sqrt(2.0)


class OracleError(ValueError):
    pass


def _split(n: int, q: int) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(1 << n)
    i0 = idx[(idx >> q) & 1 == 0]
    return i0, i0 | (1 << q)


def _apply(psi: np.ndarray, n: int, op: tuple) -> None:
    name = op[0]
    if name == "CNOT":
        c, t = op[1], op[2]
        idx = np.arange(1 << n)
        sel = idx[((idx >> c) & 1 == 1) & ((idx >> t) & 1 == 0)]
        other = sel | (1 << t)
        psi[sel], psi[other] = psi[other].copy(), psi[sel].copy()
        return
    q = op[1]
    i0, i1 = _split(n, q)
    a, b = psi[i0].copy(), psi[i1].copy()
    if name == "H":
        psi[i0], psi[i1] = (a + b) * _S2, (a - b) * _S2
    elif name == "S":
        psi[i1] = 1j * b
    elif name == "X":
        psi[i0], psi[i1] = b, a
    elif name == "Y":
        psi[i0], psi[i1] = -1j * b, 1j * a
    elif name == "Z":
        psi[i1] = -b
    else:
        raise OracleError(f"unknown op {name!r}")


def _prob_one(psi: np.ndarray, n: int, q: int) -> float:
    _, i1 = _split(n, q)
    return float(np.sum(np.abs(psi[i1]) ** 2))


def _collapse(psi: np.ndarray, n: int, q: int, bit: int) -> float:
    i0, i1 = _split(n, q)
    kill = i0 if bit else i1
    psi[kill] = 0.0
    norm = float(np.linalg.norm(psi))
    psi /= norm
    return norm * norm


@dataclass
class OracleResult:
    """Final amplitudes plus the measurement record of one trajectory."""

    n: int
    psi: np.ndarray
    outcomes: list[int] = field(default_factory=list)
    p_one: list[float] = field(default_factory=list)

    def expectation(self, obs: PauliString) -> float:
        return pauli_expectation(self.psi, obs)

    def expectations(self) -> np.ndarray:
        return all_pauli_expectations(self.psi, self.n)


def sv_oracle_run(circuit, n: int, rng=None, forced: list[int] | None = None) -> OracleResult:
    """Simulate ``circuit`` on ``|0...0>``.

    Measurement outcomes are sampled with ``rng`` unless ``forced`` gives
    them in order; forcing a zero-probability outcome raises ``OracleError``.
    """
    if rng is None and forced is None:
        rng = np.random.default_rng(0)
    if n > MAX_QUBITS:
        raise OracleError(f"oracle limited to {MAX_QUBITS} qubits, got {n}")
    psi = np.zeros(1 << n, dtype=np.complex128)
    psi[0] = 1.0
    res = OracleResult(n, psi)
    k = 0
    for op in circuit:
        if op[0] in ("MZ", "MX"):
            q = op[1]
            if op[0] == "MX":
                _apply(psi, n, ("H", q))
            p1 = _prob_one(psi, n, q)
            if forced is not None:
                bit = forced[k]
            else:
                bit = int(rng.random() < p1)
            if (p1 if bit else 1.0 - p1) < 1e-12:
                raise OracleError(f"outcome {bit} has zero probability at measurement {k}")
            _collapse(psi, n, q, bit)
            if op[0] == "MX":
                _apply(psi, n, ("H", q))
            res.outcomes.append(bit)
            res.p_one.append(p1)
            k += 1
        else:
            _apply(psi, n, op)
    return res


def outcome_distribution(circuit, n: int, tol: float = 1e-12) -> dict[tuple[int, ...], float]:
    """Exact joint distribution of all measurement outcomes, by branching."""
    if n > MAX_QUBITS:
        raise OracleError(f"oracle limited to {MAX_QUBITS} qubits, got {n}")
    psi = np.zeros(1 << n, dtype=np.complex128)
    psi[0] = 1.0
    branches = [((), 1.0, psi)]
    for op in circuit:
        if op[0] not in ("MZ", "MX"):
            for _, _, v in branches:
                _apply(v, n, op)
            continue
        q = op[1]
        nxt = []
        for rec, p, v in branches:
            if op[0] == "MX":
                _apply(v, n, ("H", q))
            p1 = _prob_one(v, n, q)
            for bit, pb in ((0, 1.0 - p1), (1, p1)):
                if pb < tol:
                    continue
                w = v.copy()
                _collapse(w, n, q, bit)
                if op[0] == "MX":
                    _apply(w, n, ("H", q))
                nxt.append((rec + (bit,), p * pb, w))
        branches = nxt
    return {rec: p for rec, p, _ in branches}


def pauli_expectation(psi: np.ndarray, obs: PauliString) -> float:
    n = obs.n
    idx = np.arange(1 << n)
    xm = int(obs.x_bits @ (1 << np.arange(n)))
    zm = int(obs.z_bits @ (1 << np.arange(n)))
    parity = np.bitwise_count((idx & zm).astype(np.uint64)).astype(np.int64) & 1
    val = np.sum(np.conj(psi[idx ^ xm]) * psi * (1 - 2 * parity))
    val *= 1j ** (int(np.sum(obs.x_bits & obs.z_bits)) + obs.phase)
    return float(val.real)


def all_pauli_expectations(psi: np.ndarray, n: int) -> np.ndarray:
    """``E[x, z]`` for every Hermitian Pauli ``i^{x.z} X^x Z^z`` (``n <= 10``)."""
    if n > 10:
        raise OracleError("full expectation table limited to 10 qubits")
    dim = 1 << n
    idx = np.arange(dim)
    v = np.conj(psi[idx[:, None] ^ idx[None, :]]) * psi[None, :]
    # Walsh-Hadamard over the second axis: W[x, z] = sum_k v[x, k] (-1)^{z.k}
    w = v.reshape((dim,) + (2,) * n)
    for ax in range(1, n + 1):
        a = np.take(w, 0, axis=ax)
        b = np.take(w, 1, axis=ax)
        w = np.stack((a + b, a - b), axis=ax)
    w = w.reshape(dim, dim)
    xz = np.bitwise_count((idx[:, None] & idx[None, :]).astype(np.uint64)).astype(np.int64)
    return np.real(w * (1j ** (xz % 4)))
