"""Many-shot sampling of small Clifford circuits on the tableau kernels.

The circuit format is the oracle's. Measurements collapse in place (no
qubit is detached), so the whole shot stays in one tableau. Coins are drawn
up front from ``seed`` so both kernel backends give identical samples.
"""
from __future__ import annotations

import numpy as np

from .._accel import USE_NUMBA
from . import kernels as K
from .tableau import TableauError, new_zero_state

_CODES = {"H": 0, "S": 1, "X": 2, "Y": 3, "Z": 4, "CNOT": 5, "MZ": 6, "MX": 7}


def compile_circuit(circuit, n: int) -> np.ndarray:
    """``(m, 3)`` int64 rows ``(opcode, a, b)``."""
    ops = np.zeros((len(circuit), 3), dtype=np.int64)
    for i, op in enumerate(circuit):
        code = _CODES.get(op[0])
        if code is None:
            raise TableauError(f"unknown op {op[0]!r}")
        qs = op[1:]
        if any(not 0 <= q < n for q in qs) or (code == 5 and qs[0] == qs[1]):
            raise TableauError(f"bad qubits in {op}")
        ops[i, 0] = code
        ops[i, 1] = qs[0]
        ops[i, 2] = qs[1] if code == 5 else 0
    return ops


def _shots_py(ops, n, xs0, zs0, r0, coins, out, rnd):
    for s in range(coins.shape[0]):
        xs, zs, r = xs0.copy(), zs0.copy(), r0.copy()
        k = 0
        for i in range(ops.shape[0]):
            code, a, b = int(ops[i, 0]), int(ops[i, 1]), int(ops[i, 2])
            if code == 0:
                K.gate_h(xs, zs, r, a)
            elif code == 1:
                K.gate_s(xs, zs, r, a)
            elif code == 2:
                K.gate_pauli(xs, zs, r, a, 1, 0)
            elif code == 3:
                K.gate_pauli(xs, zs, r, a, 1, 1)
            elif code == 4:
                K.gate_pauli(xs, zs, r, a, 0, 1)
            elif code == 5:
                K.gate_cnot(xs, zs, r, a, b)
            else:
                if code == 7:
                    K.gate_h(xs, zs, r, a)
                o, w = K.measure_z(xs, zs, r, n, a, coins[s, k])
                if code == 7:
                    K.gate_h(xs, zs, r, a)
                out[s, k] = o
                rnd[s, k] = w
                k += 1


if USE_NUMBA:
    from numba import njit

    _shots = njit(cache=True)(_shots_py)
else:
    _shots = _shots_py


def sample_shots(circuit, n: int, shots: int, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Run ``shots`` independent trajectories from ``|0..0>``.

    Returns ``(outcomes, random)``, both ``(shots, n_measurements)`` uint8;
    ``random[s, k]`` says whether measurement ``k`` was random in shot ``s``.
    """
    ops = compile_circuit(circuit, n)
    n_meas = int(np.count_nonzero(ops[:, 0] >= 6))
    st = new_zero_state(n)
    coins = np.random.default_rng(seed).integers(0, 2, size=(shots, n_meas), dtype=np.uint8)
    out = np.zeros((shots, n_meas), dtype=np.uint8)
    rnd = np.zeros((shots, n_meas), dtype=np.uint8)
    _shots(ops, n, st.xs, st.zs, st.r, coins, out, rnd)
    return out, rnd
