"""Stabilizer tableau state for one entangled group of memory qubits."""
from __future__ import annotations

from collections.abc import Hashable, Sequence

import numpy as np

from . import kernels as K
from .pauli import PauliString

_GATES_1Q = {"H", "S", "X", "Y", "Z"}

# 15 non-identity two-qubit Paulis in the order used by apply_pauli_channel_2:
# index k -> (pauli on a, pauli on b) with 0=I, 1=X, 2=Y, 3=Z, k = 4*a + b.
TWO_QUBIT_PAULIS = tuple(("IXYZ"[k >> 2], "IXYZ"[k & 3]) for k in range(1, 16))
_PAULI_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}


class TableauError(ValueError):
    pass


def _words(n: int) -> int:
    return max(1, (n + 63) >> 6)


class TableauState:
    """``n`` qubits in a stabilizer state, tagged with global memory keys.

    Rows ``0..n-1`` of ``xs``/``zs``/``r`` are destabilizers and rows
    ``n..2n-1`` the stabilizer generators.
    """

    __slots__ = ("keys", "xs", "zs", "r", "_pos")

    def __init__(self, keys: Sequence[Hashable], xs: np.ndarray, zs: np.ndarray, r: np.ndarray):
        self.keys = list(keys)
        self.xs = xs
        self.zs = zs
        self.r = r
        self._pos = {k: i for i, k in enumerate(self.keys)}
        if len(self._pos) != len(self.keys):
            raise TableauError("duplicate keys in one state")

    @property
    def n(self) -> int:
        return len(self.keys)

    def index(self, key: Hashable) -> int:
        return self._pos[key]

    def copy(self) -> "TableauState":
        return TableauState(self.keys, self.xs.copy(), self.zs.copy(), self.r.copy())

    def _check(self, q: int) -> None:
        if not 0 <= q < len(self.keys):
            raise TableauError(f"qubit index {q} out of range for n={self.n}")

    # gates on local indices; no range checks on the hot path
    def h(self, q: int) -> None:
        K.gate_h(self.xs, self.zs, self.r, q)

    def s(self, q: int) -> None:
        K.gate_s(self.xs, self.zs, self.r, q)

    def pauli(self, q: int, px: int, pz: int) -> None:
        K.gate_pauli(self.xs, self.zs, self.r, q, px, pz)

    def cnot(self, c: int, t: int) -> None:
        K.gate_cnot(self.xs, self.zs, self.r, c, t)

    def measure_z(self, q: int, coin: int) -> tuple[int, bool]:
        """Collapse qubit ``q`` in the Z basis without detaching it."""
        out, rnd = K.measure_z(self.xs, self.zs, self.r, len(self.keys), q, coin)
        return int(out), bool(rnd)

    def detach(self, q: int) -> tuple["TableauState", int]:
        """Split off qubit ``q``, which must be in a Z eigenstate.

        Returns the single-qubit state and its outcome bit; ``self`` keeps
        the remaining keys (the last key moves into slot ``q``).
        """
        key = self.keys[q]
        xs, zs, r, sign = K.remove_qubit(self.xs, self.zs, self.r, len(self.keys), q)
        last = self.keys.pop()
        del self._pos[key]
        if q < len(self.keys):
            self.keys[q] = last
            self._pos[last] = q
        self.xs, self.zs, self.r = xs, zs, r
        single = _basis_state(key, int(sign))
        return single, int(sign)

    def peek(self, obs: PauliString) -> int:
        if obs.n != self.n:
            raise TableauError(f"observable length {obs.n} != n={self.n}")
        px, pz, ps = obs.packed()
        return int(K.peek(self.xs, self.zs, self.r, self.n, px, pz, ps))

    def measure_observable(self, obs: PauliString, coin: int) -> tuple[int, bool]:
        """Projective measurement of a Hermitian Pauli; outcome 0 means +1."""
        if obs.n != self.n:
            raise TableauError(f"observable length {obs.n} != n={self.n}")
        px, pz, ps = obs.packed()
        out, rnd = K.measure_pauli(self.xs, self.zs, self.r, self.n, px, pz, ps, coin)
        return int(out), bool(rnd)

    def _rows(self, lo: int) -> list[PauliString]:
        n = self.n
        x = np.unpackbits(self.xs.view(np.uint8), axis=1, bitorder="little")[:, :n]
        z = np.unpackbits(self.zs.view(np.uint8), axis=1, bitorder="little")[:, :n]
        return [PauliString(x[i], z[i], -1 if self.r[i] else 1) for i in range(lo, lo + n)]

    def stabilizers(self) -> list[PauliString]:
        return self._rows(self.n)

    def destabilizers(self) -> list[PauliString]:
        return self._rows(0)

    def validate(self) -> None:
        """Raise if the generator set is not a valid symplectic tableau."""
        n = self.n
        if self.xs.shape != (2 * n, _words(n)) or self.zs.shape != self.xs.shape:
            raise TableauError("tableau shape mismatch")
        x = np.unpackbits(self.xs.view(np.uint8), axis=1, bitorder="little").astype(np.int64)
        z = np.unpackbits(self.zs.view(np.uint8), axis=1, bitorder="little").astype(np.int64)
        if x[:, n:].any() or z[:, n:].any():
            raise TableauError("bits set beyond qubit count")
        x, z = x[:, :n], z[:, :n]
        form = (x @ z.T + z @ x.T) % 2
        want = np.zeros((2 * n, 2 * n), dtype=np.int64)
        want[:n, n:] = np.eye(n, dtype=np.int64)
        want[n:, :n] = np.eye(n, dtype=np.int64)
        if not np.array_equal(form, want):
            raise TableauError("commutation structure violated")

    def permuted(self, order: Sequence[Hashable]) -> "TableauState":
        """Copy with columns reordered to follow ``order`` (a permutation of keys)."""
        if len(order) != self.n or set(order) != set(self.keys):
            raise TableauError("order must be a permutation of the state's keys")
        n = self.n
        cols = [self._pos[k] for k in order]
        out = []
        for arr in (self.xs, self.zs):
            bits = np.unpackbits(arr.view(np.uint8), axis=1, bitorder="little")[:, :n]
            bits = bits[:, cols]
            pad = np.zeros((2 * n, _words(n) * 64), dtype=np.uint8)
            pad[:, :n] = bits
            out.append(np.packbits(pad, axis=1, bitorder="little").view(np.uint64).copy())
        return TableauState(order, out[0], out[1], self.r.copy())

    def __repr__(self) -> str:
        gens = ", ".join(str(p) for p in self.stabilizers())
        return f"TableauState(keys={self.keys}, stabilizers=[{gens}])"


_X1 = np.array([[1], [0]], dtype=np.uint64)
_Z1 = np.array([[0], [1]], dtype=np.uint64)
_R = (np.array([0, 0], dtype=np.uint8), np.array([0, 1], dtype=np.uint8))


def _basis_state(key: Hashable, bit: int) -> TableauState:
    st = TableauState.__new__(TableauState)
    st.keys = [key]
    st._pos = {key: 0}
    st.xs = _X1.copy()
    st.zs = _Z1.copy()
    st.r = _R[bit].copy()
    return st


def new_zero_state(n: int, keys: Sequence[Hashable] | None = None) -> TableauState:
    """``|0...0>`` on ``n`` qubits: stabilizers ``+Z_i``, destabilizers ``+X_i``."""
    if n == 1 and keys is not None and len(keys) == 1:
        return _basis_state(keys[0], 0)
    if n < 1:
        raise TableauError("need at least one qubit")
    keys = list(range(n)) if keys is None else list(keys)
    if len(keys) != n:
        raise TableauError(f"got {len(keys)} keys for n={n}")
    if len(set(keys)) != n:
        raise TableauError("duplicate keys")
    nw = _words(n)
    xs = np.zeros((2 * n, nw), dtype=np.uint64)
    zs = np.zeros((2 * n, nw), dtype=np.uint64)
    for q in range(n):
        bit = np.uint64(1) << np.uint64(q & 63)
        xs[q, q >> 6] = bit
        zs[n + q, q >> 6] = bit
    return TableauState(keys, xs, zs, np.zeros(2 * n, dtype=np.uint8))


def apply_clifford(state: TableauState, gate: str, targets: Sequence[int]) -> None:
    """Apply one of ``H, S, X, Y, Z, CNOT`` to local qubit indices."""
    gate = gate.upper()
    targets = [int(t) for t in targets]
    for t in targets:
        state._check(t)
    if gate == "CNOT":
        if len(targets) != 2 or targets[0] == targets[1]:
            raise TableauError("CNOT takes two distinct qubits (control, target)")
        state.cnot(targets[0], targets[1])
        return
    if gate not in _GATES_1Q:
        raise TableauError(f"unsupported gate {gate!r}")
    if len(targets) != 1:
        raise TableauError(f"{gate} takes exactly one qubit")
    q = targets[0]
    if gate == "H":
        state.h(q)
    elif gate == "S":
        state.s(q)
    else:
        px, pz = _PAULI_BITS[gate]
        state.pauli(q, px, pz)


def _coin(rng) -> int:
    return 1 if rng.random() < 0.5 else 0


def measure_detach(state: TableauState, index: int, basis: str, rng) -> tuple[int, TableauState]:
    """Measure in ``Z`` or ``X`` and split the qubit off.

    Returns the outcome bit and the detached single-qubit state, which is
    ``|outcome>`` for Z or ``H|outcome>`` for X.
    """
    state._check(index)
    basis = basis.upper()
    if basis not in ("Z", "X"):
        raise TableauError(f"basis must be Z or X, got {basis!r}")
    if basis == "X":
        state.h(index)
    coin = _coin(rng)
    out, _ = state.measure_z(index, coin)
    single, _ = state.detach(index)
    if basis == "X":
        single.h(0)
    return out, single


def measure(state: TableauState, index: int, basis: str, rng) -> int:
    """Measure and split off qubit ``index``; ``state`` keeps the rest."""
    return measure_detach(state, index, basis, rng)[0]


def _check_probs(probs: Sequence[float]) -> None:
    if any(p < 0 or p > 1 for p in probs) or sum(probs) > 1 + 1e-12:
        raise TableauError(f"invalid Pauli probabilities {tuple(probs)}")


def apply_pauli_channel_1(state: TableauState, index: int, px: float, py: float,
                          pz: float, rng) -> str:
    """Apply X/Y/Z with the given probabilities; returns the applied letter."""
    _check_probs((px, py, pz))
    state._check(index)
    u = rng.random()
    if u < px:
        state.pauli(index, 1, 0)
        return "X"
    if u < px + py:
        state.pauli(index, 1, 1)
        return "Y"
    if u < px + py + pz:
        state.pauli(index, 0, 1)
        return "Z"
    return "I"


def apply_pauli_channel_2(state: TableauState, indices: tuple[int, int],
                          probs: Sequence[float], rng) -> tuple[str, str]:
    """Sample one of the 15 two-qubit Paulis (order ``TWO_QUBIT_PAULIS``) or identity."""
    if len(probs) != 15:
        raise TableauError("need 15 two-qubit Pauli weights")
    _check_probs(probs)
    a, b = indices
    state._check(a)
    state._check(b)
    if a == b:
        raise TableauError("two-qubit channel needs distinct qubits")
    u = rng.random()
    acc = 0.0
    for k, p in enumerate(probs):
        acc += p
        if u < acc:
            pa, pb = TWO_QUBIT_PAULIS[k]
            if pa != "I":
                state.pauli(a, *_PAULI_BITS[pa])
            if pb != "I":
                state.pauli(b, *_PAULI_BITS[pb])
            return pa, pb
    return "I", "I"


def merge(states: Sequence[TableauState]) -> TableauState:
    """Tensor product; key order is the concatenation of the inputs' keys."""
    if not states:
        raise TableauError("nothing to merge")
    seen: set = set()
    for st in states:
        for k in st.keys:
            if k in seen:
                raise TableauError(f"key {k!r} appears in more than one state")
            seen.add(k)
    out = states[0]
    for st in states[1:]:
        out = merge_pair(out, st)
    return out


def merge_pair(a: TableauState, b: TableauState) -> TableauState:
    """Unchecked two-way merge (caller guarantees disjoint keys)."""
    na = len(a.keys)
    xs, zs, r = K.merge(a.xs, a.zs, a.r, na, b.xs, b.zs, b.r, len(b.keys))
    st = TableauState.__new__(TableauState)
    st.keys = a.keys + b.keys
    pos = dict(a._pos)
    for i, k in enumerate(b.keys):
        pos[k] = na + i
    st._pos = pos
    st.xs, st.zs, st.r = xs, zs, r
    return st


def peek_expectation(state: TableauState, observable: PauliString) -> int:
    """``+1``/``-1`` if ``±observable`` stabilizes the state, else ``0``. Never mutates."""
    return state.peek(observable)


def stabilizer_group_expectations(state: TableauState) -> np.ndarray:
    """All ``4**n`` Pauli expectations as a ``(2**n, 2**n)`` array ``E[x, z]``.

    ``E[x, z]`` is the expectation of ``i^{x.z} X^x Z^z`` (a Hermitian
    Pauli, with ``Y`` where both bits are set); qubit ``q`` is bit ``q`` of
    the integer index. Intended for small ``n`` (validation only).
    """
    n = state.n
    if n > 12:
        raise TableauError("group enumeration limited to 12 qubits")
    gens = state.stabilizers()
    elems = [PauliString.identity(n)]
    for g in gens:
        elems = elems + [e * g for e in elems]
    weights = 1 << np.arange(n)
    E = np.zeros((1 << n, 1 << n), dtype=np.int8)
    for e in elems:
        xi = int(e.x_bits @ weights)
        zi = int(e.z_bits @ weights)
        E[xi, zi] = e.sign
    return E
