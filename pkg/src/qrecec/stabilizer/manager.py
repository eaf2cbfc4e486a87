"""Key-addressed registry of tableau groups.

Each live memory key belongs to exactly one :class:`TableauState`. Two-qubit
gates merge groups on demand and measurements split the measured qubit off,
so unentangled qubits never share a tableau.
"""
from __future__ import annotations

from collections.abc import Hashable, Iterable, Sequence

from .pauli import PauliString
from .tableau import _R, _X1, _Z1, TableauError, TableauState, merge, merge_pair, new_zero_state

_PAULI_BITS = {"X": (1, 0), "Y": (1, 1), "Z": (0, 1)}


class QuantumManager:
    def __init__(self) -> None:
        self._state: dict[Hashable, TableauState] = {}

    def __contains__(self, key: Hashable) -> bool:
        return key in self._state

    def __len__(self) -> int:
        return len(self._state)

    def keys(self) -> list[Hashable]:
        return list(self._state)

    def state_of(self, key: Hashable) -> TableauState:
        return self._state[key]

    def groups(self) -> list[TableauState]:
        seen: dict[int, TableauState] = {}
        for st in self._state.values():
            seen.setdefault(id(st), st)
        return list(seen.values())

    def new(self, keys: Iterable[Hashable]) -> None:
        """Register fresh keys, each as its own ``|0>`` state."""
        for k in keys:
            if k in self._state:
                raise TableauError(f"key {k!r} already registered")
            self._state[k] = new_zero_state(1, [k])

    def adopt(self, state: TableauState) -> None:
        """Register an externally built state whose keys are all new."""
        for k in state.keys:
            if k in self._state:
                raise TableauError(f"key {k!r} already registered")
        for k in state.keys:
            self._state[k] = state

    def _detach(self, key: Hashable, rng=None) -> None:
        # Tracing out = measuring and forgetting; the coin only matters if
        # the rest of the group survives, so callers then pass an rng.
        st = self._state[key]
        if st.n == 1:
            return
        q = st._pos[key]
        coin = 0 if rng is None else int(rng.random() < 0.5)
        st.measure_z(q, coin)
        single, _ = st.detach(q)
        self._state[key] = single

    def reset(self, key: Hashable, rng=None) -> None:
        """Return ``key`` to ``|0>``, tracing it out of any group it is in."""
        st = self._state.get(key)
        if st is not None and len(st.keys) == 1:
            st.xs[:] = _X1
            st.zs[:] = _Z1
            st.r[:] = _R[0]
            return
        if st is not None:
            self._detach(key, rng)
        self._state[key] = new_zero_state(1, [key])

    def release(self, keys: Iterable[Hashable], rng=None) -> None:
        for k in keys:
            self._detach(k, rng)
            del self._state[k]

    # gates
    def h(self, key: Hashable) -> None:
        st = self._state[key]
        st.h(st._pos[key])

    def s(self, key: Hashable) -> None:
        st = self._state[key]
        st.s(st._pos[key])

    def pauli(self, key: Hashable, kind: str) -> None:
        if kind == "I":
            return
        st = self._state[key]
        px, pz = _PAULI_BITS[kind]
        st.pauli(st._pos[key], px, pz)

    def _join(self, a: Hashable, b: Hashable) -> TableauState:
        sa = self._state[a]
        sb = self._state[b]
        if sa is sb:
            return sa
        if len(sa.keys) < len(sb.keys):
            sa, sb = sb, sa
        st = merge_pair(sa, sb)
        for k in st.keys:
            self._state[k] = st
        return st

    def cnot(self, control: Hashable, target: Hashable) -> None:
        if control == target:
            raise TableauError("CNOT needs two distinct keys")
        st = self._join(control, target)
        st.cnot(st._pos[control], st._pos[target])

    def measure(self, key: Hashable, basis: str, rng) -> int:
        """Projective Z or X measurement; the qubit ends up in its own group."""
        st = self._state[key]
        q = st._pos[key]
        if basis == "X":
            st.h(q)
        elif basis != "Z":
            raise TableauError(f"basis must be Z or X, got {basis!r}")
        coin = 1 if rng.random() < 0.5 else 0
        out, _ = st.measure_z(q, coin)
        if len(st.keys) > 1:
            single, _ = st.detach(q)
            self._state[key] = single
            st = single
        if basis == "X":
            st.h(0)
        return out

    def measure_observable(self, obs: dict[Hashable, str], rng) -> int:
        """Measure a multi-qubit Pauli given as ``{key: 'X'|'Y'|'Z'}`` (sign +)."""
        keys = list(obs)
        st = self._state[keys[0]]
        for k in keys[1:]:
            st = self._join(keys[0], k)
        p = PauliString.identity(st.n)
        for k, kind in obs.items():
            px, pz = _PAULI_BITS[kind]
            p.x_bits[st._pos[k]] = px
            p.z_bits[st._pos[k]] = pz
        coin = 1 if rng.random() < 0.5 else 0
        out, _ = st.measure_observable(p, coin)
        return out

    def peek(self, obs: dict[Hashable, str], sign: int = 1) -> int:
        """Expectation of ``sign * prod_k obs[k]`` without disturbing the state."""
        by_group: dict[int, tuple[TableauState, list]] = {}
        for k, kind in obs.items():
            if kind == "I":
                continue
            st = self._state[k]
            by_group.setdefault(id(st), (st, []))[1].append((k, kind))
        val = sign
        for st, items in by_group.values():
            p = PauliString.identity(st.n)
            for k, kind in items:
                px, pz = _PAULI_BITS[kind]
                p.x_bits[st._pos[k]] = px
                p.z_bits[st._pos[k]] = pz
            v = st.peek(p)
            if v == 0:
                return 0
            val *= v
        return val

    def snapshot(self, keys: Sequence[Hashable]) -> TableauState:
        """Copy of the joint state of ``keys`` (whole groups), columns in ``keys`` order."""
        groups: list[TableauState] = []
        for k in keys:
            st = self._state[k]
            if all(st is not g for g in groups):
                groups.append(st)
        joint = merge([g.copy() for g in groups])
        if set(joint.keys) != set(keys):
            raise TableauError("snapshot keys must cover whole groups")
        return joint.permuted(list(keys))

    def validate(self) -> None:
        for st in self.groups():
            st.validate()
            for k in st.keys:
                if self._state.get(k) is not st:
                    raise TableauError(f"registry mismatch for key {k!r}")
