"""Hardware parameters, noise channels and the noisy gate layer used by the protocol."""
from __future__ import annotations

import math
from collections.abc import Hashable
from dataclasses import asdict, dataclass, field, fields, replace

from .stabilizer.manager import QuantumManager
from .stabilizer.tableau import TWO_QUBIT_PAULIS

_XYZ = ("X", "Y", "Z")


class NoiseParameterError(ValueError):
    pass


@dataclass(frozen=True)
class HardwareProfile:
    """Per-node and per-link physical parameters (SI units).

    ``T1``/``T2`` may be ``math.inf`` to switch idle decoherence off.
    ``bias_1q`` (3 weights) and ``bias_2q`` (15 weights) select biased gate
    channels instead of uniform depolarizing ones; both default off.
    """

    F_1q: float = 0.999
    F_2q: float = 0.9991
    F_m: float = 0.996
    F_init: float = 0.99
    F_phys: float = 0.965
    T1: float = 100.0
    T2: float = 2.0
    eta_m: float = 0.9
    eta_d: float = 0.95
    alpha: float = 0.2  # dB/km
    c_star: float = 2e8  # m/s
    D_fwd: float = 20e-6
    D_end: float = 50e-6
    t_prep: float = 3e-4
    bias_1q: tuple[float, ...] | None = None
    bias_2q: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        for name in ("F_1q", "F_2q", "F_m", "F_init", "F_phys", "eta_m", "eta_d"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise NoiseParameterError(f"{name}={v} outside [0, 1]")
        if self.F_1q < 2.0 / 3.0:
            raise NoiseParameterError(f"F_1q={self.F_1q} below 2/3 gives p > 1")
        if self.F_2q < 0.2:
            raise NoiseParameterError(f"F_2q={self.F_2q} below 1/5 gives p > 1")
        if not (self.T1 > 0 and self.T2 > 0):
            raise NoiseParameterError("T1 and T2 must be positive")
        if 2 * self.T1 < self.T2:
            raise NoiseParameterError(f"2*T1 >= T2 violated (T1={self.T1}, T2={self.T2})")
        for name in ("alpha", "D_fwd", "D_end", "t_prep"):
            if getattr(self, name) < 0:
                raise NoiseParameterError(f"{name} must be nonnegative")
        if self.c_star <= 0:
            raise NoiseParameterError("c_star must be positive")
        for name, size in (("bias_1q", 3), ("bias_2q", 15)):
            w = getattr(self, name)
            if w is not None:
                if len(w) != size or any(x < 0 for x in w) or sum(w) <= 0:
                    raise NoiseParameterError(f"{name} needs {size} nonnegative weights")
                object.__setattr__(self, name, tuple(float(x) for x in w))

    @classmethod
    def noiseless(cls, **overrides) -> "HardwareProfile":
        base = dict(F_1q=1.0, F_2q=1.0, F_m=1.0, F_init=1.0, F_phys=1.0,
                    T1=math.inf, T2=math.inf)
        base.update(overrides)
        return cls(**base)

    def with_(self, **changes) -> "HardwareProfile":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return asdict(self)


FIDELITY_FIELDS = ("F_1q", "F_2q", "F_m", "F_init", "F_phys")
PROFILE_FIELDS = tuple(f.name for f in fields(HardwareProfile))


def depolarize_prob_1q(F_1q: float) -> float:
    if not 2.0 / 3.0 <= F_1q <= 1.0:
        raise NoiseParameterError(f"F_1q={F_1q} outside [2/3, 1]")
    return 1.5 * (1.0 - F_1q)


def depolarize_prob_2q(F_2q: float) -> float:
    if not 0.2 <= F_2q <= 1.0:
        raise NoiseParameterError(f"F_2q={F_2q} outside [1/5, 1]")
    return 1.25 * (1.0 - F_2q)


def idle_channel_probs(t: float, T1: float, T2: float) -> tuple[float, float, float]:
    """Pauli-twirled amplitude and phase damping over an idle time ``t``."""
    if t < 0:
        raise NoiseParameterError(f"negative idle time {t}")
    if 2 * T1 < T2:
        raise NoiseParameterError(f"2*T1 >= T2 violated (T1={T1}, T2={T2})")
    a = -math.expm1(-t / T1) / 4.0
    pz = -math.expm1(-t / T2) / 2.0 - a
    return a, a, max(pz, 0.0)


def flip_measurement(bit: int, F_m: float, rng) -> int:
    """Flip the classical record with probability ``1 - F_m``."""
    if F_m < 1.0 and rng.random() < 1.0 - F_m:
        return bit ^ 1
    return bit


def _sample_xyz(u: float, p: float, weights: tuple[float, ...] | None) -> str:
    # ``u`` is uniform on [0, p); reuse it to pick the Pauli
    if weights is None:
        return _XYZ[min(int(u / p * 3), 2)]
    total = sum(weights)
    acc = 0.0
    for letter, w in zip(_XYZ, weights):
        acc += w / total * p
        if u < acc:
            return letter
    return "Z"


@dataclass
class IdleRecord:
    """Last time (ps) each memory key was brought up to date with idle noise."""

    last_idle_time: dict[Hashable, int] = field(default_factory=dict)

    def mark(self, key: Hashable, now: int) -> None:
        self.last_idle_time[key] = now


def apply_idle(manager: QuantumManager, key: Hashable, now: int, idle_record: IdleRecord,
               profile: HardwareProfile, rng) -> str:
    """Apply the idle channel accumulated since the key's last touch."""
    last = idle_record.last_idle_time[key]
    if now < last:
        raise NoiseParameterError(f"idle record of {key!r} is in the future")
    idle_record.last_idle_time[key] = now
    if now == last or (math.isinf(profile.T1) and math.isinf(profile.T2)):
        return "I"
    px, py, pz = idle_channel_probs((now - last) * 1e-12, profile.T1, profile.T2)
    u = rng.random()
    if u < px:
        kind = "X"
    elif u < px + py:
        kind = "Y"
    elif u < px + py + pz:
        kind = "Z"
    else:
        return "I"
    manager.pauli(key, kind)
    return kind


def noisy_init(manager: QuantumManager, key: Hashable, F_init: float, rng) -> int:
    """Prepare ``|0>``, flipped to ``|1>`` with probability ``1 - F_init``."""
    manager.reset(key)
    if F_init < 1.0 and rng.random() < 1.0 - F_init:
        manager.pauli(key, "X")
        return 1
    return 0


def corrupt_bell_pair(manager: QuantumManager, keys: tuple[Hashable, Hashable], F_phys: float,
                      rng) -> str:
    """With probability ``1 - F_phys`` apply X, Z or Y (equal odds) to the second member."""
    if F_phys >= 1.0:
        return "I"
    u = rng.random()
    p = 1.0 - F_phys
    if u >= p:
        return "I"
    kind = ("X", "Z", "Y")[min(int(u / p * 3), 2)]
    manager.pauli(keys[1], kind)
    return kind


@dataclass
class Counters:
    one_qubit_gates: int = 0
    two_qubit_gates: int = 0
    measurements: int = 0


class NoisyDevice:
    """Gate/measurement layer that inserts every noise mechanism.

    Idle noise is applied lazily to each qubit right before it is touched;
    gate noise follows the ideal gate; measurement noise flips the record
    only. Counted operations feed the resource counters.
    """

    def __init__(self, manager: QuantumManager, profile: HardwareProfile, clock, rng):
        self.qm = manager
        self.profile = profile
        self.clock = clock  # anything with an integer ``now`` in ps
        self.rng = rng
        self.idle = IdleRecord()
        self.counters = Counters()
        self.p1 = depolarize_prob_1q(profile.F_1q)
        self.p2 = depolarize_prob_2q(profile.F_2q)
        self._idle_on = not (math.isinf(profile.T1) and math.isinf(profile.T2))
        self.hook = None  # optional callable(stage, keys, device) for fault injection

    def checkpoint(self, stage: str, keys) -> None:
        if self.hook is not None:
            self.hook(stage, keys, self)

    def touch(self, key: Hashable) -> None:
        if self._idle_on:
            apply_idle(self.qm, key, self.clock.now, self.idle, self.profile, self.rng)

    def init(self, key: Hashable) -> None:
        noisy_init(self.qm, key, self.profile.F_init, self.rng)
        self.idle.mark(key, self.clock.now)

    def bell_pair(self, a: Hashable, b: Hashable) -> str:
        """Fresh ``|Phi+>`` on ``(a, b)`` followed by the physical pair error."""
        self.qm.reset(a)
        self.qm.reset(b)
        self.qm.h(a)
        self.qm.cnot(a, b)
        now = self.clock.now
        self.idle.mark(a, now)
        self.idle.mark(b, now)
        return corrupt_bell_pair(self.qm, (a, b), self.profile.F_phys, self.rng)

    def gate1(self, kind: str, key: Hashable) -> None:
        self.touch(key)
        if kind == "H":
            self.qm.h(key)
        elif kind == "S":
            self.qm.s(key)
        else:
            self.qm.pauli(key, kind)
        self.counters.one_qubit_gates += 1
        p = self.p1
        if p > 0.0:
            u = self.rng.random()
            if u < p:
                self.qm.pauli(key, _sample_xyz(u, p, self.profile.bias_1q))

    def h(self, key: Hashable) -> None:
        self.gate1("H", key)

    def cnot(self, c: Hashable, t: Hashable) -> None:
        self.touch(c)
        self.touch(t)
        self.qm.cnot(c, t)
        self.counters.two_qubit_gates += 1
        p = self.p2
        if p > 0.0:
            u = self.rng.random()
            if u < p:
                w = self.profile.bias_2q
                if w is None:
                    k = min(int(u / p * 15), 14)
                else:
                    total = sum(w)
                    acc = 0.0
                    k = 14
                    for i, wi in enumerate(w):
                        acc += wi / total * p
                        if u < acc:
                            k = i
                            break
                pa, pb = TWO_QUBIT_PAULIS[k]
                self.qm.pauli(c, pa)
                self.qm.pauli(t, pb)

    def measure(self, key: Hashable, basis: str = "Z") -> int:
        """Native Z or X measurement; returns the (possibly flipped) record."""
        self.touch(key)
        bit = self.qm.measure(key, basis, self.rng)
        self.counters.measurements += 1
        return flip_measurement(bit, self.profile.F_m, self.rng)

    def correct(self, key: Hashable, kind: str) -> None:
        """Noiseless, uncounted Pauli (classically controlled corrections)."""
        self.touch(key)
        self.qm.pauli(key, kind)
