"""CSS code definitions, the Steane [[7,1,3]] block and its classical decoder."""
from __future__ import annotations

from collections.abc import Hashable, Sequence
from dataclasses import dataclass

import numpy as np

from .noise import NoisyDevice
from .stabilizer.manager import QuantumManager
from .stabilizer.pauli import PauliString

FT_MODES = ("none", "minimal", "standard")
CEC_MODES = ("cec", "none")


class CodeError(ValueError):
    pass


class PreparationFailure(RuntimeError):
    """Encoder verification kept rejecting blocks until the retry cap."""


@dataclass(frozen=True)
class CSSCode:
    """A CSS code with equal X- and Z-type check matrices (self-dual case).

    Qubit positions are 1-based in ``encoder`` and the decoder tables,
    matching the usual presentation; everything else is 0-based.
    """

    name: str
    n: int
    k: int
    d: int
    H: np.ndarray
    encoder: tuple[tuple, ...]
    verification: tuple[int, ...]  # 1-based Z-type support
    verification_rounds: dict

    @property
    def x_stabilizers(self) -> list[PauliString]:
        z = np.zeros(self.n, np.uint8)
        return [PauliString(row, z) for row in self.H.astype(np.uint8)]

    @property
    def z_stabilizers(self) -> list[PauliString]:
        x = np.zeros(self.n, np.uint8)
        return [PauliString(x, row) for row in self.H.astype(np.uint8)]

    @property
    def logical_x(self) -> PauliString:
        return PauliString(np.ones(self.n, np.uint8), np.zeros(self.n, np.uint8))

    @property
    def logical_z(self) -> PauliString:
        return PauliString(np.zeros(self.n, np.uint8), np.ones(self.n, np.uint8))

    @property
    def verification_operator(self) -> PauliString:
        z = np.zeros(self.n, np.uint8)
        z[[q - 1 for q in self.verification]] = 1
        return PauliString(np.zeros(self.n, np.uint8), z)

    def syndrome(self, m) -> np.ndarray:
        m = np.asarray(m, dtype=np.int64)
        if m.shape != (self.n,):
            raise CodeError(f"expected {self.n} bits, got shape {m.shape}")
        return (self.H.astype(np.int64) @ m) % 2

    def syndrome_position(self, s) -> int:
        """1-based position whose H column equals ``s`` (0 for the zero syndrome)."""
        key = tuple(int(b) for b in s)
        if not any(key):
            return 0
        return _COLUMN_INDEX[self.name][key]


def _hamming_h() -> np.ndarray:
    cols = [[(j >> 2) & 1, (j >> 1) & 1, j & 1] for j in range(1, 8)]
    return np.array(cols, dtype=np.uint8).T


STEANE_713 = CSSCode(
    name="steane713",
    n=7,
    k=1,
    d=3,
    H=_hamming_h(),
    encoder=(
        ("H", 2), ("H", 3), ("H", 4),
        ("CNOT", 2, 1), ("CNOT", 4, 6), ("CNOT", 3, 7), ("CNOT", 2, 5),
        ("CNOT", 3, 1), ("CNOT", 4, 7), ("CNOT", 2, 6), ("CNOT", 7, 5),
    ),
    verification=(1, 6, 7),
    verification_rounds={"none": 0, "minimal": 1, "standard": 4},
)
STEANE_713.H.setflags(write=False)

_COLUMN_INDEX = {
    STEANE_713.name: {tuple(int(b) for b in STEANE_713.H[:, j]): j + 1 for j in range(7)},
}
CODES = {STEANE_713.name: STEANE_713}
CodeSpec = CSSCode


def get_code(name: str) -> CSSCode:
    try:
        return CODES[name]
    except KeyError:
        raise CodeError(f"unknown code {name!r}; known: {sorted(CODES)}") from None


def hamming_syndrome(m: Sequence[int]) -> tuple[int, int, int]:
    if len(m) != 7:
        raise CodeError(f"expected 7 bits, got {len(m)}")
    return tuple(int(b) for b in STEANE_713.syndrome(m))


@dataclass(frozen=True)
class MeasuredBlock:
    m: tuple[int, ...]
    s: tuple[int, ...]
    m_prime: tuple[int, ...]
    logical_bit: int


def correct_and_extract(m: Sequence[int], cec_mode: str = "cec",
                        code: CSSCode = STEANE_713) -> MeasuredBlock:
    """Decode a transversal readout: syndrome, optional single-bit fix, parity."""
    if cec_mode not in CEC_MODES:
        raise CodeError(f"cec_mode must be one of {CEC_MODES}")
    m = tuple(int(b) & 1 for b in m)
    s = tuple(int(b) for b in code.syndrome(m))
    fixed = list(m)
    if cec_mode == "cec":
        pos = code.syndrome_position(s)
        if pos:
            fixed[pos - 1] ^= 1
    return MeasuredBlock(m, s, tuple(fixed), sum(fixed) & 1)


def encode_zero(device: NoisyDevice, data: Sequence[Hashable], ancilla: Hashable,
                mode: str = "minimal", retry_cap: int = 100, code: CSSCode = STEANE_713,
                tag: str = "") -> int:
    """Prepare logical ``|0>`` on ``data`` with optional verification.

    Returns the number of attempts used. Raises :class:`PreparationFailure`
    after ``retry_cap`` rejected attempts.
    """
    if mode not in FT_MODES:
        raise CodeError(f"ft mode must be one of {FT_MODES}")
    if len(data) != code.n:
        raise CodeError(f"need {code.n} data keys")
    rounds = code.verification_rounds[mode]
    check = [data[q - 1] for q in code.verification]
    block = list(data) + [ancilla]
    for attempt in range(1, retry_cap + 1):
        for k in block:
            device.init(k)
        device.checkpoint(f"{tag}encode_init", block)
        for step, op in enumerate(code.encoder):
            if op[0] == "H":
                device.h(data[op[1] - 1])
            else:
                device.cnot(data[op[1] - 1], data[op[2] - 1])
            device.checkpoint(f"{tag}encode_step{step}", block)
        ok = True
        for r in range(rounds):
            if r > 0:
                device.init(ancilla)
            for i, q in enumerate(check):
                device.cnot(q, ancilla)
                device.checkpoint(f"{tag}verify{r}_{i}", block)
            if device.measure(ancilla, "Z"):
                ok = False
                break
        if ok:
            return attempt
    raise PreparationFailure(f"block {tag or data[0]!r} rejected {retry_cap} times")


def transversal_cnot(device: NoisyDevice, control: Sequence[Hashable],
                     target: Sequence[Hashable]) -> None:
    if len(control) != len(target) or set(control) & set(target):
        raise CodeError("transversal CNOT needs two disjoint blocks of equal size")
    for c, t in zip(control, target):
        device.cnot(c, t)


def ideal_recovery(manager: QuantumManager, block: Sequence[Hashable], rng,
                   code: CSSCode = STEANE_713) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Noiseless syndrome measurement (Z-type then X-type) and Pauli correction.

    Returns ``(z_syndrome, x_syndrome)``.
    """
    if len(block) != code.n:
        raise CodeError(f"need {code.n} keys")
    z_syn = []
    for row in code.H:
        obs = {block[q]: "Z" for q in np.flatnonzero(row)}
        z_syn.append(manager.measure_observable(obs, rng))
    x_syn = []
    for row in code.H:
        obs = {block[q]: "X" for q in np.flatnonzero(row)}
        x_syn.append(manager.measure_observable(obs, rng))
    pos = code.syndrome_position(z_syn)
    if pos:
        manager.pauli(block[pos - 1], "X")
    pos = code.syndrome_position(x_syn)
    if pos:
        manager.pauli(block[pos - 1], "Z")
    return tuple(z_syn), tuple(x_syn)
