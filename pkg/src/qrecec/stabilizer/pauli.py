"""Signed Pauli strings with exact phase tracking (convention ``Y = iXZ``)."""
from __future__ import annotations

import numpy as np

_CHARS = "IXZY"  # index = x + 2*z


def _pack(bits: np.ndarray) -> np.ndarray:
    n = bits.shape[0]
    nw = max(1, (n + 63) >> 6)
    padded = np.zeros(nw * 64, dtype=np.uint8)
    padded[:n] = bits
    return np.packbits(padded, bitorder="little").view(np.uint64).copy()


class PauliString:
    """A Pauli operator ``i^phase * P_1 ⊗ ... ⊗ P_n``.

    ``x_bits[q] = z_bits[q] = 1`` denotes ``Y`` on qubit ``q`` (not ``XZ``).
    Observables have a real phase; products of anticommuting strings carry
    an imaginary phase, which is kept so the group law stays exact.
    """

    __slots__ = ("x_bits", "z_bits", "phase")

    def __init__(self, x_bits, z_bits, sign: int = 1, *, phase: int | None = None):
        self.x_bits = np.asarray(x_bits, dtype=np.uint8).copy()
        self.z_bits = np.asarray(z_bits, dtype=np.uint8).copy()
        if self.x_bits.shape != self.z_bits.shape or self.x_bits.ndim != 1:
            raise ValueError("x_bits and z_bits must be 1-D and equally long")
        if phase is None:
            if sign not in (1, -1):
                raise ValueError(f"sign must be +1 or -1, got {sign}")
            phase = 0 if sign == 1 else 2
        self.phase = phase % 4

    @classmethod
    def from_str(cls, text: str) -> "PauliString":
        """Parse strings like ``"+XIZ"``, ``"-YY"`` or ``"ZZ"``."""
        text = text.strip()
        sign = 1
        if text and text[0] in "+-":
            sign = -1 if text[0] == "-" else 1
            text = text[1:]
        x = np.zeros(len(text), dtype=np.uint8)
        z = np.zeros(len(text), dtype=np.uint8)
        for q, ch in enumerate(text.upper()):
            k = _CHARS.find(ch)
            if k < 0:
                raise ValueError(f"bad Pauli character {ch!r}")
            x[q] = k & 1
            z[q] = k >> 1
        return cls(x, z, sign)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(np.zeros(n, np.uint8), np.zeros(n, np.uint8))

    @classmethod
    def single(cls, n: int, q: int, kind: str, sign: int = 1) -> "PauliString":
        p = cls.identity(n)
        k = _CHARS.index(kind.upper())
        p.x_bits[q] = k & 1
        p.z_bits[q] = k >> 1
        if sign == -1:
            p.phase = 2
        return p

    @property
    def n(self) -> int:
        return int(self.x_bits.shape[0])

    @property
    def sign(self) -> int:
        if self.phase & 1:
            raise ValueError("Pauli string has an imaginary phase")
        return 1 if self.phase == 0 else -1

    def is_hermitian(self) -> bool:
        return not (self.phase & 1)

    def __mul__(self, other: "PauliString") -> "PauliString":
        if self.n != other.n:
            raise ValueError("length mismatch")
        x1, z1 = self.x_bits.astype(np.int64), self.z_bits.astype(np.int64)
        x2, z2 = other.x_bits.astype(np.int64), other.z_bits.astype(np.int64)
        # i-exponent picked up per qubit when multiplying single-qubit Paulis
        g = np.where(
            (x1 == 0) & (z1 == 0), 0,
            np.where((x1 == 1) & (z1 == 1), z2 - x2,
                     np.where(x1 == 1, z2 * (2 * x2 - 1), x2 * (1 - 2 * z2))))
        phase = self.phase + other.phase + int(g.sum())
        return PauliString(self.x_bits ^ other.x_bits, self.z_bits ^ other.z_bits,
                           phase=phase)

    def __neg__(self) -> "PauliString":
        return PauliString(self.x_bits, self.z_bits, phase=self.phase + 2)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PauliString):
            return NotImplemented
        return (self.phase == other.phase and np.array_equal(self.x_bits, other.x_bits)
                and np.array_equal(self.z_bits, other.z_bits))

    def __hash__(self) -> int:
        return hash((self.phase, self.x_bits.tobytes(), self.z_bits.tobytes()))

    def commutes(self, other: "PauliString") -> bool:
        s = int(np.sum(self.x_bits & other.z_bits) + np.sum(self.z_bits & other.x_bits))
        return s % 2 == 0

    def weight(self) -> int:
        return int(np.count_nonzero(self.x_bits | self.z_bits))

    def packed(self) -> tuple[np.ndarray, np.ndarray, int]:
        """Word-packed ``(px, pz, sign_bit)`` for the tableau kernels."""
        return _pack(self.x_bits), _pack(self.z_bits), (0 if self.sign == 1 else 1)

    def __str__(self) -> str:
        prefix = {0: "+", 1: "+i", 2: "-", 3: "-i"}[self.phase]
        return prefix + "".join(_CHARS[x + 2 * z] for x, z in zip(self.x_bits, self.z_bits))

    def __repr__(self) -> str:
        return f"PauliString({str(self)!r})"
