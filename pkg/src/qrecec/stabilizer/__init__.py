"""Stabilizer-tableau backend with a dense state-vector oracle."""
from .kernels import BACKEND
from .pauli import PauliString
from .tableau import (TWO_QUBIT_PAULIS, TableauError, TableauState, apply_clifford,
                      apply_pauli_channel_1, apply_pauli_channel_2, measure, measure_detach,
                      merge, new_zero_state, peek_expectation, stabilizer_group_expectations)

__all__ = [
    "BACKEND", "PauliString", "TWO_QUBIT_PAULIS", "TableauError", "TableauState",
    "apply_clifford", "apply_pauli_channel_1", "apply_pauli_channel_2", "measure",
    "measure_detach", "merge", "new_zero_state", "peek_expectation",
    "stabilizer_group_expectations",
]
