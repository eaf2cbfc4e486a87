"""Kernel dispatch: numba when available and enabled, numpy otherwise."""
from .._accel import USE_NUMBA

if USE_NUMBA:
    from ._kernels_nb import (gate_cnot, gate_h, gate_pauli, gate_s, measure_pauli,
                              measure_z, merge, peek, remove_qubit, rowsum)
    BACKEND = "numba"
else:
    from ._kernels_np import (gate_cnot, gate_h, gate_pauli, gate_s, measure_pauli,  # noqa: F401
                              measure_z, merge, peek, remove_qubit, rowsum)
    BACKEND = "numpy"

__all__ = ["BACKEND", "gate_cnot", "gate_h", "gate_pauli", "gate_s", "measure_pauli",
           "measure_z", "merge", "peek", "remove_qubit", "rowsum"]
