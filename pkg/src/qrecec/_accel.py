"""Backend selection for the hot tableau kernels.

Set ``QRECEC_NUMBA=0`` in the environment to force the pure-numpy kernels.
"""
import os

_FLAG = os.environ.get("QRECEC_NUMBA", "1").strip().lower()

try:
    import numba  # noqa: F401

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover
    NUMBA_AVAILABLE = False

USE_NUMBA = NUMBA_AVAILABLE and _FLAG not in ("0", "false", "no", "off")
