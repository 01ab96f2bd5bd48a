"""Backend selection for the hot kernels.

Two implementations with identical signatures exist: a pure-numpy one and a
numba ``@njit`` one.  The active backend is chosen once at import:

* ``BPDG_BACKEND=numpy``  force the vectorized numpy path
* ``BPDG_BACKEND=numba``  force the jitted path (error if numba is missing)
* unset / ``auto``        numba when importable, numpy otherwise

``benchmarks/bench_backends.py`` times the two side by side.
"""

import os

from ..errors import ConfigError

BC_PERIODIC = 0
BC_DIODE = 1


def _detect():
    choice = os.environ.get("BPDG_BACKEND", "auto").strip().lower()
    if choice in ("", "auto"):
        try:
            import numba  # noqa: F401
            return "numba"
        except ImportError:
            return "numpy"
    if choice not in ("numpy", "numba"):
        raise ConfigError(f"BPDG_BACKEND must be 'numpy' or 'numba', got {choice!r}")
    return choice


ACTIVE = _detect()

if ACTIVE == "numba":
    from . import numba_backend as impl
else:
    from . import numpy_backend as impl

transport_rows = impl.transport_rows
collision_values = impl.collision_values
collision_rows = impl.collision_rows
node_minima = impl.node_minima


def active_backend():
    return ACTIVE
