"""Kernel backend selection.

The numba kernels are used when numba imports cleanly and the environment
variable ``RELBELIEF_DISABLE_NUMBA`` is unset (or set to ``0``). Otherwise the
vectorized numpy kernels are used. The choice is made once, at import.
"""

import os

ENV_FLAG = "RELBELIEF_DISABLE_NUMBA"


def _flag_set():
    return os.environ.get(ENV_FLAG, "").strip().lower() not in ("", "0", "false", "no")


try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _flag_set()
BACKEND = "numba" if USE_NUMBA else "numpy"
