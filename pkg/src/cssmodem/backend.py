"""Kernel backend selection.

Imports the compiled extension when present, otherwise the pure-numpy
fallback. CSSMODEM_PURE_PYTHON=1 forces the fallback regardless (useful for
the backend benchmark and for debugging).
"""

from __future__ import annotations

import os

_FORCE_PY = os.environ.get("CSSMODEM_PURE_PYTHON", "") not in ("", "0")

if _FORCE_PY:
    from . import _kernels_py as kernels

    COMPILED = False
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]

        COMPILED = True
    except ImportError:
        from . import _kernels_py as kernels  # type: ignore[no-redef]

        COMPILED = False

BACKEND_NAME = "compiled" if COMPILED else "numpy"

jakes_trace = kernels.jakes_trace
tv_convolve = kernels.tv_convolve
