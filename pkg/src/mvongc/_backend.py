"""Select the kernel backend at import time.

The compiled ``_kernels`` extension is preferred; set ``MVONGC_PURE_PYTHON=1``
to force the pure-Python twin.
"""
import os

from . import _kernels_py

if os.environ.get("MVONGC_PURE_PYTHON", "") not in ("", "0"):
    kernels = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        kernels = _kernels_py
        BACKEND = "python"
