"""Kernel backend selection.

The compiled extension is preferred when it imports cleanly; otherwise the
NumPy reference kernels are used. Override with SPARSERADAR_BACKEND=numpy
or =compiled (the latter raises if the extension is unavailable).
"""

from __future__ import annotations

import os

from . import _kernels_np

_requested = os.environ.get("SPARSERADAR_BACKEND", "auto").lower()

if _requested not in ("auto", "compiled", "numpy"):
    raise RuntimeError(f"SPARSERADAR_BACKEND must be auto|compiled|numpy, got {_requested!r}")

_impl = _kernels_np
BACKEND = "numpy"

if _requested in ("auto", "compiled"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise RuntimeError(
                "SPARSERADAR_BACKEND=compiled but the extension is not built; "
                "run pip install -e . --no-build-isolation"
            )

peak_scan = _impl.peak_scan
backproject = _impl.backproject
accumulate_if = _impl.accumulate_if


def backends_available() -> dict:
    """Both kernel implementations, for parity tests and benchmarks."""
    impls = {"numpy": _kernels_np}
    try:
        from . import _ckernels

        impls["compiled"] = _ckernels
    except ImportError:
        pass
    return impls
