"""Backend selection for the fused step kernel.

The compiled extension is used when it imports; set ``FRACWAVE_PURE_PYTHON=1``
to force the numpy fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
advance = _kernels_py.advance

if os.environ.get("FRACWAVE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels
    except ImportError:  # extension not built
        pass
    else:
        advance = _ckernels.advance
        BACKEND = "cython"


def get_advance(backend: str | None = None):
    """Return the kernel for ``backend`` ('python', 'cython' or None for the active one)."""
    if backend is None:
        return advance
    if backend == "python":
        return _kernels_py.advance
    if backend == "cython":
        from . import _ckernels

        return _ckernels.advance
    raise ValueError(f"unknown backend {backend!r}")
