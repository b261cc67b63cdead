"""Select the kernel-sum implementation at import time.

The compiled extension is preferred when present; otherwise the NumPy
fallback is used. ``KERNPOT_BACKEND=numpy|compiled`` forces a choice
(``compiled`` raises if the extension was not built).
"""

from __future__ import annotations

import os

from . import _kernel_py

_FORCED = os.environ.get("KERNPOT_BACKEND", "").strip().lower()

if _FORCED not in ("", "numpy", "compiled"):
    raise ImportError(f"KERNPOT_BACKEND must be 'numpy' or 'compiled', got {_FORCED!r}")

_impl = None
if _FORCED != "numpy":
    try:
        from . import _kernel_ext as _impl  # type: ignore[no-redef]
    except ImportError:
        if _FORCED == "compiled":
            raise ImportError(
                "KERNPOT_BACKEND=compiled but the extension is not built; "
                "run 'pip install -e .' or drop the override"
            ) from None
if _impl is None:
    _impl = _kernel_py

KIND_LINEAR = _kernel_py.KIND_LINEAR
KIND_GAUSSIAN = _kernel_py.KIND_GAUSSIAN

frame_kernel_sums = _impl.frame_kernel_sums


def backend_name() -> str:
    return "compiled" if _impl is not _kernel_py else "numpy"
