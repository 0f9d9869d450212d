"""Kernel selection: compiled extension if available, pure Python otherwise.

Set QTAZRP_PURE_PYTHON=1 to force the fallback (used by the benchmark and by
tests that compare the two paths).
"""

import os

if os.environ.get("QTAZRP_PURE_PYTHON", "") not in ("", "0"):
    from . import _pykernel as kernel
    HAVE_COMPILED = False
else:
    try:
        from . import _kernel as kernel  # type: ignore[attr-defined]
        HAVE_COMPILED = True
    except ImportError:
        from . import _pykernel as kernel
        HAVE_COMPILED = False


def compiled_kernel_or_none():
    try:
        from . import _kernel  # type: ignore[attr-defined]
        return _kernel
    except ImportError:
        return None


def python_kernel():
    from . import _pykernel
    return _pykernel
