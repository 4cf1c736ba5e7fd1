"""Hot-kernel dispatch: compiled extension when available, NumPy otherwise.

Set the environment variable ``BIPHOTON_PURE_PYTHON=1`` to force the
fallback implementation.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("BIPHOTON_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:  # pragma: no cover - depends on build
        from . import _kernels as _compiled
        _impl = _compiled
        BACKEND = "cython"
    except ImportError:  # pragma: no cover
        pass

log_series_sum = _impl.log_series_sum
cos_transform = _impl.cos_transform

__all__ = ["BACKEND", "log_series_sum", "cos_transform"]
