"""Kernel backend selection.

The compiled extension is used when it was built; otherwise the pure-Python
fallback is loaded. Set ``IOTDEFENSE_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os

from iotdefense import _pykernels as python_backend

compiled_backend = None
if not os.environ.get("IOTDEFENSE_PURE_PYTHON"):
    try:
        from iotdefense import _kernels as compiled_backend
    except ImportError:  # extension not built
        compiled_backend = None

_impl = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "compiled" if compiled_backend is not None else "python"

count_paths = _impl.count_paths
nondominated_ranks = _impl.nondominated_ranks
