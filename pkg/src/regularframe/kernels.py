"""Stencil backend selection.

The compiled extension is used when it was built; set
``REGULARFRAME_PURE=1`` to force the numpy fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"
if os.environ.get("REGULARFRAME_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
else:
    _impl = _kernels_py

div_grad = _impl.div_grad
kg_momentum_rhs = _impl.kg_momentum_rhs
