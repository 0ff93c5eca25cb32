"""Backend selection for the sequential convolution loops.

The compiled extension is used when it was built; otherwise the pure-Python
loops are.  Set ``FLATNEURO_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py
if os.environ.get("FLATNEURO_PURE_PYTHON") != "1":
    try:
        from . import _ckernels as _impl  # noqa: F811

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py

exp_conv_onesided = _impl.exp_conv_onesided
liouville_conv = _impl.liouville_conv

__all__ = ["BACKEND", "exp_conv_onesided", "liouville_conv"]
