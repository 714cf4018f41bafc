"""Backend selection for the convolution kernels.

The compiled Cython module is used when it imports; otherwise (or when the
environment variable ``ECGDENOISE_PURE_PYTHON`` is set to a non-empty value
other than ``0``) the numpy fallback is used.  ``BACKEND`` names the choice.
"""
import os

from . import _kernels_py

_force_python = os.environ.get("ECGDENOISE_PURE_PYTHON", "") not in ("", "0")

if _force_python:
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

conv1d_forward = _impl.conv1d_forward
conv1d_backward_input = _impl.conv1d_backward_input
conv1d_backward_weight = _impl.conv1d_backward_weight

__all__ = [
    "BACKEND",
    "conv1d_forward",
    "conv1d_backward_input",
    "conv1d_backward_weight",
]
