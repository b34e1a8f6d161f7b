"""Kernel backend selection.

The compiled ``_core`` extension is used when importable; otherwise, or when
the ``RDIL_PURE_PYTHON`` environment variable is set to a non-empty value
other than ``0``, the numpy implementations in ``_pycore`` are used.
"""

import os

from . import _pycore

_force_python = os.environ.get("RDIL_PURE_PYTHON", "") not in ("", "0")

if _force_python:
    _impl = _pycore
else:
    try:
        from . import _core as _impl
    except ImportError:
        _impl = _pycore

BACKEND = _impl.BACKEND

mlp_epoch = _impl.mlp_epoch
mlp_instance_gradient = _impl.mlp_instance_gradient
mlp_forward = _impl.mlp_forward
best_numeric_split = _impl.best_numeric_split
heom_distances = _impl.heom_distances


def compiled_available() -> bool:
    try:
        from . import _core  # noqa: F401
    except ImportError:
        return False
    return True


def backend_module(name: str):
    """Return the kernel module for ``"cython"`` or ``"python"`` explicitly."""
    if name == "python":
        return _pycore
    if name == "cython":
        from . import _core

        return _core
    raise ValueError(f"unknown backend {name!r}")
