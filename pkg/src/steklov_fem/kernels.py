"""Backend selection for the hot kernels.

The compiled ``_core`` extension is used when it imports; otherwise the
numpy fallback in ``_pycore``. Set ``STEKLOV_FEM_PURE=1`` to force the
fallback.
"""

import os

from . import _pycore

try:
    if os.environ.get("STEKLOV_FEM_PURE", "") not in ("", "0"):
        raise ImportError("pure-Python backend requested")
    from . import _core as _active
    BACKEND = "cython"
except ImportError:
    _active = _pycore
    BACKEND = "python"


def get_backend(name=None):
    """Return the kernel module for ``name`` ('cython', 'python' or None for the active one)."""
    if name is None:
        return _active
    if name == "python":
        return _pycore
    if name == "cython":
        from . import _core
        return _core
    raise ValueError(f"unknown backend {name!r}")


def available_backends():
    names = ["python"]
    try:
        from . import _core  # noqa: F401
        names.insert(0, "cython")
    except ImportError:
        pass
    return names


element_matrices = _active.element_matrices
locate = _active.locate
evaluate = _active.evaluate
