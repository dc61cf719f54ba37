"""Backend selection for the inner loops.

The compiled extension is used when it was built; otherwise, or when
``RWEMBED_PURE_PYTHON=1`` is set, the numpy implementations are used.
"""

import os

from . import _kernels_py

PMI_SIGMOID = _kernels_py.PMI_SIGMOID
AUTOCOV_PIECEWISE = _kernels_py.AUTOCOV_PIECEWISE

_compiled = None
if os.environ.get("RWEMBED_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"


def get_backend(name: str | None = None):
    """Return the kernel module for ``name`` ('cython', 'python' or None for the default)."""
    if name is None:
        name = BACKEND
    if name == "python":
        return _kernels_py
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not available; build the package with Cython")
        return _compiled
    raise ValueError(f"unknown kernel backend {name!r}")


def available_backends() -> list[str]:
    return ["python"] + (["cython"] if _compiled is not None else [])
