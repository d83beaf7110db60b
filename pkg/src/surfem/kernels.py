"""Backend selection for the hot kernels.

The compiled extension ``surfem._kernels`` is used when importable; set the
environment variable ``SURFEM_PURE_PYTHON=1`` to force the NumPy fallback.
"""

import os

from . import _kernels_py

if os.environ.get("SURFEM_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

mark_closure = _impl.mark_closure
assemble_csr = _impl.assemble_csr
csr_matvec = _impl.csr_matvec
pcg_jacobi = _impl.pcg_jacobi


def backends():
    """Every importable backend as ``{name: module}``; used by tests and benchmarks."""
    found = {"python": _kernels_py}
    try:
        from . import _kernels

        found["cython"] = _kernels
    except ImportError:
        pass
    return found
