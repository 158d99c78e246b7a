"""Pick the compiled kernels when available, else the numpy fallback.

Set ``PRODWAVE_PURE_PYTHON=1`` to force the fallback.
"""
import os

if os.environ.get("PRODWAVE_PURE_PYTHON") == "1":
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        from . import _kernels_py as _impl

BACKEND = "compiled" if _impl.__name__.endswith("._kernels") else "python"

ar1_filter = _impl.ar1_filter
tridiagonalize = _impl.tridiagonalize
tridiagonal_ql = _impl.tridiagonal_ql
jacobi_eigh = _impl.jacobi_eigh

__all__ = ["BACKEND", "ar1_filter", "tridiagonalize", "tridiagonal_ql", "jacobi_eigh"]
