"""Pick the compiled kernels when available, NumPy otherwise.

Set ``RANDZEROS_PURE=1`` to force the NumPy kernels.
"""
import os

from . import _kernels_py

_want_pure = os.environ.get("RANDZEROS_PURE", "").strip() not in ("", "0")

if _want_pure:
    kernels = _kernels_py
    NAME = "python"
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]

        NAME = "cython"
    except ImportError:
        kernels = _kernels_py
        NAME = "python"

horner = kernels.horner
aberth = kernels.aberth
fekete_sweeps = kernels.fekete_sweeps
log_vandermonde = kernels.log_vandermonde

__all__ = ["NAME", "horner", "aberth", "fekete_sweeps", "log_vandermonde", "kernels"]
