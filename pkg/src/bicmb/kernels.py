"""Hot-loop kernels. The compiled extension is used when it was built;
otherwise the numpy version takes over with identical results."""

import os

from . import _kernels_py

try:
    from . import _viterbi as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKEND = "cython" if _compiled is not None and not os.environ.get("BICMB_PURE_PYTHON") else "python"


def get_kernels(backend=None):
    """(acs, traceback) for the requested backend, default the import-time choice."""
    backend = backend or BACKEND
    if backend == "cython":
        if _compiled is None:
            raise ImportError("compiled Viterbi kernel is not available")
        return _compiled.acs, _compiled.traceback
    if backend == "python":
        return _kernels_py.acs, _kernels_py.traceback
    raise ValueError(f"unknown backend {backend!r}")
