"""Sampling kernels: compiled core with a pure-Python fallback.

Backend choice happens once at import. Set ``ADTRIAGE_PURE_PYTHON=1`` to
force the fallback (used by the parity tests and the benchmark).
"""

import os

from . import rng

if os.environ.get("ADTRIAGE_PURE_PYTHON", "0") not in ("", "0"):
    from . import _gibbs_py as _backend

    BACKEND = "python"
else:
    try:
        from . import _gibbs_cy as _backend

        BACKEND = "cython"
    except ImportError:
        from . import _gibbs_py as _backend

        BACKEND = "python"

fit_sweeps = _backend.fit_sweeps
infer_sweeps = _backend.infer_sweeps

__all__ = ["BACKEND", "fit_sweeps", "infer_sweeps", "rng"]
