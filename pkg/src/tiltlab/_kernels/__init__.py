"""Physics kernel backend selection.

The compiled Cython kernel is used when its extension imported cleanly;
otherwise the numpy twin takes over. Set TILTLAB_BACKEND=python or
TILTLAB_BACKEND=compiled to force a choice (forcing `compiled` raises if
the extension is unavailable).
"""

import os

from .state import SimArrays
from . import numpy_kernels

_forced = os.environ.get("TILTLAB_BACKEND", "").strip().lower()

_compiled = None
if _forced != "python":
    try:
        from . import _core as _compiled  # noqa: F401
    except ImportError:
        _compiled = None
        if _forced == "compiled":
            raise ImportError(
                "TILTLAB_BACKEND=compiled but the tiltlab._kernels._core "
                "extension is not built; run `pip install -e .` with a C "
                "compiler and Cython available"
            )

if _compiled is not None:
    BACKEND = "compiled"
    step_substeps = _compiled.step_substeps
else:
    BACKEND = "python"
    step_substeps = numpy_kernels.step_substeps

__all__ = ["SimArrays", "step_substeps", "BACKEND", "numpy_kernels"]
