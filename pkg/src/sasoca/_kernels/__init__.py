"""Hot-loop kernels with a compiled core and a numpy fallback.

The compiled extension is used when it imports; set ``SASOCA_PURE_PYTHON=1``
to force the fallback.  Both modules expose ``simulate``, ``outputs`` and
``count_outputs_range`` with identical semantics.
"""

import os

from . import _pycore as python_backend

try:
    if os.environ.get("SASOCA_PURE_PYTHON"):
        raise ImportError("pure python requested")
    from . import _ccore as compiled_backend
except ImportError:
    compiled_backend = None

backend = compiled_backend if compiled_backend is not None else python_backend
BACKEND = backend.NAME

__all__ = ["backend", "python_backend", "compiled_backend", "BACKEND"]
