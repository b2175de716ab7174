"""Select the sweep kernel at import time.

The compiled Cython kernel is used when it was built; otherwise (or when
``FERL_PURE_PYTHON=1`` is set) the numpy fallback runs instead.
"""

from __future__ import annotations

import os

from . import _fallback

fallback_anneal_reads = _fallback.anneal_reads

try:
    if os.environ.get("FERL_PURE_PYTHON"):
        raise ImportError("pure python requested")
    from ._kernel import anneal_reads as compiled_anneal_reads
except ImportError:
    compiled_anneal_reads = None

if compiled_anneal_reads is not None:
    anneal_reads = compiled_anneal_reads
    BACKEND = "cython"
else:
    anneal_reads = fallback_anneal_reads
    BACKEND = "numpy"
