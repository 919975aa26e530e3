"""Kernel lane selection.

The hot loops (n-gram hashing, margins, SGD epochs) exist twice: a compiled
Cython extension and a pure-Python fallback with the same numeric contract.
The compiled lane is used when the extension imported cleanly; set
MGDETECT_PURE=1 to force the fallback. Both lanes produce bit-identical
results on a given platform.
"""

from __future__ import annotations

import os

from . import pure

if os.environ.get("MGDETECT_PURE") == "1":
    _impl = pure
    ACTIVE_LANE = "pure"
else:
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        ACTIVE_LANE = "compiled"
    except ImportError:
        _impl = pure
        ACTIVE_LANE = "pure"

ngram_bucket_counts = _impl.ngram_bucket_counts
batch_margins = _impl.batch_margins
sgd_epoch = _impl.sgd_epoch

__all__ = ["ACTIVE_LANE", "batch_margins", "ngram_bucket_counts", "pure", "sgd_epoch"]
