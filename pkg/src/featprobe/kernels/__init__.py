"""Hot-kernel dispatch: numba-jitted by default, pure numpy on request.

Set FEATURE_PROBE_NO_NUMBA=1 before import to force the numpy path
(also used automatically when numba is not importable). The active path
is exposed as BACKEND ("numba" or "numpy"); both paths implement the
same contracts and agree to float tolerance, which benchmarks/
bench_kernels.py verifies while timing them.
"""

from __future__ import annotations

import os

from . import numpy_impl

_flag = os.environ.get("FEATURE_PROBE_NO_NUMBA", "").strip().lower()
_disabled = _flag not in ("", "0", "false")

if not _disabled:
    try:
        from . import numba_impl as _impl

        BACKEND = "numba"
    except ImportError:
        _impl = numpy_impl
        BACKEND = "numpy"
else:
    _impl = numpy_impl
    BACKEND = "numpy"

cluster_distance_sums = _impl.cluster_distance_sums
assign_to_centroids = _impl.assign_to_centroids
min_sqdist_update = _impl.min_sqdist_update
nms_suppress = _impl.nms_suppress

__all__ = [
    "BACKEND",
    "cluster_distance_sums",
    "assign_to_centroids",
    "min_sqdist_update",
    "nms_suppress",
]
