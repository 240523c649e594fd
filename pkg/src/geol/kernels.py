"""Backend selection for the geometric kernels.

The compiled ``_ckernels`` extension is used when it has been built; otherwise
the pure-Python ``_pykernels`` module is imported. Set ``GEOL_KERNELS=python``
to force the fallback or ``GEOL_KERNELS=cython`` to fail loudly when the
extension is missing.
"""

import os

_choice = os.environ.get("GEOL_KERNELS", "").strip().lower()

if _choice == "python":
    from geol import _pykernels as _impl
else:
    try:
        from geol import _ckernels as _impl
    except ImportError:
        if _choice == "cython":
            raise
        from geol import _pykernels as _impl

BACKEND = "cython" if _impl.__name__.endswith("_ckernels") else "python"

NONE = 0
TOUCH = 1
CROSS = 2
OVERLAP = 3

orient2d = _impl.orient2d
seg_intersection = _impl.seg_intersection
split_segments = _impl.split_segments
point_in_ring = _impl.point_in_ring
point_on_segments = _impl.point_on_segments
intersecting_pairs = _impl.intersecting_pairs

__all__ = [
    "BACKEND", "NONE", "TOUCH", "CROSS", "OVERLAP",
    "orient2d", "seg_intersection", "split_segments",
    "point_in_ring", "point_on_segments", "intersecting_pairs",
]
