"""Pick the compiled kernels when available, else the pure-Python twins.

Set ``SIEGELLAB_PURE_PYTHON=1`` to force the fallback (both backends produce
bit-identical results).
"""
import os

if os.environ.get("SIEGELLAB_PURE_PYTHON"):
    from ._pykernels import BACKEND, pinch_scan, series_recurrence
else:
    try:
        from ._kernels import BACKEND, pinch_scan, series_recurrence
    except ImportError:
        from ._pykernels import BACKEND, pinch_scan, series_recurrence

__all__ = ["BACKEND", "pinch_scan", "series_recurrence"]
