"""Kernel selection: compiled extension if importable, else pure Python.

Set ``PHFCOX_PURE_PYTHON=1`` to force the fallback.
"""

import logging
import os

from . import _fallback

logger = logging.getLogger(__name__)

BACKEND = "python"
sq_edt = _fallback.sq_edt
reduce_cubical = _fallback.reduce_cubical
cd_quadratic = _fallback.cd_quadratic

if os.environ.get("PHFCOX_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels
    except ImportError:  # extension not built
        logger.debug("compiled kernels unavailable; using pure-Python fallback")
    else:
        BACKEND = "cython"
        sq_edt = _kernels.sq_edt
        reduce_cubical = _kernels.reduce_cubical
        cd_quadratic = _kernels.cd_quadratic
