"""Select the compiled kernel module, falling back to numpy.

Set ``NONLOCAL_GODUNOV_PURE=1`` to force the fallback.
"""
import os

from . import _kernels_py as fallback

compiled = None
if os.environ.get("NONLOCAL_GODUNOV_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as compiled
    except ImportError:
        compiled = None

kernels = compiled if compiled is not None else fallback
HAVE_COMPILED = compiled is not None
