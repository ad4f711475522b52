"""Select the compiled kernels when available, else the numpy fallback.

Set ``FREEFLAGS_PURE=1`` to force the fallback.
"""
import os

if os.environ.get("FREEFLAGS_PURE") == "1":
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        from . import _kernels_py as _impl

BACKEND = _impl.BACKEND
rank_mod_p = _impl.rank_mod_p
gather_sum = _impl.gather_sum
pgl_mul_normalize = _impl.pgl_mul_normalize
normalize_pack = _impl.normalize_pack

__all__ = ["BACKEND", "rank_mod_p", "gather_sum", "pgl_mul_normalize", "normalize_pack"]
