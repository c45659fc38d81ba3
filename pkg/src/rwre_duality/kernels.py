"""Backend selection for the hot kernels.

The compiled ``_ckernels`` extension is used when it imports; otherwise, or
when ``RWRE_PURE_PYTHON`` is set to a non-empty value other than ``0``, the
numpy implementations in ``_fallback`` are used.  ``BACKEND`` names the choice.
"""

import os

from . import _fallback

if os.environ.get("RWRE_PURE_PYTHON", "") not in ("", "0"):
    _impl = _fallback
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _fallback

BACKEND = "python" if _impl is _fallback else "cython"
DEN_GUARD = _fallback.DEN_GUARD

killed_gf = _impl.killed_gf
cf_convergents = _impl.cf_convergents
evaluate_cf = _impl.evaluate_cf
simulate_paths = _impl.simulate_paths
