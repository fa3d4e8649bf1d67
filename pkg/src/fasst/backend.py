"""Backend selection: compiled Cython kernels with a NumPy fallback.

The compiled module fasst._kernels is preferred when importable. Set
FASST_BACKEND=python to force the fallback (used by the benchmark and the
backend parity tests), or FASST_BACKEND=compiled to fail loudly if the
extension is missing.
"""

import os

_requested = os.environ.get("FASST_BACKEND", "auto").lower()

if _requested in ("auto", ""):
    try:
        from . import _kernels as _impl
        BACKEND = "compiled"
    except ImportError:
        from . import _kernels_py as _impl
        BACKEND = "python"
elif _requested in ("compiled", "c"):
    from . import _kernels as _impl
    BACKEND = "compiled"
elif _requested in ("python", "py"):
    from . import _kernels_py as _impl
    BACKEND = "python"
else:
    raise ValueError(f"unknown FASST_BACKEND value: {_requested!r}")

svd2x2_angles = _impl.svd2x2_angles
rotate_pairs = _impl.rotate_pairs
kogbetliantz_sweep = _impl.kogbetliantz_sweep
