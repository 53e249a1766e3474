"""Selects the convolution kernel implementation at import time.

The compiled Cython extension is preferred; the numpy fallback is used when
the extension is not built or when ACLAB_PURE_PYTHON is set to a non-empty
value other than "0".
"""

import os

_force_numpy = os.environ.get("ACLAB_PURE_PYTHON", "") not in ("", "0")

COMPILED = False
if not _force_numpy:
    try:
        from aclab.nn import _convkernels as _impl

        COMPILED = True
    except ImportError:
        from aclab.nn import kernels_np as _impl
else:
    from aclab.nn import kernels_np as _impl

im2col = _impl.im2col
col2im = _impl.col2im


def backend_name():
    return "compiled" if COMPILED else "numpy"
