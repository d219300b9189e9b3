"""Select the kernel implementation at import time.

The compiled Cython module is preferred. Setting ``SE3FILTER_PURE_PYTHON=1``
forces the numpy fallback, as does a missing or broken build.
"""

import os

from . import _kernels_py as python_kernels

compiled_kernels = None
if not os.environ.get("SE3FILTER_PURE_PYTHON"):
    try:
        from . import _kernels as compiled_kernels
    except ImportError:  # extension not built
        compiled_kernels = None

kernels = compiled_kernels if compiled_kernels is not None else python_kernels
BACKEND = "compiled" if compiled_kernels is not None else "python"
