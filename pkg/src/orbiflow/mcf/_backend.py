"""Select the compiled stepping kernel when it is built, numpy otherwise.

Set ``ORBIFLOW_PURE_PYTHON=1`` to force the numpy kernel.
"""

import os

from . import _kernels_py

python_kernels = _kernels_py
compiled_kernels = None

if os.environ.get("ORBIFLOW_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as compiled_kernels
    except ImportError:
        compiled_kernels = None

kernels = compiled_kernels if compiled_kernels is not None else python_kernels
BACKEND = "compiled" if compiled_kernels is not None else "python"


def get(name=None):
    """Kernel module by name: ``"compiled"``, ``"python"`` or the default."""
    if name is None:
        return kernels
    if name == "python":
        return python_kernels
    if name == "compiled":
        if compiled_kernels is None:
            raise ImportError("compiled kernels are not built")
        return compiled_kernels
    raise ValueError(f"unknown backend {name!r}")
