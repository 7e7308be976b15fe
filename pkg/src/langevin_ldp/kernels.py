"""Backend selection for the simulation kernel.

The compiled extension is used when importable; setting the environment
variable ``LANGEVIN_LDP_PURE=1`` forces the pure-Python fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
run_block = _pykernels.run_block

if os.environ.get("LANGEVIN_LDP_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels
    except ImportError:  # pragma: no cover - depends on the build
        pass
    else:
        BACKEND = "cython"
        run_block = _kernels.run_block

__all__ = ["BACKEND", "run_block"]
