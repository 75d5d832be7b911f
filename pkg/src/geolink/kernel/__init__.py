"""Relate-kernel backend selection.

The kernel lives in relate_impl.py, written so that Cython can compile
it unchanged.  When the compiled extension was built it shadows the
source file on import, so `import relate_impl` transparently picks the
fast variant.  Set GEOLINK_PURE_PYTHON=1 to force the interpreted
kernel (used by the kernel benchmark to compare both).
"""

import importlib.util
import os
import sys
from pathlib import Path


def load_interpreted():
    """Import relate_impl from its .py source, bypassing any extension."""
    name = "geolink.kernel._relate_interpreted"
    if name in sys.modules:
        return sys.modules[name]
    path = Path(__file__).with_name("relate_impl.py")
    spec = importlib.util.spec_from_file_location(name, path)
    module = importlib.util.module_from_spec(spec)
    sys.modules[name] = module
    spec.loader.exec_module(module)
    return module


if os.environ.get("GEOLINK_PURE_PYTHON"):
    _impl = load_interpreted()
else:
    from . import relate_impl as _impl

EMPTY = _impl.EMPTY
KernelInconsistency = _impl.KernelInconsistency
relate = _impl.relate
transpose_cells = _impl.transpose_cells
rings_self_crossing = _impl.rings_self_crossing


def backend_name() -> str:
    return "compiled" if _impl.COMPILED else "python"


def implementation():
    return _impl
