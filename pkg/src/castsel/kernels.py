"""Kernel backend dispatch.

Imports the compiled extension when available, otherwise the numpy
fallback. Set CASTSEL_PURE_PY=1 to force the fallback (used by the
benchmark and the parity tests).
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("CASTSEL_PURE_PY") == "1":
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

BACKEND = "compiled" if _impl is not _kernels_py else "python"

gains = _impl.gains
popcount_words = _impl.popcount_words
levenshtein = _impl.levenshtein


def get_backends():
    """(name, module) pairs for every importable backend."""
    out = [("python", _kernels_py)]
    try:
        from . import _kernels

        out.insert(0, ("compiled", _kernels))
    except ImportError:
        pass
    return out
