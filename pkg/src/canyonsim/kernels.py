"""Backend selection for the ray-tracing kernels.

The compiled extension is used when it imports; setting
``CANYONSIM_PURE_PYTHON=1`` forces the numpy fallback.
"""
from __future__ import annotations

import os
from types import ModuleType

from . import _pykernels


def _load_compiled() -> ModuleType | None:
    try:
        from . import _ckernels
    except ImportError:
        return None
    return _ckernels


_compiled = _load_compiled()

BACKENDS: dict[str, ModuleType] = {"python": _pykernels}
if _compiled is not None:
    BACKENDS["compiled"] = _compiled

if os.environ.get("CANYONSIM_PURE_PYTHON", "") not in ("", "0") or _compiled is None:
    BACKEND = "python"
else:
    BACKEND = "compiled"

_active = BACKENDS[BACKEND]
segments_occluded = _active.segments_occluded
trace_epoch_batch = _active.trace_epoch_batch


def get_backend(name: str) -> ModuleType:
    try:
        return BACKENDS[name]
    except KeyError:
        raise LookupError(f"kernel backend {name!r} is not available (have {sorted(BACKENDS)})") from None
