"""Backend selection for the numerical kernels.

At import time the compiled extension is preferred when present; setting
MIGCON_PURE_PYTHON=1 in the environment forces the numpy fallback.  Both
backends implement identical arithmetic (see _pykernels), so switching only
changes speed and sub-rounding noise.  use() swaps the active backend at
runtime, which the tests rely on to exercise both paths in one process.
"""

from __future__ import annotations

import os

from . import _pykernels

_FORCED_PURE = os.environ.get("MIGCON_PURE_PYTHON", "") == "1"

try:
    from . import _cykernels
except ImportError:
    _cykernels = None

_active = _pykernels if (_FORCED_PURE or _cykernels is None) else _cykernels


def available_backends() -> tuple[str, ...]:
    names = ["python"]
    if _cykernels is not None:
        names.insert(0, "compiled")
    return tuple(names)


def backend_name() -> str:
    return _active.BACKEND


def use(name: str):
    """Select the active backend by name ('python' or 'compiled')."""
    global _active
    if name == "python":
        _active = _pykernels
    elif name == "compiled":
        if _cykernels is None:
            raise ValueError("compiled backend is not available")
        _active = _cykernels
    else:
        raise ValueError(f"unknown backend {name!r}")
    return _active


def get(name: str):
    """Return a backend module without activating it."""
    if name == "python":
        return _pykernels
    if name == "compiled":
        if _cykernels is None:
            raise ValueError("compiled backend is not available")
        return _cykernels
    raise ValueError(f"unknown backend {name!r}")


def lap_1d(*args, **kwargs):
    return _active.lap_1d(*args, **kwargs)


def lap_2d(*args, **kwargs):
    return _active.lap_2d(*args, **kwargs)


def cg_spd_1d(*args, **kwargs):
    return _active.cg_spd_1d(*args, **kwargs)


def cg_spd_2d(*args, **kwargs):
    return _active.cg_spd_2d(*args, **kwargs)


def cg_poisson_1d(*args, **kwargs):
    return _active.cg_poisson_1d(*args, **kwargs)


def cg_poisson_2d(*args, **kwargs):
    return _active.cg_poisson_2d(*args, **kwargs)
