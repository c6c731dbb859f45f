"""Selects the kernel backend for the hot numeric loops.

The 3x3 convolution and 2x2 pooling kernels exist twice: a numba @njit
implementation (fast, default) and a pure-numpy fallback. The environment
variable ``DFR_BACKEND`` (``numba`` or ``numpy``) picks one at import time;
:func:`use` switches at runtime, which the tests and the benchmark rely on.
Everything outside this module calls :func:`kernels` and stays agnostic.
"""

import logging
import os

from . import kernels_numpy
from .errors import ConfigurationError

log = logging.getLogger(__name__)

_BACKENDS = {"numpy": kernels_numpy}

try:
    from . import kernels_numba

    _BACKENDS["numba"] = kernels_numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    log.warning("numba unavailable, falling back to the pure-numpy kernels")

_active = ""


def available() -> list[str]:
    """Names of the backends importable in this environment."""
    return sorted(_BACKENDS)


def use(name: str) -> None:
    """Activate a backend by name."""
    global _active
    if name not in _BACKENDS:
        raise ConfigurationError(
            f"unknown kernel backend {name!r}, available: {available()}"
        )
    _active = name


def active() -> str:
    return _active


def kernels():
    """The module providing the active backend's kernel functions."""
    return _BACKENDS[_active]


use(os.environ.get("DFR_BACKEND", "numba" if "numba" in _BACKENDS else "numpy"))
