"""Backend selection for the hot loops.

The compiled Cython module is used when it imports; otherwise the pure-Python
reference takes over. ``RANDREC_PURE_PYTHON=1`` forces the fallback. Both
backends expose the same functions and agree bit for bit.
"""

import contextlib
import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["cython"] = _ckernels

if os.environ.get("RANDREC_PURE_PYTHON", "") not in ("", "0") or _ckernels is None:
    _active = "python"
else:
    _active = "cython"


def active():
    """Name of the backend currently in use."""
    return _active


def get():
    return BACKENDS[_active]


def available():
    return sorted(BACKENDS)


def set_backend(name):
    global _active
    if name not in BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; have {available()}")
    _active = name


@contextlib.contextmanager
def using(name):
    previous = _active
    set_backend(name)
    try:
        yield BACKENDS[name]
    finally:
        set_backend(previous)
