"""Backend selection for the RK4 propagation loop.

The compiled extension is used when it imports; otherwise the numpy
implementation takes over.  Setting ``CHERENKOV_PURE_PYTHON=1`` forces the
fallback.
"""

import logging
import os

from . import _rk4_py

log = logging.getLogger(__name__)

try:
    from . import _rk4 as _ext
except ImportError:  # extension not built
    _ext = None

HAVE_EXTENSION = _ext is not None
BACKENDS = {"python": _rk4_py.advance}
if HAVE_EXTENSION:
    BACKENDS["compiled"] = _ext.advance

if os.environ.get("CHERENKOV_PURE_PYTHON", "") not in ("", "0") or not HAVE_EXTENSION:
    DEFAULT_BACKEND = "python"
    if not HAVE_EXTENSION:
        log.info("compiled RK4 kernel unavailable; using numpy fallback")
else:
    DEFAULT_BACKEND = "compiled"


def get_advance(backend=None):
    name = backend or DEFAULT_BACKEND
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown or unavailable backend {name!r}; have {sorted(BACKENDS)}") from None
