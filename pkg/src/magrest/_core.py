"""Select the integration kernel at import.

The compiled extension is used when it was built; otherwise, or when the
environment variable MAGREST_PURE_PYTHON is set, the pure-Python version.
"""

import os

from . import _kernels_py

if os.environ.get("MAGREST_PURE_PYTHON"):
    _compiled = None
else:
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"
rk4_actuator = _compiled.rk4_actuator if _compiled is not None else _kernels_py.rk4_actuator


def backends():
    """Available kernel implementations by name."""
    found = {"python": _kernels_py.rk4_actuator}
    if _compiled is not None:
        found["cython"] = _compiled.rk4_actuator
    else:
        try:
            from . import _kernels
            found["cython"] = _kernels.rk4_actuator
        except ImportError:
            pass
    return found
