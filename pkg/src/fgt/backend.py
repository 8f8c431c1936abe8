"""Kernel backend selection.

The hot inner loops (direct Gaussian pair sums, NUFFT spreading and
interpolation) live in the compiled extension `fgt._kernels_cy`.  If the
extension is missing, or the environment variable FGT_FORCE_PYTHON is set
to a non-empty value, the numpy fallback `fgt._kernels_py` is used instead.
Both expose the same functions; `fgt bench kernels` compares them.
"""

import os

from . import _kernels_py

if os.environ.get("FGT_FORCE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels_cy as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.BACKEND

gauss_direct = _impl.gauss_direct
gauss_direct_periodic = _impl.gauss_direct_periodic
nufft_spread = _impl.nufft_spread
nufft_interp = _impl.nufft_interp


def get_backends():
    """Return {name: module} for every available kernel backend."""
    impls = {"python": _kernels_py}
    try:
        from . import _kernels_cy
        impls["cython"] = _kernels_cy
    except ImportError:
        pass
    return impls
