"""Backend selection for the numeric kernels.

The compiled extension is used when it was built; set ``URLAB_PURE_PYTHON=1``
to force the numpy fallback.
"""

import os

import numpy as np

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if not os.environ.get("URLAB_PURE_PYTHON"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels


def _c(a):
    return np.ascontiguousarray(a, dtype=np.complex128)


def _r(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def gram_moments(S, mats, impl=None):
    impl = impl or _impl
    return impl.gram_moments(_c(S), _c(mats))


def lagrange_gram_det(u, v, impl=None):
    impl = impl or _impl
    return float(impl.lagrange_gram_det(_c(np.ravel(u)), _c(np.ravel(v))))


def best_ratio(g, M, samples, floor=0.0, impl=None):
    impl = impl or _impl
    best, val = impl.best_ratio(_r(g), _r(M), _r(samples), float(floor))
    return int(best), float(val)
