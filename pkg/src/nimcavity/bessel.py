"""Cylinder Bessel functions J_l, Y_l, H_l and their derivatives.

Every routine evaluates whole tables of integer orders 0..lmax at once,
which is the access pattern of the scattering code (all multipole orders
at every field point).  Two interchangeable backends provide the scalar
kernels: a Cython extension compiled at install time and a numpy
fallback.  The extension is used when importable; set the environment
variable ``NIMCAVITY_PURE_PYTHON=1`` to force the fallback.  ``BACKEND``
records which one is active.

Conventions: arguments are real and non-negative (strictly positive for
Y and H).  Negative orders follow from parity, J_{-l} = (-1)^l J_l, and
are not stored.  Derivative tables use Z'_l = Z_{l-1} - (l/x) Z_l with
Z'_0 = -Z_1, valid for J, Y and H alike.
"""

import os

import numpy as np

from . import _bessel_py

if os.environ.get("NIMCAVITY_PURE_PYTHON") == "1":
    _impl = _bessel_py
    BACKEND = "python"
else:
    try:
        from . import _bessel_cy as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _bessel_py
        BACKEND = "python"


def _as1d(x):
    arr = np.asarray(x, dtype=np.float64)
    return np.ascontiguousarray(arr.reshape(-1)), arr.shape


def j0(x):
    flat, shape = _as1d(x)
    return np.asarray(_impl.j0(flat)).reshape(shape)


def j1(x):
    flat, shape = _as1d(x)
    return np.asarray(_impl.j1(flat)).reshape(shape)


def y0(x):
    flat, shape = _as1d(x)
    return np.asarray(_impl.y0(flat)).reshape(shape)


def y1(x):
    flat, shape = _as1d(x)
    return np.asarray(_impl.y1(flat)).reshape(shape)


def jn_table(lmax, x):
    """J_l(x) for l = 0..lmax, shape (lmax + 1,) + shape(x)."""
    if lmax < 0:
        raise ValueError("lmax must be >= 0")
    flat, shape = _as1d(x)
    out = np.asarray(_impl.jn_fill(int(lmax), flat))
    return out.reshape((lmax + 1,) + shape)


def yn_table(lmax, x):
    """Y_l(x) for l = 0..lmax, shape (lmax + 1,) + shape(x).  x > 0."""
    if lmax < 0:
        raise ValueError("lmax must be >= 0")
    flat, shape = _as1d(x)
    if flat.size and flat.min() <= 0.0:
        raise ValueError("Y_l requires x > 0")
    out = np.asarray(_impl.yn_fill(int(lmax), flat))
    return out.reshape((lmax + 1,) + shape)


def hn_table(lmax, x):
    """Outgoing Hankel functions H_l = J_l + i Y_l, orders 0..lmax."""
    return jn_table(lmax, x) + 1j * yn_table(lmax, x)


def deriv_table(z_table, x):
    """Derivative table from a value table of the same cylinder family.

    ``z_table`` holds Z_l(x) for l = 0..lmax along axis 0; the result
    holds Z'_l(x).  Requires lmax >= 1 and x > 0.
    """
    tbl = np.asarray(z_table)
    if tbl.shape[0] < 2:
        raise ValueError("need orders 0 and 1 to form derivatives")
    xarr = np.asarray(x, dtype=np.float64)
    out = np.empty_like(tbl)
    out[0] = -tbl[1]
    for l in range(1, tbl.shape[0]):
        out[l] = tbl[l - 1] - (l / xarr) * tbl[l]
    return out
