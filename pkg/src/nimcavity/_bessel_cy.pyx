# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Cython implementation of the Bessel kernels.

Same algorithm and tables as `_bessel_py` (Cephes order-0/1 rational
fits, recurrence for higher orders); tight scalar loops instead of
numpy masked sweeps.  See that module for the numerical notes.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport ceil, cos, fabs, log, sin, sqrt

cnp.import_array()

cdef double SQ2OPI = 7.9788456080286535587989e-1
cdef double PIO4 = 7.85398163397448309616e-1
cdef double THPIO4 = 2.35619449019234492885
cdef double TWOOPI = 6.36619772367581343075535e-1
cdef double DR1 = 5.78318596294678452118e0
cdef double DR2 = 3.04712623436620863991e1

cdef double[::1] RP = np.array([
    -4.79443220978201773821e9,
    1.95617491946556577543e12,
    -2.49248344360967716204e14,
    9.70862251047306323952e15,
])
cdef double[::1] RQ = np.array([
    4.99563147152651017219e2,
    1.73785401676374683123e5,
    4.84409658339962045305e7,
    1.11855537045356834862e10,
    2.11277520115489217587e12,
    3.10518229857422583814e14,
    3.18121955943204943306e16,
    1.71086294081043136091e18,
])
cdef double[::1] PP = np.array([
    7.96936729297347051624e-4,
    8.28352392107440799803e-2,
    1.23953371646414299388e0,
    5.44725003058768775090e0,
    8.74716500199817011941e0,
    5.30324038235394892183e0,
    9.99999999999999997821e-1,
])
cdef double[::1] PQ = np.array([
    9.24408810558863637013e-4,
    8.56288474354474431428e-2,
    1.25352743901058953537e0,
    5.47097740330417105182e0,
    8.76190883237069594232e0,
    5.30605288235394617618e0,
    1.00000000000000000218e0,
])
cdef double[::1] QP = np.array([
    -1.13663838898469149931e-2,
    -1.28252718670509318512e0,
    -1.95539544257735972385e1,
    -9.32060152123768231369e1,
    -1.77681167980488050595e2,
    -1.47077505154951170175e2,
    -5.14105326766599330220e1,
    -6.05014350600728481186e0,
])
cdef double[::1] QQ = np.array([
    6.43178256118178023184e1,
    8.56430025976980587198e2,
    3.88240183605401609683e3,
    7.24046774195652478189e3,
    5.93072701187316984827e3,
    2.06209331660327847417e3,
    2.42005740240291393179e2,
])
cdef double[::1] YP = np.array([
    1.55924367855235737965e4,
    -1.46639295903971606143e7,
    5.43526477051876500413e9,
    -9.82136065717911466409e11,
    8.75906394395366999549e13,
    -3.46628303384729719441e15,
    4.42733268572569800351e16,
    -1.84950800436986690637e16,
])
cdef double[::1] YQ = np.array([
    1.04128353664259848412e3,
    6.26107330137134956842e5,
    2.68919633393814121987e8,
    8.64002487103935000337e10,
    2.02979612750105546709e13,
    3.17157752842975028269e15,
    2.50596256172653059228e17,
])
cdef double[::1] PP1 = np.array([
    7.62125616208173112003e-4,
    7.31397056940917570436e-2,
    1.12719608129684925192e0,
    5.11207951146807644818e0,
    8.42404590141772420927e0,
    5.21451598682361504063e0,
    1.00000000000000000254e0,
])
cdef double[::1] PQ1 = np.array([
    5.71323128072548699714e-4,
    6.88455908754495404082e-2,
    1.10514232634061696926e0,
    5.07386386128601488557e0,
    8.39985554327604159757e0,
    5.20982848682361821619e0,
    9.99999999999999997461e-1,
])
cdef double[::1] QP1 = np.array([
    5.10862594750176621635e-2,
    4.98213872951233449420e0,
    7.58238284132545283818e1,
    3.66779609360150777800e2,
    7.10856304998926107277e2,
    5.97489612400613639965e2,
    2.11688757100572135698e2,
    2.52070205858023719784e1,
])
cdef double[::1] QQ1 = np.array([
    7.42373277035675149943e1,
    1.05644886038262816351e3,
    4.98641058337653607651e3,
    9.56231892404756170795e3,
    7.99704160447350683650e3,
    2.82619278517639096600e3,
    3.36093607810698293419e2,
])
cdef double[::1] YP1 = np.array([
    1.26320474790178026440e9,
    -6.47355876379160291031e11,
    1.14509511541823727583e14,
    -8.12770255501325109621e15,
    2.02439475713594898196e17,
    -7.78877196265950026825e17,
])
cdef double[::1] YQ1 = np.array([
    5.94301592346128195359e2,
    2.35564092943068577943e5,
    7.34811944459721705660e7,
    1.87601316108706159478e10,
    3.88231277496238566008e12,
    6.20557727146953693363e14,
    6.87141087355300489866e16,
    3.97270608116560655612e18,
])


cdef double _polevl(double x, double[::1] coef):
    cdef double ans = coef[0]
    cdef Py_ssize_t j
    for j in range(1, coef.shape[0]):
        ans = ans * x + coef[j]
    return ans


cdef double _p1evl(double x, double[::1] coef):
    cdef double ans = x + coef[0]
    cdef Py_ssize_t j
    for j in range(1, coef.shape[0]):
        ans = ans * x + coef[j]
    return ans


cdef double _j0s(double x):
    cdef double z, w, p, q, xn
    if x < 1e-5:
        return 1.0 - x * x / 4.0
    if x <= 5.0:
        z = x * x
        return (z - DR1) * (z - DR2) * _polevl(z, RP) / _p1evl(z, RQ)
    w = 5.0 / x
    z = w * w
    p = _polevl(z, PP) / _polevl(z, PQ)
    q = _polevl(z, QP) / _p1evl(z, QQ)
    xn = x - PIO4
    return SQ2OPI * (p * cos(xn) - w * q * sin(xn)) / sqrt(x)


cdef double _j1s(double x):
    cdef double h, h2, term, acc, w, z, p, q, xn
    cdef int k
    if x <= 5.0:
        h = x / 2.0
        h2 = h * h
        term = h
        acc = h
        for k in range(1, 22):
            term *= -h2 / (k * (k + 1))
            acc += term
        return acc
    w = 5.0 / x
    z = w * w
    p = _polevl(z, PP1) / _polevl(z, PQ1)
    q = _polevl(z, QP1) / _p1evl(z, QQ1)
    xn = x - THPIO4
    return SQ2OPI * (p * cos(xn) - w * q * sin(xn)) / sqrt(x)


cdef double _y0s(double x):
    cdef double z, w, p, q, xn
    if x <= 5.0:
        z = x * x
        return _polevl(z, YP) / _p1evl(z, YQ) + TWOOPI * log(x) * _j0s(x)
    w = 5.0 / x
    z = w * w
    p = _polevl(z, PP) / _polevl(z, PQ)
    q = _polevl(z, QP) / _p1evl(z, QQ)
    xn = x - PIO4
    return SQ2OPI * (p * sin(xn) + w * q * cos(xn)) / sqrt(x)


cdef double _y1s(double x):
    cdef double z, w, p, q, xn
    if x <= 5.0:
        z = x * x
        w = x * _polevl(z, YP1) / _p1evl(z, YQ1)
        return w + TWOOPI * (_j1s(x) * log(x) - 1.0 / x)
    w = 5.0 / x
    z = w * w
    p = _polevl(z, PP1) / _polevl(z, PQ1)
    q = _polevl(z, QP1) / _p1evl(z, QQ1)
    xn = x - THPIO4
    return SQ2OPI * (p * sin(xn) + w * q * cos(xn)) / sqrt(x)


def j0(double[::1] x):
    cdef Py_ssize_t i, n = x.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    for i in range(n):
        o[i] = _j0s(x[i])
    return out


def j1(double[::1] x):
    cdef Py_ssize_t i, n = x.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    for i in range(n):
        o[i] = _j1s(x[i])
    return out


def y0(double[::1] x):
    cdef Py_ssize_t i, n = x.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    for i in range(n):
        o[i] = _y0s(x[i])
    return out


def y1(double[::1] x):
    cdef Py_ssize_t i, n = x.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    for i in range(n):
        o[i] = _y1s(x[i])
    return out


cdef void _jn_tiny_point(double[:, ::1] out, Py_ssize_t col, int lmax,
                         double x):
    cdef double h = x / 2.0
    cdef double pw = 1.0
    cdef double fact = 1.0
    cdef int l
    for l in range(lmax + 1):
        if l > 0:
            pw *= h
            fact *= l
        out[l, col] = pw / fact * (1.0 - h * h / (l + 1))


cdef void _jn_miller_point(double[:, ::1] out, Py_ssize_t col, int lmax,
                           double x):
    cdef int top = lmax
    if <int>ceil(x) > top:
        top = <int>ceil(x)
    if top < 1:
        top = 1
    cdef int start = top + <int>sqrt(160.0 * top) + 2
    start += start & 1
    cdef double tox = 2.0 / x
    cdef double bjp = 0.0
    cdef double bj = 1.0
    cdef double ssum = 0.0
    cdef double bjm
    cdef int j, order, l
    for j in range(start, 0, -1):
        bjm = j * tox * bj - bjp
        bjp = bj
        bj = bjm
        if fabs(bj) > 1e250:
            bj *= 1e-250
            bjp *= 1e-250
            ssum *= 1e-250
            for l in range(lmax + 1):
                out[l, col] *= 1e-250
        order = j - 1
        if order <= lmax:
            out[order, col] = bj
        if order > 0 and order % 2 == 0:
            ssum += 2.0 * bj
    ssum += bj
    for l in range(lmax + 1):
        out[l, col] /= ssum


cdef void _jn_up_point(double[:, ::1] out, Py_ssize_t col, int lmax,
                       double x):
    cdef int l
    out[0, col] = _j0s(x)
    out[1, col] = _j1s(x)
    for l in range(1, lmax):
        out[l + 1, col] = (2.0 * l / x) * out[l, col] - out[l - 1, col]


def jn_fill(int lmax, double[::1] x):
    cdef Py_ssize_t i, n = x.shape[0]
    out_arr = np.zeros((lmax + 1, n))
    cdef double[:, ::1] out = out_arr
    cdef double xx
    if lmax == 0:
        for i in range(n):
            out[0, i] = _j0s(x[i])
        return out_arr
    for i in range(n):
        xx = x[i]
        if xx < 1e-6:
            _jn_tiny_point(out, i, lmax, xx)
        elif xx < lmax + 6.0:
            _jn_miller_point(out, i, lmax, xx)
        else:
            _jn_up_point(out, i, lmax, xx)
    return out_arr


def yn_fill(int lmax, double[::1] x):
    cdef Py_ssize_t i, n = x.shape[0]
    out_arr = np.empty((lmax + 1, n))
    cdef double[:, ::1] out = out_arr
    cdef double xx
    cdef int l
    if lmax == 0:
        for i in range(n):
            out[0, i] = _y0s(x[i])
        return out_arr
    for i in range(n):
        xx = x[i]
        out[0, i] = _y0s(xx)
        out[1, i] = _y1s(xx)
        for l in range(1, lmax):
            out[l + 1, i] = (2.0 * l / xx) * out[l, i] - out[l - 1, i]
    return out_arr
