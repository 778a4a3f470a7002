"""Numpy implementation of the Bessel kernels.

Order 0 and 1 use the Cephes double-precision rational fits (Moshier,
Cephes Math Library 2.1): on [0, 5] a rational polynomial with the first
two zeros factored out (J0) or a power series (J1), beyond 5 the Hankel
asymptotic modulus/phase form.  Higher integer orders come from the
three-term recurrence: upward for Y (always stable), upward for J only
when x comfortably exceeds the top order, otherwise Miller's downward
recurrence normalized with J0 + 2*sum(J_2k) = 1.

Everything here takes 1-D float64 arrays with x >= 0 (x > 0 for Y) and
is wrapped by the shape-preserving API in `bessel`.
"""

import numpy as np

SQ2OPI = 7.9788456080286535587989e-1  # sqrt(2/pi)
PIO4 = 7.85398163397448309616e-1
THPIO4 = 2.35619449019234492885
TWOOPI = 6.36619772367581343075535e-1

DR1 = 5.78318596294678452118e0
DR2 = 3.04712623436620863991e1

RP = np.array([
    -4.79443220978201773821e9,
    1.95617491946556577543e12,
    -2.49248344360967716204e14,
    9.70862251047306323952e15,
])
RQ = np.array([  # leading coefficient 1 implied (p1evl)
    4.99563147152651017219e2,
    1.73785401676374683123e5,
    4.84409658339962045305e7,
    1.11855537045356834862e10,
    2.11277520115489217587e12,
    3.10518229857422583814e14,
    3.18121955943204943306e16,
    1.71086294081043136091e18,
])

PP = np.array([
    7.96936729297347051624e-4,
    8.28352392107440799803e-2,
    1.23953371646414299388e0,
    5.44725003058768775090e0,
    8.74716500199817011941e0,
    5.30324038235394892183e0,
    9.99999999999999997821e-1,
])
PQ = np.array([
    9.24408810558863637013e-4,
    8.56288474354474431428e-2,
    1.25352743901058953537e0,
    5.47097740330417105182e0,
    8.76190883237069594232e0,
    5.30605288235394617618e0,
    1.00000000000000000218e0,
])
QP = np.array([
    -1.13663838898469149931e-2,
    -1.28252718670509318512e0,
    -1.95539544257735972385e1,
    -9.32060152123768231369e1,
    -1.77681167980488050595e2,
    -1.47077505154951170175e2,
    -5.14105326766599330220e1,
    -6.05014350600728481186e0,
])
QQ = np.array([  # leading coefficient 1 implied
    6.43178256118178023184e1,
    8.56430025976980587198e2,
    3.88240183605401609683e3,
    7.24046774195652478189e3,
    5.93072701187316984827e3,
    2.06209331660327847417e3,
    2.42005740240291393179e2,
])

YP = np.array([
    1.55924367855235737965e4,
    -1.46639295903971606143e7,
    5.43526477051876500413e9,
    -9.82136065717911466409e11,
    8.75906394395366999549e13,
    -3.46628303384729719441e15,
    4.42733268572569800351e16,
    -1.84950800436986690637e16,
])
YQ = np.array([  # leading coefficient 1 implied
    1.04128353664259848412e3,
    6.26107330137134956842e5,
    2.68919633393814121987e8,
    8.64002487103935000337e10,
    2.02979612750105546709e13,
    3.17157752842975028269e15,
    2.50596256172653059228e17,
])

PP1 = np.array([
    7.62125616208173112003e-4,
    7.31397056940917570436e-2,
    1.12719608129684925192e0,
    5.11207951146807644818e0,
    8.42404590141772420927e0,
    5.21451598682361504063e0,
    1.00000000000000000254e0,
])
PQ1 = np.array([
    5.71323128072548699714e-4,
    6.88455908754495404082e-2,
    1.10514232634061696926e0,
    5.07386386128601488557e0,
    8.39985554327604159757e0,
    5.20982848682361821619e0,
    9.99999999999999997461e-1,
])
QP1 = np.array([
    5.10862594750176621635e-2,
    4.98213872951233449420e0,
    7.58238284132545283818e1,
    3.66779609360150777800e2,
    7.10856304998926107277e2,
    5.97489612400613639965e2,
    2.11688757100572135698e2,
    2.52070205858023719784e1,
])
QQ1 = np.array([  # leading coefficient 1 implied
    7.42373277035675149943e1,
    1.05644886038262816351e3,
    4.98641058337653607651e3,
    9.56231892404756170795e3,
    7.99704160447350683650e3,
    2.82619278517639096600e3,
    3.36093607810698293419e2,
])

YP1 = np.array([
    1.26320474790178026440e9,
    -6.47355876379160291031e11,
    1.14509511541823727583e14,
    -8.12770255501325109621e15,
    2.02439475713594898196e17,
    -7.78877196265950026825e17,
])
YQ1 = np.array([  # leading coefficient 1 implied
    5.94301592346128195359e2,
    2.35564092943068577943e5,
    7.34811944459721705660e7,
    1.87601316108706159478e10,
    3.88231277496238566008e12,
    6.20557727146953693363e14,
    6.87141087355300489866e16,
    3.97270608116560655612e18,
])

_MILLER_ACC = 160.0
_RESCALE = 1e250


def _polevl(x, coef):
    ans = np.full_like(x, coef[0])
    for c in coef[1:]:
        ans = ans * x + c
    return ans


def _p1evl(x, coef):
    ans = x + coef[0]
    for c in coef[1:]:
        ans = ans * x + c
    return ans


def j0(x):
    ans = np.empty_like(x)
    tiny = x < 1e-5
    small = ~tiny & (x <= 5.0)
    big = x > 5.0
    if tiny.any():
        z = x[tiny]
        ans[tiny] = 1.0 - z * z / 4.0
    if small.any():
        z = x[small] ** 2
        ans[small] = (z - DR1) * (z - DR2) * _polevl(z, RP) / _p1evl(z, RQ)
    if big.any():
        xx = x[big]
        w = 5.0 / xx
        z = w * w
        p = _polevl(z, PP) / _polevl(z, PQ)
        q = _polevl(z, QP) / _p1evl(z, QQ)
        xn = xx - PIO4
        ans[big] = SQ2OPI * (p * np.cos(xn) - w * q * np.sin(xn)) / np.sqrt(xx)
    return ans


def j1(x):
    ans = np.empty_like(x)
    small = x <= 5.0
    big = ~small
    if small.any():
        # power series sum_k (-1)^k (x/2)^(2k+1) / (k! (k+1)!); 22 terms
        # keep the truncation below 1e-19 at x = 5
        h = x[small] / 2.0
        h2 = h * h
        term = h.copy()
        acc = h.copy()
        for k in range(1, 22):
            term *= -h2 / (k * (k + 1))
            acc += term
        ans[small] = acc
    if big.any():
        xx = x[big]
        w = 5.0 / xx
        z = w * w
        p = _polevl(z, PP1) / _polevl(z, PQ1)
        q = _polevl(z, QP1) / _p1evl(z, QQ1)
        xn = xx - THPIO4
        ans[big] = SQ2OPI * (p * np.cos(xn) - w * q * np.sin(xn)) / np.sqrt(xx)
    return ans


def y0(x):
    ans = np.empty_like(x)
    small = x <= 5.0
    big = ~small
    if small.any():
        xx = x[small]
        z = xx * xx
        ans[small] = _polevl(z, YP) / _p1evl(z, YQ) + TWOOPI * np.log(xx) * j0(xx)
    if big.any():
        xx = x[big]
        w = 5.0 / xx
        z = w * w
        p = _polevl(z, PP) / _polevl(z, PQ)
        q = _polevl(z, QP) / _p1evl(z, QQ)
        xn = xx - PIO4
        ans[big] = SQ2OPI * (p * np.sin(xn) + w * q * np.cos(xn)) / np.sqrt(xx)
    return ans


def y1(x):
    ans = np.empty_like(x)
    small = x <= 5.0
    big = ~small
    if small.any():
        xx = x[small]
        z = xx * xx
        w = xx * _polevl(z, YP1) / _p1evl(z, YQ1)
        ans[small] = w + TWOOPI * (j1(xx) * np.log(xx) - 1.0 / xx)
    if big.any():
        xx = x[big]
        w = 5.0 / xx
        z = w * w
        p = _polevl(z, PP1) / _polevl(z, PQ1)
        q = _polevl(z, QP1) / _p1evl(z, QQ1)
        xn = xx - THPIO4
        ans[big] = SQ2OPI * (p * np.sin(xn) + w * q * np.cos(xn)) / np.sqrt(xx)
    return ans


def _jn_series_tiny(lmax, x):
    """J_l for x < 1e-6: leading series terms, exact to double precision."""
    out = np.zeros((lmax + 1, x.size))
    h = x / 2.0
    pw = np.ones_like(x)
    fact = 1.0
    for l in range(lmax + 1):
        if l > 0:
            pw = pw * h
            fact *= l
        out[l] = pw / fact * (1.0 - h * h / (l + 1))
    return out


def _jn_miller(lmax, x):
    """Downward recurrence, normalized by J0 + 2 sum_k J_{2k} = 1."""
    n = x.size
    out = np.zeros((lmax + 1, n))
    top = max(lmax, int(np.ceil(x.max())), 1)
    start = top + int(np.sqrt(_MILLER_ACC * top)) + 2
    start += start & 1  # even, so the last even-sum update lands on order 0
    tox = 2.0 / x
    bjp = np.zeros(n)
    bj = np.ones(n)
    ssum = np.zeros(n)
    for j in range(start, 0, -1):
        bjm = j * tox * bj - bjp
        bjp = bj
        bj = bjm
        hot = np.abs(bj) > _RESCALE
        if hot.any():
            f = np.where(hot, 1.0 / _RESCALE, 1.0)
            bj = bj * f
            bjp = bjp * f
            ssum = ssum * f
            out *= f
        order = j - 1
        if order <= lmax:
            out[order] = bj
        if order > 0 and order % 2 == 0:
            ssum = ssum + 2.0 * bj
    ssum = ssum + bj  # J0 term
    out /= ssum
    return out


def _jn_upward(lmax, x):
    n = x.size
    out = np.empty((lmax + 1, n))
    out[0] = j0(x)
    out[1] = j1(x)
    for l in range(1, lmax):
        out[l + 1] = (2.0 * l / x) * out[l] - out[l - 1]
    return out


def jn_fill(lmax, x):
    """Table of J_l(x) for l = 0..lmax, shape (lmax + 1, x.size)."""
    if lmax == 0:
        return j0(x)[None, :]
    out = np.empty((lmax + 1, x.size))
    tiny = x < 1e-6
    down = ~tiny & (x < lmax + 6.0)
    up = x >= lmax + 6.0
    if tiny.any():
        out[:, tiny] = _jn_series_tiny(lmax, x[tiny])
    if down.any():
        out[:, down] = _jn_miller(lmax, x[down])
    if up.any():
        out[:, up] = _jn_upward(lmax, x[up])
    return out


def yn_fill(lmax, x):
    """Table of Y_l(x) for l = 0..lmax (x > 0), upward recurrence."""
    if lmax == 0:
        return y0(x)[None, :]
    out = np.empty((lmax + 1, x.size))
    out[0] = y0(x)
    out[1] = y1(x)
    for l in range(1, lmax):
        out[l + 1] = (2.0 * l / x) * out[l] - out[l - 1]
    return out
