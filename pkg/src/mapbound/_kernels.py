"""Compiled enumeration kernels and the elementwise Q^{-1} polish.

Columns are passed transposed (``cols[j]`` is column j, contiguous) so a bit
flip touches one contiguous row. All kernels release the GIL.
"""
import ctypes
import math

import numba as nb
import numpy as np
from numba.extending import get_cython_function_address


@nb.njit(cache=True, nogil=True)
def _trailing_zeros(i):
    j = 0
    while (i & 1) == 0:
        i >>= 1
        j += 1
    return j


@nb.njit(cache=True, nogil=True)
def map_gray(cols, y):
    """Exhaustive min ||y - A x||^2 over x in {+-1}^n in Gray-code order.

    Codeword index b encodes x_j = 1 - 2 * bit_j(b). Returns (best index,
    best squared residual); ties go to the smaller index.
    """
    n, m = cols.shape
    x = np.ones(n)
    r = y.copy()
    for j in range(n):
        for k in range(m):
            r[k] -= cols[j, k]
    best = 0.0
    for k in range(m):
        best += r[k] * r[k]
    best_idx = 0
    g = 0
    for i in range(1, 1 << n):
        j = _trailing_zeros(i)
        g ^= 1 << j
        s2 = 2.0 * x[j]
        x[j] = -x[j]
        acc = 0.0
        for k in range(m):
            r[k] += s2 * cols[j, k]
            acc += r[k] * r[k]
        if acc < best or (acc == best and g < best_idx):
            best = acc
            best_idx = g
    return best_idx, best


@nb.njit(cache=True, nogil=True)
def shell_profile_gray(cols, r0, x0):
    """Min squared residual for every Hamming distance k = 0..n from x0.

    ``r0`` = y - A x0. Enumerates all 2^n flip patterns in Gray order.
    """
    n, m = cols.shape
    r = r0.copy()
    flipped = np.zeros(n, dtype=np.bool_)
    best = np.full(n + 1, np.inf)
    acc = 0.0
    for k in range(m):
        acc += r[k] * r[k]
    best[0] = acc
    w = 0
    for i in range(1, 1 << n):
        j = _trailing_zeros(i)
        if flipped[j]:
            c = -2.0 * x0[j]
            w -= 1
        else:
            c = 2.0 * x0[j]
            w += 1
        flipped[j] = not flipped[j]
        acc = 0.0
        for k in range(m):
            r[k] += c * cols[j, k]
            acc += r[k] * r[k]
        if acc < best[w]:
            best[w] = acc
    return best


@nb.njit(cache=True, nogil=True)
def _toggle(r, cols, x0, j, sign):
    # sign=+1 flips bit j away from x0 (r += 2 x0_j a_j), sign=-1 restores it
    c = 2.0 * sign * x0[j]
    m = r.shape[0]
    for k in range(m):
        r[k] += c * cols[j, k]


@nb.njit(cache=True, nogil=True)
def _norm2(r):
    acc = 0.0
    for k in range(r.shape[0]):
        acc += r[k] * r[k]
    return acc


@nb.njit(cache=True, nogil=True)
def shell_min_revolving(cols, r0, x0, t):
    """Min squared residual over flip sets of size exactly t.

    Revolving-door order (Knuth, TAOCP 7.2.1.3, Algorithm R): consecutive
    t-subsets differ by one element out and one in, so each visit costs two
    column updates. Returns (min squared residual, number of subsets visited).
    """
    n = cols.shape[0]
    r = r0.copy()
    if t == 0:
        return _norm2(r), 1
    if t == n:
        for j in range(n):
            _toggle(r, cols, x0, j, 1.0)
        return _norm2(r), 1
    if t == 1:
        best = np.inf
        for j in range(n):
            _toggle(r, cols, x0, j, 1.0)
            v = _norm2(r)
            if v < best:
                best = v
            _toggle(r, cols, x0, j, -1.0)
        return best, n
    c = np.empty(t + 2, dtype=np.int64)
    for j in range(1, t + 1):
        c[j] = j - 1
        _toggle(r, cols, x0, j - 1, 1.0)
    c[t + 1] = n
    best = _norm2(r)
    visits = 1
    odd = (t & 1) == 1
    while True:
        out = -1
        inn = -1
        if odd and c[1] + 1 < c[2]:
            out = c[1]
            c[1] += 1
            inn = c[1]
        elif (not odd) and c[1] > 0:
            out = c[1]
            c[1] -= 1
            inn = c[1]
        else:
            j = 2
            step = 4 if odd else 5
            while True:
                if step == 4:
                    if c[j] >= j:
                        out = c[j]
                        c[j] = c[j - 1]
                        c[j - 1] = j - 2
                        inn = j - 2
                        break
                    j += 1
                    step = 5
                else:
                    if c[j] + 1 < c[j + 1]:
                        out = j - 2
                        c[j - 1] = c[j]
                        c[j] += 1
                        inn = c[j]
                        break
                    j += 1
                    if j > t:
                        return best, visits
                    step = 4
        _toggle(r, cols, x0, out, -1.0)
        _toggle(r, cols, x0, inn, 1.0)
        v = _norm2(r)
        visits += 1
        if v < best:
            best = v


# scipy's own C routines; ctypes pointers rule out on-disk caching, so these compile per process
_DD = ctypes.CFUNCTYPE(ctypes.c_double, ctypes.c_double)
_ndtri = _DD(get_cython_function_address("scipy.special.cython_special", "ndtri"))
_erfcx = _DD(get_cython_function_address("scipy.special.cython_special", "__pyx_fuse_1erfcx"))
_erfc = _DD(get_cython_function_address("scipy.special.cython_special", "__pyx_fuse_1erfc"))
_SQRT2 = math.sqrt(2.0)
_SQRT_HALF_PI = math.sqrt(0.5 * math.pi)


@nb.njit(nogil=True)
def _q_given_erfcx(x, ex):
    if x > 0:
        return 0.5 * ex * math.exp(-0.5 * x * x)
    return 0.5 * _erfc(x / _SQRT2)


@nb.njit(nogil=True)
def q_inv_newton(p, out, bad):
    """Elementwise Q^{-1}: ndtri start, two Newton steps, residual check.

    Works on pp = min(p, 1 - p) and writes the positive root to ``out``;
    ``bad`` flags elements whose relative residual exceeds 1e-10. The caller
    restores the sign for p > 1/2.
    """
    for i in range(p.size):
        pp = 1.0 - p[i] if p[i] > 0.5 else p[i]
        x = -_ndtri(pp)
        for _ in range(2):
            ex = _erfcx(x / _SQRT2)
            qx = _q_given_erfcx(x, ex)
            if qx > 0:
                # (Q(x) - p) / phi(x) written with the Mills ratio to avoid phi underflow
                x = x + _SQRT_HALF_PI * ex * (1.0 - pp / qx)
        out[i] = x
        bad[i] = not (abs(_q_given_erfcx(x, _erfcx(x / _SQRT2)) - pp) <= 1e-10 * pp)
