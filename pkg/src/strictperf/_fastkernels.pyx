# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot exact-arithmetic kernels over Z/p^m.

Same contracts as ``_purekernels``; see there for the documentation.
"""

import numpy as np
cimport numpy as cnp
cimport cython

IMPL = "cython"

ctypedef cnp.int64_t I64


cdef inline long long _mod(long long x, long long q) nogil:
    # C % truncates toward zero; normalize into [0, q).
    x %= q
    if x < 0:
        x += q
    return x


cdef inline int _valuation(long long x, long long p, int m) nogil:
    cdef int v = 0
    if x == 0:
        return m
    while x % p == 0:
        x //= p
        v += 1
    return v


cdef long long _powll(long long b, int e) nogil:
    cdef long long r = 1
    cdef int i
    for i in range(e):
        r *= b
    return r


cdef long long _unit_inv(long long u, long long q, long long p, int m):
    # Inverse of a unit mod p^m via Python pow (called rarely, outside loops).
    return pow(int(u), -1, int(q))


def howell_mod(a, long long p, int m):
    cdef long long q = _powll(p, m)
    arr = np.ascontiguousarray(np.asarray(a, dtype=np.int64) % q)
    if arr.ndim != 2:
        raise ValueError("expected a 2-d array")
    cdef Py_ssize_t nrows = arr.shape[0]
    cdef Py_ssize_t ncols = arr.shape[1]
    # Working buffer: at most nrows + m*ncols rows appear (each pivot spawns
    # at most one shadow per column).
    cdef Py_ssize_t cap = nrows + (m + 1) * ncols + 1
    buf_np = np.zeros((cap, ncols), dtype=np.int64)
    cdef I64[:, ::1] buf = buf_np
    cdef I64[:, ::1] src = arr
    cdef Py_ssize_t nact = 0
    cdef Py_ssize_t i, j, k
    for i in range(nrows):
        for j in range(ncols):
            if src[i, j] != 0:
                break
        else:
            continue
        for j in range(ncols):
            buf[nact, j] = src[i, j]
        nact += 1

    out_np = np.zeros((min(cap, ncols * (m + 1)), ncols), dtype=np.int64)
    cdef I64[:, ::1] out = out_np
    cdef Py_ssize_t nout = 0
    pivot_cols = []
    pivot_vals = []
    cdef long long col, best, v, pv, unit, inv, t, sh
    cdef Py_ssize_t bi
    for col in range(ncols):
        if nact == 0:
            break
        # Find the active row with minimal valuation at this column.
        best = m + 1
        bi = -1
        for i in range(nact):
            if buf[i, col] != 0:
                v = _valuation(buf[i, col], p, m)
                if v < best:
                    best = v
                    bi = i
        if bi < 0:
            continue
        v = best
        pv = _powll(p, <int> v)
        unit = buf[bi, col] // pv
        inv = _unit_inv(unit, q, p, m)
        for j in range(col, ncols):
            buf[bi, j] = (buf[bi, j] * inv) % q
        # Eliminate the column from every other active row.
        for i in range(nact):
            if i == bi or buf[i, col] == 0:
                continue
            t = buf[i, col] // pv
            for j in range(col, ncols):
                buf[i, j] = _mod(buf[i, j] - t * buf[bi, j], q)
        # Emit the pivot row, append its annihilator shadow.
        for j in range(ncols):
            out[nout, j] = buf[bi, j]
        pivot_cols.append(int(col))
        pivot_vals.append(int(v))
        sh = q // pv
        nonzero = False
        for j in range(col, ncols):
            buf[bi, j] = (buf[bi, j] * sh) % q
            if buf[bi, j] != 0:
                nonzero = True
        if not nonzero:
            # Reuse the slot: swap in the last active row.
            nact -= 1
            if bi != nact:
                for j in range(ncols):
                    buf[bi, j] = buf[nact, j]
        nout += 1
        # Drop rows that became zero.
        i = 0
        while i < nact:
            nonzero = False
            for j in range(col, ncols):
                if buf[i, j] != 0:
                    nonzero = True
                    break
            if not nonzero:
                nact -= 1
                if i != nact:
                    for j in range(ncols):
                        buf[i, j] = buf[nact, j]
            else:
                i += 1

    h_np = out_np[:nout].copy()
    cdef I64[:, ::1] h = h_np
    # Back-reduction above the pivots.
    cdef Py_ssize_t pi, hr
    for pi in range(nout):
        pv = _powll(p, <int> pivot_vals[pi])
        col = pivot_cols[pi]
        for hr in range(pi):
            t = h[hr, col] // pv
            if t != 0:
                for j in range(col, ncols):
                    h[hr, j] = _mod(h[hr, j] - t * h[pi, j], q)
    return h_np, pivot_cols, pivot_vals


def reduce_against(h, pivot_cols, pivot_vals, vecs, long long p, int m,
                   limit_cols=None, bint want_coeffs=False):
    cdef long long q = _powll(p, m)
    res_np = np.ascontiguousarray(np.asarray(vecs, dtype=np.int64) % q)
    if res_np.ndim != 2:
        raise ValueError("expected a 2-d array")
    res_np = res_np.copy()
    cdef I64[:, ::1] res = res_np
    h_np = np.ascontiguousarray(h)
    cdef I64[:, ::1] hh = h_np
    cdef Py_ssize_t nvec = res_np.shape[0]
    cdef Py_ssize_t ncols = res_np.shape[1]
    cdef Py_ssize_t npiv = h_np.shape[0]
    cdef long long lim = ncols if limit_cols is None else <long long> limit_cols
    coeff_np = np.zeros((nvec, npiv), dtype=np.int64)
    cdef I64[:, ::1] coeff = coeff_np
    cdef Py_ssize_t i, r, j
    cdef long long col, pv, t
    cols_np = np.asarray(pivot_cols, dtype=np.int64)
    vals_np = np.asarray(pivot_vals, dtype=np.int64)
    cdef I64[::1] cols = cols_np if cols_np.size else np.zeros(0, dtype=np.int64)
    cdef I64[::1] vals = vals_np if vals_np.size else np.zeros(0, dtype=np.int64)
    for i in range(npiv):
        col = cols[i]
        if col >= lim:
            break
        pv = _powll(p, <int> vals[i])
        for r in range(nvec):
            t = res[r, col] // pv
            if t != 0:
                for j in range(col, ncols):
                    res[r, j] = _mod(res[r, j] - t * hh[i, j], q)
                if want_coeffs:
                    coeff[r, i] = _mod(t, q)
    if want_coeffs:
        return res_np, coeff_np
    return res_np
