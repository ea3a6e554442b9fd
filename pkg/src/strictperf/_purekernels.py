"""Pure-Python versions of the hot exact-arithmetic kernels.

These mirror the compiled routines in ``_fastkernels``; the heavy inner loop
is row elimination over Z/p^m with minimum-valuation pivoting.  Row-vector
convention throughout: vectors act on the left, so the row span of a matrix
is the image of the map ``v -> v @ M``.
"""

from __future__ import annotations

import numpy as np

IMPL = "pure"


def _valuation(x: int, p: int, m: int) -> int:
    # valuation of 0 is m by convention (0 = unit * p^m).
    if x == 0:
        return m
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def howell_mod(a: np.ndarray, p: int, m: int):
    """Canonical Howell form of the row span of ``a`` over Z/p^m.

    Returns ``(h, pivot_cols, pivot_vals)`` where ``h`` has one row per pivot,
    pivot entries are exact powers of p, entries above a pivot are reduced
    modulo the pivot, and the span is closed under the annihilator shadows
    (for a pivot p^v the multiple p^(m-v) * row lies in the span of later
    rows).  The form is the unique canonical representative of the row span.
    """
    q = p**m
    a = np.asarray(a, dtype=np.int64) % q
    if a.ndim != 2:
        raise ValueError("expected a 2-d array")
    ncols = a.shape[1]
    active = [row.copy() for row in a if row.any()]
    out_rows = []
    pivot_cols = []
    pivot_vals = []
    for col in range(ncols):
        if not active:
            break
        hit = [r for r in active if r[col] != 0]
        rest = [r for r in active if r[col] == 0]
        if not hit:
            continue
        vals = [_valuation(int(r[col]), p, m) for r in hit]
        k = vals.index(min(vals))
        piv = hit.pop(k)
        v = vals[k]
        pv = p**v
        unit = int(piv[col]) // pv
        piv = (piv * pow(unit, -1, q)) % q
        for r in hit:
            t = int(r[col]) // pv
            r -= t * piv
            r %= q
            if r.any():
                rest.append(r)
        shadow = (piv * (q // pv)) % q
        if shadow.any():
            rest.append(shadow)
        out_rows.append(piv)
        pivot_cols.append(col)
        pivot_vals.append(v)
        active = rest
    if not out_rows:
        return np.zeros((0, ncols), dtype=np.int64), [], []
    h = np.vstack(out_rows)
    # Reduce entries above each pivot modulo the pivot value.
    for i in range(len(out_rows)):
        pv = p ** pivot_vals[i]
        col = pivot_cols[i]
        for hrow in range(i):
            t = int(h[hrow, col]) // pv
            if t:
                h[hrow] = (h[hrow] - t * h[i]) % q
    return h, pivot_cols, pivot_vals


def reduce_against(
    h: np.ndarray,
    pivot_cols,
    pivot_vals,
    vecs: np.ndarray,
    p: int,
    m: int,
    limit_cols: int | None = None,
    want_coeffs: bool = False,
):
    """Reduce each row of ``vecs`` against a Howell form.

    Only pivot rows with pivot column < ``limit_cols`` are used.  Returns the
    residues, and when ``want_coeffs`` is set also the coefficient matrix
    ``t`` with ``vecs = t @ h + residues``.  A residue entry at a pivot column
    is always reduced modulo the pivot, so membership in the span is exactly
    ``residue == 0``.
    """
    q = p**m
    vecs = np.asarray(vecs, dtype=np.int64) % q
    res = vecs.copy()
    nrows = res.shape[0]
    coeffs = np.zeros((nrows, h.shape[0]), dtype=np.int64) if want_coeffs else None
    for i, (col, v) in enumerate(zip(pivot_cols, pivot_vals)):
        if limit_cols is not None and col >= limit_cols:
            break
        pv = p**v
        t = res[:, col] // pv
        nz = t != 0
        if nz.any():
            res[nz] = (res[nz] - t[nz, None] * h[i][None, :]) % q
            if want_coeffs:
                coeffs[nz, i] = t[nz] % q
    if want_coeffs:
        return res, coeffs
    return res
