"""Canonical exact linear algebra over Z/p^m.

Conventions, fixed project-wide:

* A matrix is a numpy int64 array with entries reduced into ``[0, q)``.
* Vectors are rows and act on the left: a matrix ``M`` with shape (r, c)
  is the map ``v -> v @ M`` from Z_q^r to Z_q^c, and its row span is the
  image of that map.
* Submodules of Z_q^n are identified with their canonical Howell form,
  which is the unique representative of a row span over Z/p^m.

Everything in this module is pure and operates on immutable inputs; results
are fresh arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import howell_mod, reduce_against


@dataclass(frozen=True)
class Modulus:
    """Prime power modulus q = p^m."""

    p: int
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("exponent must be >= 1")
        if self.p < 2 or any(self.p % d == 0 for d in range(2, int(self.p**0.5) + 1)):
            raise ValueError("p must be prime")

    @property
    def q(self) -> int:
        return self.p**self.m

    def valuation(self, x: int) -> int:
        x = int(x) % self.q
        if x == 0:
            return self.m
        v = 0
        while x % self.p == 0:
            x //= self.p
            v += 1
        return v


@dataclass(frozen=True)
class HowellForm:
    """Canonical Howell form together with its pivot data."""

    matrix: np.ndarray
    pivot_cols: tuple
    pivot_vals: tuple
    mod: Modulus

    @property
    def nrows(self) -> int:
        return self.matrix.shape[0]

    @property
    def ncols(self) -> int:
        return self.matrix.shape[1]

    def span_size(self) -> int:
        size = 1
        for v in self.pivot_vals:
            size *= self.mod.p ** (self.mod.m - v)
        return size


def zq(a, mod: Modulus) -> np.ndarray:
    """Coerce to an int64 matrix with entries reduced mod q."""
    arr = np.asarray(a, dtype=np.int64) % mod.q
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    return arr


def zeros(rows: int, cols: int) -> np.ndarray:
    return np.zeros((rows, cols), dtype=np.int64)


def eye(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.int64)


def matmul(a, b, mod: Modulus) -> np.ndarray:
    return (np.asarray(a, dtype=np.int64) @ np.asarray(b, dtype=np.int64)) % mod.q


def howell(a, mod: Modulus) -> HowellForm:
    """Canonical form of the row span of ``a``; idempotent and canonical."""
    h, cols, vals = howell_mod(zq(a, mod), mod.p, mod.m)
    return HowellForm(h, tuple(cols), tuple(vals), mod)


def coset_reduce(form: HowellForm, vecs) -> np.ndarray:
    """Canonical residue of each row of ``vecs`` modulo the span."""
    v = zq(vecs, form.mod)
    return reduce_against(
        form.matrix, list(form.pivot_cols), list(form.pivot_vals), v, form.mod.p, form.mod.m
    )


def in_span(form: HowellForm, vecs) -> bool:
    return not coset_reduce(form, vecs).any()


def span_eq(a: HowellForm, b: HowellForm) -> bool:
    return a.matrix.shape == b.matrix.shape and bool(np.array_equal(a.matrix, b.matrix))


def span_sum(mod: Modulus, *spans) -> HowellForm:
    rows = [np.asarray(s.matrix if isinstance(s, HowellForm) else zq(s, mod)) for s in spans]
    rows = [r for r in rows if r.size]
    if not rows:
        return howell(zeros(0, 0), mod)
    return howell(np.vstack(rows), mod)


def kernel(a, mod: Modulus) -> HowellForm:
    """Canonical form of ``{v : v @ a == 0}``."""
    a = zq(a, mod)
    r, c = a.shape
    aug = np.hstack([a, eye(r)])
    h, cols, vals = howell_mod(aug, mod.p, mod.m)
    keep = [i for i, col in enumerate(cols) if col >= c]
    rows = h[keep, c:] if keep else zeros(0, r)
    return howell(rows, mod)


def preimage_span(a, target: HowellForm, mod: Modulus) -> HowellForm:
    """Canonical form of ``{v : v @ a in rowspan(target)}``."""
    a = zq(a, mod)
    r = a.shape[0]
    t = target.matrix
    if t.shape[0] == 0:
        return kernel(a, mod)
    stacked = np.vstack([a, t])
    ker = kernel(stacked, mod)
    return howell(ker.matrix[:, :r], mod) if ker.nrows else howell(zeros(0, r), mod)


def span_intersect(a: HowellForm, b: HowellForm) -> HowellForm:
    """Intersection of two row spans in the same ambient module."""
    mod = a.mod
    if a.nrows == 0 or b.nrows == 0:
        return howell(zeros(0, a.ncols), mod)
    stacked = np.vstack([a.matrix, b.matrix])
    ker = kernel(stacked, mod)
    if ker.nrows == 0:
        return howell(zeros(0, a.ncols), mod)
    xs = ker.matrix[:, : a.nrows]
    return howell(matmul(xs, a.matrix, mod), mod)


class SolveContext:
    """Reusable solver for ``x @ a = b`` with a fixed ``a``.

    Built on the Howell form of ``[a | I]``; each solve is a single reduction
    pass.  ``solve`` returns None exactly when no solution exists.
    """

    def __init__(self, a, mod: Modulus):
        a = zq(a, mod)
        self.mod = mod
        self.nrows, self.ncols = a.shape
        aug = np.hstack([a, eye(self.nrows)])
        h, cols, vals = howell_mod(aug, mod.p, mod.m)
        self._h = h
        self._cols = cols
        self._vals = vals

    def solve_many(self, bs) -> np.ndarray | None:
        """Solve ``x_i @ a = b_i`` for all rows at once; None if any fails."""
        bs = zq(bs, self.mod)
        if bs.shape[1] != self.ncols:
            raise ValueError("dimension mismatch")
        aug = np.hstack([bs, zeros(bs.shape[0], self.nrows)])
        res, coeffs = reduce_against(
            self._h, self._cols, self._vals, aug, self.mod.p, self.mod.m,
            limit_cols=self.ncols, want_coeffs=True,
        )
        if res[:, : self.ncols].any():
            return None
        # residue = b - t @ h, so x = -(right part of residue) solves x @ a = b.
        return (-res[:, self.ncols:]) % self.mod.q

    def solve(self, b) -> np.ndarray | None:
        out = self.solve_many(np.asarray(b, dtype=np.int64).reshape(1, -1))
        return None if out is None else out[0]


def solve(a, b, mod: Modulus) -> np.ndarray | None:
    """One-shot ``x @ a = b``; see SolveContext for batch use."""
    return SolveContext(a, mod).solve(b)


def inverse(a, mod: Modulus) -> np.ndarray | None:
    """Two-sided inverse of a square matrix, or None if not invertible."""
    a = zq(a, mod)
    n = a.shape[0]
    if a.shape[1] != n:
        raise ValueError("inverse of a non-square matrix")
    ctx = SolveContext(a, mod)
    inv = ctx.solve_many(eye(n))
    return inv


def is_invertible(a, mod: Modulus) -> bool:
    return inverse(a, mod) is not None


def snf_diagonal(a, mod: Modulus):
    """Diagonalize over Z/p^m: returns (diag_vals, v, v_inv) with
    rowspan(a) = rowspan(D @ v_inv) for D = diag(p^d_i), i.e. U a v = D for
    an invertible U that is not returned.  ``diag_vals`` are the exponents
    d_i in increasing order.
    """
    p, m, q = mod.p, mod.m, mod.q
    work = zq(a, mod).copy()
    r, c = work.shape
    v = eye(c)
    diag = []
    k = 0
    while k < min(r, c):
        best, bi, bj = m + 1, -1, -1
        for i in range(k, r):
            for j in range(k, c):
                x = int(work[i, j])
                if x:
                    val = mod.valuation(x)
                    if val < best:
                        best, bi, bj = val, i, j
        if bi < 0:
            break
        if bi != k:
            work[[k, bi]] = work[[bi, k]]
        if bj != k:
            work[:, [k, bj]] = work[:, [bj, k]]
            v[:, [k, bj]] = v[:, [bj, k]]
        pv = p**best
        unit = int(work[k, k]) // pv
        work[k] = (work[k] * pow(unit, -1, q)) % q
        for i in range(k + 1, r):
            t = int(work[i, k]) // pv
            if t:
                work[i] = (work[i] - t * work[k]) % q
        for j in range(k + 1, c):
            t = int(work[k, j]) // pv
            if t:
                work[:, j] = (work[:, j] - t * work[:, k]) % q
                v[:, j] = (v[:, j] - t * v[:, k]) % q
        diag.append(best)
        k += 1
    v_inv = inverse(v, mod)
    return diag, v, v_inv


def quotient_structure(span: HowellForm, ambient_rank: int):
    """Invariant factors of Z_q^n / rowspan as a list of cyclic orders d_i.

    Each d_i divides q and the product of the d_i equals q^n / |span|.
    Trivial factors are dropped.
    """
    mod = span.mod
    if span.nrows == 0:
        return [mod.q] * ambient_rank
    if span.ncols != ambient_rank:
        raise ValueError("span does not live in the stated ambient module")
    diag, _, _ = snf_diagonal(span.matrix, mod)
    factors = [mod.p**d for d in diag if d > 0]
    factors += [mod.q] * (ambient_rank - len(diag))
    return sorted(factors)
