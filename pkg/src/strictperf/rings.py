"""Artinian local commutative algebras over Z/p^m.

A ring is presented on an ordered monomial basis with a span of additive
relations, so quotients like Z/4[u]/(u^2, 2u) (whose additive group is not
free) fit the same representation as free cases.  Element coordinates are
always the canonical residue modulo the relation span; all arithmetic is
exact.

Truncated power series over such a ring, Weierstrass division and
preparation, and division-free characteristic polynomials live here too.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import linalg
from .linalg import HowellForm, Modulus


def _monomials_below(nvars: int, degree: int):
    """Exponent tuples of total degree < degree, ordered by (degree, lex)."""
    out = []
    for d in range(degree):
        for combo in itertools.combinations_with_replacement(range(nvars), d):
            e = [0] * nvars
            for i in combo:
                e[i] += 1
            out.append(tuple(e))
    return sorted(set(out), key=lambda e: (sum(e), e))


def _monomial_label(expts, variables) -> str:
    parts = []
    for v, e in zip(variables, expts):
        if e == 1:
            parts.append(v)
        elif e > 1:
            parts.append(f"{v}^{e}")
    return "*".join(parts) if parts else "1"


def parse_monomial(label: str, variables) -> tuple:
    e = [0] * len(variables)
    label = label.strip()
    if label in ("", "1"):
        return tuple(e)
    for factor in label.split("*"):
        factor = factor.strip()
        if "^" in factor:
            name, _, exp = factor.partition("^")
            e[variables.index(name.strip())] += int(exp)
        else:
            e[variables.index(factor)] += 1
    return tuple(e)


class InconsistentPresentation(ValueError):
    pass


class ArtinianRing:
    """Finite local commutative W-algebra on a monomial basis.

    ``mult_tensor[i, j]`` holds the ambient coordinates of basis[i]*basis[j]
    (before relation reduction); ``relations`` is the Howell span dividing
    them out.  The residue field is Z/p.
    """

    def __init__(self, mod: Modulus, labels, mult_tensor, relation_rows, mA_extra_rows):
        self.mod = mod
        self.labels = list(labels)
        self.n = len(self.labels)
        self.mult_tensor = np.asarray(mult_tensor, dtype=np.int64) % mod.q
        self.relations = linalg.howell(
            relation_rows if len(relation_rows) else linalg.zeros(0, self.n), mod
        )
        if linalg.in_span(self.relations, self.one_coords()):
            raise InconsistentPresentation("1 lies in the relation ideal")
        rows = [self.one_coords() * mod.p]
        rows.extend(mA_extra_rows)
        if self.relations.nrows:
            rows.append(self.relations.matrix)
        self.max_ideal = linalg.howell(np.vstack([np.atleast_2d(r) for r in rows]), mod)
        if linalg.in_span(self.max_ideal, self.one_coords()):
            raise InconsistentPresentation("1 lies in the maximal ideal")
        self._check_structure()
        self.nilpotency_index = self._nilpotency_index()

    # -- construction -----------------------------------------------------

    @staticmethod
    def zmod(p: int, m: int) -> "ArtinianRing":
        mod = Modulus(p, m)
        tensor = np.ones((1, 1, 1), dtype=np.int64)
        return ArtinianRing(mod, ["1"], tensor, linalg.zeros(0, 1), [])

    @staticmethod
    def quotient_ring(p, m, variables, truncation_degree, relations) -> "ArtinianRing":
        """Z/p^m[vars]/(relations + all monomials of degree >= truncation).

        ``relations`` is a list of polynomials, each a mapping from monomial
        (label string or exponent tuple) to integer coefficient.
        """
        mod = Modulus(p, m)
        variables = list(variables)
        monos = _monomials_below(len(variables), truncation_degree)
        index = {e: i for i, e in enumerate(monos)}
        n = len(monos)

        tensor = np.zeros((n, n, n), dtype=np.int64)
        for i, ei in enumerate(monos):
            for j, ej in enumerate(monos):
                s = tuple(a + b for a, b in zip(ei, ej))
                if sum(s) < truncation_degree:
                    tensor[i, j, index[s]] = 1

        rel_rows = []
        for poly in relations:
            for ei in monos:
                shifted = np.zeros(n, dtype=np.int64)
                for key, coeff in poly.items():
                    e = parse_monomial(key, variables) if isinstance(key, str) else tuple(key)
                    s = tuple(a + b for a, b in zip(e, ei))
                    if sum(s) < truncation_degree:
                        shifted[index[s]] = (shifted[index[s]] + coeff) % mod.q
                if shifted.any():
                    rel_rows.append(shifted)
        rel = np.vstack(rel_rows) if rel_rows else linalg.zeros(0, n)

        # The maximal ideal is (p, all variables); as a Z_q-span that is p*1
        # together with every non-constant monomial.
        var_rows = []
        for e, i in index.items():
            if sum(e) >= 1:
                row = np.zeros(n, dtype=np.int64)
                row[i] = 1
                var_rows.append(row)
        ring = ArtinianRing(mod, [_monomial_label(e, variables) for e in monos], tensor, rel, var_rows)
        ring.variables = variables
        ring.truncation_degree = truncation_degree
        return ring

    # -- structural checks -------------------------------------------------

    def _check_structure(self):
        n = self.n
        for i in range(n):
            for j in range(i, n):
                ij = self.reduce(self.mult_tensor[i, j])
                ji = self.reduce(self.mult_tensor[j, i])
                if not np.array_equal(ij, ji):
                    raise InconsistentPresentation("multiplication not commutative")
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    left = self.mul_coords(self.mult_tensor[i, j], self._basis_vec(k))
                    right = self.mul_coords(self._basis_vec(i), self.mult_tensor[j, k])
                    if not np.array_equal(left, right):
                        raise InconsistentPresentation("multiplication not associative")

    def _span_is_zero(self, span: HowellForm) -> bool:
        # Zero in the quotient means contained in the relation span.
        if span.nrows == 0:
            return True
        return linalg.in_span(self.relations, span.matrix) if self.relations.nrows else False

    def ideal_power_span(self, span: HowellForm, k: int) -> HowellForm:
        out = span
        for _ in range(k - 1):
            rows = [self.mul_coords(r, b) for r in out.matrix for b in span.matrix]
            if self.relations.nrows:
                rows.append(self.relations.matrix)
            if not rows:
                return linalg.howell(linalg.zeros(0, self.n), self.mod)
            out = linalg.howell(np.vstack([np.atleast_2d(r) for r in rows]), self.mod)
        return out

    def _nilpotency_index(self) -> int:
        span = self.max_ideal
        k = 1
        while not self._span_is_zero(span):
            rows = [self.mul_coords(r, b) for r in span.matrix for b in self.max_ideal.matrix]
            if self.relations.nrows:
                rows.append(self.relations.matrix)
            if not rows:
                break
            span = linalg.howell(np.vstack([np.atleast_2d(r) for r in rows]), self.mod)
            k += 1
            if k > self.n * self.mod.m + 2:
                raise InconsistentPresentation("maximal ideal is not nilpotent")
        return k

    # -- coordinate arithmetic ----------------------------------------------

    def _basis_vec(self, i):
        v = np.zeros(self.n, dtype=np.int64)
        v[i] = 1
        return v

    def one_coords(self) -> np.ndarray:
        out = np.zeros(self.n, dtype=np.int64)
        out[self.labels.index("1")] = 1
        return out

    def reduce(self, coords) -> np.ndarray:
        coords = np.asarray(coords, dtype=np.int64).reshape(1, -1) % self.mod.q
        if self.relations.nrows == 0:
            return coords[0]
        return linalg.coset_reduce(self.relations, coords)[0]

    def mul_coords(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=np.int64) % self.mod.q
        y = np.asarray(y, dtype=np.int64) % self.mod.q
        out = np.einsum("i,j,ijk->k", x, y, self.mult_tensor) % self.mod.q
        return self.reduce(out)

    def mult_matrix(self, x) -> np.ndarray:
        """Matrix of ``y -> y*x`` on ambient coordinates (rows convention)."""
        x = np.asarray(x, dtype=np.int64) % self.mod.q
        rows = np.einsum("j,ijk->ik", x, self.mult_tensor) % self.mod.q
        return rows

    def residue(self, x) -> int:
        """Image in the residue field A/m_A, as an element of Z/p."""
        x = self.reduce(x)
        for t in range(self.mod.p):
            if linalg.in_span(self.max_ideal, (x - t * self.one_coords()) % self.mod.q):
                return t
        raise AssertionError("residue field is not Z/p")

    def is_unit_coords(self, x) -> bool:
        return self.residue(x) != 0

    def invert_coords(self, x) -> np.ndarray:
        if not self.is_unit_coords(x):
            raise ZeroDivisionError("inverting a non-unit")
        mx = self.mult_matrix(x)
        stacked = (
            np.vstack([mx, self.relations.matrix]) if self.relations.nrows else mx
        )
        sol = linalg.solve(stacked, self.one_coords(), self.mod)
        assert sol is not None
        return self.reduce(sol[: self.n])

    def elements(self, limit: int = 1 << 14):
        """All canonical coordinate vectors; guarded by a size limit."""
        if self.mod.q**self.n > limit:
            raise ValueError("ring too large to enumerate")
        seen = set()
        out = []
        for tup in itertools.product(range(self.mod.q), repeat=self.n):
            c = self.reduce(np.array(tup, dtype=np.int64))
            key = tuple(int(v) for v in c)
            if key not in seen:
                seen.add(key)
                out.append(c)
        return out

    def units(self):
        return [c for c in self.elements() if self.is_unit_coords(c)]

    def max_ideal_elements(self):
        return [c for c in self.elements() if not self.is_unit_coords(c)]

    def length_over_zp(self) -> int:
        total = self.mod.q**self.n // (self.relations.span_size() if self.relations.nrows else 1)
        l = 0
        while self.mod.p**l < total:
            l += 1
        assert self.mod.p**l == total, "cardinality is not a p-power"
        return l

    def element(self, coords) -> "RingElement":
        return RingElement(self, self.reduce(coords))

    def from_int(self, k: int) -> "RingElement":
        return self.element((self.one_coords() * k) % self.mod.q)

    def __repr__(self):
        return f"ArtinianRing(q={self.mod.q}, basis={self.labels})"


@dataclass(frozen=True)
class RingElement:
    ring: ArtinianRing
    coords: np.ndarray

    def __post_init__(self):
        self.coords.setflags(write=False)

    def __add__(self, other):
        return self.ring.element((self.coords + other.coords) % self.ring.mod.q)

    def __sub__(self, other):
        return self.ring.element((self.coords - other.coords) % self.ring.mod.q)

    def __neg__(self):
        return self.ring.element((-self.coords) % self.ring.mod.q)

    def __mul__(self, other):
        if isinstance(other, int):
            return self.ring.element((self.coords * other) % self.ring.mod.q)
        return self.ring.element(self.ring.mul_coords(self.coords, other.coords))

    __rmul__ = __mul__

    def __eq__(self, other):
        return self.ring is other.ring and np.array_equal(self.coords, other.coords)

    def __hash__(self):
        return hash(tuple(int(x) for x in self.coords))

    def is_unit(self) -> bool:
        return self.ring.is_unit_coords(self.coords)

    def invert(self) -> "RingElement":
        return self.ring.element(self.ring.invert_coords(self.coords))

    def is_zero(self) -> bool:
        return not self.coords.any()

    def __repr__(self):
        terms = [
            (f"{int(c)}*" if c != 1 or lab == "1" else "") + (lab if lab != "1" or c != 1 else "1")
            for lab, c in zip(self.ring.labels, self.coords)
            if c
        ]
        return "+".join(terms) if terms else "0"


def is_unit(a: RingElement) -> bool:
    return a.is_unit()


def invert(a: RingElement) -> RingElement:
    return a.invert()


# -- truncated power series ----------------------------------------------


class TruncatedSeries:
    """Degree-T truncation of A[[x]]; multiplication drops degree >= T."""

    def __init__(self, ring: ArtinianRing, coeffs, trunc: int):
        self.ring = ring
        self.trunc = trunc
        cs = list(coeffs)[:trunc]
        while len(cs) < trunc:
            cs.append(ring.from_int(0))
        self.coeffs = cs

    @staticmethod
    def from_ints(ring, ints, trunc):
        return TruncatedSeries(ring, [ring.from_int(c) for c in ints], trunc)

    @staticmethod
    def x_power(ring, k, trunc):
        cs = [ring.from_int(0)] * trunc
        if k < trunc:
            cs[k] = ring.from_int(1)
        return TruncatedSeries(ring, cs, trunc)

    def __add__(self, other):
        return TruncatedSeries(
            self.ring, [a + b for a, b in zip(self.coeffs, other.coeffs)], self.trunc
        )

    def __sub__(self, other):
        return TruncatedSeries(
            self.ring, [a - b for a, b in zip(self.coeffs, other.coeffs)], self.trunc
        )

    def __mul__(self, other):
        zero = self.ring.from_int(0)
        out = [zero] * self.trunc
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for j, b in enumerate(other.coeffs):
                if i + j >= self.trunc:
                    break
                out[i + j] = out[i + j] + a * b
        return TruncatedSeries(self.ring, out, self.trunc)

    def __eq__(self, other):
        return self.trunc == other.trunc and all(
            a == b for a, b in zip(self.coeffs, other.coeffs)
        )

    def is_zero(self):
        return all(c.is_zero() for c in self.coeffs)

    def shift(self, k):
        zero = self.ring.from_int(0)
        return TruncatedSeries(self.ring, [zero] * k + self.coeffs[: self.trunc - k], self.trunc)

    def retruncate(self, trunc):
        return TruncatedSeries(self.ring, self.coeffs[:trunc], trunc)

    def inverse(self) -> "TruncatedSeries":
        """Inverse of a series with unit constant term, by recursion."""
        c0inv = self.coeffs[0].invert()
        out = [c0inv]
        for k in range(1, self.trunc):
            acc = self.ring.from_int(0)
            for i in range(1, k + 1):
                acc = acc + self.coeffs[i] * out[k - i]
            out.append(-(c0inv * acc))
        return TruncatedSeries(self.ring, out, self.trunc)

    def distinguished_degree(self) -> int:
        """Least n with unit coefficient; requires all lower ones in m_A."""
        for n, c in enumerate(self.coeffs):
            if c.is_unit():
                return n
        raise ValueError("series is 0 mod the maximal ideal up to truncation")

    def __repr__(self):
        return " + ".join(f"({c})x^{i}" for i, c in enumerate(self.coeffs) if not c.is_zero()) or "0"


@dataclass(frozen=True)
class WeierstrassFactorization:
    h: list  # monic polynomial coefficients h_0..h_n, h_n = 1
    u: TruncatedSeries
    n: int


def weierstrass_divide(g: TruncatedSeries, f: TruncatedSeries):
    """Solve g = q*f + r with deg r < n, n the distinguished degree of f.

    Set up as one exact linear system over Z/p^m and solved by Howell
    reduction; uniqueness modulo the ring relations is asserted.
    """
    ring = g.ring
    mod = ring.mod
    T = g.trunc
    n = f.distinguished_degree()
    if n >= T:
        raise ValueError("truncation too small for the distinguished degree")
    nA = ring.n
    n_unknown = (T + n) * nA  # q has T coefficients, r has n
    n_target = T * nA

    m = np.zeros((n_unknown, n_target), dtype=np.int64)
    for i in range(T):  # q_i * f_j -> coefficient i+j
        for j in range(T):
            if i + j >= T:
                break
            block = ring.mult_matrix(f.coeffs[j].coords)
            m[i * nA : (i + 1) * nA, (i + j) * nA : (i + j + 1) * nA] += block
    for i in range(n):  # r_i -> coefficient i
        m[(T + i) * nA : (T + i + 1) * nA, i * nA : (i + 1) * nA] += np.eye(nA, dtype=np.int64)
    m %= mod.q

    def rel_block(count):
        if ring.relations.nrows == 0:
            return linalg.zeros(0, count * nA)
        rows = []
        for i in range(count):
            block = linalg.zeros(ring.relations.nrows, count * nA)
            block[:, i * nA : (i + 1) * nA] = ring.relations.matrix
            rows.append(block)
        return np.vstack(rows)

    target_rel = rel_block(T)
    stacked = np.vstack([m, target_rel]) if target_rel.shape[0] else m
    rhs = np.concatenate([c.coords for c in g.coeffs])
    sol = linalg.solve(stacked, rhs, mod)
    if sol is None:
        raise ValueError("Weierstrass division has no solution at this truncation")
    sol = sol[:n_unknown]
    # Uniqueness guard: the remainder is determined once T >= 2n.  Top
    # coefficients of the quotient are genuinely ambiguous in a truncated
    # ring (multiples of f supported near degree T die in the truncation),
    # so only the r-part of the solution freedom is constrained.
    pre = linalg.preimage_span(m, linalg.howell(target_rel, mod), mod)
    if pre.nrows:
        r_part = pre.matrix[:, T * nA :]
        rel_span = linalg.howell(rel_block(n), mod) if ring.relations.nrows else None
        for row in r_part:
            if row.any():
                assert rel_span is not None and linalg.in_span(rel_span, row), (
                    "Weierstrass remainder is not unique at this truncation"
                )
    q_coeffs = [ring.element(sol[i * nA : (i + 1) * nA]) for i in range(T)]
    r_coeffs = [ring.element(sol[(T + i) * nA : (T + i + 1) * nA]) for i in range(n)]
    quotient = TruncatedSeries(ring, q_coeffs, T)
    remainder = TruncatedSeries(ring, r_coeffs + [ring.from_int(0)] * (T - n), T)
    check = quotient * f + remainder
    assert check == g
    return quotient, remainder


def weierstrass(f: TruncatedSeries) -> WeierstrassFactorization:
    """Factor f = h*u with h monic distinguished of degree n and u a unit."""
    ring = f.ring
    n = f.distinguished_degree()
    T = f.trunc
    xn = TruncatedSeries.x_power(ring, n, T)
    q, r = weierstrass_divide(xn, f)
    h_coeffs = [-r.coeffs[i] for i in range(n)] + [ring.from_int(1)]
    for c in h_coeffs[:-1]:
        assert not c.is_unit(), "non-leading coefficient of h escaped the maximal ideal"
    u = q.inverse()
    h_series = TruncatedSeries(ring, h_coeffs + [ring.from_int(0)] * (T - n - 1), T)
    assert h_series * u == f, "preparation postcondition failed"
    return WeierstrassFactorization([c for c in h_coeffs], u, n)


# -- division-free characteristic polynomial ------------------------------


def charpoly_berkowitz(entries, ring: ArtinianRing):
    """Characteristic polynomial det(xI - M) over a commutative ring.

    ``entries`` is a k x k nested list of RingElement.  Returns coefficients
    c_0..c_k with c_k = 1 (so sum c_i x^i is monic of degree k).  Berkowitz's
    method uses no division, which matters over Z/p^m.
    """
    k = len(entries)
    one = ring.from_int(1)
    zero = ring.from_int(0)
    if k == 0:
        return [one]

    def mat_vec(mat, vec):
        return [
            sum((mat[i][j] * vec[j] for j in range(len(vec))), zero)
            for i in range(len(mat))
        ]

    def dot(u, v):
        return sum((a * b for a, b in zip(u, v)), zero)

    poly = [one, -entries[0][0]]
    for r in range(2, k + 1):
        sub = [[entries[i][j] for j in range(r - 1)] for i in range(r - 1)]
        row = [entries[r - 1][j] for j in range(r - 1)]
        col = [entries[i][r - 1] for i in range(r - 1)]
        a = entries[r - 1][r - 1]
        firstcol = [one, -a]
        vec = col
        for _ in range(r - 1):
            firstcol.append(-dot(row, vec))
            vec = mat_vec(sub, vec)
        new = [zero] * (r + 1)
        for i in range(r + 1):
            for j in range(len(poly)):
                if i - j >= 0 and i - j < len(firstcol):
                    new[i] = new[i] + firstcol[i - j] * poly[j]
        poly = new
    # poly holds [1, c_{k-1}, ..., c_0] in decreasing degree; flip it.
    return list(reversed(poly))
