"""Modules with group action, bounded complexes, cohomology and certificates.

A module is presented as an ambient Z_q-coordinate space together with a
relation span (its elements are canonical residues mod the span) and one
action matrix per group generator.  A-free modules of rank r use r blocks of
the coefficient ring's coordinates and carry the standard relation span, so
quotient terms produced mid-pipeline and free terms share one representation.

All maps follow the row convention: coords(f(x)) = coords(x) @ F, and
generator actions satisfy coords(g.x) = coords(x) @ act[g].  Because of the
row convention the assignment g -> act[g] reverses products: act of g*h is
act[h] @ act[g]; every relation check below is written accordingly.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .groups import GroupAlgebra, GroupModel
from .linalg import HowellForm, Modulus
from .rings import ArtinianRing


def ring_block_relations(ring: ArtinianRing, blocks: int) -> np.ndarray:
    """Relation rows of A^blocks inside its Z_q ambient."""
    if ring.relations.nrows == 0 or blocks == 0:
        return linalg.zeros(0, blocks * ring.n)
    rows = []
    for i in range(blocks):
        blk = linalg.zeros(ring.relations.nrows, blocks * ring.n)
        blk[:, i * ring.n : (i + 1) * ring.n] = ring.relations.matrix
        rows.append(blk)
    return np.vstack(rows)


def realize_a_matrix(ring: ArtinianRing, entries) -> np.ndarray:
    """Realize a matrix over A (entries = coordinate vectors) over Z_q.

    ``entries[i][j]`` is the A-coordinate vector of the (i, j) entry; the
    result acts on row vectors of A^rows giving A^cols.
    """
    rows = len(entries)
    cols = len(entries[0]) if rows else 0
    out = linalg.zeros(rows * ring.n, cols * ring.n)
    for i in range(rows):
        for j in range(cols):
            e = np.asarray(entries[i][j], dtype=np.int64)
            if e.any():
                out[i * ring.n : (i + 1) * ring.n, j * ring.n : (j + 1) * ring.n] = (
                    ring.mult_matrix(e)
                )
    return out % ring.mod.q


class GModule:
    """Presented module over A[group]: ambient, relations, generator actions."""

    def __init__(self, ring, group, dim, relation_rows, actions, check=True):
        self.ring = ring
        self.group = group
        self.mod = ring.mod
        self.dim = dim
        self.relations = (
            relation_rows
            if isinstance(relation_rows, HowellForm)
            else linalg.howell(
                relation_rows if len(relation_rows) else linalg.zeros(0, dim), self.mod
            )
        )
        self.actions = {name: np.asarray(m, dtype=np.int64) % self.mod.q for name, m in actions.items()}
        if check:
            self.validate()

    # -- constructors -------------------------------------------------------

    @staticmethod
    def a_free(ring, group, a_entries_per_gen, check=True) -> "GModule":
        """A-free module given generator action matrices over A.

        ``a_entries_per_gen[name]`` is a rank x rank nested list of A
        coordinate vectors.
        """
        some = next(iter(a_entries_per_gen.values()))
        rank = len(some)
        dim = rank * ring.n
        actions = {
            name: realize_a_matrix(ring, entries)
            for name, entries in a_entries_per_gen.items()
        }
        rel = ring_block_relations(ring, rank)
        mod = GModule(ring, group, dim, rel, actions, check=check)
        mod.a_rank = rank
        return mod

    @staticmethod
    def b_free(algebra: GroupAlgebra, rank: int, check=False) -> "GModule":
        """Free module of the given rank over B = A[group]."""
        group = algebra.group
        dim = rank * algebra.dim
        actions = {}
        for name in group.gen_names:
            act = algebra.left_regular_action(group.generator(name))
            big = linalg.zeros(dim, dim)
            for i in range(rank):
                big[
                    i * algebra.dim : (i + 1) * algebra.dim,
                    i * algebra.dim : (i + 1) * algebra.dim,
                ] = act
            actions[name] = big
        rel = ring_block_relations(algebra.ring, rank * algebra.n_group)
        mod = GModule(algebra.ring, group, dim, rel, actions, check=check)
        mod.b_rank = rank
        mod.a_rank = rank * algebra.n_group
        return mod

    @staticmethod
    def zero(ring, group) -> "GModule":
        actions = {name: linalg.zeros(0, 0) for name in group.gen_names}
        m = GModule(ring, group, 0, linalg.zeros(0, 0), actions, check=False)
        m.a_rank = 0
        return m

    # -- structure ----------------------------------------------------------

    def scalar_action(self, coords) -> np.ndarray:
        """Action of an A-scalar, block-diagonal ring multiplication."""
        blocks = self.dim // self.ring.n
        out = linalg.zeros(self.dim, self.dim)
        m = self.ring.mult_matrix(coords)
        for i in range(blocks):
            out[i * self.ring.n : (i + 1) * self.ring.n, i * self.ring.n : (i + 1) * self.ring.n] = m
        return out

    def validate(self):
        if self.dim % self.ring.n:
            raise ValueError("ambient must consist of whole A-blocks")
        rel = self.relations
        for name, m in self.actions.items():
            if m.shape != (self.dim, self.dim):
                raise ValueError(f"action {name} has wrong shape")
            if linalg.inverse(m, self.mod) is None:
                raise ValueError(f"action {name} is not invertible")
            if rel.nrows and not linalg.in_span(rel, linalg.matmul(rel.matrix, m, self.mod)):
                raise ValueError(f"action {name} does not preserve the relations")
        # A-linearity: actions commute with every scalar-multiplication block.
        for i in range(self.ring.n):
            e = np.zeros(self.ring.n, dtype=np.int64)
            e[i] = 1
            sm = self.scalar_action(e)
            for name, m in self.actions.items():
                if not self._eq_mod_rel(linalg.matmul(sm, m, self.mod), linalg.matmul(m, sm, self.mod)):
                    raise ValueError(f"action {name} is not A-linear")
        self._check_group_relations()

    def _eq_mod_rel(self, a, b):
        diff = (a - b) % self.mod.q
        if not diff.any():
            return True
        return self.relations.nrows > 0 and linalg.in_span(self.relations, diff)

    def _pow(self, m, k):
        out = linalg.eye(self.dim)
        for _ in range(k):
            out = linalg.matmul(out, m, self.mod)
        return out

    def _check_group_relations(self):
        g = self.group
        acts = self.actions
        for name, order in zip(g.gen_names, g.gen_orders):
            if not self._eq_mod_rel(self._pow(acts[name], order), linalg.eye(self.dim)):
                raise ValueError(f"generator {name} violates its order relation")
        if g.case == "A":
            names = g.gen_names
            for i in range(len(names)):
                for j in range(i + 1, len(names)):
                    a, b = acts[names[i]], acts[names[j]]
                    if not self._eq_mod_rel(
                        linalg.matmul(a, b, self.mod), linalg.matmul(b, a, self.mod)
                    ):
                        raise ValueError("abelian model requires commuting actions")
            return
        # Case B: w2/xi block commutes; phi conjugates each w2_j by ell^f.
        small = [n for n in g.gen_names if n != "phi"]
        for i in range(len(small)):
            for j in range(i + 1, len(small)):
                a, b = acts[small[i]], acts[small[j]]
                if not self._eq_mod_rel(
                    linalg.matmul(a, b, self.mod), linalg.matmul(b, a, self.mod)
                ):
                    raise ValueError("the w2/xi block must act commutatively")
        phi = acts["phi"]
        for j in range(g.r):
            w2 = acts[f"w2_{j+1}"]
            e = pow(g.ell, g.f, g.w2_orders[j]) if g.w2_orders[j] > 1 else 0
            # phi w2 = w2^(ell^f) phi reads W2 @ Phi = Phi @ W2^e in row form.
            lhs = linalg.matmul(w2, phi, self.mod)
            rhs = linalg.matmul(phi, self._pow(w2, e), self.mod)
            if not self._eq_mod_rel(lhs, rhs):
                raise ValueError("phi conjugation relation violated")
        for name in [n for n in g.gen_names if n.startswith("xi")]:
            a = acts[name]
            if not self._eq_mod_rel(
                linalg.matmul(a, phi, self.mod), linalg.matmul(phi, a, self.mod)
            ):
                raise ValueError("tilde-Delta_1 must act phi-equivariantly (trivial action model)")

    def action_of(self, element) -> np.ndarray:
        """Action matrix of an arbitrary group element (product reversed)."""
        g = self.group
        out = linalg.eye(self.dim)
        # element as generator word: generators in tuple order, exponents.
        for name, exp in zip(g.gen_names, element):
            out = linalg.matmul(self._pow(self.actions[name], exp), out, self.mod)
        return out

    def cardinality_log_p(self) -> int:
        size = self.mod.q**self.dim
        if self.relations.nrows:
            size //= self.relations.span_size()
        out = 0
        while self.mod.p**out < size:
            out += 1
        assert self.mod.p**out == size
        return out

    def is_a_free(self) -> bool:
        std = linalg.howell(ring_block_relations(self.ring, self.dim // self.ring.n), self.mod)
        return linalg.span_eq(self.relations, std)

    def a_free_rank(self):
        return self.dim // self.ring.n if self.is_a_free() else None


@dataclass
class DegreeHomology:
    cycles: HowellForm
    boundaries: HowellForm
    generators: np.ndarray  # rows spanning Z, a generating set of H
    presentation: HowellForm  # relations among the generators
    invariant_factors: list
    induced_actions: dict


class CohomologyReport:
    def __init__(self, per_degree: dict):
        self.per_degree = per_degree

    def factors(self, i):
        d = self.per_degree.get(i)
        return d.invariant_factors if d else []

    def is_zero(self, i) -> bool:
        return not self.factors(i)

    def all_factors(self):
        return {i: d.invariant_factors for i, d in sorted(self.per_degree.items())}

    def __eq__(self, other):
        return self.all_factors() == other.all_factors()


class GComplex:
    """Bounded complex of presented modules with equivariant differentials."""

    def __init__(self, ring, group, terms: dict, diffs: dict, check=True):
        self.ring = ring
        self.group = group
        self.mod = ring.mod
        self.terms = {i: t for i, t in terms.items() if t.dim > 0}
        self.diffs = {}
        for i, d in diffs.items():
            if i in self.terms and (i + 1) in self.terms:
                self.diffs[i] = np.asarray(d, dtype=np.int64) % self.mod.q
        if check:
            self.validate()

    def degrees(self):
        return sorted(self.terms.keys())

    @property
    def min_degree(self):
        return min(self.terms) if self.terms else 0

    @property
    def max_degree(self):
        return max(self.terms) if self.terms else 0

    def term(self, i) -> GModule:
        return self.terms.get(i) or GModule.zero(self.ring, self.group)

    def diff(self, i) -> np.ndarray:
        if i in self.diffs:
            return self.diffs[i]
        return linalg.zeros(self.term(i).dim, self.term(i + 1).dim)

    def validate(self):
        for i, t in self.terms.items():
            t.validate()
        for i in self.terms:
            d = self.diff(i)
            nxt = self.term(i + 1)
            if d.shape != (self.term(i).dim, nxt.dim):
                raise ValueError(f"differential at {i} has wrong shape")
            if nxt.dim:
                # relations must map into relations; d^2 = 0; equivariance.
                src = self.term(i)
                if src.relations.nrows:
                    img = linalg.matmul(src.relations.matrix, d, self.mod)
                    if img.any() and not (
                        nxt.relations.nrows and linalg.in_span(nxt.relations, img)
                    ):
                        raise ValueError(f"differential at {i} does not respect relations")
                dd = linalg.matmul(d, self.diff(i + 1), self.mod)
                if dd.size and dd.any():
                    t2 = self.term(i + 2)
                    if not (t2.dim and t2.relations.nrows and linalg.in_span(t2.relations, dd)):
                        raise ValueError(f"d^2 != 0 at degree {i}")
                for name in self.group.gen_names:
                    lhs = linalg.matmul(src.actions[name], d, self.mod)
                    rhs = linalg.matmul(d, nxt.actions[name], self.mod)
                    diffm = (lhs - rhs) % self.mod.q
                    if diffm.any() and not (
                        nxt.relations.nrows and linalg.in_span(nxt.relations, diffm)
                    ):
                        raise ValueError(f"differential at {i} is not {name}-equivariant")

    # -- cohomology ----------------------------------------------------------

    def cycles(self, i) -> HowellForm:
        t = self.term(i)
        if t.dim == 0:
            return linalg.howell(linalg.zeros(0, 0), self.mod)
        nxt = self.term(i + 1)
        if nxt.dim == 0:
            rows = [linalg.eye(t.dim)]
            if t.relations.nrows:
                rows.append(t.relations.matrix)
            return linalg.howell(np.vstack(rows), self.mod)
        return linalg.preimage_span(self.diff(i), nxt.relations, self.mod)

    def boundaries(self, i) -> HowellForm:
        t = self.term(i)
        if t.dim == 0:
            return linalg.howell(linalg.zeros(0, 0), self.mod)
        rows = []
        prv = self.term(i - 1)
        if prv.dim:
            rows.append(self.diff(i - 1))
        if t.relations.nrows:
            rows.append(t.relations.matrix)
        if not rows:
            return linalg.howell(linalg.zeros(0, t.dim), self.mod)
        return linalg.howell(np.vstack(rows), self.mod)

    def homology_at(self, i) -> DegreeHomology:
        z = self.cycles(i)
        b = self.boundaries(i)
        gens = z.matrix
        if gens.shape[0] == 0:
            pres = linalg.howell(linalg.zeros(0, 0), self.mod)
            return DegreeHomology(z, b, gens, pres, [], {})
        pres = linalg.preimage_span(gens, b, self.mod)
        factors = [d for d in linalg.quotient_structure(pres, gens.shape[0]) if d > 1]
        induced = {}
        t = self.term(i)
        if factors:
            ctx = linalg.SolveContext(
                np.vstack([gens, b.matrix]) if b.nrows else gens, self.mod
            )
            for name in self.group.gen_names:
                moved = linalg.matmul(gens, t.actions[name], self.mod)
                sol = ctx.solve_many(moved)
                assert sol is not None, "cycles must be stable under the action"
                mat = sol[:, : gens.shape[0]] % self.mod.q
                # well-definedness: relations of H are preserved
                img = linalg.matmul(pres.matrix, mat, self.mod) if pres.nrows else None
                if img is not None and img.any():
                    assert linalg.in_span(pres, img), "induced action ill-defined"
                induced[name] = mat
        return DegreeHomology(z, b, gens, pres, factors, induced)

    def cohomology(self) -> CohomologyReport:
        lo = self.min_degree
        hi = self.max_degree
        return CohomologyReport({i: self.homology_at(i) for i in range(lo, hi + 1)})

    def homology_size_log_p(self, i) -> int:
        h = self.homology_at(i)
        out = 0
        for d in h.invariant_factors:
            k = 0
            while self.mod.p**k < d:
                k += 1
            out += k
        return out

    def is_acyclic(self) -> bool:
        return all(not self.homology_at(i).invariant_factors for i in self.degrees())

    # -- constructions --------------------------------------------------------

    def shift(self, n: int) -> "GComplex":
        terms = {i - n: t for i, t in self.terms.items()}
        diffs = {}
        for i, d in self.diffs.items():
            diffs[i - n] = (d * ((-1) ** n)) % self.mod.q
        return GComplex(self.ring, self.group, terms, diffs, check=False)

    def direct_sum(self, other: "GComplex") -> "GComplex":
        terms = {}
        diffs = {}
        degs = sorted(set(self.terms) | set(other.terms))
        for i in degs:
            a, b = self.term(i), other.term(i)
            dim = a.dim + b.dim
            rel_rows = []
            if a.relations.nrows:
                blk = linalg.zeros(a.relations.nrows, dim)
                blk[:, : a.dim] = a.relations.matrix
                rel_rows.append(blk)
            if b.relations.nrows:
                blk = linalg.zeros(b.relations.nrows, dim)
                blk[:, a.dim :] = b.relations.matrix
                rel_rows.append(blk)
            actions = {}
            for name in self.group.gen_names:
                m = linalg.zeros(dim, dim)
                if a.dim:
                    m[: a.dim, : a.dim] = a.actions[name]
                if b.dim:
                    m[a.dim :, a.dim :] = b.actions[name]
                actions[name] = m
            terms[i] = GModule(
                self.ring, self.group, dim,
                np.vstack(rel_rows) if rel_rows else linalg.zeros(0, dim),
                actions, check=False,
            )
        for i in degs:
            a, b = self.term(i), other.term(i)
            an, bn = self.term(i + 1), other.term(i + 1)
            if terms.get(i) is None or terms.get(i + 1) is None:
                continue
            d = linalg.zeros(a.dim + b.dim, an.dim + bn.dim)
            if a.dim and an.dim:
                d[: a.dim, : an.dim] = self.diff(i)
            if b.dim and bn.dim:
                d[a.dim :, an.dim :] = other.diff(i)
            if d.size:
                diffs[i] = d
        return GComplex(self.ring, self.group, terms, diffs, check=False)

    def fingerprint(self) -> str:
        data = {
            "degrees": self.degrees(),
            "terms": {
                str(i): {
                    "dim": t.dim,
                    "relations": t.relations.matrix.tolist(),
                    "actions": {n: t.actions[n].tolist() for n in sorted(t.actions)},
                }
                for i, t in sorted(self.terms.items())
            },
            "diffs": {str(i): d.tolist() for i, d in sorted(self.diffs.items())},
        }
        blob = json.dumps(data, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def zero_complex(ring, group) -> GComplex:
    return GComplex(ring, group, {}, {}, check=False)


@dataclass
class ChainMap:
    source: GComplex
    target: GComplex
    mats: dict

    def validate(self):
        for i in self.source.degrees():
            src = self.source.term(i)
            tgt = self.target.term(i)
            m = self.mat(i)
            if m.shape != (src.dim, tgt.dim):
                raise ValueError(f"chain map has wrong shape at {i}")
            if tgt.dim:
                if src.relations.nrows:
                    img = linalg.matmul(src.relations.matrix, m, self.source.mod)
                    if img.any() and not (
                        tgt.relations.nrows and linalg.in_span(tgt.relations, img)
                    ):
                        raise ValueError(f"chain map does not respect relations at {i}")
                for name in self.source.group.gen_names:
                    lhs = linalg.matmul(src.actions[name], m, self.source.mod)
                    rhs = linalg.matmul(m, tgt.actions[name], self.source.mod)
                    d = (lhs - rhs) % self.source.mod.q
                    if d.any() and not (
                        tgt.relations.nrows and linalg.in_span(tgt.relations, d)
                    ):
                        raise ValueError(f"chain map is not equivariant at {i}")
            # commuting square into degree i+1
            nxt_t = self.target.term(i + 1)
            lhs = linalg.matmul(m, self.target.diff(i), self.source.mod)
            rhs = linalg.matmul(self.source.diff(i), self.mat(i + 1), self.source.mod)
            d = (lhs - rhs) % self.source.mod.q
            if d.size and d.any() and not (
                nxt_t.dim and nxt_t.relations.nrows and linalg.in_span(nxt_t.relations, d)
            ):
                raise ValueError(f"chain map square does not commute at {i}")

    def mat(self, i) -> np.ndarray:
        if i in self.mats:
            return self.mats[i]
        return linalg.zeros(self.source.term(i).dim, self.target.term(i).dim)


def identity_map(c: GComplex) -> ChainMap:
    return ChainMap(c, c, {i: linalg.eye(c.term(i).dim) for i in c.degrees()})


def compose(f: ChainMap, g: ChainMap) -> ChainMap:
    mats = {}
    for i in f.source.degrees():
        mats[i] = linalg.matmul(f.mat(i), g.mat(i), f.source.mod)
    return ChainMap(f.source, g.target, mats)


def cone(f: ChainMap) -> GComplex:
    """Mapping cone: degree i term is C^(i+1) (+) D^i."""
    c, d = f.source, f.target
    ring, group, mod = c.ring, c.group, c.mod
    shifted = c.shift(1)
    degs = sorted(set(shifted.terms) | set(d.terms))
    terms = {}
    diffs = {}
    for i in degs:
        a = c.term(i + 1)
        b = d.term(i)
        dim = a.dim + b.dim
        if dim == 0:
            continue
        rel_rows = []
        if a.relations.nrows:
            blk = linalg.zeros(a.relations.nrows, dim)
            blk[:, : a.dim] = a.relations.matrix
            rel_rows.append(blk)
        if b.relations.nrows:
            blk = linalg.zeros(b.relations.nrows, dim)
            blk[:, a.dim :] = b.relations.matrix
            rel_rows.append(blk)
        actions = {}
        for name in group.gen_names:
            m = linalg.zeros(dim, dim)
            if a.dim:
                m[: a.dim, : a.dim] = a.actions[name]
            if b.dim:
                m[a.dim :, a.dim :] = b.actions[name]
            actions[name] = m
        terms[i] = GModule(
            ring, group, dim,
            np.vstack(rel_rows) if rel_rows else linalg.zeros(0, dim),
            actions, check=False,
        )
    for i in degs:
        if i not in terms or (i + 1) not in terms:
            continue
        a, b = c.term(i + 1), d.term(i)
        an, bn = c.term(i + 2), d.term(i + 1)
        m = linalg.zeros(a.dim + b.dim, an.dim + bn.dim)
        if a.dim and an.dim:
            m[: a.dim, : an.dim] = (-c.diff(i + 1)) % mod.q
        if a.dim and bn.dim:
            m[: a.dim, an.dim :] = f.mat(i + 1)
        if b.dim and bn.dim:
            m[a.dim :, an.dim :] = d.diff(i)
        diffs[i] = m
    return GComplex(ring, group, terms, diffs, check=False)


# -- quasi-isomorphism certificates ----------------------------------------


@dataclass
class DegreeWitness:
    surjective_preimages: np.ndarray | None
    kernel_dimension_log_p: int


@dataclass
class QuasiIsoCertificate:
    ok: bool
    per_degree: dict = field(default_factory=dict)
    failure: tuple | None = None  # (degree, reason, witness)


def check_quasi_iso(f: ChainMap) -> QuasiIsoCertificate:
    """Decide whether the chain map induces bijections on all cohomology.

    Produces per-degree preimage witnesses on success and a degree plus an
    explicit homology class witnessing failure otherwise.
    """
    f.validate()
    src, tgt = f.source, f.target
    degs = sorted(set(src.degrees()) | set(tgt.degrees()))
    if not degs:
        return QuasiIsoCertificate(True, {})
    lo, hi = degs[0], degs[-1]
    out = {}
    for i in range(lo, hi + 1):
        hs = src.homology_at(i)
        ht = tgt.homology_at(i)
        mod = src.mod
        # Map source homology generators into the target.
        if hs.generators.shape[0]:
            moved = linalg.matmul(hs.generators, f.mat(i), mod)
        else:
            moved = linalg.zeros(0, tgt.term(i).dim)
        # Injectivity: a source class mapping into target boundaries must be
        # a source boundary.
        if hs.generators.shape[0]:
            pre = linalg.preimage_span(moved, ht.boundaries, mod)
            for row in pre.matrix:
                cls = linalg.matmul(row.reshape(1, -1), hs.generators, mod)
                if not linalg.in_span(hs.boundaries, cls):
                    return QuasiIsoCertificate(
                        False, out, (i, "kernel class", cls.tolist())
                    )
        # Surjectivity: every target generator is hit modulo boundaries.
        if ht.generators.shape[0]:
            if hs.generators.shape[0]:
                stacked = np.vstack([moved, ht.boundaries.matrix]) if ht.boundaries.nrows else moved
            else:
                stacked = ht.boundaries.matrix if ht.boundaries.nrows else linalg.zeros(0, tgt.term(i).dim)
            if stacked.shape[0] == 0:
                if ht.invariant_factors:
                    return QuasiIsoCertificate(False, out, (i, "unhit class", ht.generators[0].tolist()))
                preim = None
            else:
                ctx = linalg.SolveContext(stacked, mod)
                sols = ctx.solve_many(ht.generators)
                if sols is None:
                    # find one unhit generator as a witness
                    for row in ht.generators:
                        if ctx.solve(row) is None:
                            return QuasiIsoCertificate(False, out, (i, "unhit class", row.tolist()))
                preim = sols[:, : hs.generators.shape[0]] if sols is not None else None
        else:
            preim = None
        # sizes must then agree degreewise
        if src.homology_size_log_p(i) != tgt.homology_size_log_p(i):
            return QuasiIsoCertificate(False, out, (i, "size mismatch", None))
        out[i] = DegreeWitness(preim, 0)
    return QuasiIsoCertificate(True, out)


# -- tor dimension -----------------------------------------------------------


def principal_ideal_reps(ring: ArtinianRing):
    """One generator per principal ideal of A, including 0 and (1)."""
    seen = {}
    for c in ring.elements():
        span = linalg.howell(ring.mult_matrix(c), ring.mod)
        if ring.relations.nrows:
            span = linalg.span_sum(ring.mod, span, ring.relations)
        key = (span.matrix.tobytes(), span.matrix.shape)
        if key not in seen:
            seen[key] = c
    return list(seen.values())


def tensor_cyclic(c: GComplex, a_coords) -> GComplex:
    """S (x)_A C for S = A/(a); requires A-free terms."""
    ring = c.ring
    terms = {}
    for i, t in c.terms.items():
        assert t.is_a_free(), "tor-dimension test needs A-free terms"
        blocks = t.dim // ring.n
        extra = []
        m = ring.mult_matrix(a_coords)
        for b in range(blocks):
            blk = linalg.zeros(ring.n, t.dim)
            blk[:, b * ring.n : (b + 1) * ring.n] = m
            extra.append(blk)
        rel = np.vstack([t.relations.matrix] + extra) if t.relations.nrows else np.vstack(extra)
        terms[i] = GModule(ring, c.group, t.dim, rel, t.actions, check=False)
    return GComplex(ring, c.group, terms, dict(c.diffs), check=False)


def check_tor_dimension(c: GComplex, n: int) -> tuple[bool, tuple | None]:
    """True iff H^i(S (x) C) = 0 for all cyclic S = A/(a) and all i < n.

    Over the finite local ring every finite module is an iterated extension
    of cyclic ones, so cyclic test modules decide the vanishing.  On failure
    returns the offending generator coordinates and degree.
    """
    if not c.terms:
        return True, None
    lo = c.min_degree
    hi = c.max_degree
    for a in principal_ideal_reps(c.ring):
        tc = tensor_cyclic(c, a)
        for i in range(lo, min(n, hi + 2)):
            if tc.homology_at(i).invariant_factors:
                return False, (list(map(int, a)), i)
    return True, None
