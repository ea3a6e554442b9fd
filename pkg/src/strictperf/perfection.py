"""The three-pass strictification pipeline.

Given a bounded complex whose cohomology is finite over the coefficient
ring, produce a quasi-isomorphic complex whose terms are free and finitely
generated over the coefficient ring, with degree support exactly the
cohomological support.  The route is: annihilate terms degree by degree from
the right (ideal generators of the shape (w2^N - 1)^N'), shrink terms to
small quotients with Artin-Rees complements from the left, and rebuild free
terms from the right with the power-series covers, followed by the final
truncation.

Every leg of the run carries a certificate: an acyclic sub/quotient witness
or an explicit chain map verified to be a quasi-isomorphism.  The trace
serializes to JSON and can be replayed and re-verified independently.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .complexes import ChainMap, GComplex, GModule, check_quasi_iso, check_tor_dimension
from .groups import GroupAlgebra, GroupModel
from .linalg import HowellForm
from .resolutions import (
    _one_index,
    evaluation_tensors,
    extend_b_linear,
    hartshorne_resolve,
    minimal_generators,
    verify_complex_resolution,
)
from .rings import ArtinianRing, TruncatedSeries, charpoly_berkowitz, weierstrass


class SectionFailure(RuntimeError):
    """A Claim-1 splitting does not exist at this truncation level."""


class TorDimensionFailure(RuntimeError):
    def __init__(self, witness):
        self.witness = witness
        super().__init__(f"tor-dimension precondition failed: {witness}")


def module_action_matrix(algebra: GroupAlgebra, module: GModule, x: np.ndarray) -> np.ndarray:
    """Matrix of the action of the algebra element x on the module."""
    tensors = evaluation_tensors(algebra, module)
    out = np.zeros((module.dim, module.dim), dtype=np.int64)
    x = np.asarray(x, dtype=np.int64)
    for flat in np.nonzero(x)[0]:
        gi, i = divmod(int(flat), algebra.nA)
        out += int(x[flat]) * tensors[gi][i]
    return out % module.mod.q


def a_generators(module: GModule, span: HowellForm | None = None) -> np.ndarray:
    """Greedy A-module generating set of a (sub)module span."""
    mod = module.mod
    rows = span.matrix if span is not None else linalg.eye(module.dim)
    scalars = [module.scalar_action(r) for r in _ring_basis(module.ring)]
    chosen = []
    current = module.relations
    for row in rows:
        if not linalg.in_span(current, row.reshape(1, -1)):
            chosen.append(row)
            grown = [current.matrix] if current.nrows else []
            for s in scalars:
                grown.append(linalg.matmul(np.vstack(chosen), s, mod))
            current = linalg.howell(np.vstack(grown), mod)
    return np.vstack(chosen) if chosen else linalg.zeros(0, module.dim)


def _ring_basis(ring: ArtinianRing):
    out = []
    for i in range(ring.n):
        e = np.zeros(ring.n, dtype=np.int64)
        e[i] = 1
        out.append(e)
    return out


# -- annihilator witnesses -----------------------------------------------------


@dataclass
class AnnihilatorWitness:
    """(w2_j^N - 1)^N' annihilates the target; p_s is the p-part of N."""

    j: int
    n: int
    n_prime: int
    p_s: int
    trivial: bool = False  # unit-ideal convention for zero cohomology

    def generator(self, algebra: GroupAlgebra) -> np.ndarray:
        g = algebra.group
        return algebra.binomial_element(g.w2(self.j), self.n_prime, base_power=self.n)


def find_annihilator(algebra: GroupAlgebra, module: GModule,
                     span: HowellForm | None = None, j: int = 0) -> AnnihilatorWitness:
    """Smallest-N witness with minimal N' killing the span (or the module).

    Scans N over divisors of the multiplicative order of the w2_j-action and
    N' up to the number of A-generators of the target, the finite-level
    stand-in for the root-of-unity bound.
    """
    g = algebra.group
    mod = module.mod
    target = span.matrix if span is not None else linalg.eye(module.dim)
    if target.shape[0] == 0 or not target.any():
        return AnnihilatorWitness(j, 1, 1, 0, trivial=True)
    w2 = module.actions[f"w2_{j+1}"]
    order = 1
    power = w2.copy()
    ident = linalg.eye(module.dim)
    while not _eq_mod(module, power, ident):
        power = linalg.matmul(power, w2, mod)
        order += 1
        assert order <= g.order + 1
    gen_bound = a_generators(module, span).shape[0] if span is not None else module.dim // module.ring.n
    n_prime_cap = max(1, gen_bound) * mod.m + g.order
    divisors = [n for n in range(1, order + 1) if order % n == 0]
    for n in divisors:
        base = _mat_pow(w2, n, mod)
        op = (base - ident) % mod.q
        acc = target.copy()
        for n_prime in range(1, n_prime_cap + 1):
            acc = linalg.matmul(acc, op, mod)
            if _rows_in_relations(module, acc):
                witness = AnnihilatorWitness(j, n, n_prime, _p_part(n, mod.p))
                _verify_annihilator(algebra, module, target, witness)
                return witness
    raise AssertionError("no annihilator of the prescribed shape exists")


def _p_part(n: int, p: int) -> int:
    s = 0
    while n % p == 0:
        n //= p
        s += 1
    return s


def _mat_pow(m, k, mod):
    out = linalg.eye(m.shape[0])
    base = m.copy()
    while k:
        if k & 1:
            out = linalg.matmul(out, base, mod)
        base = linalg.matmul(base, base, mod)
        k >>= 1
    return out


def _eq_mod(module: GModule, a, b) -> bool:
    d = (a - b) % module.mod.q
    if not d.any():
        return True
    return module.relations.nrows > 0 and linalg.in_span(module.relations, d)


def _rows_in_relations(module: GModule, rows) -> bool:
    if not rows.any():
        return True
    return module.relations.nrows > 0 and linalg.in_span(module.relations, rows)


def _verify_annihilator(algebra, module, target, witness: AnnihilatorWitness):
    gen = witness.generator(algebra)
    act = module_action_matrix(algebra, module, gen)
    assert _rows_in_relations(module, linalg.matmul(target, act, module.mod)), (
        "annihilator witness failed evaluation"
    )


# -- ideals of the group algebra ------------------------------------------------


def two_sided_ideal_span(algebra: GroupAlgebra, gen_vec: np.ndarray) -> HowellForm:
    """Two-sided ideal generated by the element, as a Z_q-span of B."""
    span = linalg.howell(algebra.right_mult_matrix(gen_vec), algebra.mod)
    return _right_closure(algebra, span)


def _right_closure(algebra: GroupAlgebra, span: HowellForm) -> HowellForm:
    mats = [
        algebra.right_mult_matrix(algebra.unit_vector(algebra.group.generator(n)))
        for n in algebra.group.gen_names
    ]
    while True:
        rows = [span.matrix]
        for m in mats:
            rows.append(linalg.matmul(span.matrix, m, algebra.mod))
        bigger = linalg.howell(np.vstack(rows), algebra.mod)
        if linalg.span_eq(bigger, span):
            return span
        span = bigger


def ideal_product(algebra: GroupAlgebra, left: HowellForm, right_gen: np.ndarray) -> HowellForm:
    """left * (two-sided ideal of right_gen) as a span."""
    moved = linalg.matmul(left.matrix, algebra.right_mult_matrix(right_gen), algebra.mod)
    return _right_closure(algebra, linalg.howell(moved, algebra.mod))


def ideal_module_span(algebra: GroupAlgebra, module: GModule, ideal: HowellForm) -> HowellForm:
    """Span of ideal . module inside the module's ambient."""
    rows = [module.relations.matrix] if module.relations.nrows else []
    for x in ideal.matrix:
        act = module_action_matrix(algebra, module, x)
        rows.append(act)
    if not rows:
        return linalg.howell(linalg.zeros(0, module.dim), module.mod)
    return linalg.howell(np.vstack(rows), module.mod)


# -- Artin-Rees complements ------------------------------------------------------


@dataclass
class ComplementWitness:
    m_prime: HowellForm
    q_used: int
    chain_length: int
    quotient_generators: int


def central_elements(algebra: GroupAlgebra, annihilators: list) -> list:
    """Group elements generating the central polynomial subalgebra used for
    the Artin-Rees ideal.

    Case A: all the w1_j (everything commutes); Case B: the least power
    w1^z acting trivially on each w2_j modulo the annihilated exponents.
    """
    g = algebra.group
    if g.case == "A":
        return [g.generator(f"w1_{j+1}") for j in range(len(g.w1_orders))]
    z = 1
    while True:
        ok = True
        for wit in annihilators:
            o = g.p ** (wit.p_s if not wit.trivial else 0)
            if o > 1 and pow(g.ell, g.f * g.d * z, o) != 1:
                ok = False
        if ok:
            return [g.power(g.w1(), z)]
        z += 1
        assert z <= g.order


def monic_annihilating_poly(algebra: GroupAlgebra, module: GModule, t_span: HowellForm,
                            central_el) -> list:
    """Monic polynomial F with F(action of the central element) killing T.

    Determinant trick: express the action on an A-generating set of T and
    take the Berkowitz characteristic polynomial.
    """
    ring = module.ring
    mod = module.mod
    gens = a_generators(module, t_span)
    k = gens.shape[0]
    if k == 0:
        return [ring.from_int(1)]
    act = module.action_of(central_el)
    moved = linalg.matmul(gens, act, mod)
    # solve moved_i = sum_j a_ij gens_j with a_ij in A
    blocks = []
    for jg in range(k):
        blk = np.vstack([
            linalg.matmul(gens[jg].reshape(1, -1), module.scalar_action(e), mod)
            for e in _ring_basis(ring)
        ])
        blocks.append(blk)
    stacked = np.vstack(blocks + ([module.relations.matrix] if module.relations.nrows else []))
    ctx = linalg.SolveContext(stacked, mod)
    sols = ctx.solve_many(moved)
    assert sols is not None, "central action does not stabilize the target span"
    entries = [
        [ring.element(sols[i, jg * ring.n : (jg + 1) * ring.n]) for jg in range(k)]
        for i in range(k)
    ]
    coeffs = charpoly_berkowitz(entries, ring)
    return coeffs


def poly_of_action(algebra, module, coeffs, central_el) -> np.ndarray:
    act = module.action_of(central_el)
    mod = module.mod
    out = np.zeros((module.dim, module.dim), dtype=np.int64)
    power = linalg.eye(module.dim)
    for c in coeffs:
        out = (out + linalg.matmul(power, module.scalar_action(c.coords), mod)) % mod.q
        power = linalg.matmul(power, act, mod)
    return out


def ar_complement(algebra: GroupAlgebra, module: GModule, t_span: HowellForm,
                  annihilators: list | None = None) -> ComplementWitness:
    """Submodule M' with M' and T meeting only in the relations and M/M'
    carrying a recorded A-generating set.

    Direct Artin-Rees scan when the epsilon-torsion exhausts the module in
    one step; otherwise the increasing chain M_n of pullbacks is run and its
    length recorded.
    """
    mod = module.mod
    g = algebra.group
    centrals = central_elements(algebra, annihilators or [])
    t_mod = linalg.span_sum(mod, t_span, module.relations)
    f_ops = []
    for c in centrals:
        coeffs = monic_annihilating_poly(algebra, module, t_mod, c)
        op = poly_of_action(algebra, module, coeffs, c)
        assert _rows_in_relations(module, linalg.matmul(t_mod.matrix, op, mod)), (
            "monic polynomial does not annihilate the protected submodule"
        )
        f_ops.append(op)
    chain = 0
    q_used = 0
    m_n = module.relations  # current M_n (the zero submodule)
    if g.case == "B":
        eps_ops = []
        for wit in annihilators or []:
            if wit.trivial:
                continue
            gen = algebra.binomial_element(g.w2(wit.j), 1, base_power=g.p**wit.p_s)
            eps_ops.append(module_action_matrix(algebra, module, gen))
    else:
        eps_ops = []
    while True:
        # K = (M/M_n)(eps): everything each epsilon kills into M_n.
        if eps_ops:
            k_span = None
            for op in eps_ops:
                pre = linalg.preimage_span(op, m_n, mod)
                k_span = pre if k_span is None else linalg.span_intersect(k_span, pre)
        else:
            k_span = linalg.howell(linalg.eye(module.dim), mod)
        k_span = linalg.span_sum(mod, k_span, m_n)
        # N' = 1 case on K: ideal powers of the monic polynomials.
        q_used = 0
        y_span = k_span
        while True:
            rows = [m_n.matrix] if m_n.nrows else []
            for op in f_ops:
                rows.append(linalg.matmul(y_span.matrix, op, mod))
            y_span = linalg.howell(
                np.vstack(rows) if rows else linalg.zeros(0, module.dim), mod
            )
            q_used += 1
            inter = linalg.span_intersect(y_span, t_mod)
            if not inter.nrows or linalg.in_span(module.relations, inter.matrix):
                break
            assert q_used <= module.dim * mod.m + 2, "Artin-Rees scan did not stabilize"
        no_progress = y_span.nrows == 0 or (
            m_n.nrows > 0 and linalg.in_span(m_n, y_span.matrix)
        ) or (m_n.nrows == 0 and not y_span.matrix.any())
        if no_progress:
            m_prime = m_n
            break
        m_n = linalg.span_sum(mod, m_n, y_span)
        chain += 1
        inter = linalg.span_intersect(m_n, t_mod)
        assert (not inter.nrows) or linalg.in_span(module.relations, inter.matrix), (
            "complement chain met the protected submodule"
        )
        if not eps_ops:
            m_prime = m_n
            break
        if chain > module.dim * mod.m + 2:
            raise AssertionError("complement chain did not stop")
    inter = linalg.span_intersect(m_prime, t_mod)
    assert (not inter.nrows) or linalg.in_span(module.relations, inter.matrix)
    quot_gens = _quotient_generator_count(module, m_prime)
    return ComplementWitness(m_prime, q_used, chain, quot_gens)


def _quotient_generator_count(module: GModule, sub: HowellForm) -> int:
    quo = GModule(module.ring, module.group, module.dim,
                  linalg.span_sum(module.mod, module.relations, sub),
                  module.actions, check=False)
    return a_generators(quo).shape[0]


# -- trace legs -------------------------------------------------------------------


@dataclass
class TraceLeg:
    stage: str
    kind: str  # "quotient" | "chain_map" | "truncate" | "freeify" | "identity"
    input_complex: GComplex
    output_complex: GComplex
    data: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "stage": self.stage,
            "kind": self.kind,
            "input": serialize_complex(self.input_complex),
            "output": serialize_complex(self.output_complex),
            "inputHash": self.input_complex.fingerprint(),
            "outputHash": self.output_complex.fingerprint(),
            "data": self.data,
        }


@dataclass
class PipelineTrace:
    legs: list = field(default_factory=list)

    def add(self, leg: TraceLeg):
        self.legs.append(leg)

    def to_json(self):
        return {"legs": [leg.to_json() for leg in self.legs]}


def serialize_complex(cx: GComplex) -> dict:
    return {
        "degrees": cx.degrees(),
        "terms": {
            str(i): {
                "dim": t.dim,
                "relations": t.relations.matrix.tolist(),
                "actions": {n: t.actions[n].tolist() for n in sorted(t.actions)},
            }
            for i, t in sorted(cx.terms.items())
        },
        "diffs": {str(i): d.tolist() for i, d in sorted(cx.diffs.items())},
    }


def deserialize_complex(data: dict, ring: ArtinianRing, group: GroupModel) -> GComplex:
    terms = {}
    for key, td in data["terms"].items():
        i = int(key)
        rel = np.asarray(td["relations"], dtype=np.int64)
        if rel.size == 0:
            rel = linalg.zeros(0, td["dim"])
        actions = {n: np.asarray(m, dtype=np.int64) for n, m in td["actions"].items()}
        terms[i] = GModule(ring, group, td["dim"], rel, actions, check=False)
    diffs = {int(k): np.asarray(d, dtype=np.int64) for k, d in data["diffs"].items()}
    return GComplex(ring, group, terms, diffs, check=False)


def _with_extra_relations(cx: GComplex, extra: dict) -> GComplex:
    """New complex with additional relation rows per degree."""
    terms = {}
    for i, t in cx.terms.items():
        if i in extra and extra[i].shape[0]:
            rel = (
                np.vstack([t.relations.matrix, extra[i]])
                if t.relations.nrows
                else extra[i]
            )
        else:
            rel = t.relations
        terms[i] = GModule(cx.ring, cx.group, t.dim, rel, t.actions, check=False)
        if hasattr(t, "a_rank"):
            terms[i].a_rank = t.a_rank
    return GComplex(cx.ring, cx.group, terms, dict(cx.diffs), check=False)


def verify_quotient_leg(leg: TraceLeg) -> bool:
    """Re-verify a relations-adding leg: every recorded acyclic pair must
    cut out an acyclic two-term subcomplex, and the identity map must be a
    quasi-isomorphism onto the quotient."""
    src, out = leg.input_complex, leg.output_complex
    mod = src.mod
    added = {int(k): np.asarray(v, dtype=np.int64) for k, v in leg.data.get("added", {}).items()}
    pairs = leg.data.get("acyclic_pairs") or (
        [leg.data["acyclic_pair"]] if leg.data.get("acyclic_pair") else []
    )
    for j, j1 in pairs:
        s_rows = added.get(j)
        if s_rows is None or not s_rows.size:
            continue
        old_rel = src.term(j).relations
        # injectivity: the excised span meets the cycles only in relations
        s_span = linalg.span_sum(mod, linalg.howell(s_rows, mod), old_rel)
        inter = linalg.span_intersect(s_span, src.cycles(j))
        for row in inter.matrix:
            if row.any() and not (old_rel.nrows and linalg.in_span(old_rel, row.reshape(1, -1))):
                return False
        # the image of the excised span agrees with the relations added above
        img = linalg.matmul(s_rows, src.diff(j), mod)
        tgt_added = added.get(j1)
        tgt_rel = src.term(j1).relations
        allowed = linalg.span_sum(
            mod,
            linalg.howell(tgt_added, mod) if tgt_added is not None and tgt_added.size else linalg.howell(linalg.zeros(0, src.term(j1).dim), mod),
            tgt_rel,
        )
        if img.size and img.any() and not linalg.in_span(allowed, img):
            return False
    ident = {i: linalg.eye(src.term(i).dim) for i in src.degrees()}
    return check_quasi_iso(ChainMap(src, out, ident)).ok


# -- step 1: annihilation pass -----------------------------------------------


def annihilation_pass(algebra: GroupAlgebra, cx: GComplex, j: int = 0):
    """Quotient the complex from the right so each term is annihilated by
    the product ideal of the cohomology annihilators of w2_j.

    Returns (witnesses per degree, ideals per degree, output complex, legs).
    Raises SectionFailure when the splitting of (3.7) has no finite-level
    solution.
    """
    g = algebra.group
    mod = cx.mod
    degs = sorted(cx.terms, reverse=True)
    if not degs:
        return {}, {}, cx, []
    n2, n1 = degs[0], degs[-1]
    witnesses = {}
    for i in cx.degrees():
        h = cx.homology_at(i)
        if not h.invariant_factors:
            witnesses[i] = AnnihilatorWitness(j, 1, 1, 0, trivial=True)
        else:
            witnesses[i] = find_annihilator(
                algebra, cx.term(i), span=linalg.howell(h.generators, mod), j=j
            )
    # J_i = I_i I_{i+1} ... I_{n2}; trivial witnesses contribute the unit ideal.
    ideals = {}
    unit = linalg.howell(linalg.eye(algebra.dim), mod)
    current = unit
    for i in range(n2, n1 - 1, -1):
        wit = witnesses[i]
        if not wit.trivial:
            gen = wit.generator(algebra)
            current = ideal_product(algebra, current, gen)
        ideals[i] = current
    legs = []
    work = cx
    for i in range(n2, n1 - 1, -1):
        term = work.term(i)
        jm_span = ideal_module_span(algebra, term, ideals[i])
        # already annihilated?
        if _rows_in_relations(term, jm_span.matrix):
            continue
        b_span = work.boundaries(i)
        assert linalg.in_span(linalg.span_sum(mod, b_span, term.relations), jm_span.matrix), (
            "J_i Q^i escaped the boundaries; annihilators inconsistent"
        )
        prev = work.term(i - 1)
        if prev.dim == 0:
            raise SectionFailure(f"degree {i} needs excision but has no room below")
        section_rows = _solve_section(algebra, work, i, jm_span)
        added = {i: jm_span.matrix, i - 1: section_rows}
        out = _with_extra_relations(work, added)
        leg = TraceLeg(
            f"step1/annihilate-w2_{j+1}", "quotient", work, out,
            {
                "added": {str(k): v.tolist() for k, v in added.items()},
                "acyclic_pair": [i - 1, i],
                "witness": {"j": j, "N": witnesses[i].n, "Nprime": witnesses[i].n_prime},
            },
        )
        cert = check_quasi_iso(ChainMap(work, out, {d: linalg.eye(work.term(d).dim) for d in work.degrees()}))
        assert cert.ok, f"annihilation quotient broke cohomology at degree {i}"
        legs.append(leg)
        work = out
    # verify the post-condition
    for i in work.degrees():
        span = ideal_module_span(algebra, work.term(i), ideals[i])
        assert _rows_in_relations(work.term(i), span.matrix)
    return witnesses, ideals, work, legs


def _solve_section(algebra: GroupAlgebra, cx: GComplex, i: int, jm_span: HowellForm) -> np.ndarray:
    """Rows spanning a complement copy s(J Q^i) inside degree i-1.

    Solves for a B-linear section of the differential over the submodule
    J Q^i; failure signals that the finite level violates the freeness
    hypothesis of the splitting argument.
    """
    mod = cx.mod
    term = cx.term(i)
    prev = cx.term(i - 1)
    gens = minimal_generators(algebra, term, jm_span)
    if gens.shape[0] == 0:
        return linalg.zeros(0, prev.dim)
    n_g = gens.shape[0]
    # syzygies of the generators as a B-module
    ext = extend_b_linear(algebra, term, gens)
    syz = linalg.preimage_span(ext, term.relations, mod)
    # unknowns: images X_g in the previous term; constraints:
    #   X_g . d = gen_g  (mod relations of term i)
    #   sum over syzygy rows evaluates to 0 (mod relations of term i-1)
    d = cx.diff(i - 1)
    unknown_dim = n_g * prev.dim
    # (i) section property
    width1 = term.dim
    m1 = linalg.zeros(unknown_dim, n_g * width1)
    for gidx in range(n_g):
        m1[gidx * prev.dim : (gidx + 1) * prev.dim, gidx * width1 : (gidx + 1) * width1] = d
    rhs1 = gens.reshape(-1)
    rel1 = []
    if term.relations.nrows:
        for gidx in range(n_g):
            blk = linalg.zeros(term.relations.nrows, n_g * width1)
            blk[:, gidx * width1 : (gidx + 1) * width1] = term.relations.matrix
            rel1.append(blk)
    # (ii) well-definedness on syzygies
    width2 = prev.dim
    syz_rows = syz.matrix if syz.nrows else linalg.zeros(0, n_g * algebra.dim)
    m2 = linalg.zeros(unknown_dim, syz_rows.shape[0] * width2)
    from .cohomology import hom_evaluation_matrix

    for sidx, srow in enumerate(syz_rows):
        ev = hom_evaluation_matrix(algebra, prev, srow, n_g)
        m2[:, sidx * width2 : (sidx + 1) * width2] = ev
    rhs2 = linalg.zeros(1, syz_rows.shape[0] * width2).reshape(-1)
    rel2 = []
    if prev.relations.nrows:
        for sidx in range(syz_rows.shape[0]):
            blk = linalg.zeros(prev.relations.nrows, syz_rows.shape[0] * width2)
            blk[:, sidx * width2 : (sidx + 1) * width2] = prev.relations.matrix
            rel2.append(blk)
    big = np.hstack([m1, m2])
    rhs = np.concatenate([rhs1, rhs2])
    rel_blocks = []
    for blk in rel1:
        rel_blocks.append(np.hstack([blk, linalg.zeros(blk.shape[0], m2.shape[1])]))
    for blk in rel2:
        rel_blocks.append(np.hstack([linalg.zeros(blk.shape[0], m1.shape[1]), blk]))
    stacked = np.vstack([big] + rel_blocks) if rel_blocks else big
    sol = linalg.solve(stacked, rhs, mod)
    if sol is None:
        raise SectionFailure(
            f"no section for J.Q^{i}: the finite level violates the freeness hypothesis"
        )
    images = sol[:unknown_dim].reshape(n_g, prev.dim)
    # the image span of the section: push the J.Q^i span through s
    coeffs = _coefficients_against(algebra, term, gens, jm_span)
    s_span = linalg.matmul(coeffs, extend_b_linear(algebra, prev, images), mod)
    # sanity: s lands in the right place and splits the differential
    back = linalg.matmul(s_span, cx.diff(i - 1), mod)
    diffm = (back - jm_span.matrix) % mod.q
    assert _rows_in_relations(term, diffm), "section does not split the differential"
    z = cx.cycles(i - 1)
    inter = linalg.span_intersect(linalg.span_sum(mod, linalg.howell(s_span, mod), prev.relations), z)
    for row in inter.matrix:
        assert (not row.any()) or (
            prev.relations.nrows and linalg.in_span(prev.relations, row.reshape(1, -1))
        ), "section image meets the cycles"
    return s_span


def _coefficients_against(algebra, module, gens, span):
    """B-coefficient rows expressing each span row through the generators."""
    mod = module.mod
    ext = extend_b_linear(algebra, module, gens)
    stacked = (
        np.vstack([ext, module.relations.matrix]) if module.relations.nrows else ext
    )
    ctx = linalg.SolveContext(stacked, mod)
    sols = ctx.solve_many(span.matrix)
    assert sols is not None
    return sols[:, : gens.shape[0] * algebra.dim] % mod.q




# -- step 2: finiteness pass -----------------------------------------------


def finiteness_pass(algebra: GroupAlgebra, cx: GComplex, witnesses: dict | None = None):
    """Ascending sweep quotienting each term by an Artin-Rees complement of
    its cocycles; the excised subcomplexes are acyclic, so each leg is a
    quasi-isomorphism.  Returns (output, legs, generator counts)."""
    work = cx
    legs = []
    gen_counts = {}
    mod = cx.mod
    for n0 in sorted(cx.degrees()):
        term = work.term(n0)
        if term.dim == 0:
            continue
        anns = [witnesses[n0]] if witnesses and n0 in witnesses else (
            [find_annihilator(algebra, term)] if algebra.group.case == "B" else []
        )
        z = work.cycles(n0)
        wit = ar_complement(algebra, term, z, anns)
        gen_counts[n0] = wit.quotient_generators
        if wit.m_prime.nrows == 0 or _rows_in_relations(term, wit.m_prime.matrix):
            continue
        image_rows = linalg.matmul(wit.m_prime.matrix, work.diff(n0), mod)
        added = {n0: wit.m_prime.matrix}
        if (n0 + 1) in work.terms and image_rows.size:
            added[n0 + 1] = image_rows
        out = _with_extra_relations(work, added)
        ident = {d: linalg.eye(work.term(d).dim) for d in work.degrees()}
        cert = check_quasi_iso(ChainMap(work, out, ident))
        assert cert.ok, f"finiteness quotient broke cohomology at degree {n0}"
        legs.append(
            TraceLeg(
                "step2/artin-rees", "quotient", work, out,
                {
                    "added": {str(k): v.tolist() for k, v in added.items()},
                    "acyclic_pair": [n0, n0 + 1],
                    "qUsed": wit.q_used,
                    "chainLength": wit.chain_length,
                    "quotientGenerators": wit.quotient_generators,
                },
            )
        )
        work = out
    return work, legs, gen_counts


# -- freeify: standard coordinates for A-free presented quotients -------------


def freeify(module: GModule):
    """(free module, to_free, from_free) when the presented quotient is
    A-free; None otherwise.  The maps are mutually inverse modulo relations
    and transport the actions."""
    ring = module.ring
    mod = module.mod
    gens = a_generators(module)
    g = gens.shape[0]
    size_mod = module.cardinality_log_p()
    if g * ring.length_over_zp() != size_mod:
        return None
    if g == 0:
        free = GModule.zero(ring, module.group)
        free.a_rank = 0
        return free, linalg.zeros(module.dim, 0), linalg.zeros(0, module.dim)
    from_free = linalg.zeros(g * ring.n, module.dim)
    for i in range(g):
        for a, e in enumerate(_ring_basis(ring)):
            from_free[i * ring.n + a] = linalg.matmul(
                gens[i].reshape(1, -1), module.scalar_action(e), mod
            )[0]
    stacked = (
        np.vstack([from_free, module.relations.matrix])
        if module.relations.nrows
        else from_free
    )
    ctx = linalg.SolveContext(stacked, mod)
    sols = ctx.solve_many(linalg.eye(module.dim))
    if sols is None:
        return None
    to_free = sols[:, : g * ring.n] % mod.q
    actions = {}
    for name, act in module.actions.items():
        actions[name] = linalg.matmul(linalg.matmul(from_free, act, mod), to_free, mod)
    free = GModule(ring, module.group, g * ring.n,
                   __import__("strictperf.complexes", fromlist=["ring_block_relations"]).ring_block_relations(ring, g),
                   actions, check=False)
    free.a_rank = g
    # round trips modulo the respective relations
    rt = linalg.matmul(to_free, from_free, mod)
    diffm = (rt - linalg.eye(module.dim)) % mod.q
    if diffm.any() and not (module.relations.nrows and linalg.in_span(module.relations, diffm)):
        return None
    rt2 = linalg.matmul(from_free, to_free, mod)
    diff2 = (rt2 - linalg.eye(g * ring.n)) % mod.q
    if diff2.any() and not (free.relations.nrows and linalg.in_span(free.relations, diff2)):
        return None
    return free, to_free, from_free


# -- Prop. 3.9: covers that are free and finitely generated over A ------------


def monic_in_x(algebra: GroupAlgebra, module: GModule, span: HowellForm, w1_element):
    """Monic polynomial in x = w1 - 1 annihilating the span, Weierstrass
    prepared so non-leading coefficients drop into the maximal ideal."""
    ring = algebra.ring
    coeffs = monic_annihilating_poly(algebra, module, span, w1_element)
    # rewrite g(w) as f(x) with w = 1 + x
    n = len(coeffs) - 1
    f = [ring.from_int(0)] * (n + 1)
    binom = [[0] * (n + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        binom[i][0] = 1
        for k in range(1, i + 1):
            binom[i][k] = binom[i - 1][k - 1] + (binom[i - 1][k] if k <= i - 1 else 0)
    for i, c in enumerate(coeffs):
        for k in range(i + 1):
            f[k] = f[k] + c * binom[i][k]
    trunc = max(2 * (n + 1) + 2, (ring.nilpotency_index + 1) * max(n, 1) + 2)
    series = TruncatedSeries(ring, f + [ring.from_int(0)] * (trunc - n - 1), trunc)
    w = weierstrass(series)
    return w.h  # monic, non-leading coefficients in m_A


def polynomial_element(algebra: GroupAlgebra, h_coeffs, base_element) -> np.ndarray:
    """h evaluated at (base_element - 1) inside the group algebra."""
    x = (algebra.element_vector([(base_element, 1)]) - algebra.unit_vector()) % algebra.mod.q
    out = algebra.zero()
    power = algebra.unit_vector()
    for c in h_coeffs:
        term = power.reshape(algebra.n_group, algebra.nA).copy()
        scaled = np.zeros_like(term)
        for gi in range(algebra.n_group):
            if term[gi].any():
                scaled[gi] = algebra.ring.mul_coords(term[gi], c.coords)
        out = (out + scaled.reshape(-1)) % algebra.mod.q
        power = algebra.mul(power, x)
    return out


@dataclass
class CoverData:
    ideal_generators: list  # names for the trace
    d_rank: int
    fallback: bool


def prop39_cover_fn(algebra: GroupAlgebra):
    """Cover function in the style of the power-series covers: each target
    is covered by copies of an A-free quotient D of the group algebra.

    D is cut out by monic Weierstrass polynomials in the (w1-1)-directions
    together with the (w2^(p^s)-1)^N'-annihilators; when the finite level
    refuses A-freeness of that quotient the w2-part alone is used (it is
    A-free by the normal-form basis).
    """
    g = algebra.group
    mod = algebra.mod

    def fn(module: GModule, span):
        if module.dim == 0:
            z = GModule.zero(algebra.ring, algebra.group)
            z.a_rank = 0
            return z, linalg.zeros(0, 0)
        target = span if span is not None else linalg.howell(linalg.eye(module.dim), mod)
        gens = a_generators(module, target)
        if gens.shape[0] == 0:
            z = GModule.zero(algebra.ring, algebra.group)
            z.a_rank = 0
            return z, linalg.zeros(0, module.dim)
        ideal_rows = []
        names = []
        if g.case == "A":
            w1_names = [f"w1_{j+1}" for j in range(len(g.w1_orders))]
        else:
            w1_names = []
        if g.case == "B":
            wit = find_annihilator(algebra, module, span=linalg.howell(gens, mod))
            if not wit.trivial:
                gen_vec = wit.generator(algebra)
                ideal_rows.append(algebra.right_mult_matrix(gen_vec))
                names.append(f"(w2^{wit.n}-1)^{wit.n_prime}")
            h = monic_in_x(algebra, module, linalg.howell(gens, mod), g.w1())
            h_vec = polynomial_element(algebra, h, g.w1())
            _assert_annihilates(algebra, module, gens, h_vec)
            ideal_rows.append(algebra.right_mult_matrix(h_vec))
            names.append(f"h(w1-1) deg {len(h)-1}")
        else:
            for name in w1_names:
                el = g.generator(name)
                h = monic_in_x(algebra, module, linalg.howell(gens, mod), el)
                h_vec = polynomial_element(algebra, h, el)
                _assert_annihilates(algebra, module, gens, h_vec)
                ideal_rows.append(algebra.right_mult_matrix(h_vec))
                names.append(f"h({name}-1) deg {len(h)-1}")
        d_mod, fallback = _quotient_cover_module(algebra, ideal_rows)
        free = freeify(d_mod)
        if free is None:
            # drop the Weierstrass part, keep only the w2-annihilator ideal
            d_mod, _ = _quotient_cover_module(algebra, ideal_rows[:1] if g.case == "B" and names and names[0].startswith("(w2") else [])
            free = freeify(d_mod)
            fallback = True
            assert free is not None, "even the normal-form quotient failed to be A-free"
        d_free, to_free, from_free = free
        rank_d = d_free.a_rank
        n_g = gens.shape[0]
        # F = D^(n_g); the cover sends the D-basis of copy r to (lift).gen_r
        total = GModule.zero(algebra.ring, algebra.group)
        phi_rows = []
        f_terms = []
        for r in range(n_g):
            rows = linalg.zeros(rank_d * algebra.ring.n, module.dim)
            for b in range(rank_d * algebra.ring.n):
                lift = from_free[b]  # element of B in algebra coordinates
                act = module_action_matrix(algebra, module, lift)
                rows[b] = linalg.matmul(gens[r].reshape(1, -1), act, mod)[0]
            phi_rows.append(rows)
            f_terms.append(d_free)
        from .resolutions import _direct_sum_modules
        f_mod = f_terms[0]
        for t in f_terms[1:]:
            f_mod = _direct_sum_modules(f_mod, t)
        if not hasattr(f_mod, "a_rank"):
            f_mod.a_rank = rank_d * n_g
        phi = np.vstack(phi_rows) % mod.q
        # surjectivity onto the span
        img = linalg.span_sum(mod, linalg.howell(phi, mod), module.relations)
        want = linalg.span_sum(mod, target, module.relations)
        assert linalg.span_eq(img, want), "Prop 3.9 cover is not surjective"
        return f_mod, phi

    return fn


def _assert_annihilates(algebra, module, gens, element_vec):
    act = module_action_matrix(algebra, module, element_vec)
    moved = linalg.matmul(gens, act, module.mod)
    assert _rows_in_relations(module, moved), "cover polynomial does not annihilate"


def _quotient_cover_module(algebra: GroupAlgebra, ideal_rows: list):
    """B / (left ideal) as a presented module with the left-regular actions."""
    mod = algebra.mod
    rel_rows = []
    if algebra.ring.relations.nrows:
        from .complexes import ring_block_relations

        rel_rows.append(ring_block_relations(algebra.ring, algebra.n_group))
    rel_rows.extend(ideal_rows)
    rel = np.vstack(rel_rows) if rel_rows else linalg.zeros(0, algebra.dim)
    actions = {
        n: algebra.left_regular_action(algebra.group.generator(n))
        for n in algebra.group.gen_names
    }
    return GModule(algebra.ring, algebra.group, algebra.dim, rel, actions, check=False), False


# -- step 3: free terms pass ----------------------------------------------------


def free_terms_pass(algebra: GroupAlgebra, cx: GComplex, n1: int):
    """Rebuild the complex with terms free and finitely generated over A,
    then truncate at n1 (checking the tor-dimension precondition first)."""
    mod = cx.mod
    legs = []
    all_free = all(freeify(t) is not None for t in cx.terms.values())
    if all_free:
        out, maps = _freeify_complex(cx)
        legs.append(TraceLeg("step3/freeify", "chain_map", cx, out,
                             {"mats": {str(i): m.tolist() for i, m in maps.items()}}))
        work = out
    else:
        reso = hartshorne_resolve(prop39_cover_fn(algebra), cx, n1 - 1)
        verify_complex_resolution(reso)
        work = reso.complex
        legs.append(TraceLeg("step3/hartshorne", "chain_map", work, cx,
                             {"mats": {str(i): m.tolist() for i, m in reso.pi.items()},
                              "validFrom": reso.valid_from}))
    ok, witness = check_tor_dimension(work, n1)
    if not ok:
        raise TorDimensionFailure(witness)
    # final truncation at n1 (Remark on truncating at the tor-dimension bound)
    if work.min_degree < n1:
        added = {}
        img = linalg.matmul(
            linalg.eye(work.term(n1 - 1).dim), work.diff(n1 - 1), mod
        )
        added[n1] = img
        terms = {i: t for i, t in work.terms.items() if i >= n1}
        diffs = {i: d for i, d in work.diffs.items() if i >= n1}
        truncated = _with_extra_relations(
            GComplex(cx.ring, cx.group, terms, diffs, check=False), added
        )
        legs.append(TraceLeg("step3/truncate", "truncate", work, truncated,
                             {"added": {str(n1): img.tolist()}, "n1": n1}))
        work = truncated
        final, maps = _freeify_complex(work)
        legs.append(TraceLeg("step3/freeify", "chain_map", work, final,
                             {"mats": {str(i): m.tolist() for i, m in maps.items()}}))
        work = final
    return work, legs


def _freeify_complex(cx: GComplex):
    """Rebuild every term in standard A-free coordinates; returns the new
    complex and the to_free coordinate maps (a chain quasi-isomorphism)."""
    mod = cx.mod
    terms = {}
    to_maps = {}
    from_maps = {}
    for i, t in cx.terms.items():
        out = freeify(t)
        assert out is not None, f"term at degree {i} is not A-free"
        free, to_free, from_free = out
        if free.dim:
            terms[i] = free
        to_maps[i] = to_free
        from_maps[i] = from_free
    diffs = {}
    for i in list(terms):
        if (i + 1) in terms:
            d = linalg.matmul(
                linalg.matmul(from_maps[i], cx.diff(i), mod), to_maps[i + 1], mod
            )
            diffs[i] = d
    out = GComplex(cx.ring, cx.group, terms, diffs, check=False)
    cert = check_quasi_iso(ChainMap(cx, out, to_maps))
    assert cert.ok, "freeify coordinate change is not a quasi-isomorphism"
    return out, to_maps
