"""Free resolutions, group cohomology, cup products and hyper-Ext.

Everything is computed at finite truncation levels.  Continuous cohomology
of a model with Z_p-factors is the colimit over its cofinal finite quotients
under inflation, so each dimension here is reported as the stable image of
the inflation map between two consecutive levels, with a third level backing
the stability claim.  The same scheme gives hyper-Ext between bounded
complexes of finite modules.

B-linear maps out of a free module are stored by their generator images and
extended via the evaluation tensors of the target module; all lifting steps
are Howell solves.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .complexes import ChainMap, GComplex, GModule, check_quasi_iso, ring_block_relations
from .groups import GroupAlgebra, GroupModel
from .linalg import HowellForm
from .rings import ArtinianRing


# -- B-linear extension machinery -------------------------------------------


def evaluation_tensors(algebra: GroupAlgebra, target: GModule):
    """For each (group element, ring basis vector) the matrix of
    x -> b_i * (g . x) on the target; cached on the module."""
    key = "_eval_tensors_" + str(id(algebra))
    cached = getattr(target, "_eval_cache", None)
    if cached is not None and cached[0] is algebra:
        return cached[1]
    tensors = []
    for g in algebra.elements:
        act = target.action_of(g)
        row = []
        for i in range(algebra.nA):
            e = np.zeros(algebra.nA, dtype=np.int64)
            e[i] = 1
            row.append(linalg.matmul(act, target.scalar_action(e), target.mod))
        tensors.append(row)
    target._eval_cache = (algebra, tensors)
    return tensors


def extend_b_linear(algebra: GroupAlgebra, target: GModule, images: np.ndarray) -> np.ndarray:
    """Matrix of the B-linear map B^rank -> target with the given generator
    images (one row per free generator)."""
    rank = images.shape[0]
    out = linalg.zeros(rank * algebra.dim, target.dim)
    tensors = evaluation_tensors(algebra, target)
    for r in range(rank):
        img = images[r]
        if not img.any():
            continue
        for gi in range(algebra.n_group):
            for i in range(algebra.nA):
                row = linalg.matmul(img.reshape(1, -1), tensors[gi][i], target.mod)
                out[r * algebra.dim + gi * algebra.nA + i] = row[0]
    return out


def evaluate_hom(algebra: GroupAlgebra, target: GModule, params: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    """Evaluate the B-linear map with generator images ``params`` at the
    rows of ``vecs`` (coordinates in the free module's ambient)."""
    rank = params.shape[0]
    tensors = evaluation_tensors(algebra, target)
    out = linalg.zeros(vecs.shape[0], target.dim)
    vecs = np.asarray(vecs, dtype=np.int64)
    for k in range(vecs.shape[0]):
        acc = np.zeros(target.dim, dtype=np.int64)
        v = vecs[k]
        for r in range(rank):
            block = v[r * algebra.dim : (r + 1) * algebra.dim]
            for gi in np.nonzero(block.reshape(algebra.n_group, algebra.nA).any(axis=1))[0]:
                for i in range(algebra.nA):
                    c = block[gi * algebra.nA + i]
                    if c:
                        acc = acc + c * (params[r] @ tensors[gi][i])
        out[k] = acc % target.mod.q
    return out


# -- generators and covers ----------------------------------------------------


def submodule_closure(module: GModule, rows: np.ndarray) -> HowellForm:
    """Smallest action- and scalar-stable span containing the rows."""
    mod = module.mod
    mats = list(module.actions.values())
    scalars = []
    for i in range(module.ring.n):
        e = np.zeros(module.ring.n, dtype=np.int64)
        e[i] = 1
        scalars.append(module.scalar_action(e))
    span = linalg.howell(rows if len(rows) else linalg.zeros(0, module.dim), mod)
    while True:
        new_rows = [span.matrix]
        for m in mats + scalars:
            new_rows.append(linalg.matmul(span.matrix, m, mod))
        bigger = linalg.howell(np.vstack(new_rows), mod)
        if linalg.span_eq(bigger, span):
            return span
        span = bigger


def radical_rows(algebra: GroupAlgebra, module: GModule, span_rows: np.ndarray) -> np.ndarray:
    """rad(B) . N rows for N spanned by span_rows, B local."""
    mod = module.mod
    out = [module.relations.matrix] if module.relations.nrows else []
    for name in module.group.gen_names:
        out.append(
            (linalg.matmul(span_rows, module.actions[name], mod) - span_rows) % mod.q
        )
    if algebra.ring.max_ideal.nrows:
        for mrow in algebra.ring.max_ideal.matrix:
            out.append(linalg.matmul(span_rows, module.scalar_action(mrow), mod))
    if not out:
        return linalg.zeros(0, module.dim)
    return np.vstack(out)


def minimal_generators(algebra: GroupAlgebra, module: GModule, span: HowellForm | None = None) -> np.ndarray:
    """Generators of the (sub)module as a B-module.

    Over a local B (p-group over the local ring) this returns a minimal set
    via Nakayama; otherwise a greedy generating set is produced.
    """
    mod = module.mod
    if span is None:
        cand = linalg.eye(module.dim)
        span_rows = cand
    else:
        span_rows = span.matrix
        cand = span_rows
    if cand.shape[0] == 0:
        return linalg.zeros(0, module.dim)
    is_local = _is_p_group(algebra.group)
    if is_local:
        rad = linalg.howell(radical_rows(algebra, module, span_rows), mod)
        chosen = []
        current = rad
        for row in cand:
            if not linalg.in_span(current, row):
                chosen.append(row)
                current = linalg.span_sum(mod, current, row.reshape(1, -1))
        return np.vstack(chosen) if chosen else linalg.zeros(0, module.dim)
    chosen = []
    base = module.relations
    current = base
    for row in cand:
        if not linalg.in_span(current, row.reshape(1, -1)):
            chosen.append(row)
            current = submodule_closure(
                module, np.vstack([current.matrix, row.reshape(1, -1)]) if current.nrows else row.reshape(1, -1)
            )
    return np.vstack(chosen) if chosen else linalg.zeros(0, module.dim)


def _is_p_group(group: GroupModel) -> bool:
    n = group.order
    if n == 1:
        return True
    p = group.p
    while n % p == 0:
        n //= p
    return n == 1


def b_free_cover(algebra: GroupAlgebra, module: GModule, span: HowellForm | None = None):
    """Free cover B^g ->> N for N the module or a stable sub-span of it.

    Returns (free module, map matrix, generator rows).  Surjectivity onto
    the span (mod relations) is verified.
    """
    gens = minimal_generators(algebra, module, span)
    rank = gens.shape[0]
    free = GModule.b_free(algebra, rank)
    phi = extend_b_linear(algebra, module, gens) if rank else linalg.zeros(0, module.dim)
    img = linalg.span_sum(module.mod, phi, module.relations)
    want = (
        linalg.span_sum(module.mod, span, module.relations)
        if span is not None
        else linalg.span_sum(module.mod, linalg.eye(module.dim), module.relations)
    )
    assert linalg.span_eq(img, want), "cover is not surjective onto its target"
    return free, phi, gens


# -- resolutions ---------------------------------------------------------------


@dataclass
class Resolution:
    """Complex of free B-modules in degrees [-depth, 0] resolving a module.

    ``augmentation`` maps the degree-0 term onto the module; exactness holds
    in every computed degree strictly above the cutoff.
    """

    algebra: GroupAlgebra
    module: GModule
    complex: GComplex
    augmentation: np.ndarray
    ranks: dict
    minimal: bool

    def term_rank(self, i: int) -> int:
        return self.ranks.get(i, 0)


def resolve_module(algebra: GroupAlgebra, module: GModule, depth: int) -> Resolution:
    """Free resolution of a presented module to the given depth."""
    assert depth >= 1
    mod = module.mod
    free0, aug, _ = b_free_cover(algebra, module)
    terms = {0: free0}
    ranks = {0: free0.b_rank}
    diffs = {}
    prev_free, prev_map, prev_target = free0, aug, module
    minimal = _is_p_group(algebra.group)
    for s in range(1, depth + 1):
        ker = linalg.preimage_span(prev_map, prev_target.relations, mod)
        ker = linalg.span_sum(mod, ker, prev_free.relations)
        free_s, phi, _ = b_free_cover(algebra, prev_free, span=ker)
        if free_s.dim == 0:
            break
        terms[-s] = free_s
        ranks[-s] = free_s.b_rank
        diffs[-s] = phi
        if minimal:
            rad = linalg.howell(
                radical_rows(algebra, prev_free, linalg.eye(prev_free.dim)), mod
            )
            if phi.size and phi.any() and not linalg.in_span(rad, phi):
                minimal = False
        prev_free, prev_map, prev_target = free_s, phi, terms[-s + 1]
    cx = GComplex(algebra.ring, algebra.group, terms, diffs, check=False)
    res = Resolution(algebra, module, cx, aug, ranks, minimal)
    verify_resolution(res)
    return res


def verify_resolution(res: Resolution):
    """Exactness in every computed degree above the cutoff, and at 0."""
    mod = res.module.mod
    cx = res.complex
    lo = cx.min_degree
    # at degree 0: ker(aug) == image(d_{-1}) + relations
    ker0 = linalg.preimage_span(res.augmentation, res.module.relations, mod)
    ker0 = linalg.span_sum(mod, ker0, cx.term(0).relations)
    img0 = linalg.span_sum(
        mod,
        cx.diff(-1) if -1 in cx.diffs else linalg.zeros(0, cx.term(0).dim),
        cx.term(0).relations,
    )
    assert linalg.span_eq(ker0, img0), "resolution not exact at degree 0"
    for i in range(lo + 1, 0):
        ker = linalg.preimage_span(cx.diff(i), cx.term(i + 1).relations, mod)
        ker = linalg.span_sum(mod, ker, cx.term(i).relations)
        img = linalg.span_sum(mod, cx.diff(i - 1), cx.term(i).relations)
        assert linalg.span_eq(ker, img), f"resolution not exact at degree {i}"
    # surjectivity of the augmentation
    img = linalg.span_sum(mod, res.augmentation, res.module.relations)
    full = linalg.span_sum(mod, linalg.eye(res.module.dim), res.module.relations)
    assert linalg.span_eq(img, full)


def trivial_module(ring: ArtinianRing, group: GroupModel) -> GModule:
    one = [[ring.one_coords()]]
    return GModule.a_free(ring, group, {n: one for n in group.gen_names}, check=False)


# -- parameter-space helpers --------------------------------------------------


def ring_block_relations_for(target: GModule, blocks: int) -> np.ndarray:
    """Relation rows of target^blocks in parameter coordinates."""
    if blocks == 0 or target.relations.nrows == 0:
        return linalg.zeros(0, blocks * target.dim)
    rows = []
    for i in range(blocks):
        blk = linalg.zeros(target.relations.nrows, blocks * target.dim)
        blk[:, i * target.dim : (i + 1) * target.dim] = target.relations.matrix
        rows.append(blk)
    return np.vstack(rows)


def _one_index(algebra: GroupAlgebra) -> int:
    base = algebra.index[algebra.group.identity()] * algebra.nA
    one = algebra.ring.one_coords()
    nz = np.nonzero(one)[0]
    assert len(nz) == 1 and one[nz[0]] == 1, "ring unit must be a basis vector"
    return base + int(nz[0])



# -- inflation between truncation levels --------------------------------------


def inflate_module(module: GModule, new_group: GroupModel) -> GModule:
    """View a module at a deeper truncation level; the action matrices are
    unchanged because they factor through the smaller quotient."""
    assert new_group.gen_names == module.group.gen_names
    m = GModule(module.ring, new_group, module.dim, module.relations, module.actions, check=False)
    if hasattr(module, "a_rank"):
        m.a_rank = module.a_rank
    return m


def inflate_complex(cx: GComplex, new_group: GroupModel) -> GComplex:
    terms = {i: inflate_module(t, new_group) for i, t in cx.terms.items()}
    return GComplex(cx.ring, new_group, terms, dict(cx.diffs), check=False)


def comparison_maps(
    res_big: Resolution, res_small: Resolution, depth: int
) -> dict:
    """Chain map psi: F_big -> inflated F_small lifting the identity on the
    resolved module (which must have the same coordinates at both levels)."""
    alg_big = res_big.algebra
    mod = res_big.module.mod
    small_cx = inflate_complex(res_small.complex, alg_big.group)
    psis = {}
    # degree 0: solve aug_small(psi(e_r)) = aug_big(e_r)
    target0 = small_cx.term(0)
    r0 = res_big.term_rank(0)
    images = linalg.zeros(r0, target0.dim)
    stacked = (
        np.vstack([res_small.augmentation, res_big.module.relations.matrix])
        if res_big.module.relations.nrows
        else res_small.augmentation
    )
    ctx = linalg.SolveContext(stacked, mod)
    for r in range(r0):
        want = res_big.augmentation[r * alg_big.dim + _one_index(alg_big)]
        sol = ctx.solve(want)
        assert sol is not None, "comparison lift failed at degree 0"
        images[r] = sol[: target0.dim]
    psis[0] = extend_b_linear(alg_big, target0, images)
    for s in range(1, depth + 1):
        if res_big.term_rank(-s) == 0:
            break
        tgt = small_cx.term(-s)
        if tgt.dim == 0:
            psis[-s] = linalg.zeros(res_big.complex.term(-s).dim, 0)
            continue
        d_small = small_cx.diff(-s)
        nxt = small_cx.term(-s + 1)
        stacked = (
            np.vstack([d_small, nxt.relations.matrix]) if nxt.relations.nrows else d_small
        )
        ctx = linalg.SolveContext(stacked, mod)
        r_s = res_big.term_rank(-s)
        images = linalg.zeros(r_s, tgt.dim)
        d_big = res_big.complex.diff(-s)
        for r in range(r_s):
            w = d_big[r * alg_big.dim + _one_index(alg_big)]
            want = linalg.matmul(w.reshape(1, -1), psis[-s + 1], mod)[0]
            sol = ctx.solve(want)
            assert sol is not None, f"comparison lift failed at degree {-s}"
            images[r] = sol[: tgt.dim]
        psis[-s] = extend_b_linear(alg_big, tgt, images)
    return psis


# -- Hartshorne-style resolution of a complex ---------------------------------


@dataclass
class ComplexResolution:
    """Bounded free-term complex L with a comparison map to the input.

    The comparison induces isomorphisms on cohomology in degrees
    >= valid_from; below that the construction was cut off.
    """

    complex: GComplex
    target: GComplex
    pi: dict
    valid_from: int

    def chain_map(self) -> ChainMap:
        return ChainMap(self.complex, self.target, self.pi)


def product_with_span(a: GModule, b: GModule):
    """Direct sum module used for pullbacks; returns (module, inj_a, inj_b)."""
    ring, group = a.ring, a.group
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
    for name in group.gen_names:
        m = linalg.zeros(dim, dim)
        if a.dim:
            m[: a.dim, : a.dim] = a.actions[name]
        if b.dim:
            m[a.dim :, a.dim :] = b.actions[name]
        actions[name] = m
    prod = GModule(ring, group, dim,
                   np.vstack(rel_rows) if rel_rows else linalg.zeros(0, dim),
                   actions, check=False)
    return prod


def hartshorne_resolve(cover_fn, cx: GComplex, cutoff: int) -> ComplexResolution:
    """Replace a bounded complex by one with covered (free) terms.

    ``cover_fn(module, span)`` must return (free module, map matrix) with
    the map surjecting onto the span; it is the only knob distinguishing
    B-free resolutions from the A-finite free covers of the perfection
    pipeline.  Descending construction from the top degree; the comparison
    map induces cohomology isomorphisms in degrees > cutoff + 1 and hits all
    cocycles at cutoff + 1.
    """
    mod = cx.mod
    n2 = cx.max_degree
    terms: dict = {}
    diffs: dict = {}
    pi: dict = {}
    for n in range(n2, cutoff - 1, -1):
        cn = cx.term(n)
        if cn.dim == 0 and (n + 1) not in terms:
            continue
        # L1 covers the cocycles of C at degree n.
        z_span = cx.cycles(n)
        l1, tau1 = cover_fn(cn, z_span)
        # pullback M = {(x, y) : x d = y pi_{n+1}, y a cycle of L} inside
        # C^n (+) L^{n+1}.  Restricting y to cycles is what makes the new
        # differential square to zero.
        lnext = terms.get(n + 1)
        if lnext is not None and lnext.dim:
            prod = product_with_span(cn, lnext)
            d_and_pi = np.vstack([cx.diff(n), (-pi[n + 1]) % mod.q])
            nxt_rel = cx.term(n + 1).relations
            span_m = linalg.preimage_span(d_and_pi, nxt_rel, mod)
            if (n + 1) in diffs:
                lnn = terms[n + 2]
                proj_d = np.vstack(
                    [linalg.zeros(cn.dim, lnn.dim), diffs[n + 1]]
                )
                cycles_pairs = linalg.preimage_span(proj_d, lnn.relations, mod)
                span_m = linalg.span_intersect(span_m, cycles_pairs)
            l2, tau2 = cover_fn(prod, span_m)
        else:
            prod = None
            l2, tau2 = cover_fn(GModule.zero(cx.ring, cx.group), None)
        dim1, dim2 = l1.dim, l2.dim
        if dim1 + dim2 == 0:
            continue
        # assemble L^n = L1 (+) L2 with its differential and comparison
        term = _direct_sum_modules(l1, l2)
        terms[n] = term
        d_rows = linalg.zeros(term.dim, terms[n + 1].dim if (n + 1) in terms else 0)
        pi_rows = linalg.zeros(term.dim, cn.dim)
        if dim1:
            pi_rows[:dim1] = tau1
        if dim2:
            # tau2 lands in C^n (+) L^{n+1}
            pi_rows[dim1:] = tau2[:, : cn.dim]
            if (n + 1) in terms and terms[n + 1].dim:
                d_rows[dim1:] = tau2[:, cn.dim :]
        if (n + 1) in terms and terms[n + 1].dim:
            diffs[n] = d_rows
        pi[n] = pi_rows
    out = GComplex(cx.ring, cx.group, terms, diffs, check=False)
    return ComplexResolution(out, cx, pi, cutoff + 1)


def _direct_sum_modules(a: GModule, b: GModule) -> GModule:
    if a.dim == 0:
        return b
    if b.dim == 0:
        return a
    out = product_with_span(a, b)
    # Block concatenation of free modules is free of the summed rank with
    # the very same coordinate layout.
    if hasattr(a, "b_rank") and hasattr(b, "b_rank"):
        out.b_rank = a.b_rank + b.b_rank
    if hasattr(a, "a_rank") and hasattr(b, "a_rank"):
        out.a_rank = a.a_rank + b.a_rank
    return out


def verify_complex_resolution(reso: ComplexResolution):
    """Check the comparison map commutes and induces H-isos in range."""
    cm = reso.chain_map()
    cm.validate()
    src, tgt = reso.complex, reso.target
    hi = max(tgt.max_degree, src.max_degree)
    for i in range(reso.valid_from, hi + 1):
        hs = src.homology_at(i)
        ht = tgt.homology_at(i)
        mod = src.mod
        moved = (
            linalg.matmul(hs.generators, cm.mat(i), mod)
            if hs.generators.shape[0]
            else linalg.zeros(0, tgt.term(i).dim)
        )
        # injective
        pre = linalg.preimage_span(moved, ht.boundaries, mod) if hs.generators.shape[0] else None
        if pre is not None:
            for row in pre.matrix:
                cls = linalg.matmul(row.reshape(1, -1), hs.generators, mod)
                assert linalg.in_span(hs.boundaries, cls), f"resolution comparison not injective at {i}"
        # surjective
        if ht.generators.shape[0]:
            stacked = np.vstack([moved, ht.boundaries.matrix]) if ht.boundaries.nrows else moved
            if stacked.shape[0] == 0:
                assert not ht.invariant_factors
            else:
                ctx = linalg.SolveContext(stacked, mod)
                assert ctx.solve_many(ht.generators) is not None, (
                    f"resolution comparison not surjective at {i}"
                )


def b_cover_fn(algebra: GroupAlgebra):
    def fn(module: GModule, span):
        if module.dim == 0:
            z = GModule.zero(algebra.ring, algebra.group)
            z.b_rank = 0
            return z, linalg.zeros(0, 0)
        free, phi, _ = b_free_cover(algebra, module, span)
        return free, phi
    return fn


def resolve_complex(algebra: GroupAlgebra, cx: GComplex, depth: int) -> ComplexResolution:
    """Quasi-isomorphic complex with free B-terms down to a cutoff.

    ``depth`` counts degrees below the lowest degree of the input that are
    still guaranteed exact in the comparison.  A complex whose terms are
    already free is returned as-is with the identity comparison.
    """
    if not cx.terms:
        return ComplexResolution(zero_like(cx), cx, {}, 0)
    if all(hasattr(t, "b_rank") for t in cx.terms.values()):
        ident = {i: linalg.eye(t.dim) for i, t in cx.terms.items()}
        return ComplexResolution(cx, cx, ident, cx.min_degree)
    cutoff = cx.min_degree - depth
    reso = hartshorne_resolve(b_cover_fn(algebra), cx, cutoff)
    verify_complex_resolution(reso)
    return reso


def zero_like(cx: GComplex) -> GComplex:
    return GComplex(cx.ring, cx.group, {}, {}, check=False)
