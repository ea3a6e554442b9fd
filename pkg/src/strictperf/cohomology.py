"""Continuous group cohomology, cup products and hyper-Ext at finite level.

Cohomology of a model with Z_p-directions is the colimit of the cohomology
of its finite quotients under inflation.  A workspace holds consecutive
truncation levels; every reported dimension is the size of the inflation
image between two levels, and the two consecutive images must agree (the
stability certificate).

Hyper-Ext between bounded complexes is computed two independent ways per
level: from a free-term resolution of the source (Hom total complex), and
as group hypercohomology of the internal Hom complex with conjugation
action.  The two must agree; the second transports along inflation, giving
the stable dimension.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .complexes import GComplex, GModule
from .groups import GroupAlgebra, GroupModel
from .linalg import HowellForm
from .rings import ArtinianRing
from .resolutions import (
    ComplexResolution,
    Resolution,
    _one_index,
    comparison_maps,
    evaluation_tensors,
    extend_b_linear,
    inflate_complex,
    inflate_module,
    resolve_complex,
    resolve_module,
    ring_block_relations_for,
    trivial_module,
)


def hom_evaluation_matrix(algebra: GroupAlgebra, target: GModule, w: np.ndarray, rank: int) -> np.ndarray:
    """Matrix sending generator-image parameters to the value at ``w``.

    For the B-linear map with parameters P (rank blocks of target rows),
    value(w) = P @ this, flattened: out[(r, j), :] is the contribution of
    parameter row (r, basis j).
    """
    out = linalg.zeros(rank * target.dim, target.dim)
    tensors = evaluation_tensors(algebra, target)
    w = np.asarray(w, dtype=np.int64)
    for r in range(rank):
        acc = np.zeros((target.dim, target.dim), dtype=np.int64)
        block = w[r * algebra.dim : (r + 1) * algebra.dim]
        for flat in np.nonzero(block)[0]:
            gi, i = divmod(int(flat), algebra.nA)
            acc += int(block[flat]) * tensors[gi][i]
        out[r * target.dim : (r + 1) * target.dim] = acc % target.mod.q
    return out


# -- Hom total complex of a free-term complex into a bounded complex ----------


class HomTotal:
    """Hom_B(L, D) as a cochain complex in generator-image parameters.

    L must have b_free terms (the ``b_rank`` attribute); D is any bounded
    complex over the same algebra.  Parameters in degree t are the stacked
    generator images, one block of D^(i+t)-coordinates per L^i generator.
    The differential is (delta phi) = d_D o phi - (-1)^t phi o d_L.
    """

    def __init__(self, algebra: GroupAlgebra, L: GComplex, D: GComplex, t_hi: int):
        self.algebra = algebra
        self.L = L
        self.D = D
        self.mod = algebra.mod
        t_lo = (min(D.degrees()) - max(L.degrees())) if D.terms and L.terms else 0
        self.blocks = {}
        self.dims = {}
        self.offsets = {}
        for t in range(t_lo, t_hi + 2):
            blocks = []
            offsets = {}
            dim = 0
            for i in sorted(L.terms):
                rank = getattr(L.term(i), "b_rank", None)
                if rank is None:
                    raise ValueError("HomTotal needs b_free source terms")
                m = D.term(i + t)
                if rank and m.dim:
                    offsets[i] = dim
                    blocks.append((i, rank, m))
                    dim += rank * m.dim
            self.blocks[t] = blocks
            self.offsets[t] = offsets
            self.dims[t] = dim
        self._delta_cache = {}

    def block_rank(self, t, i):
        for bi, rank, m in self.blocks.get(t, []):
            if bi == i:
                return rank, m
        return 0, None

    def param_relations(self, t) -> np.ndarray:
        rows = []
        for i, rank, m in self.blocks.get(t, []):
            rel = ring_block_relations_for(m, rank)
            if rel.shape[0]:
                blk = linalg.zeros(rel.shape[0], self.dims[t])
                blk[:, self.offsets[t][i] : self.offsets[t][i] + rank * m.dim] = rel
                rows.append(blk)
        return np.vstack(rows) if rows else linalg.zeros(0, self.dims.get(t, 0))

    def delta(self, t) -> np.ndarray:
        if t in self._delta_cache:
            return self._delta_cache[t]
        src_dim, tgt_dim = self.dims.get(t, 0), self.dims.get(t + 1, 0)
        out = linalg.zeros(src_dim, tgt_dim)
        q = self.mod.q
        sign = -1 if t % 2 else 1
        if src_dim and tgt_dim:
            for i, rank, m in self.blocks[t]:
                off_s = self.offsets[t][i]
                # post-composition with d_D: block (i, t) -> block (i, t+1)
                if i in self.offsets.get(t + 1, {}):
                    d_post = self.D.diff(i + t)
                    _, tgt_m = self.block_rank(t + 1, i)
                    off_t = self.offsets[t + 1][i]
                    for r in range(rank):
                        out[
                            off_s + r * m.dim : off_s + (r + 1) * m.dim,
                            off_t + r * tgt_m.dim : off_t + (r + 1) * tgt_m.dim,
                        ] += d_post
                # pre-composition with d_L: block (i, t) -> block (i-1, t+1)
                prev = i - 1
                if prev in self.offsets.get(t + 1, {}):
                    rank_prev, _ = self.block_rank(t + 1, prev)
                    d_l = self.L.diff(prev)
                    off_t = self.offsets[t + 1][prev]
                    for rp in range(rank_prev):
                        w = d_l[rp * self.algebra.dim + _one_index(self.algebra)]
                        ev = hom_evaluation_matrix(self.algebra, m, w, rank)
                        out[
                            off_s : off_s + rank * m.dim,
                            off_t + rp * m.dim : off_t + (rp + 1) * m.dim,
                        ] = (
                            out[
                                off_s : off_s + rank * m.dim,
                                off_t + rp * m.dim : off_t + (rp + 1) * m.dim,
                            ]
                            - sign * ev
                        ) % q
        out %= q
        self._delta_cache[t] = out
        return out

    def cocycles(self, t) -> HowellForm:
        rel_next = linalg.howell(self.param_relations(t + 1), self.mod)
        z = linalg.preimage_span(self.delta(t), rel_next, self.mod)
        return linalg.span_sum(self.mod, z, linalg.howell(self.param_relations(t), self.mod))

    def coboundaries(self, t) -> HowellForm:
        rows = [self.param_relations(t)]
        if self.dims.get(t - 1, 0):
            rows.append(self.delta(t - 1))
        rows = [r for r in rows if r.shape[0]]
        return linalg.howell(
            np.vstack(rows) if rows else linalg.zeros(0, self.dims.get(t, 0)), self.mod
        )

    def h_size_log_p(self, t) -> int:
        if self.dims.get(t, 0) == 0:
            return 0
        return _log_quotient(self.cocycles(t), self.coboundaries(t), self.mod)

    def is_cocycle(self, t, params: np.ndarray) -> bool:
        img = linalg.matmul(params.reshape(1, -1), self.delta(t), self.mod)
        if not img.any():
            return True
        rel = linalg.howell(self.param_relations(t + 1), self.mod)
        return rel.nrows > 0 and linalg.in_span(rel, img)


def _log_quotient(z: HowellForm, b: HowellForm, mod) -> int:
    nz = z.span_size()
    nb = b.span_size() if b.nrows else 1
    out = 0
    while mod.p**out * nb < nz:
        out += 1
    assert mod.p**out * nb == nz, "coboundaries must lie inside cocycles"
    return out


# -- internal Hom complex with conjugation action ------------------------------


def hom_k_module(x: GModule, y: GModule) -> GModule:
    """Hom over the coefficient field with the conjugation action.

    Elements are matrices Phi (x.dim rows, y.dim cols) flattened row-major;
    g . Phi = A_x(g^-1) Phi A_y(g).
    """
    ring, group = x.ring, x.group
    assert ring.n == 1 and ring.mod.m == 1, "internal Hom implemented over k"
    dim = x.dim * y.dim
    actions = {}
    for name in group.gen_names:
        g = group.generator(name)
        a_inv = x.action_of(group.inv(g))
        a_y = y.action_of(g)
        actions[name] = np.kron(a_inv.T, a_y) % ring.mod.q
    return GModule(ring, group, dim, linalg.zeros(0, dim), actions, check=False)


def hom_k_total_complex(c: GComplex, d: GComplex) -> GComplex:
    """Total complex of Hom_k(C, D) with the conjugation action."""
    ring, group, mod = c.ring, c.group, c.mod
    degs_c = c.degrees()
    degs_d = d.degrees()
    t_values = sorted({j - i for i in degs_c for j in degs_d})
    terms = {}
    layout = {}
    for t in t_values:
        mods = []
        offs = {}
        dim = 0
        for i in degs_c:
            if (i + t) in d.terms:
                hm = hom_k_module(c.term(i), d.term(i + t))
                offs[i] = dim
                mods.append((i, hm))
                dim += hm.dim
        if dim == 0:
            continue
        actions = {}
        for name in group.gen_names:
            m = linalg.zeros(dim, dim)
            for i, hm in mods:
                o = offs[i]
                m[o : o + hm.dim, o : o + hm.dim] = hm.actions[name]
            actions[name] = m
        terms[t] = GModule(ring, group, dim, linalg.zeros(0, dim), actions, check=False)
        layout[t] = offs
    diffs = {}
    for t in t_values:
        if t not in terms or (t + 1) not in terms:
            continue
        src, tgt = terms[t], terms[t + 1]
        m = linalg.zeros(src.dim, tgt.dim)
        sign = -1 if t % 2 else 1
        for i in degs_c:
            if i not in layout[t]:
                continue
            xi, yi = c.term(i), d.term(i + t)
            o_s = layout[t][i]
            if i in layout.get(t + 1, {}):
                dd = d.diff(i + t)
                blk = np.kron(np.eye(xi.dim, dtype=np.int64), dd)
                y2 = d.term(i + t + 1)
                m[o_s : o_s + xi.dim * yi.dim, layout[t + 1][i] : layout[t + 1][i] + xi.dim * y2.dim] += blk
            prev = i - 1
            if prev in layout.get(t + 1, {}):
                dc = c.diff(prev)
                x2 = c.term(prev)
                blk = np.kron(dc.T, np.eye(yi.dim, dtype=np.int64))
                sl = slice(layout[t + 1][prev], layout[t + 1][prev] + x2.dim * yi.dim)
                m[o_s : o_s + xi.dim * yi.dim, sl] = (
                    m[o_s : o_s + xi.dim * yi.dim, sl] - sign * blk
                ) % mod.q
        diffs[t] = m % mod.q
    return GComplex(ring, group, terms, diffs, check=False)


# -- stable cohomology workspace ----------------------------------------------


class StableCohomology:
    """Consecutive truncation levels with inflation comparison maps.

    ``coeff`` is the coefficient complex at the base level (default: the
    trivial module in degree 0); it is inflated to the deeper levels.
    Dimensions are log_p sizes of inflation images, required stable.
    """

    def __init__(self, ring: ArtinianRing, model: GroupModel, max_degree: int,
                 coeff: GComplex | None = None, n_levels: int = 3):
        assert ring.mod.m == 1, "cohomology dimensions are over the prime field"
        self.ring = ring
        self.base = model
        self.max_degree = max_degree
        self.models = [model.at_level(model.level + i) for i in range(n_levels)]
        self.algebras = [GroupAlgebra(ring, m) for m in self.models]
        depth = max_degree + 1 - (min(coeff.degrees()) if coeff is not None and coeff.terms else 0)
        self.resolutions = [
            resolve_module(a, trivial_module(ring, m), depth)
            for a, m in zip(self.algebras, self.models)
        ]
        self.psis = [
            comparison_maps(self.resolutions[i + 1], self.resolutions[i], depth)
            for i in range(n_levels - 1)
        ]
        if coeff is None:
            coeff = GComplex(
                ring, model, {0: trivial_module(ring, model)}, {}, check=False
            )
        self.coeffs = [inflate_complex(coeff, m) for m in self.models]
        self.hom_totals = [
            HomTotal(a, r.complex, cf, max_degree + 1)
            for a, r, cf in zip(self.algebras, self.resolutions, self.coeffs)
        ]

    def level_h_size(self, level: int, s: int) -> int:
        return self.hom_totals[level].h_size_log_p(s)

    def inflation_matrix(self, level: int, s: int) -> np.ndarray:
        """Parameter map Hom-level -> Hom-(level+1) in cochain degree s."""
        src = self.hom_totals[level]
        tgt = self.hom_totals[level + 1]
        psi = self.psis[level]
        alg_big = self.algebras[level + 1]
        out = linalg.zeros(src.dims.get(s, 0), tgt.dims.get(s, 0))
        if out.size == 0:
            return out
        for i, rank, m in src.blocks[s]:
            off_s = src.offsets[s][i]
            rank_big, m_big = tgt.block_rank(s, i)
            if m_big is None:
                continue
            off_t = tgt.offsets[s][i]
            psi_mat = psi.get(i)
            if psi_mat is None:
                continue
            for rb in range(rank_big):
                w = psi_mat[rb * alg_big.dim + _one_index(alg_big)]
                ev = hom_evaluation_matrix(self.algebras[level], m, w, rank)
                out[
                    off_s : off_s + rank * m.dim,
                    off_t + rb * m.dim : off_t + (rb + 1) * m.dim,
                ] = ev
        return out % self.ring.mod.q

    def stable_dim(self, s: int) -> int:
        """dim of the inflation image, checked stable across two steps."""
        dims = []
        for level in range(len(self.models) - 1):
            tgt = self.hom_totals[level + 1]
            inf = self.inflation_matrix(level, s)
            z = self.hom_totals[level].cocycles(s)
            moved = (
                linalg.matmul(z.matrix, inf, self.ring.mod)
                if z.nrows and inf.size
                else linalg.zeros(0, tgt.dims.get(s, 0))
            )
            b = tgt.coboundaries(s)
            total = linalg.span_sum(self.ring.mod, b, moved) if moved.size else b
            dims.append(_log_quotient(total, b, self.ring.mod))
        assert len(set(dims)) == 1, f"inflation image not stable in degree {s}: {dims}"
        return dims[0]

    def dims(self) -> list:
        return [self.stable_dim(s) for s in range(self.max_degree + 1)]

    # classes live at level 0; zero-ness is decided in the level-1 image.

    def inflate_class(self, s: int, params: np.ndarray) -> np.ndarray:
        inf = self.inflation_matrix(0, s)
        return linalg.matmul(params.reshape(1, -1), inf, self.ring.mod)[0]

    def class_is_zero(self, s: int, params: np.ndarray) -> bool:
        up = self.inflate_class(s, params)
        if not up.any():
            return True
        b = self.hom_totals[1].coboundaries(s)
        return b.nrows > 0 and linalg.in_span(b, up.reshape(1, -1))

    def classes_equal(self, s: int, p1: np.ndarray, p2: np.ndarray) -> bool:
        return self.class_is_zero(s, (p1 - p2) % self.ring.mod.q)


def group_cohomology_dims(ring: ArtinianRing, model: GroupModel, max_degree: int,
                          coeff: GComplex | None = None) -> list:
    """dim_k H^s for 0 <= s <= max_degree, stable across truncation levels."""
    ws = StableCohomology(ring, model, max_degree, coeff)
    return ws.dims()


# -- cohomology classes, connecting maps and cup products ----------------------


@dataclass
class CohomologyClass:
    """A cocycle in generator-image parameters at the workspace base level."""

    degree: int
    params: np.ndarray


def _k_module(ws: StableCohomology) -> GModule:
    return ws.coeffs[0].term(0)


def _solve_rows(stacked, targets, mod, width):
    ctx = linalg.SolveContext(stacked, mod)
    sols = ctx.solve_many(targets)
    if sols is None:
        return None
    return sols[:, :width] % mod.q


def lift_through_quotient(ws: StableCohomology, module: GModule, qmap: np.ndarray) -> np.ndarray:
    """Generator images F_0 -> module lifting the augmentation through qmap."""
    res = ws.resolutions[0]
    alg = ws.algebras[0]
    kmod = _k_module(ws)
    r0 = res.term_rank(0)
    targets = np.vstack([
        res.augmentation[r * alg.dim + _one_index(alg)] for r in range(r0)
    ])
    stacked = (
        np.vstack([qmap, kmod.relations.matrix]) if kmod.relations.nrows else qmap
    )
    images = _solve_rows(stacked, targets, ws.ring.mod, module.dim)
    assert images is not None, "augmentation does not lift through the quotient"
    return images


def connecting_class_from_extension(ws: StableCohomology, middle: GModule,
                                    sub_vec: np.ndarray, qmap: np.ndarray) -> CohomologyClass:
    """Connecting image of 1 under 0 -> k -> middle -> k -> 0.

    ``sub_vec`` spans the sub copy of k, ``qmap`` realizes the quotient map
    onto k.  The class is the degree-1 cocycle F_{-1} -> k.
    """
    res = ws.resolutions[0]
    alg = ws.algebras[0]
    mod = ws.ring.mod
    images0 = lift_through_quotient(ws, middle, qmap)
    full0 = extend_b_linear(alg, middle, images0)
    r1 = res.term_rank(-1)
    d = res.complex.diff(-1)
    params = linalg.zeros(r1, _k_module(ws).dim)
    sub = sub_vec.reshape(1, -1)
    stacked = (
        np.vstack([sub, middle.relations.matrix]) if middle.relations.nrows else sub
    )
    ctx = linalg.SolveContext(stacked, mod)
    for r in range(r1):
        w = d[r * alg.dim + _one_index(alg)]
        val = linalg.matmul(w.reshape(1, -1), full0, mod)[0]
        sol = ctx.solve(val)
        assert sol is not None, "connecting value escaped the sub-k"
        params[r] = sol[:1]
    cls = CohomologyClass(1, params.reshape(-1))
    assert ws.hom_totals[0].is_cocycle(1, cls.params)
    return cls


def character_values(x: str):
    """h_x on (w1, w2) for x in {'ell', '-1', '-ell'}."""
    return {"ell": (0, 1), "-1": (1, 0), "-ell": (1, 1)}[x]


def character_module(ws: StableCohomology, x: str) -> GModule:
    """k[G_x]: rank two, generators act by swap^(h_x(gen))."""
    ring = ws.ring
    eps1, eps2 = character_values(x)
    swap = [[ring.from_int(0).coords, ring.one_coords()], [ring.one_coords(), ring.from_int(0).coords]]
    ident = [[ring.one_coords(), ring.from_int(0).coords], [ring.from_int(0).coords, ring.one_coords()]]
    return GModule.a_free(
        ring, ws.models[0],
        {"w1_1": swap if eps1 else ident, "q_1": swap if eps2 else ident},
    )


def h_class(ws: StableCohomology, x: str) -> CohomologyClass:
    """The degree-1 class of the augmentation extension of k[G_x]."""
    kgx = character_module(ws, x)
    sub = np.array([1, 1], dtype=np.int64)  # the trace element spans the sub-k
    qmap = np.array([[1], [1]], dtype=np.int64)  # augmentation onto k
    cls = connecting_class_from_extension(ws, kgx, sub, qmap)
    assert not ws.class_is_zero(1, cls.params), "h_x must be non-trivial"
    return cls


def lift_cocycle(ws: StableCohomology, cls: CohomologyClass, t_max: int) -> dict:
    """Chain-map lift of a degree-s cocycle: full matrices F_{-(s+j)} -> F_{-j}."""
    res = ws.resolutions[0]
    alg = ws.algebras[0]
    mod = ws.ring.mod
    kmod = _k_module(ws)
    s = cls.degree
    lifts = {}
    # j = 0: images in F_0 with x . aug = cocycle value
    r_s = res.term_rank(-s)
    params = cls.params.reshape(r_s, kmod.dim)
    stacked = (
        np.vstack([res.augmentation, kmod.relations.matrix])
        if kmod.relations.nrows
        else res.augmentation
    )
    images = _solve_rows(stacked, params, mod, res.complex.term(0).dim)
    assert images is not None
    lifts[0] = extend_b_linear(alg, res.complex.term(0), images)
    for j in range(1, t_max + 1):
        if res.term_rank(-(s + j)) == 0:
            break
        tgt = res.complex.term(-j)
        d_tgt = res.complex.diff(-j)
        nxt = res.complex.term(-j + 1)
        stacked = (
            np.vstack([d_tgt, nxt.relations.matrix]) if nxt.relations.nrows else d_tgt
        )
        r_sj = res.term_rank(-(s + j))
        d_src = res.complex.diff(-(s + j))
        targets = np.vstack([
            linalg.matmul(
                d_src[r * alg.dim + _one_index(alg)].reshape(1, -1), lifts[j - 1], mod
            )[0].reshape(1, -1)
            for r in range(r_sj)
        ])
        images = _solve_rows(stacked, targets, mod, tgt.dim)
        assert images is not None, f"cocycle lift failed at step {j}"
        lifts[j] = extend_b_linear(alg, tgt, images)
    return lifts


def cup_product(ws: StableCohomology, c1: CohomologyClass, c2: CohomologyClass) -> CohomologyClass:
    """Yoneda composite of the lifted chain map of c1 with the cocycle c2."""
    res = ws.resolutions[0]
    alg = ws.algebras[0]
    mod = ws.ring.mod
    kmod = _k_module(ws)
    s, t = c1.degree, c2.degree
    if not c1.params.any() or not c2.params.any():
        r = res.term_rank(-(s + t))
        return CohomologyClass(s + t, linalg.zeros(1, r * kmod.dim).reshape(-1))
    lifts = lift_cocycle(ws, c1, t)
    c2_full = extend_b_linear(
        alg, kmod, c2.params.reshape(res.term_rank(-t), kmod.dim)
    )
    r_st = res.term_rank(-(s + t))
    params = linalg.zeros(r_st, kmod.dim)
    for r in range(r_st):
        row = lifts[t][r * alg.dim + _one_index(alg)]
        params[r] = linalg.matmul(row.reshape(1, -1), c2_full, mod)[0]
    cls = CohomologyClass(s + t, params.reshape(-1))
    assert ws.hom_totals[0].is_cocycle(s + t, cls.params)
    return cls


def _functional_killing(term: GModule, kill: HowellForm, must_hit) -> np.ndarray:
    """A column functional to k vanishing on ``kill`` (and the relations)
    and non-zero on some row of ``must_hit``."""
    mod = term.mod
    rows = [kill.matrix] if kill.nrows else []
    if term.relations.nrows:
        rows.append(term.relations.matrix)
    constraints = np.vstack(rows) if rows else linalg.zeros(0, term.dim)
    candidates = linalg.kernel(constraints.T, mod) if constraints.shape[0] else linalg.howell(linalg.eye(term.dim), mod)
    for cand in candidates.matrix:
        col = cand.reshape(-1, 1)
        if linalg.matmul(must_hit, col, mod).any():
            return col
    raise AssertionError("no functional separates the homology")


def equivariant_functional(term: GModule, kill: HowellForm, must_hit) -> np.ndarray:
    """A column functional to k vanishing on ``kill``, commuting with every
    generator action, and non-zero on some row of ``must_hit``."""
    mod = term.mod
    rows = [kill.matrix] if kill.nrows else []
    for m in term.actions.values():
        rows.append((m - linalg.eye(term.dim)) % mod.q)
    if term.relations.nrows:
        rows.append(term.relations.matrix)
    constraints = np.vstack(rows) if rows else linalg.zeros(0, term.dim)
    candidates = linalg.kernel(constraints.T, mod)
    for cand in candidates.matrix:
        col = cand.reshape(-1, 1)
        vals = linalg.matmul(must_hit, col, mod)
        if vals.any():
            return col
    raise AssertionError("no equivariant functional separates the homology")


def class_of_two_term_complex(ws: StableCohomology, x: GComplex) -> CohomologyClass:
    """The degree-2 class of a complex in degrees [-1, 0] with H = (k, k)."""
    res = ws.resolutions[0]
    alg = ws.algebras[0]
    mod = ws.ring.mod
    h0 = x.homology_at(0)
    hm1 = x.homology_at(-1)
    assert h0.invariant_factors == [mod.p] and hm1.invariant_factors == [mod.p]
    # coefficient map X^0 -> k realizing the quotient onto H^0
    q0 = equivariant_functional(x.term(0), h0.boundaries, h0.generators)
    images0 = lift_through_quotient(ws, x.term(0), q0)
    full0 = extend_b_linear(alg, x.term(0), images0)
    # lift through the differential into X^{-1}
    r1 = res.term_rank(-1)
    d_res = res.complex.diff(-1)
    dx = x.diff(-1)
    stacked = (
        np.vstack([dx, x.term(0).relations.matrix])
        if x.term(0).relations.nrows
        else dx
    )
    targets = np.vstack([
        linalg.matmul(d_res[r * alg.dim + _one_index(alg)].reshape(1, -1), full0, mod)[0].reshape(1, -1)
        for r in range(r1)
    ])
    images1 = _solve_rows(stacked, targets, mod, x.term(-1).dim)
    assert images1 is not None, "lift through the two-term complex failed"
    full1 = extend_b_linear(alg, x.term(-1), images1)
    # the degree-2 cocycle reads off the H^{-1} coefficient; the reader only
    # lives on the cycles (where the action is trivial), so no equivariance
    # constraint is imposed on its ambient extension.
    r2 = res.term_rank(-2)
    d2 = res.complex.diff(-2)
    qm1 = _functional_killing(x.term(-1), hm1.boundaries, hm1.generators)
    params = linalg.zeros(r2, _k_module(ws).dim)
    for r in range(r2):
        val = linalg.matmul(d2[r * alg.dim + _one_index(alg)].reshape(1, -1), full1, mod)[0]
        assert linalg.in_span(hm1.cycles, val.reshape(1, -1)), "value escaped the cycles"
        params[r] = linalg.matmul(val.reshape(1, -1), qm1, mod)[0]
    cls = CohomologyClass(2, params.reshape(-1))
    assert ws.hom_totals[0].is_cocycle(2, cls.params)
    return cls


# -- restriction to the w2-line -------------------------------------------------


def restrict_class_to_w2(ws: StableCohomology, cls: CohomologyClass) -> bool:
    """True iff the restriction of the class to <w2> = Z/2 is non-zero.

    This is the separating invariant for the degree-2 classes: the cup
    square of the w2-character restricts non-trivially, the mixed product
    does not.
    """
    ring = ws.ring
    mod = ring.mod
    small_model = GroupModel("A", ring.mod.p, q_orders=(2,))
    small_model.level = 1
    small_alg = GroupAlgebra(ring, small_model)
    s = cls.degree
    small_res = resolve_module(small_alg, trivial_module(ring, small_model), s + 1)
    big_res = ws.resolutions[0]
    # view the big resolution as complexes of <w2>-modules
    def restrict_term(t: GModule) -> GModule:
        return GModule(ring, small_model, t.dim, t.relations, {"q_1": t.actions["q_1"]}, check=False)

    chis = {}
    tgt0 = restrict_term(big_res.complex.term(0))
    kmod = _k_module(ws)
    r0 = small_res.term_rank(0)
    targets = np.vstack([
        small_res.augmentation[r * small_alg.dim + _one_index(small_alg)] for r in range(r0)
    ])
    stacked = (
        np.vstack([big_res.augmentation, kmod.relations.matrix])
        if kmod.relations.nrows
        else big_res.augmentation
    )
    images = _solve_rows(stacked, targets, mod, tgt0.dim)
    assert images is not None
    chis[0] = extend_b_linear(small_alg, tgt0, images)
    for j in range(1, s + 1):
        tgt = restrict_term(big_res.complex.term(-j))
        d_big = big_res.complex.diff(-j)
        nxt = big_res.complex.term(-j + 1)
        stacked = (
            np.vstack([d_big, nxt.relations.matrix]) if nxt.relations.nrows else d_big
        )
        r_j = small_res.term_rank(-j)
        d_small = small_res.complex.diff(-j)
        targets = np.vstack([
            linalg.matmul(
                d_small[r * small_alg.dim + _one_index(small_alg)].reshape(1, -1),
                chis[j - 1], mod,
            )[0].reshape(1, -1)
            for r in range(r_j)
        ])
        images = _solve_rows(stacked, targets, mod, tgt.dim)
        assert images is not None, "restriction comparison failed"
        chis[j] = extend_b_linear(small_alg, tgt, images)
    # restricted cocycle parameters over the small resolution
    cls_full = extend_b_linear(
        ws.algebras[0], kmod, cls.params.reshape(big_res.term_rank(-s), kmod.dim)
    )
    r_s = small_res.term_rank(-s)
    params = linalg.zeros(r_s, kmod.dim)
    for r in range(r_s):
        row = chis[s][r * small_alg.dim + _one_index(small_alg)]
        params[r] = linalg.matmul(row.reshape(1, -1), cls_full, mod)[0]
    small_kcx = GComplex(ring, small_model, {0: trivial_module(ring, small_model)}, {}, check=False)
    ht = HomTotal(small_alg, small_res.complex, small_kcx, s + 1)
    assert ht.is_cocycle(s, params.reshape(-1))
    b = ht.coboundaries(s)
    v = params.reshape(1, -1)
    if not v.any():
        return False
    return not (b.nrows > 0 and linalg.in_span(b, v))


# -- Hilbert symbol (independent arithmetic oracle) -----------------------------


def legendre(a: int, ell: int) -> int:
    a %= ell
    assert a != 0
    return 1 if pow(a, (ell - 1) // 2, ell) == 1 else -1


def hilbert_symbol(a: int, b: int, ell: int) -> int:
    """Tame Hilbert symbol (a, b) over Q_ell for odd ell and ell-units times
    powers of ell; the classical explicit formula."""
    alpha = 0
    while a % ell == 0:
        a //= ell
        alpha += 1
    beta = 0
    while b % ell == 0:
        b //= ell
        beta += 1
    out = 1
    if (alpha * beta) % 2:
        out *= legendre(-1, ell)
    if beta % 2:
        out *= legendre(a, ell)
    if alpha % 2:
        out *= legendre(b, ell)
    return out


# -- hyper-Ext -------------------------------------------------------------------


@dataclass
class ExtReport:
    n: int
    stable_dim: int
    level_dims_resolution: list
    level_dims_hyper: list
    depth_used: int
    depth_recheck: int


def hyper_ext(ring: ArtinianRing, model: GroupModel, c: GComplex, d: GComplex, n: int,
              depth: int | None = None, n_levels: int = 3) -> ExtReport:
    """dim_k Ext^n(C, D) over the completed group algebra.

    For each truncation level the dimension is computed from a free-term
    resolution of C (the Hom-complex route) and, independently, as group
    hypercohomology of Hom_k(C, D); the two must agree.  The reported value
    is the stable inflation-image dimension, and the resolution route is
    re-run two degrees deeper as a depth-stability check.
    """
    if depth is None:
        depth = n + 3
    e_cx = hom_k_total_complex(c, d)
    ws = StableCohomology(ring, model, n, coeff=e_cx, n_levels=n_levels)
    level_res = []
    level_hyper = []
    for i, (alg, m) in enumerate(zip(ws.algebras, ws.models)):
        ci = inflate_complex(c, m)
        di = inflate_complex(d, m)
        reso = resolve_complex(alg, ci, depth)
        ht = HomTotal(alg, reso.complex, di, n + 1)
        dim_res = ht.h_size_log_p(n)
        if i == 0:
            reso2 = resolve_complex(alg, ci, depth + 2)
            ht2 = HomTotal(alg, reso2.complex, di, n + 1)
            assert ht2.h_size_log_p(n) == dim_res, "Ext not stable under depth increase"
        dim_hyper = ws.level_h_size(i, n)
        assert dim_res == dim_hyper, (
            f"resolution route ({dim_res}) disagrees with hypercohomology ({dim_hyper})"
        )
        level_res.append(dim_res)
        level_hyper.append(dim_hyper)
    stable = ws.stable_dim(n)
    return ExtReport(n, stable, level_res, level_hyper, depth, depth + 2)
