import numpy as np
import pytest

from strictperf import linalg
from strictperf.cohomology import (
    CohomologyClass,
    HomTotal,
    StableCohomology,
    class_of_two_term_complex,
    cup_product,
    group_cohomology_dims,
    h_class,
    hilbert_symbol,
    hyper_ext,
    restrict_class_to_w2,
)
from strictperf.complexes import ChainMap, GComplex, GModule, check_quasi_iso, cone, identity_map
from strictperf.groups import GroupAlgebra, GroupModel
from strictperf.resolutions import (
    b_free_cover,
    comparison_maps,
    resolve_complex,
    resolve_module,
    trivial_module,
)
from strictperf.rings import ArtinianRing

F2 = ArtinianRing.zmod(2, 1)
GAMMA = GroupModel.gamma_z2_x_z2(2)
I2 = [[1, 0], [0, 1]]
SWAP = [[0, 1], [1, 0]]


def a_ints(ring, mat):
    return [[(ring.one_coords() * v) % ring.mod.q for v in row] for row in mat]


def build_vy(y, ring=F2, group=GAMMA):
    vals = {"ell": (0, 1), "-1": (1, 0), "-ell": (1, 1)}[y]
    act = lambda e: SWAP if e else I2
    t0 = GModule.a_free(ring, group, {"w1_1": a_ints(ring, I2), "q_1": a_ints(ring, SWAP)})
    tm1 = GModule.a_free(
        ring, group, {"w1_1": a_ints(ring, act(vals[0])), "q_1": a_ints(ring, act(vals[1]))}
    )
    d = np.array([[1, 1], [1, 1]], dtype=np.int64)
    return GComplex(ring, group, {-1: tm1, 0: t0}, {-1: d})


@pytest.fixture(scope="module")
def ws():
    return StableCohomology(F2, GAMMA, 2)


def test_resolve_free_module_is_trivial():
    alg = GroupAlgebra(F2, GAMMA)
    free = GModule.b_free(alg, 1)
    res = resolve_module(alg, free, 2)
    assert res.term_rank(0) == 1
    assert res.term_rank(-1) == 0


def test_resolve_k_over_z2_periodic():
    # k over k[Z/2] has the periodic rank-one resolution with d = (w - 1).
    z2 = GroupModel("A", 2, q_orders=(2,))
    z2.level = 1
    alg = GroupAlgebra(F2, z2)
    res = resolve_module(alg, trivial_module(F2, z2), 4)
    assert [res.term_rank(-s) for s in range(5)] == [1, 1, 1, 1, 1]
    assert res.minimal
    # differential is right multiplication by (w - 1): kills the trace.
    d = res.complex.diff(-1)
    w_minus_1 = alg.binomial_element(z2.generator("q_1"), 1)
    assert np.array_equal(d[0], w_minus_1 % 2) or np.array_equal(
        linalg.howell(d, alg.mod).matrix, linalg.howell(alg.right_mult_matrix(w_minus_1), alg.mod).matrix
    )


def test_resolve_k_over_gamma_minimal_ranks():
    alg = GroupAlgebra(F2, GAMMA)
    res = resolve_module(alg, trivial_module(F2, GAMMA), 4)
    assert res.minimal
    # k[x1,x2]/(x1^T, x2^2)-shape: at finite level the minimal ranks are
    # 1, 2, 3, ... (the truncation syzygy x1^(T-1) enters in degree -2).
    assert res.term_rank(0) == 1
    assert res.term_rank(-1) == 2


def test_group_cohomology_dims_paper_values():
    assert group_cohomology_dims(F2, GAMMA, 3) == [1, 2, 2, 2]
    z2 = GroupModel("A", 2, q_orders=(2,))
    z2.level = 1
    assert group_cohomology_dims(F2, z2, 3) == [1, 1, 1, 1]
    z2hat = GroupModel("A", 2, w1_orders=(2,))
    z2hat.level = 1
    assert group_cohomology_dims(F2, z2hat, 3) == [1, 1, 0, 0]


def test_resolve_complex_free_input_identity():
    alg = GroupAlgebra(F2, GAMMA)
    free = GModule.b_free(alg, 1)
    cx = GComplex(F2, GAMMA, {0: free}, {}, check=False)
    reso = resolve_complex(alg, cx, 3)
    assert reso.complex is cx
    cert = check_quasi_iso(reso.chain_map())
    assert cert.ok


def test_resolve_complex_vy_certificate(ws):
    alg = ws.algebras[0]
    v = build_vy("ell")
    reso = resolve_complex(alg, v, 4)
    assert reso.complex.min_degree <= -4
    for i, t in reso.complex.terms.items():
        assert hasattr(t, "b_rank")
    cert = check_quasi_iso(
        ChainMap(reso.complex, v, reso.pi)
    ) if reso.complex.min_degree == v.min_degree else None
    # full certificate in the valid range is asserted by construction
    from strictperf.resolutions import verify_complex_resolution

    verify_complex_resolution(reso)


def test_acyclic_complex_resolves_to_zero_class():
    alg = GroupAlgebra(F2, GAMMA)
    v = build_vy("ell")
    ac = cone(identity_map(v))
    assert ac.is_acyclic()
    z = GComplex(F2, GAMMA, {}, {}, check=False)
    cert = check_quasi_iso(ChainMap(ac, z, {}))
    assert cert.ok


def test_h_classes_and_cup_table(ws):
    hl = h_class(ws, "ell")
    hm1 = h_class(ws, "-1")
    hml = h_class(ws, "-ell")
    cups = {}
    for name, c in (("ell", hl), ("-1", hm1), ("-ell", hml)):
        cups[name] = cup_product(ws, hl, c)
        assert not ws.class_is_zero(2, cups[name].params)
    assert not ws.classes_equal(2, cups["ell"].params, cups["-1"].params)
    # h_{-ell} = h_ell + h_{-1} additively in H^1
    assert ws.classes_equal(1, hml.params, (hl.params + hm1.params) % 2)
    # restriction to <w2> separates the two non-trivial products (the
    # distinctness argument): nonzero for cup(l,l), zero for cup(l,-1).
    assert restrict_class_to_w2(ws, cups["ell"])
    assert not restrict_class_to_w2(ws, cups["-1"])


def test_cup_zero_and_commutativity(ws):
    hl = h_class(ws, "ell")
    hm1 = h_class(ws, "-1")
    zero = CohomologyClass(1, np.zeros_like(hl.params))
    assert ws.class_is_zero(2, cup_product(ws, hl, zero).params)
    ab = cup_product(ws, hl, hm1)
    ba = cup_product(ws, hm1, hl)
    assert ws.classes_equal(2, ab.params, ba.params)
    # square of the w1-character vanishes: it is inflated from Z_2 which has
    # cohomological dimension one.
    sq = cup_product(ws, hm1, hm1)
    assert ws.class_is_zero(2, sq.params)


def test_yoneda_associativity_sampled():
    ws3 = StableCohomology(F2, GAMMA, 3)
    hl = h_class(ws3, "ell")
    hm1 = h_class(ws3, "-1")
    left = cup_product(ws3, cup_product(ws3, hl, hl), hm1)
    right = cup_product(ws3, hl, cup_product(ws3, hl, hm1))
    assert ws3.classes_equal(3, left.params, right.params)


def test_beta_matches_cup(ws):
    hl = h_class(ws, "ell")
    for y in ("ell", "-1", "-ell"):
        v = build_vy(y)
        beta = class_of_two_term_complex(ws, v)
        hy = h_class(ws, y)
        cup = cup_product(ws, hl, hy)
        assert ws.classes_equal(2, beta.params, cup.params)
        assert not ws.class_is_zero(2, beta.params)


def test_hilbert_symbol_table():
    for ell in (3, 7, 11):  # primes = 3 mod 4
        assert hilbert_symbol(ell, ell, ell) == -1
        assert hilbert_symbol(ell, -1, ell) == -1
        assert hilbert_symbol(ell, -ell, ell) == 1
        assert hilbert_symbol(-1, -1, ell) == 1


def test_ext0_of_trivial_complex():
    k = trivial_module(F2, GAMMA)
    kc = GComplex(F2, GAMMA, {0: k}, {}, check=False)
    rep = hyper_ext(F2, GAMMA, kc, kc, 0)
    assert rep.stable_dim == 1


def test_ext1_v_ell():
    v = build_vy("ell")
    rep = hyper_ext(F2, GAMMA, v, v, 1)
    assert rep.stable_dim == 3
    assert rep.level_dims_resolution == rep.level_dims_hyper


def test_ext_invariant_under_quasi_isomorphic_replacement():
    # V (+) an acyclic cone has the same Ext^1 against V.
    v = build_vy("ell")
    fat = v.direct_sum(cone(identity_map(build_vy("-1"))))
    rep1 = hyper_ext(F2, GAMMA, v, v, 1)
    rep2 = hyper_ext(F2, GAMMA, fat, v, 1)
    assert rep1.stable_dim == rep2.stable_dim


def test_lift_of_identity_homotopic_to_identity():
    # Comparing a resolution with itself transports every cocycle to a
    # cohomologous one.
    ws2 = StableCohomology(F2, GAMMA, 2)
    res = ws2.resolutions[0]
    psis = comparison_maps(res, res, 3)
    hl = h_class(ws2, "ell")
    from strictperf.cohomology import extend_b_linear, _one_index

    alg = ws2.algebras[0]
    kmod = ws2.coeffs[0].term(0)
    full = extend_b_linear(alg, kmod, hl.params.reshape(res.term_rank(-1), kmod.dim))
    moved = linalg.matmul(psis[-1], full, ws2.ring.mod)
    params = np.vstack([
        moved[r * alg.dim + _one_index(alg)] for r in range(res.term_rank(-1))
    ]).reshape(-1)
    ht = ws2.hom_totals[0]
    diff = (params - hl.params) % 2
    if diff.any():
        b = ht.coboundaries(1)
        assert b.nrows and linalg.in_span(b, diff.reshape(1, -1))
