import random

import numpy as np
import pytest

from strictperf import linalg
from strictperf.groups import (
    CommuteCertificate,
    GroupAlgebra,
    GroupModel,
    NormalFormBasis,
    commute_ideal_generator,
)
from strictperf.rings import ArtinianRing

F2 = ArtinianRing.zmod(2, 1)
F2U2 = ArtinianRing.quotient_ring(2, 1, ["u"], 2, [])


def case_b(level=1, s=(1,), ring=F2, **kw):
    g = GroupModel("B", 2, ell=3, f=1, d=1, r=len(s), s=s, level=level, **kw)
    return g, GroupAlgebra(ring, g)


def test_gamma_realization():
    for m in (1, 2, 3):
        g = GroupModel.gamma_z2_x_z2(m)
        assert g.order == 2 ** (m + 1)
        assert g.verify_relations()


def test_trivial_group():
    g = GroupModel("A", 2)
    assert g.order == 1
    assert g.elements() == [()]
    assert g.verify_relations()


def test_case_b_metacyclic_relation():
    g, _ = case_b(level=1)  # w2 of order 4, w1 w2 w1^-1 = w2^3
    assert g.verify_relations()
    w1, w2 = g.w1(), g.w2()
    lhs = g.mul(g.mul(w1, w2), g.inv(w1))
    assert lhs == g.power(w2, 3)
    assert g.order_of(w2) == 4
    # Predicted order: |w2| * |phi|.
    assert g.order == 4 * g.gen_orders[-1]


def test_case_b_inverse_and_roundtrip():
    g, _ = case_b(level=2)
    rng = random.Random(1)
    els = g.elements()
    for _ in range(50):
        a = els[rng.randrange(len(els))]
        b = els[rng.randrange(len(els))]
        assert g.mul(a, g.inv(a)) == g.identity()
        assert g.inv(g.mul(a, b)) == g.mul(g.inv(b), g.inv(a))


def test_congruence_violation_rejected():
    with pytest.raises(ValueError):
        GroupModel("B", 2, ell=3, f=1, d=1, r=1, s=(1,), level=2, phi_level=0)


def test_augmentation_is_multiplicative():
    g, B = case_b(level=1)
    rng = random.Random(2)
    for _ in range(10):
        x = np.array([rng.randrange(2) for _ in range(B.dim)], dtype=np.int64)
        y = np.array([rng.randrange(2) for _ in range(B.dim)], dtype=np.int64)
        ax = B.augmentation(x)
        ay = B.augmentation(y)
        assert np.array_equal(B.augmentation(B.mul(x, y)), B.ring.mul_coords(ax, ay))
    for el in g.elements():
        assert np.array_equal(B.augmentation(B.element_vector([(el, 1)])), B.ring.one_coords())


def test_normal_form_identity_and_binomial():
    g, B = case_b(level=1)
    nf = NormalFormBasis(B)
    # x = 1 sits on the label (u, a, b, c) = (0, 0, 0, 0).
    z = nf.to_normal_form(B.unit_vector())
    idx = nf.labels.index(tuple([0] * len(nf.ranges)))
    expect = np.zeros(B.dim, dtype=np.int64)
    expect[idx * B.nA : idx * B.nA + B.nA] = B.ring.one_coords()
    assert np.array_equal(z, expect)
    # x = w2^(p^s) = ((w2^(p^s) - 1) + 1): labels c=0 and c=1 with coefficient 1.
    x = B.element_vector([(g.power(g.w2(), 2), 1)])
    z = nf.to_normal_form(x)
    lab0 = tuple([0] * len(nf.ranges))
    lab1 = list(lab0)
    lab1[-1] = 1
    i0, i1 = nf.labels.index(lab0), nf.labels.index(tuple(lab1))
    expect = np.zeros(B.dim, dtype=np.int64)
    expect[i0 * B.nA] = 1
    expect[i1 * B.nA] = 1
    assert np.array_equal(z, expect)


@pytest.mark.parametrize("level", [1, 2])
def test_normal_form_round_trip_random(level):
    g, B = case_b(level=level)
    nf = NormalFormBasis(B)
    rng = random.Random(level)
    for _ in range(200):
        x = np.array([rng.randrange(2) for _ in range(B.dim)], dtype=np.int64)
        z = nf.to_normal_form(x)
        assert np.array_equal(nf.from_normal_form(z), x)
        w = np.array([rng.randrange(2) for _ in range(B.dim)], dtype=np.int64)
        assert np.array_equal(nf.to_normal_form(nf.from_normal_form(w)), w)


def test_normal_form_with_tilde_delta1_and_bigger_ring():
    g = GroupModel("B", 2, ell=3, f=1, d=1, r=1, s=(1,), level=1, tilde1_orders=(5,))
    B = GroupAlgebra(F2U2, g)
    nf = NormalFormBasis(B)
    rng = random.Random(9)
    for _ in range(40):
        x = np.array([rng.randrange(2) for _ in range(B.dim)], dtype=np.int64)
        assert np.array_equal(nf.from_normal_form(nf.to_normal_form(x)), x)


def test_commute_ideal_generator():
    g, B = case_b(level=1)
    cert = commute_ideal_generator(B, 1, 1)
    assert cert.holds and cert.factorization_holds
    cert = commute_ideal_generator(B, 1, 2)
    assert cert.holds and cert.factorization_holds
    # N = order(w2): both sides vanish.
    o = g.order_of(g.w2())
    cert = commute_ideal_generator(B, o, 1)
    assert cert.holds
    assert not B.binomial_element(g.w2(), 1, base_power=o).any()


def test_commute_trivial_w2():
    g = GroupModel("B", 2, ell=3, f=1, d=1, r=1, s=(0,), level=0)
    B = GroupAlgebra(F2, g)
    cert = commute_ideal_generator(B, 1, 1)
    assert cert.holds and cert.factorization_holds


def test_two_sided_ideal_span_equality():
    g, B = case_b(level=1)
    for n, npr in [(1, 1), (1, 2), (2, 1)]:
        x = B.binomial_element(g.w2(), npr, base_power=n)
        left = B.left_ideal_span(x)
        right = B.right_ideal_span(x)
        assert linalg.span_eq(left, right)


def test_quotient_length_formula():
    # B/(w2^(p^s) - 1)^N' has Z/q-length  (#labels with c < N') * length(A).
    for ring in (F2, F2U2):
        g, B = case_b(level=2, ring=ring)
        nf = NormalFormBasis(B)
        for npr in (1, 2, 3):
            x = B.binomial_element(g.w2(), npr, base_power=2)
            span = B.left_ideal_span(x)
            n_labels = sum(1 for lab in nf.labels if nf.c_degree(lab) < npr)
            # span size of the quotient: q^dim / |ideal|
            quotient_len = B.dim * ring.mod.m - round(
                np.log(span.span_size()) / np.log(ring.mod.p)
            )
            assert quotient_len == n_labels * ring.length_over_zp()


def test_right_multiplication_injective_on_low_c_labels():
    g, B = case_b(level=2)
    nf = NormalFormBasis(B)
    npr = 2
    x = B.binomial_element(g.w2(), npr, base_power=2)
    rx = B.right_mult_matrix(x)
    cmax = 2**g.level
    keep = [i for i, lab in enumerate(nf.labels) if nf.c_degree(lab) < cmax - npr]
    rows = np.kron(nf.matrix[keep], np.eye(B.nA, dtype=np.int64))
    restricted = (rows @ rx) % B.mod.q
    assert linalg.kernel(restricted, B.mod).nrows == 0


def test_group_json_round_trip():
    g, _ = case_b(level=2, s=(1, 2))
    g2 = GroupModel.from_json(g.to_json())
    assert g2.elements() == g.elements()
    gamma = GroupModel.gamma_z2_x_z2(3)
    g3 = GroupModel.from_json(gamma.to_json())
    assert g3.order == gamma.order
