import itertools
import random

import numpy as np
import pytest

from strictperf.linalg import (
    HowellForm,
    Modulus,
    SolveContext,
    eye,
    howell,
    in_span,
    inverse,
    kernel,
    matmul,
    preimage_span,
    quotient_structure,
    snf_diagonal,
    solve,
    span_eq,
    span_intersect,
    span_sum,
    zeros,
    zq,
)

Z8 = Modulus(2, 3)
Z4 = Modulus(2, 2)
Z2 = Modulus(2, 1)
Z9 = Modulus(3, 2)


def brute_span(mat, mod):
    """Row span by exhaustive enumeration of coefficient vectors."""
    mat = zq(mat, mod)
    r = mat.shape[0]
    out = set()
    for coeffs in itertools.product(range(mod.q), repeat=r):
        v = (np.asarray(coeffs, dtype=np.int64) @ mat) % mod.q
        out.add(tuple(int(x) for x in v))
    return out


def test_howell_identity_is_fixed():
    h = howell(eye(2), Z8)
    assert np.array_equal(h.matrix, eye(2))
    assert h.pivot_cols == (0, 1)


def test_howell_zero_matrix():
    h = howell(zeros(3, 2), Z8)
    assert h.nrows == 0


def test_howell_span_oracle_z8():
    # Span of [[2,4],[0,4]] over Z/8, checked against full enumeration.
    m = [[2, 4], [0, 4]]
    h = howell(m, Z8)
    assert brute_span(m, Z8) == brute_span(h.matrix, Z8)
    assert h.span_size() == len(brute_span(m, Z8))
    # The canonical form of this span, frozen from the enumeration oracle.
    assert np.array_equal(h.matrix, np.array([[2, 0], [0, 4]]))


def test_howell_idempotent_and_canonical_random():
    rng = random.Random(7)
    for mod in (Z8, Z4, Z9):
        for _ in range(60):
            r, c = rng.randint(1, 3), rng.randint(1, 3)
            m = np.array(
                [[rng.randrange(mod.q) for _ in range(c)] for _ in range(r)],
                dtype=np.int64,
            )
            h1 = howell(m, mod)
            assert span_eq(howell(h1.matrix, mod), h1)
            # A random invertible row mix preserves the span, hence the form.
            while True:
                u = np.array(
                    [[rng.randrange(mod.q) for _ in range(r)] for _ in range(r)],
                    dtype=np.int64,
                )
                if inverse(u, mod) is not None:
                    break
            h2 = howell(matmul(u, m, mod), mod)
            assert span_eq(h1, h2)
            assert brute_span(m, mod) == brute_span(h1.matrix, mod)


def test_solve_identity():
    assert np.array_equal(solve(eye(3), [5, 1, 2], Z8), np.array([5, 1, 2]))


def test_solve_brute_force_z4():
    # x * [2] = [2] over Z/4 has the solutions {1, 3}; ours must be one.
    x = solve([[2]], [2], Z4)
    assert x is not None and (x[0] * 2) % 4 == 2
    assert solve([[2]], [1], Z4) is None
    # Completeness against brute force on every rhs.
    for b in range(4):
        expect = any((t * 2) % 4 == b for t in range(4))
        assert (solve([[2]], [b], Z4) is not None) == expect


def test_solve_soundness_and_completeness_random():
    rng = random.Random(11)
    for mod in (Z4, Z8, Z9):
        for _ in range(40):
            r, c = rng.randint(1, 3), rng.randint(1, 3)
            if mod.q**r > 4096:
                continue
            m = np.array(
                [[rng.randrange(mod.q) for _ in range(c)] for _ in range(r)],
                dtype=np.int64,
            )
            b = np.array([rng.randrange(mod.q) for _ in range(c)], dtype=np.int64)
            x = solve(m, b, mod)
            expect = any(
                np.array_equal((np.array(t, dtype=np.int64) @ m) % mod.q, b)
                for t in itertools.product(range(mod.q), repeat=r)
            )
            assert (x is not None) == expect
            if x is not None:
                assert np.array_equal((x @ m) % mod.q, b)


def test_kernel_identity_trivial():
    assert kernel(eye(2), Z4).nrows == 0


def test_kernel_brute_force_examples():
    k = kernel([[2]], Z4)
    assert np.array_equal(k.matrix, np.array([[2]]))
    k = kernel([[1, 1], [1, 1]], Z2)
    assert np.array_equal(k.matrix, np.array([[1, 1]]))


def test_kernel_image_duality():
    rng = random.Random(3)
    for mod in (Z2, Z4, Z8):
        for _ in range(40):
            r, c = rng.randint(1, 3), rng.randint(1, 3)
            if r * mod.m * round(np.log2(mod.p)) > 16:
                continue
            m = np.array(
                [[rng.randrange(mod.q) for _ in range(c)] for _ in range(r)],
                dtype=np.int64,
            )
            ker = kernel(m, mod)
            im = howell(m, mod)
            n_ker = len(brute_span(ker.matrix, mod)) if ker.nrows else 1
            n_im = len(brute_span(m, mod))
            assert n_ker * n_im == mod.q**r
            assert ker.span_size() == n_ker and im.span_size() == n_im
            # Kernel rows really annihilate, and brute-force kernel vectors
            # lie in the computed span.
            if ker.nrows:
                assert not matmul(ker.matrix, m, mod).any()
            for v in itertools.product(range(mod.q), repeat=r):
                va = (np.array(v, dtype=np.int64) @ m) % mod.q
                if not va.any():
                    assert in_span(ker, np.array(v, dtype=np.int64)) or ker.nrows == 0 and not any(v)


def test_quotient_structure_examples():
    full = howell(eye(2), Z4)
    assert quotient_structure(full, 2) == []
    empty = howell(zeros(0, 1), Z4)
    assert quotient_structure(empty, 1) == [4]
    two = howell([[2]], Z4)
    assert quotient_structure(two, 1) == [2]


def test_quotient_structure_cardinality_random():
    rng = random.Random(19)
    for mod in (Z4, Z8, Z9):
        for _ in range(40):
            r, c = rng.randint(1, 3), rng.randint(1, 4)
            m = np.array(
                [[rng.randrange(mod.q) for _ in range(c)] for _ in range(r)],
                dtype=np.int64,
            )
            h = howell(m, mod)
            fac = quotient_structure(h, c)
            size = 1
            for d in fac:
                size *= d
            assert size * h.span_size() == mod.q**c
            assert all(mod.q % d == 0 for d in fac)


def test_span_intersect_brute():
    rng = random.Random(23)
    for _ in range(30):
        a = np.array([[rng.randrange(4) for _ in range(2)] for _ in range(2)], dtype=np.int64)
        b = np.array([[rng.randrange(4) for _ in range(2)] for _ in range(2)], dtype=np.int64)
        ha, hb = howell(a, Z4), howell(b, Z4)
        got = span_intersect(ha, hb)
        expect = brute_span(a, Z4) & brute_span(b, Z4)
        have = brute_span(got.matrix, Z4) if got.nrows else {(0, 0)}
        assert have == expect


def test_preimage_span_brute():
    rng = random.Random(29)
    for _ in range(30):
        a = np.array([[rng.randrange(4) for _ in range(2)] for _ in range(2)], dtype=np.int64)
        t = np.array([[rng.randrange(4) for _ in range(2)]], dtype=np.int64)
        ht = howell(t, Z4)
        pre = preimage_span(a, ht, Z4)
        tspan = brute_span(t, Z4)
        for v in itertools.product(range(4), repeat=2):
            va = tuple(int(x) for x in (np.array(v, dtype=np.int64) @ a) % 4)
            assert (va in tspan) == in_span(pre, np.array(v, dtype=np.int64))


def test_inverse_round_trip():
    rng = random.Random(31)
    n_ok = 0
    for _ in range(60):
        m = np.array([[rng.randrange(8) for _ in range(3)] for _ in range(3)], dtype=np.int64)
        inv = inverse(m, Z8)
        if inv is not None:
            n_ok += 1
            assert np.array_equal(matmul(m, inv, Z8), eye(3))
            assert np.array_equal(matmul(inv, m, Z8), eye(3))
    assert n_ok > 5


def test_snf_diagonal_consistency():
    rng = random.Random(37)
    for _ in range(30):
        m = np.array([[rng.randrange(8) for _ in range(3)] for _ in range(2)], dtype=np.int64)
        diag, v, v_inv = snf_diagonal(m, Z8)
        assert np.array_equal(matmul(v, v_inv, Z8), eye(3))
        assert diag == sorted(diag)
