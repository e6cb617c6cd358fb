from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from incidence.fields import (FieldElem, FieldError, arith, embedding, extension,
                              is_prime, make_field, parse_field, root_codes, univariate_roots)

FIELDS = [(2, 1), (3, 1), (7, 1), (101, 1), (2, 2), (2, 3), (3, 2), (5, 2), (2, 4), (3, 3)]


def elems(ctx):
    return st.integers(0, ctx.q - 1)


def test_make_field_examples():
    assert make_field(2, 1).min_poly == ()
    assert make_field(2, 2).min_poly == (1, 1, 1)
    assert make_field(3, 2).min_poly == (1, 0, 1)
    assert make_field(2, 2) is make_field(2, 2)


def _divides(g, f, p):
    """Trial division of f by monic g over GF(p), coefficients low -> high."""
    f = list(f)
    while len(f) >= len(g):
        c = f[-1]
        shift = len(f) - len(g)
        for i, x in enumerate(g):
            f[shift + i] = (f[shift + i] - c * x) % p
        f.pop()
    return not any(f)


def _irreducible_oracle(f, p):
    k = len(f) - 1
    for deg in range(1, k // 2 + 1):
        for low in itertools.product(range(p), repeat=deg):
            if _divides(list(low) + [1], f, p):
                return False
    return True


def test_modulus_is_lex_first_irreducible():
    for p, k in [(2, 2), (2, 3), (3, 2), (5, 2), (2, 4), (3, 3), (2, 6)]:
        ctx = make_field(p, k)
        assert _irreducible_oracle(ctx.min_poly, p)
        for high_to_low in itertools.product(range(p), repeat=k):
            f = tuple(reversed(high_to_low)) + (1,)
            if f == ctx.min_poly:
                break
            assert not _irreducible_oracle(f, p)


def test_invalid_fields():
    for bad in [(4, 1), (1, 1), (2, 0), (9, 1)]:
        with pytest.raises(FieldError):
            make_field(*bad)
    with pytest.raises(FieldError):
        parse_field("abc")


def test_parse_field():
    assert parse_field("7").q == 7
    assert parse_field("2^3").q == 8


def test_arith_examples():
    f7 = make_field(7)
    assert arith(f7, FieldElem((3,)), FieldElem((5,)), "div") == FieldElem((2,))
    f4 = make_field(2, 2)
    u = FieldElem((0, 1))
    assert arith(f4, u, u, "mul") == FieldElem((1, 1))
    with pytest.raises(FieldError):
        arith(f4, FieldElem((1,)), u, "add")


def test_roots_examples():
    f5 = make_field(5)
    assert univariate_roots(f5, [FieldElem((1,)), FieldElem((0,)), FieldElem((1,))]) == {FieldElem((2,)), FieldElem((3,))}
    f2 = make_field(2)
    assert univariate_roots(f2, [FieldElem((1,))] * 3) == set()
    f4 = make_field(2, 2)
    one = FieldElem((1, 0))
    assert univariate_roots(f4, [one, one, one]) == {FieldElem((0, 1)), FieldElem((1, 1))}


@pytest.mark.parametrize("pk", [pk for pk in FIELDS if pk[0] ** pk[1] <= 27])
def test_field_axioms_exhaustive_small(pk):
    ctx = make_field(*pk)
    xs = list(range(ctx.q))
    for a in xs:
        assert ctx.add(a, ctx.neg(a)) == 0
        if a:
            assert ctx.mul(a, ctx.inv(a)) == 1
        for b in xs:
            assert ctx.add(a, b) == ctx.add(b, a)
            assert ctx.mul(a, b) == ctx.mul(b, a)
            for c in xs:
                assert ctx.mul(a, ctx.add(b, c)) == ctx.add(ctx.mul(a, b), ctx.mul(a, c))


@pytest.mark.parametrize("pk", FIELDS)
def test_vector_ops_match_scalar(pk):
    ctx = make_field(*pk)
    rng = np.random.default_rng(1)
    a = rng.integers(0, ctx.q, 500)
    b = rng.integers(0, ctx.q, 500)
    assert list(ctx.vadd(a, b)) == [ctx.add(int(x), int(y)) for x, y in zip(a, b)]
    assert list(ctx.vsub(a, b)) == [ctx.sub(int(x), int(y)) for x, y in zip(a, b)]
    assert list(ctx.vmul(a, b)) == [ctx.mul(int(x), int(y)) for x, y in zip(a, b)]
    nz = b[b != 0]
    assert list(ctx.vinv(nz)) == [ctx.inv(int(x)) for x in nz]
    assert list(ctx.vpow(a, 5)) == [ctx.pow(int(x), 5) for x in a]


@given(st.sampled_from(FIELDS), st.data())
def test_frobenius_and_fermat(pk, data):
    ctx = make_field(*pk)
    a = data.draw(elems(ctx))
    b = data.draw(elems(ctx))
    p = ctx.p
    assert ctx.pow(ctx.add(a, b), p) == ctx.add(ctx.pow(a, p), ctx.pow(b, p))
    assert ctx.pow(a, ctx.q) == a
    if b:
        assert ctx.mul(ctx.div(a, b), b) == a


@pytest.mark.parametrize("small,j", [((2, 1), 3), ((2, 2), 2), ((3, 1), 2), ((5, 1), 2), ((2, 1), 4)])
def test_embedding_is_homomorphism(small, j):
    K = make_field(*small)
    E = extension(K, j)
    t = embedding(K, E)
    assert len(set(t)) == K.q
    for a in range(K.q):
        for b in range(K.q):
            assert t[K.add(a, b)] == E.add(t[a], t[b])
            assert t[K.mul(a, b)] == E.mul(t[a], t[b])


def test_embedding_rejects_wrong_degree():
    with pytest.raises(FieldError):
        embedding(make_field(2, 2), make_field(2, 3))


def test_root_codes_zero_polynomial():
    with pytest.raises(ValueError):
        root_codes(make_field(3), [0, 0])


@given(st.integers(2, 5000))
def test_is_prime_matches_trial_division(n):
    assert is_prime(n) == all(n % k for k in range(2, int(n ** 0.5) + 1))
