from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from incidence import bulk, planar
from incidence.fields import embedding, extension, make_field
from incidence.mpoly import PolyRing, evaluate, fermat, partials, sample_poly


def poly_mul(ctx, a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = ctx.add(out[i + j], ctx.mul(x, y))
    return out


def poly_rem(ctx, a, b):
    a = list(a)
    while len(b) and b[-1] == 0:
        b = b[:-1]
    db = len(b) - 1
    inv = ctx.inv(b[-1])
    for i in range(len(a) - 1, db - 1, -1):
        c = ctx.mul(a[i], inv)
        if c:
            for j in range(db + 1):
                a[i - db + j] = ctx.sub(a[i - db + j], ctx.mul(c, b[j]))
    return a[:db] if db > 0 else []


@given(st.sampled_from([make_field(5), make_field(2, 3), make_field(7)]), st.integers(0, 2**32))
def test_batched_gcd_divides_both(ctx, seed):
    rng = np.random.default_rng(seed)
    g = [int(x) for x in rng.integers(0, ctx.q, 3)]
    g[-1] = g[-1] or 1
    a = poly_mul(ctx, g, [int(x) for x in rng.integers(0, ctx.q, 3)])
    b = poly_mul(ctx, g, [int(x) for x in rng.integers(0, ctx.q, 2)])
    out = planar.batched_gcd(ctx, np.array([a]), np.array([b]))[0]
    deg = planar.degrees(out[None])[0]
    if not any(a) and not any(b):
        return
    assert deg >= 0
    h = [int(x) for x in out[: deg + 1]]
    if any(a):
        assert not any(poly_rem(ctx, a, h))
    if any(b):
        assert not any(poly_rem(ctx, b, h))
    # g divides a and b, so it divides their gcd
    assert not any(poly_rem(ctx, h, g))


def exhaustive_common(forms, E):
    P = bulk.points_array(E, 2)
    t = np.asarray(embedding(forms[0].ctx, E))
    mask = np.ones(P.shape[0], bool)
    for G in forms:
        mask &= bulk.eval_many(G.map_coeffs(E, t), P) == 0
    return P[mask]


@pytest.mark.parametrize("q,j,d", [(2, 5, 3), (3, 3, 3), (5, 2, 4), (7, 2, 3)])
def test_singular_and_flex_candidates_match_exhaustive(q, j, d):
    ctx = make_field(q)
    E = extension(ctx, j)
    for seed in range(4):
        F = sample_poly(PolyRing(ctx, 2, d), seed)
        got = planar.singular_points(F, E)
        want = exhaustive_common(partials(F) + [F], E)
        assert sorted(map(tuple, got.tolist())) == sorted(map(tuple, want.tolist()))
        G2 = planar.second_order_form(F)
        got = planar.flex_candidates(F, E)
        want = exhaustive_common([F, G2], E)
        assert sorted(map(tuple, got.tolist())) == sorted(map(tuple, want.tolist()))


def test_second_order_form_vanishes_on_flexes():
    ctx = make_field(7)
    F = fermat(ctx, 2, 3)
    G2 = planar.second_order_form(F)
    assert G2.d == 7
    for p in [(0, 1, 6), (1, 0, 3), (1, 3, 0)]:
        assert evaluate(F, p) == 0 and evaluate(G2, p) == 0


def test_planar_rejects_surfaces():
    F = sample_poly(PolyRing(make_field(3), 3, 3), 0)
    with pytest.raises(ValueError):
        planar.common_zeros([F], make_field(9))
