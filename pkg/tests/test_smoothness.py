from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from incidence import bulk
from incidence import smoothness as sm
from incidence.experiments import planted_flag
from incidence.fields import embedding, make_field
from incidence.flags import INF, enumerate_flags, make_flag, multiplicity, standard_flag
from incidence.linalg import rank
from incidence.mpoly import MultiPoly, PolyRing, enumerate_polys, evaluate, fermat, partials, sample_poly


planted = planted_flag


def test_adapted_coeffs_example():
    ctx = make_field(5)
    for n, d in [(2, 3), (3, 4)]:
        e = [0] * (n + 1)
        e[0], e[1] = d - 1, 1
        F = MultiPoly.from_dict(ctx, n, {tuple(e): 1})
        ac = sm.adapted_coeffs(F, standard_flag(n))
        assert ac.a == tuple(1 if i == 1 else 0 for i in range(d + 1))
        assert all(not any(r) for r in ac.side)
        J = sm.jacobian_closed_form(F, standard_flag(n), 1)
        assert J.tolist() == [[1] + [0] * (2 * n - 2)]


def test_vanishing_equivalence_exhaustive():
    ctx = make_field(2)
    fl = list(enumerate_flags(ctx, 2))
    for F in enumerate_polys(PolyRing(ctx, 2, 3)):
        for f in fl[::4]:
            ac = sm.adapted_coeffs(F, f)
            assert ac.vanishing_order() == multiplicity(F, f)


FIELDS = [make_field(101), make_field(2), make_field(3), make_field(2, 2), make_field(5)]


@given(st.sampled_from(FIELDS), st.integers(2, 3), st.integers(2, 5), st.data())
def test_closed_form_matches_linearization(ctx, n, d, data):
    m = data.draw(st.integers(1, d))
    F, flag = planted(ctx, n, d, m, data.draw(st.integers(0, 2**32)))
    a = sm.jacobian_closed_form(F, flag, m)
    b = sm.jacobian_linearized(F, flag, m)
    assert a.shape == (m, 2 * n - 1)
    assert a.tolist() == b.tolist()


def test_closed_form_at_fermat_flex():
    ctx = make_field(7)
    F = fermat(ctx, 2, 3)
    flag = make_flag(ctx, [0, 1, 6], [1, 0, 0])
    assert sm.jacobian_closed_form(F, flag, 3).tolist() == sm.jacobian_linearized(F, flag, 3).tolist()


def test_char_kills_m_entry():
    ctx = make_field(2)
    F = MultiPoly.from_dict(ctx, 2, {(1, 2, 0): 1, (0, 0, 3): 1})  # a_2 = 1 at the standard flag
    J = sm.jacobian_closed_form(F, standard_flag(2), 2)
    assert J.rows[1][0] == 0


def test_not_in_y_raises():
    F = fermat(make_field(7), 2, 3)
    flag = make_flag(make_field(7), [1, 1, 1], [0, 1, 0])
    with pytest.raises(sm.NotInY):
        sm.jacobian_closed_form(F, flag, 1)
    with pytest.raises(sm.NotInY):
        sm.jacobian_linearized(F, flag, 1)


def test_row_zero_is_gradient_and_singularity_exhaustive():
    ctx = make_field(2)
    for F in enumerate_polys(PolyRing(ctx, 2, 3)):
        for f in bulk.y_flags(F, 1).as_tuples()[::3]:
            flag = make_flag(ctx, *f)
            J = sm.jacobian_linearized(F, flag, 1)
            sing = all(evaluate(G, flag.p) == 0 for G in partials(F))
            assert (not any(J.rows[0])) == sing
            assert sm.classify_flag(F, flag, 1) == ("W0" if sing else "smooth")


def test_rank_examples():
    ctx = make_field(7)
    assert sm.rank_exact(ctx, [[0, 0], [0, 0]]) == 0
    assert sm.rank_exact(ctx, [[1, 0, 0], [0, 1, 0], [0, 0, 1]]) == 3
    assert sm.rank_exact(ctx, sm.btilde(ctx, [[1, 0], [0, 1], [0, 0]])) == 3


def test_classification_examples():
    ctx = make_field(5)
    F = MultiPoly.from_dict(ctx, 2, {(1, 2, 0): 1, (0, 0, 3): 1})  # x0 x1^2 + x2^3, singular at (1:0:0)
    for f in bulk.y_flags(F, 2).as_tuples():
        if f[0] == (1, 0, 0):
            assert sm.classify_flag(F, make_flag(ctx, *f), 2) == "W2"
    ctx = make_field(101)
    smooth = 0
    for seed in range(40):
        G, flag = planted(ctx, 2, 3, 2, seed)
        smooth += sm.classify_flag(G, flag, 2) == "smooth"
    assert smooth >= 36
    assert sm.classify_flag(fermat(ctx, 2, 3), make_flag(ctx, [1, 1, 1], [0, 1, 0]), 2) == "not_in_Y"


@pytest.mark.parametrize("q,n,d,m", [(2, 2, 3, 3), (3, 2, 3, 2), (5, 2, 3, 3), (2, 3, 3, 3), (3, 2, 4, INF), (2, 2, 4, 4)])
def test_bulk_classification_matches_per_flag(q, n, d, m):
    ctx = make_field(q)
    for seed in range(4):
        F = sample_poly(PolyRing(ctx, n, d), seed)
        batch, codes = sm.classify_all(F, m)
        for (p, v), c in zip(batch.as_tuples(), codes):
            assert sm.classify_flag(F, make_flag(ctx, p, v), m) == bulk.CLASS_NAMES[c]


def test_delta_examples():
    f7 = make_field(7)
    B = [[0, 0], [1, 0], [0, 1]]
    assert sm.member_delta(f7, B) and not sm.member_delta0(f7, B) and sm.stratum_index(f7, B) == 2
    assert not sm.member_delta(f7, [[1, 0], [0, 1], [0, 0]])
    assert sm.stratum_index(f7, [[1, 0], [0, 1], [0, 0]]) is None
    # B~ rows (1,0,0,0), (2,0,1,0), (4,0,2,0): the last two are proportional
    Bt = sm.btilde(f7, [[1, 0], [2, 0], [4, 0]])
    assert Bt == [[1, 0, 0, 0], [2, 0, 1, 0], [4, 0, 2, 0]]
    assert sm.rank_exact(f7, Bt) == 2
    assert sm.member_delta0(f7, [[1, 0], [2, 0], [4, 0]]) and sm.stratum_index(f7, [[1, 0], [2, 0], [4, 0]]) == 3
    C = [[1, 0], [0, 0], [0, 0]]
    assert sm.rank_exact(f7, sm.btilde(f7, C)) == 2
    assert sm.member_delta0(f7, C) and sm.stratum_index(f7, C) == 3
    with pytest.raises(ValueError):
        sm.btilde(f7, [[0, 0], [0, 0]])


def test_delta_strata_partition_exhaustive():
    ctx = make_field(2)
    strata = {}
    for vec in itertools.product(range(2), repeat=6):
        if not any(vec):
            continue
        B = [list(vec[0:2]), list(vec[2:4]), list(vec[4:6])]
        s = sm.stratum_index(ctx, B)
        assert (s is not None) == sm.member_delta(ctx, B)
        assert sm.member_delta0(ctx, B) == (s is not None and s >= 3)
        strata[s] = strata.get(s, 0) + 1
        for i in range(2, 4):
            partial_rank = sm.rank_exact(ctx, sm.btilde(ctx, B)[:i])
            assert (s is not None and s <= i) == (partial_rank < i)
    counts = sm.count_delta(3, 2, ctx)
    assert counts.projective_total == 63
    assert counts.delta == strata[2] + strata[3]
    assert counts.delta0 == strata[3]
    assert counts.delta >= counts.delta0


def test_strata_batch_matches_scalar():
    ctx = make_field(3)
    rng = np.random.default_rng(0)
    B = rng.integers(0, 3, (300, 4, 2))
    B = B[B.reshape(300, -1).any(axis=1)]
    got = sm.strata_batch(ctx, B)
    want = [sm.stratum_index(ctx, b.tolist()) or 0 for b in B]
    assert got.tolist() == want


def test_delta_codim_formula():
    assert sm.delta_codim(3, 2) == (2, 2)
    assert sm.delta_codim(4, 2) == (1, 1)
    assert sm.delta_codim(3, 3) == (3, 4)


def test_delta_projective_ratio_band():
    # projective counts within a factor 4 of q^(lr-1-codim)
    for l, r in [(3, 2), (3, 3)]:
        codim = sm.delta_codim(l, r)[0]
        for q in (2, 3, 5):
            c = sm.count_delta(l, r, make_field(q)).delta
            target = q ** (l * r - 1 - codim)
            assert target / 4 <= c <= 4 * target, (l, r, q, c, target)


def test_fibre_counts_match_brute_force():
    for q, n, m in [(2, 2, 2), (3, 2, 2), (2, 3, 2), (2, 2, 3), (3, 2, 1)]:
        ctx = make_field(q)
        got = sm.fibre_locus_counts(n, m, ctx)
        W = W0 = W2 = 0
        r = n - 1
        for c in range(q):
            for vec in itertools.product(range(q), repeat=m * r):
                A = np.array(vec, dtype=np.int64).reshape(1, m, r)
                J = sm.fibre_jacobians(ctx, m, c, A)[0].tolist()
                w = rank(ctx, J) < m
                w2 = m >= 2 and rank(ctx, sm.fibre_jacobians(ctx, 2, 0, A[:, :2, :])[0].tolist()) < 2
                W += w
                W2 += w and w2
                W0 += w and not w2
        assert (got.W, got.W0, got.W2) == (W, W0, W2)
        assert got.ambient_dim == 1 + m * r


def test_fibre_jacobian_matches_flag_jacobian():
    ctx = make_field(5)
    for seed in range(20):
        F, flag = planted(ctx, 3, 4, 3, seed)
        ac = sm.adapted_coeffs(F, flag)
        A = np.array([ac.side[k] for k in range(3)], dtype=np.int64)[None]
        J = sm.fibre_jacobians(ctx, 3, ac.a[3], A)[0].tolist()
        assert J == sm.jacobian_closed_form(F, flag, 3).tolist()


def test_w_codim_table():
    assert sm.w_codim(2, 1, 5) == (2, None)
    assert sm.w_codim(3, 2, 5) == (2, None)
    assert sm.w_codim(3, 5, 7) == (1, None)
    assert sm.w_codim(3, 4, 3)[1] == 2
    assert sm.w_codim(3, 4, 2)[1] == 1


# --- cubics ---------------------------------------------------------------


def test_singular_point_a3_branch():
    ctx = make_field(5)
    # x0 x2^2 + x1^3 : p = (1:0:0) is singular, the x1 line has a_3 = 1
    F = MultiPoly.from_dict(ctx, 2, {(1, 0, 2): 1, (0, 3, 0): 1})
    sp = sm.singular_point_from_degenerate_flag(F, standard_flag(2))
    assert sp.branch == "a3" and sp.point == (1, 0, 0)


def test_singular_point_p_singular_branch():
    ctx = make_field(5)
    F = MultiPoly.from_dict(ctx, 2, {(1, 0, 2): 1, (0, 2, 1): 1})  # x0 x2^2 + x1^2 x2
    sp = sm.singular_point_from_degenerate_flag(F, standard_flag(2))
    assert sp.branch == "p_singular" and sp.point == (1, 0, 0)


def test_singular_point_quadratic_branch_forced_root():
    ctx = make_field(7)
    # x0^2 x2 + x1 x2^2 + x2^3: alpha = beta = 0 gives s = 0, the point (0:1:0)
    F = MultiPoly.from_dict(ctx, 2, {(2, 0, 1): 1, (0, 1, 2): 1, (0, 0, 3): 1})
    sp = sm.singular_point_from_degenerate_flag(F, standard_flag(2))
    assert sp.branch == "quadratic" and sp.point == (0, 1, 0)


def test_singular_point_all_branches_verified():
    # flags of multiplicity >= 3 planted on random cubics; degenerate ones hit every branch
    ctx = make_field(5)
    branches = set()
    for seed in range(200):
        F, flag = planted(ctx, 2, 3, 3, seed)
        if sm.jacobian_closed_form(F, flag, 3).rank() == 3:
            continue
        sp = sm.singular_point_from_degenerate_flag(F, flag)
        FE = F if sp.field == ctx else F.map_coeffs(sp.field, embedding(ctx, sp.field))
        assert evaluate(FE, sp.point) == 0
        assert all(evaluate(G, sp.point) == 0 for G in partials(FE))
        branches.add((sp.branch, sp.field.q))
    assert branches == {("a3", 5), ("p_singular", 5), ("quadratic", 5), ("quadratic", 25)}


def test_singular_point_preconditions():
    with pytest.raises(ValueError):
        sm.singular_point_from_degenerate_flag(fermat(make_field(3), 2, 3), standard_flag(2))
    with pytest.raises(ValueError):
        sm.singular_point_from_degenerate_flag(fermat(make_field(7), 2, 4), standard_flag(2))
    ctx = make_field(7)
    F = fermat(ctx, 2, 3)
    with pytest.raises(ValueError):
        sm.singular_point_from_degenerate_flag(F, make_flag(ctx, [0, 1, 6], [1, 0, 0]))
