"""Common zeros of plane forms over large extension fields, by slicing.

P^2(E) is covered by the lines x = c z (points (c:y:1)), the line z = 0 minus
(0:1:0), and the point (0:1:0).  On each slice the forms become univariate in y;
a slice can carry a common zero only when the gcd of the restrictions is
non-constant, and only those slices are scanned point by point.  The gcds are
computed for all slices at once with a vectorised Euclid.
"""

from __future__ import annotations

import numpy as np

from . import bulk
from .fields import FieldCtx, embedding
from .mpoly import MultiPoly, PolyRing, ResourceCapExceeded, hasse, monomials, partials

#: largest number of points scanned on flagged slices
MAX_SCAN = 4_000_000


def degrees(A: np.ndarray) -> np.ndarray:
    """Degree of each row polynomial (index = power of y); -1 for zero rows."""
    nz = A != 0
    last = A.shape[1] - 1 - np.argmax(nz[:, ::-1], axis=1)
    return np.where(nz.any(axis=1), last, -1)


def batched_gcd(ctx: FieldCtx, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Row-wise gcd (not normalised) of two stacks of univariate polynomials."""
    W = max(A.shape[1], B.shape[1])
    A = np.pad(A, ((0, 0), (0, W - A.shape[1])))
    B = np.pad(B, ((0, 0), (0, W - B.shape[1])))
    cols = np.arange(W)
    while True:
        db = degrees(B)
        active = db >= 0
        if not active.any():
            return A
        while True:
            da = degrees(A)
            act = np.flatnonzero(active & (da >= db))
            if act.size == 0:
                break
            shift = da[act] - db[act]
            f = ctx.vmul(A[act, da[act]], ctx.vinv(B[act, db[act]]))
            src = cols[None, :] - shift[:, None]
            S = np.where(src >= 0, B[act[:, None], np.clip(src, 0, None)], 0)
            A[act] = ctx.vsub(A[act], ctx.vmul(f[:, None], S))
        idx = np.flatnonzero(active)
        A[idx], B[idx] = B[idx].copy(), A[idx].copy()


def slice_coeffs(G: MultiPoly, E: FieldCtx, table, c: np.ndarray) -> np.ndarray:
    """Coefficients in y of G(c, y, 1) for every c, shape (len(c), deg+1)."""
    d = G.d
    out = np.zeros((c.shape[0], d + 1), dtype=np.int64)
    powers = [np.ones_like(c)]
    for _ in range(d):
        powers.append(E.vmul(powers[-1], c))
    for e, coef in G.terms.items():
        cc = table[coef]
        out[:, e[1]] = E.vadd(out[:, e[1]], E.vmul(np.full_like(c, cc), powers[e[0]]))
    return out


def infinity_coeffs(G: MultiPoly, table) -> np.ndarray:
    """Coefficients in y of G(1, y, 0)."""
    out = np.zeros((1, G.d + 1), dtype=np.int64)
    for e, coef in G.terms.items():
        if e[2] == 0:
            out[0, e[1]] = table[coef]
    return out


def common_zeros(forms: list[MultiPoly], E: FieldCtx, max_scan: int = MAX_SCAN) -> np.ndarray:
    """Canonical points of P^2(E) where every form vanishes.

    The forms have coefficients in a subfield of E.  Only the first two forms
    drive the slice selection; all forms are checked on the scanned points.
    """
    if not forms or forms[0].n != 2:
        raise ValueError("common_zeros needs plane forms")
    base = forms[0].ctx
    table = np.asarray(embedding(base, E), dtype=np.int64)
    lifted = [G.map_coeffs(E, table) for G in forms]
    live = [G for G in forms if not G.is_zero()]
    if not live:
        if bulk.count_points(E.q, 2) > max_scan:
            raise ResourceCapExceeded(f"every point of P^2(GF({E.spec})) is a common zero")
        return bulk.points_array(E, 2)
    c = np.arange(E.q, dtype=np.int64)
    rows = [np.concatenate([slice_coeffs(G, E, table, c), infinity_coeffs(G, table)]) for G in live]
    g = rows[0]
    for R in rows[1:2]:
        g = batched_gcd(E, g, R)
    flagged = np.flatnonzero(degrees(g) != 0)
    ys = np.arange(E.q, dtype=np.int64)
    found = [np.array([[0, 1, 0]], dtype=np.int64)]
    per_chunk = max(1, max_scan // E.q)
    if flagged.size * E.q > 50 * max_scan:
        raise ResourceCapExceeded(f"{flagged.size} flagged slices over GF({E.spec})")
    for start in range(0, flagged.size, per_chunk):
        fl = flagged[start:start + per_chunk]
        aff = fl[fl < E.q]
        pts = []
        if aff.size:
            P = np.zeros((aff.size * E.q, 3), dtype=np.int64)
            P[:, 0] = np.repeat(aff, E.q)
            P[:, 1] = np.tile(ys, aff.size)
            P[:, 2] = 1
            pts.append(P)
        if (fl == E.q).any():
            P = np.zeros((E.q, 3), dtype=np.int64)
            P[:, 0] = 1
            P[:, 1] = ys
            pts.append(P)
        P = np.concatenate(pts)
        mask = np.ones(P.shape[0], dtype=bool)
        for G in lifted:
            idx = np.flatnonzero(mask)
            mask[idx] = bulk.eval_many(G, P[idx]) == 0
        found.append(P[mask])
    P = np.concatenate(found)
    mask = np.ones(P.shape[0], dtype=bool)
    for G in lifted:
        mask &= bulk.eval_many(G, P) == 0
    P = bulk.normalize(E, P[mask]) if mask.any() else P[:0]
    if P.shape[0] == 0:
        return P
    P = np.unique(P, axis=0)
    order = np.lexsort(tuple(P.T[::-1]) + (bulk.pivots(P),))
    return P[order]


def second_order_form(F: MultiPoly) -> MultiPoly:
    """G(p) = h_2(p)[w] with w = grad F(p) x p, a form of degree 3d - 2.

    On a point p of X_F that is nonsingular with w independent of p, G(p) is a
    nonzero multiple of the t^2 coefficient of F along the tangent line, so
    every flex and every singular point of X_F is a zero of F and G.
    """
    if F.n != 2:
        raise ValueError("plane forms only")
    x = [MultiPoly.from_dict(F.ctx, 2, {e: 1}) for e in ((1, 0, 0), (0, 1, 0), (0, 0, 1))]
    g = partials(F)
    w = [g[1] * x[2] - g[2] * x[1], g[2] * x[0] - g[0] * x[2], g[0] * x[1] - g[1] * x[0]]
    total = None
    for beta in monomials(3, 2):
        H = hasse(F, beta)
        if H.is_zero():
            continue
        term = H
        for i, b in enumerate(beta):
            for _ in range(b):
                term = term * w[i]
        total = term if total is None else total + term
    if total is None:
        return MultiPoly(PolyRing(F.ctx, 2, 3 * F.d - 2), {})
    return total


def flex_candidates(F: MultiPoly, E: FieldCtx) -> np.ndarray:
    """Points of P^2(E) that can carry a flag of multiplicity >= 3."""
    return common_zeros([F, second_order_form(F)], E)


def singular_points(F: MultiPoly, E: FieldCtx) -> np.ndarray:
    """Singular points of a plane curve over E (F is included for char | d)."""
    return common_zeros([G for G in partials(F)] + [F], E)
