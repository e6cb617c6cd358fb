"""Vectorised enumeration core.

Everything here works on int64 arrays of field codes and is checked against the
per-flag routines in :mod:`incidence.flags` and :mod:`incidence.smoothness`.

The key device is the Hasse expansion at a point: for a form F and point p,
``F(p + t v) = sum_k t^k h_k(p)[v]`` where ``h_k(p)`` is the degree-k form whose
coefficients are the Hasse derivatives ``H^beta F(p)``, ``|beta| = k``.  Flags
through p in Y_{F,m} are the directions where ``h_1 .. h_{m-1}`` vanish, so the
fibre over p is found by solving the linear condition ``h_1 = 0`` directly and
filtering the survivors by the higher forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .fields import FieldCtx
from .linalg import batched_rank
from .mpoly import MultiPoly, ResourceCapExceeded, hasse, monomials

INF = math.inf

#: default caps; the harness overrides them from its config
MAX_POINTS = 4_000_000
MAX_PAIRS = 12_000_000

CLASS_NAMES = ("not_in_Y", "smooth", "W0", "W2")
NOT_IN_Y, SMOOTH, W0, W2 = range(4)


def count_points(q: int, n: int) -> int:
    return (q ** (n + 1) - 1) // (q - 1)


def _lex_block(q: int, r: int) -> np.ndarray:
    if r == 0:
        return np.zeros((1, 0), dtype=np.int64)
    return np.indices((q,) * r, dtype=np.int64).reshape(r, -1).T


@lru_cache(maxsize=8)
def points_array(ctx: FieldCtx, n: int) -> np.ndarray:
    """All points of P^n(GF(q)), first nonzero coordinate 1, in enumeration order."""
    total = count_points(ctx.q, n)
    if total > MAX_POINTS:
        raise ResourceCapExceeded(f"P^{n}(GF({ctx.spec})) has {total} points > {MAX_POINTS}")
    blocks = []
    for piv in range(n + 1):
        free = _lex_block(ctx.q, n - piv)
        blk = np.zeros((free.shape[0], n + 1), dtype=np.int64)
        blk[:, piv] = 1
        blk[:, piv + 1:] = free
        blocks.append(blk)
    out = np.concatenate(blocks)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=32)
def directions_array(ctx: FieldCtx, n: int, piv: int) -> np.ndarray:
    """Canonical directions for a point with pivot ``piv``: points with x_piv = 0."""
    sub = points_array(ctx, n - 1)
    out = np.insert(sub, piv, 0, axis=1)
    out.setflags(write=False)
    return out


def pivots(P: np.ndarray) -> np.ndarray:
    return np.argmax(P != 0, axis=1)


def normalize(ctx: FieldCtx, V: np.ndarray) -> np.ndarray:
    """Scale rows so that the first nonzero coordinate is 1."""
    piv = pivots(V)
    lead = V[np.arange(V.shape[0]), piv]
    return ctx.vmul(ctx.vinv(lead)[:, None], V)


def _mono_values(ctx: FieldCtx, P: np.ndarray, exps: list, d: int) -> list:
    powers = [[np.ones(P.shape[0], dtype=np.int64)] for _ in range(P.shape[1])]
    for i in range(P.shape[1]):
        col = P[:, i]
        for _ in range(d):
            powers[i].append(ctx.vmul(powers[i][-1], col))
    return powers


def eval_terms(ctx: FieldCtx, terms: dict, P: np.ndarray, d: int) -> np.ndarray:
    """sum_e c_e P^e at every row of P, for a term dict {exponent: code}."""
    N = P.shape[0]
    if not terms:
        return np.zeros(N, dtype=np.int64)
    powers = _mono_values(ctx, P, list(terms), d)
    if ctx.k == 1:
        p = ctx.p
        # keep products below 2^62 before reducing
        per = max(1, int(62 / max(1.0, math.log2(p))) - 1)
        acc = np.zeros(N, dtype=np.int64)
        for e, c in terms.items():
            t = np.full(N, c, dtype=np.int64)
            used = 1
            for i, ei in enumerate(e):
                if ei:
                    if used >= per:
                        t %= p
                        used = 1
                    t = t * powers[i][ei]
                    used += 1
            acc += t % p
        return acc % p
    acc = np.zeros(N, dtype=np.int64)
    for e, c in terms.items():
        t = np.full(N, c, dtype=np.int64)
        for i, ei in enumerate(e):
            if ei:
                t = ctx.vmul(t, powers[i][ei])
        acc = ctx.vadd(acc, t)
    return acc


def eval_many(F: MultiPoly, P: np.ndarray) -> np.ndarray:
    """F at every row of P."""
    return eval_terms(F.ctx, F.terms, P, F.d)


def eval_all_points(F: MultiPoly) -> np.ndarray:
    """F at every point of :func:`points_array`, by Horner in the last coordinate."""
    ctx, n, d = F.ctx, F.n, F.d
    q = ctx.q
    if count_points(q, n) > MAX_POINTS:
        raise ResourceCapExceeded(f"P^{n}(GF({ctx.spec})) exceeds {MAX_POINTS} points")
    c = np.arange(q, dtype=np.int64)[None, :]
    out = []
    for piv in range(n + 1):
        live = {e: v for e, v in F.terms.items() if not any(e[:piv])}
        free = n - piv
        if free == 0:
            e = tuple(d if i == n else 0 for i in range(n + 1))
            out.append(np.array([live.get(e, 0)], dtype=np.int64))
            continue
        prefix = np.zeros((q ** (free - 1), n), dtype=np.int64)
        prefix[:, piv] = 1
        prefix[:, piv + 1:] = _lex_block(q, free - 1)
        G = [{} for _ in range(d + 1)]
        for e, v in live.items():
            G[e[n]][e[:n]] = v
        acc = np.broadcast_to(eval_terms(ctx, G[d], prefix, d)[:, None], (prefix.shape[0], q))
        for k in range(d - 1, -1, -1):
            acc = ctx.vadd(ctx.vmul(acc, c), eval_terms(ctx, G[k], prefix, d)[:, None])
        out.append(np.ascontiguousarray(acc).reshape(-1))
    return np.concatenate(out)


@lru_cache(maxsize=256)
def hasse_forms(F: MultiPoly, k: int) -> tuple[tuple, tuple]:
    """(betas, Hasse derivative forms) of order k, betas in monomial order."""
    betas = tuple(monomials(F.n + 1, k))
    return betas, tuple(hasse(F, b) for b in betas)


class PointJets:
    """Hasse derivative values of F at rows of P, computed on demand.

    Values are computed once per distinct base point and shared by every view
    produced with :meth:`take`.
    """

    def __init__(self, F: MultiPoly, P: np.ndarray, idx: np.ndarray | None = None,
                 cache: dict | None = None):
        self.F = F
        self.base = P
        self.idx = idx
        self._cache: dict[int, np.ndarray] = {} if cache is None else cache

    @property
    def P(self) -> np.ndarray:
        return self.base if self.idx is None else self.base[self.idx]

    def __len__(self) -> int:
        return self.base.shape[0] if self.idx is None else self.idx.shape[0]

    def order(self, k: int) -> tuple[tuple, np.ndarray]:
        betas = tuple(monomials(self.F.n + 1, k))
        if k > self.F.d:
            return betas, np.zeros((len(self), len(betas)), dtype=np.int64)
        if k not in self._cache:
            _, forms = hasse_forms(self.F, k)
            cols = [eval_many(G, self.base) for G in forms]
            self._cache[k] = np.stack(cols, axis=1)
        H = self._cache[k]
        return betas, H if self.idx is None else H[self.idx]

    def take(self, idx: np.ndarray) -> PointJets:
        idx = np.asarray(idx, dtype=np.int64)
        new = idx if self.idx is None else self.idx[idx]
        return PointJets(self.F, self.base, new, self._cache)


def form_values(ctx: FieldCtx, betas, H: np.ndarray, V: np.ndarray) -> np.ndarray:
    """sum_beta H[:, beta] * V^beta, row by row."""
    N = V.shape[0]
    if not betas:
        return np.zeros(N, dtype=np.int64)
    k = sum(betas[0])
    powers = _mono_values(ctx, V, betas, k)
    terms = []
    for b, beta in enumerate(betas):
        t = H[:, b]
        for i, bi in enumerate(beta):
            if bi:
                t = ctx.vmul(t, powers[i][bi])
        terms.append(t)
    return ctx.vsum(terms, N)


@dataclass
class FlagBatch:
    """Flags (P[i], V[i]) with the jets of F at each P[i]."""

    F: MultiPoly
    P: np.ndarray
    V: np.ndarray
    jets: PointJets

    def __len__(self) -> int:
        return self.P.shape[0]

    def subset(self, mask) -> FlagBatch:
        return self.take(np.flatnonzero(mask))

    def take(self, idx) -> FlagBatch:
        return FlagBatch(self.F, self.P[idx], self.V[idx], self.jets.take(idx))

    def sorted(self) -> FlagBatch:
        """Order by point (enumeration order) and then direction."""
        if len(self) < 2:
            return self
        rows = self.jets.idx if self.jets.idx is not None else np.arange(len(self))
        V = self.V
        return self.take(np.lexsort(tuple(V.T[::-1]) + (pivots(V), rows)))

    def line_coeff(self, k: int) -> np.ndarray:
        """a_k: coefficient of t^k in F(p + t v)."""
        betas, H = self.jets.order(k)
        return form_values(self.F.ctx, betas, H, self.V)

    def as_tuples(self) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
        return [(tuple(map(int, p)), tuple(map(int, v))) for p, v in zip(self.P, self.V)]


def _solve_tangent(ctx: FieldCtx, n: int, g: np.ndarray, piv: np.ndarray):
    """Canonical directions v (v_piv = 0) with g.v = 0, for rows of g with g' != 0.

    Returns (row index, V) arrays.
    """
    gp = g.copy()
    gp[np.arange(g.shape[0]), piv] = 0
    nz = gp != 0
    last = n - np.argmax(nz[:, ::-1], axis=1)
    U = points_array(ctx, n - 2) if n >= 2 else np.ones((1, 0), np.int64)
    rows_out, V_out = [], []
    for pv in range(n + 1):
        for j in range(n + 1):
            if j == pv:
                continue
            sel = np.flatnonzero((piv == pv) & (last == j) & nz.any(axis=1))
            if sel.size == 0:
                continue
            free = [c for c in range(n + 1) if c not in (pv, j)]
            G = gp[sel]
            M = U.shape[0]
            V = np.zeros((sel.size, M, n + 1), dtype=np.int64)
            V[:, :, free] = U[None, :, :]
            # v_j = -(sum_free g_f u_f) / g_j
            s = np.zeros((sel.size, M), dtype=np.int64)
            for t, f in enumerate(free):
                s = ctx.vadd(s, ctx.vmul(G[:, f][:, None], U[None, :, t]))
            inv_gj = ctx.vinv(G[:, j])
            V[:, :, j] = ctx.vneg(ctx.vmul(s, inv_gj[:, None]))
            rows_out.append(np.repeat(sel, M))
            V_out.append(V.reshape(-1, n + 1))
    if not rows_out:
        return np.zeros(0, np.int64), np.zeros((0, n + 1), np.int64)
    rows = np.concatenate(rows_out)
    V = normalize(ctx, np.concatenate(V_out))
    return rows, V


def _all_directions(ctx: FieldCtx, n: int, rows: np.ndarray, piv: np.ndarray):
    rows_out, V_out = [], []
    for pv in range(n + 1):
        sel = rows[piv[rows] == pv]
        if sel.size == 0:
            continue
        D = directions_array(ctx, n, pv)
        rows_out.append(np.repeat(sel, D.shape[0]))
        V_out.append(np.tile(D, (sel.size, 1)))
    if not rows_out:
        return np.zeros(0, np.int64), np.zeros((0, n + 1), np.int64)
    return np.concatenate(rows_out), np.concatenate(V_out)


def check_m(m, d: int):
    if m == INF or m is None:
        return INF
    m = int(m)
    if not 1 <= m <= d:
        raise ValueError(f"multiplicity bound m={m} must satisfy 1 <= m <= d={d} or be infinite")
    return m


def x_points(F: MultiPoly, candidates: np.ndarray | None = None) -> np.ndarray:
    if candidates is None:
        return points_array(F.ctx, F.n)[eval_all_points(F) == 0]
    return candidates[eval_many(F, candidates) == 0]


def y_flags(F: MultiPoly, m, candidates: np.ndarray | None = None,
            max_pairs: int | None = None) -> FlagBatch:
    """All rational flags with multiplicity >= m (m = INF: lines inside X).

    ``candidates`` restricts the points p considered (rows must be canonical).
    """
    ctx, n, d = F.ctx, F.n, F.d
    m = check_m(m, d)
    cap = MAX_PAIRS if max_pairs is None else max_pairs
    X = x_points(F, candidates)
    jets = PointJets(F, X)
    piv = pivots(X)
    if m == 1:
        fibre = count_points(ctx.q, n - 1)
        if X.shape[0] * fibre > cap:
            raise ResourceCapExceeded(f"{X.shape[0] * fibre} flags exceed the cap {cap}")
        rows, V = _all_directions(ctx, n, np.arange(X.shape[0]), piv)
    else:
        _, g = jets.order(1)
        gp = g.copy()
        gp[np.arange(X.shape[0]), piv] = 0
        sing = np.flatnonzero(~gp.any(axis=1))
        est = (X.shape[0] - sing.size) * count_points(ctx.q, n - 2) + sing.size * count_points(ctx.q, n - 1)
        if est > cap:
            raise ResourceCapExceeded(f"{est} candidate flags exceed the cap {cap}")
        r1, V1 = _solve_tangent(ctx, n, g, piv)
        r2, V2 = _all_directions(ctx, n, sing, piv)
        rows = np.concatenate([r1, r2])
        V = np.concatenate([V1, V2])
    batch = FlagBatch(F, X[rows], V, jets.take(rows))
    return _filter_orders(batch, 2, d if m == INF else m - 1).sorted()


def _filter_orders(batch: FlagBatch, lo: int, hi: int) -> FlagBatch:
    """Keep flags whose line coefficients a_lo .. a_hi vanish."""
    for k in range(lo, hi + 1):
        if len(batch) == 0:
            break
        batch = batch.subset(batch.line_coeff(k) == 0)
    return batch


def y_flags_chain(F: MultiPoly, ms, candidates: np.ndarray | None = None,
                  max_pairs: int | None = None) -> dict:
    """Y_{F,m} for several m at once, reusing each stage for the next larger m."""
    d = F.d
    order = sorted({check_m(m, d) for m in ms})
    out = {}
    batch = None
    done = 1
    for m in order:
        if m == 1 or batch is None:
            batch = y_flags(F, m, candidates, max_pairs)
        else:
            batch = _filter_orders(batch, done + 1, d if m == INF else m - 1).sorted()
        out[m] = batch
        done = d if m == INF else m - 1
    return out


# ---------------------------------------------------------------------------
# adapted coefficients and Jacobians in bulk


def complement_indices(P: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Sorted coordinate indices other than the pivots of p and v, shape (N, n-1)."""
    N, n1 = P.shape
    mask = np.ones((N, n1), dtype=bool)
    ar = np.arange(N)
    mask[ar, pivots(P)] = False
    mask[ar, pivots(V)] = False
    key = np.where(mask, np.arange(n1)[None, :], n1 + np.arange(n1)[None, :])
    return np.sort(key, axis=1)[:, : n1 - 2]


def side_coeffs(batch: FlagBatch, kmax: int) -> np.ndarray:
    """a_{k,j} for k = 0..kmax-1 and j = 2..n, shape (N, kmax, n-1)."""
    F, ctx = batch.F, batch.F.ctx
    N, n1 = batch.P.shape
    comp = complement_indices(batch.P, batch.V)
    out = np.zeros((N, kmax, n1 - 2), dtype=np.int64)
    for k in range(kmax):
        if k + 1 > F.d:
            break
        betas_up, H_up = batch.jets.order(k + 1)
        index_up = {b: i for i, b in enumerate(betas_up)}
        betas = tuple(monomials(n1, k))
        # D[:, c] = [t^k] dF/dx_c (p + t v)
        D = np.zeros((N, n1), dtype=np.int64)
        for c in range(n1):
            cols = []
            for beta in betas:
                up = list(beta)
                up[c] += 1
                cols.append(ctx.vscale_int(beta[c] + 1, H_up[:, index_up[tuple(up)]]))
            Hc = np.stack(cols, axis=1)
            D[:, c] = form_values(ctx, betas, Hc, batch.V)
        out[:, k, :] = np.take_along_axis(D, comp, axis=1)
    return out


def jacobians(batch: FlagBatch, m: int) -> np.ndarray:
    """Closed-form J_m for every flag of the batch, shape (N, m, 2n-1).

    m may exceed d (used for Y_infinity with m = d + 1); then a_m is taken as 0.
    """
    ctx = batch.F.ctx
    N, n1 = batch.P.shape
    n = n1 - 1
    side = side_coeffs(batch, m)
    J = np.zeros((N, m, 2 * n - 1), dtype=np.int64)
    if m <= batch.F.d:
        J[:, m - 1, 0] = ctx.vscale_int(m, batch.line_coeff(m))
    J[:, :, 1:n] = side
    J[:, 1:, n:] = side[:, : m - 1, :]
    return J


def classify_batch(batch: FlagBatch, m) -> np.ndarray:
    """Class codes (SMOOTH, W0, W2) for flags already known to lie in Y_{F,m}."""
    ctx = batch.F.ctx
    N = len(batch)
    m_eff = batch.F.d + 1 if m == INF else int(m)
    if N == 0:
        return np.zeros(0, dtype=np.int64)
    rk = batched_rank(ctx, jacobians(batch, m_eff))
    out = np.full(N, SMOOTH, dtype=np.int64)
    bad = rk < m_eff
    if m_eff >= 2 and bad.any():
        rk2 = batched_rank(ctx, jacobians(batch.subset(bad), 2))
        cls = np.where(rk2 < 2, W2, W0)
        out[np.flatnonzero(bad)] = cls
    elif bad.any():
        out[bad] = W0
    return out


def singular_points(F: MultiPoly, candidates: np.ndarray | None = None) -> np.ndarray:
    """Rational points where F and every partial derivative vanish."""
    from .mpoly import partials

    X = x_points(F, candidates)
    if X.shape[0] == 0 or F.d == 0:
        return X
    mask = np.ones(X.shape[0], dtype=bool)
    for G in partials(F):
        if mask.any():
            mask &= eval_many(G, X) == 0
    return X[mask]


# ---------------------------------------------------------------------------
# lines contained in X_F


def _line_blocks(ctx: FieldCtx, n: int):
    """Reduced row echelon pairs (R1, R2) per pivot pair, in enumerate_lines order."""
    q = ctx.q
    for i in range(n + 1):
        for j in range(i + 1, n + 1):
            free1 = [c for c in range(i + 1, n + 1) if c != j]
            free2 = list(range(j + 1, n + 1))
            A = _lex_block(q, len(free1))
            B = _lex_block(q, len(free2))
            R1 = np.zeros((A.shape[0] * B.shape[0], n + 1), dtype=np.int64)
            R2 = np.zeros_like(R1)
            R1[:, i] = 1
            R1[:, free1] = np.repeat(A, B.shape[0], axis=0)
            R2[:, j] = 1
            R2[:, free2] = np.tile(B, (A.shape[0], 1))
            yield R1, R2


def z_lines(F: MultiPoly, max_lines: int | None = None) -> list[tuple[tuple, tuple]]:
    """Rational lines inside X_F as RREF row pairs.

    A binary form of degree d vanishing at d + 1 distinct points of P^1 is zero, so
    F is tested at r2 and r1 + t r2 for d values of t, in an extension field when
    GF(q) has fewer than d elements.
    """
    from .fields import embedding, extension

    ctx, n, d = F.ctx, F.n, F.d
    cap = MAX_PAIRS if max_lines is None else max_lines
    total = count_points(ctx.q, n) * count_points(ctx.q, n - 1) // (ctx.q + 1)
    if total > cap:
        raise ResourceCapExceeded(f"{total} lines exceed the cap {cap}")
    j = 1
    while ctx.q ** j < d:
        j += 1
    E = extension(ctx, j) if j > 1 else ctx
    table = np.asarray(embedding(ctx, E), dtype=np.int64)
    FE = F.map_coeffs(E, table) if j > 1 else F
    ts = np.arange(d, dtype=np.int64)
    out = []
    for R1, R2 in _line_blocks(ctx, n):
        S1, S2 = table[R1], table[R2]
        keep = eval_many(FE, S2) == 0
        for t in ts:
            idx = np.flatnonzero(keep)
            if idx.size == 0:
                break
            P = E.vadd(S1[idx], E.vmul(np.int64(t), S2[idx]))
            keep[idx] = eval_many(FE, P) == 0
        for a, b in zip(R1[keep], R2[keep]):
            out.append((tuple(map(int, a)), tuple(map(int, b))))
    return out
