"""Jacobian criterion for Y_{F,m}, the degeneracy loci Delta(l,r), and singular
points of cubics recovered from degenerate flags.

Chart conventions: after the adapted basis change F -> G = F(A x) the flag is
p = (1:0:...:0), L = {x_2 = ... = x_n = 0}.  Nearby flags are
p' = (1:xi_1:...:xi_n) on the line through p' with direction (0:1:zeta_2:...:zeta_n),
and f_k(xi, zeta) is the t^k coefficient of G(1, t + xi_1, zeta_2 t + xi_2, ...).
Jacobian columns are ordered (xi_1..xi_n, zeta_2..zeta_n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from . import bulk
from .fields import FieldCtx, embedding, extension, root_codes
from .flags import Flag, adapted_basis, multiplicity, normalize_point
from .linalg import batched_rank
from .linalg import rank as _rank
from .mpoly import MultiPoly, ResourceCapExceeded, evaluate, partials, transform

INF = math.inf
CLASS_NAMES = bulk.CLASS_NAMES

#: projective matrices per vectorised chunk in count_delta
DELTA_CHUNK = 1 << 18
#: largest q^{lr} accepted by count_delta
DELTA_BOUND = 1 << 30


class NotInY(ValueError):
    """The flag does not lie on Y_{F,m}."""


class InconsistentInput(RuntimeError):
    """A branch that the cubic argument rules out was reached."""


def _m_eff(m, d: int) -> int:
    m = bulk.check_m(m, d)
    return d + 1 if m == INF else m


# ---------------------------------------------------------------------------
# adapted coefficients


@dataclass(frozen=True)
class AdaptedCoefficients:
    """a[i] = coefficient of x0^{d-i} x1^i and side[k][j-2] = coefficient of
    x0^{d-k-1} x1^k x_j in F(A x)."""

    flag: Flag
    A: tuple
    G: MultiPoly
    a: tuple
    side: tuple

    def vanishing_order(self):
        return next((i for i, c in enumerate(self.a) if c), INF)


def adapted_coeffs(F: MultiPoly, flag: Flag) -> AdaptedCoefficients:
    n, d = F.n, F.d
    A = adapted_basis(F.ctx, flag)
    G = transform(F, A)
    a = []
    for i in range(d + 1):
        e = [0] * (n + 1)
        e[0], e[1] = d - i, i
        a.append(G.coeff(e))
    side = []
    for k in range(d):
        row = []
        for j in range(2, n + 1):
            e = [0] * (n + 1)
            e[0], e[1], e[j] = d - k - 1, k, 1
            row.append(G.coeff(e))
        side.append(tuple(row))
    return AdaptedCoefficients(flag, tuple(map(tuple, A)), G, tuple(a), tuple(side))


# ---------------------------------------------------------------------------
# Jacobians


@dataclass(frozen=True)
class JacobianMatrix:
    ctx: FieldCtx
    rows: tuple

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.rows[0]) if self.rows else 0

    def rank(self) -> int:
        return rank_exact(self.ctx, self.rows)

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.rows]


def _require_in_y(ac: AdaptedCoefficients, m: int) -> None:
    if any(ac.a[:m]):
        raise NotInY(f"flag {ac.flag} has multiplicity {ac.vanishing_order()} < {m}")


def jacobian_closed_form(F: MultiPoly, flag: Flag, m) -> JacobianMatrix:
    """J_m from m*a_m and the a_{k,j}; m = INF uses the d+1 equations of Y_infinity."""
    ctx, n, d = F.ctx, F.n, F.d
    m = _m_eff(m, d)
    ac = adapted_coeffs(F, flag)
    _require_in_y(ac, min(m, d + 1))
    rows = []
    for k in range(m):
        first = ctx.scale_int(m, ac.a[m]) if (k == m - 1 and m <= d) else 0
        xi = ac.side[k] if k < d else (0,) * (n - 1)
        zeta = ac.side[k - 1] if 1 <= k <= d else (0,) * (n - 1)
        rows.append((first,) + tuple(xi) + tuple(zeta))
    return JacobianMatrix(ctx, tuple(rows))


def _dual_line_coeffs(G: MultiPoly, var: int) -> tuple[list[int], list[int]]:
    """(f_k(0), d f_k / d var (0)) for k = 0..d, by expansion over K[eps]/(eps^2)."""
    ctx, n, d = G.ctx, G.n, G.d
    # coordinate i is (b0 + b1 eps) + (s0 + s1 eps) t
    coords = []
    for i in range(n + 1):
        b0, s0 = (1, 0) if i == 0 else ((0, 1) if i == 1 else (0, 0))
        b1 = s1 = 0
        if var < n and i == var + 1:
            b1 = 1
        if var >= n and i == var - n + 2:
            s1 = 1
        coords.append(([b0, s0], [b1, s1]))

    def mul(x, y):
        (xr, xe), (yr, ye) = x, y
        size = len(xr) + len(yr) - 1
        zr, ze = [0] * size, [0] * size
        for i, u in enumerate(xr):
            for j, w in enumerate(yr):
                zr[i + j] = ctx.add(zr[i + j], ctx.mul(u, w))
                ze[i + j] = ctx.add(ze[i + j], ctx.mul(u, ye[j]))
            for j, w in enumerate(ye):
                ze[i + j] = ctx.add(ze[i + j], ctx.mul(xe[i], yr[j]))
        return zr, ze

    fr, fe = [0] * (d + 1), [0] * (d + 1)
    for e, c in G.terms.items():
        acc = ([c], [0])
        for i, k in enumerate(e):
            for _ in range(k):
                acc = mul(acc, coords[i])
        for k in range(d + 1):
            fr[k] = ctx.add(fr[k], acc[0][k])
            fe[k] = ctx.add(fe[k], acc[1][k])
    return fr, fe


def jacobian_linearized(F: MultiPoly, flag: Flag, m) -> JacobianMatrix:
    """J_m from first-order expansion of the local equations f_0..f_{m-1}."""
    ctx, n, d = F.ctx, F.n, F.d
    m = _m_eff(m, d)
    A = adapted_basis(ctx, flag)
    G = transform(F, A)
    cols = []
    f0 = None
    for var in range(2 * n - 1):
        fr, fe = _dual_line_coeffs(G, var)
        f0 = fr
        cols.append([fe[k] if k <= d else 0 for k in range(m)])
    if any(f0[: min(m, d + 1)]):
        raise NotInY(f"flag {flag} is not on Y_(F,{m})")
    return JacobianMatrix(ctx, tuple(tuple(c[k] for c in cols) for k in range(m)))


def rank_exact(ctx: FieldCtx, M: Sequence[Sequence[int]]) -> int:
    """Rank over the field by Gaussian elimination."""
    if not M or not len(M[0]):
        return 0
    return _rank(ctx, M)


# ---------------------------------------------------------------------------
# classification


class FlagReport(NamedTuple):
    flag: Flag
    multiplicity: float | int
    rank: int | None
    cls: str
    a_m_zero: bool | None


def classify_flag(F: MultiPoly, flag: Flag, m) -> str:
    return flag_report(F, flag, m).cls


def flag_report(F: MultiPoly, flag: Flag, m) -> FlagReport:
    """Multiplicity, rank J_m and class of one flag."""
    d = F.d
    m_eff = _m_eff(m, d)
    mult = multiplicity(F, flag)
    if mult < min(m_eff, d + 1) or (m_eff == d + 1 and mult != INF):
        return FlagReport(flag, mult, None, "not_in_Y", None)
    J = jacobian_closed_form(F, flag, m)
    rk = J.rank()
    am_zero = None if m_eff > d else adapted_coeffs(F, flag).a[m_eff] == 0
    if rk == m_eff:
        cls = "smooth"
    elif m_eff >= 2 and jacobian_closed_form(F, flag, 2).rank() < 2:
        cls = "W2"
    else:
        cls = "W0"
    return FlagReport(flag, mult, rk, cls, am_zero)


def classify_all(F: MultiPoly, m, batch: bulk.FlagBatch | None = None) -> tuple[bulk.FlagBatch, np.ndarray]:
    """Every rational flag of Y_{F,m} with its class code (see ``CLASS_NAMES``)."""
    if batch is None:
        batch = bulk.y_flags(F, m)
    return batch, bulk.classify_batch(batch, m)


# ---------------------------------------------------------------------------
# Delta(l, r)


def btilde(ctx: FieldCtx, B: Sequence[Sequence[int]]) -> list[list[int]]:
    """Row i is (b_i, b_{i-1}) with b_0 = 0."""
    B = [[ctx.coerce(x) for x in row] for row in B]
    if not B or not any(any(row) for row in B):
        raise ValueError("B must be a nonzero matrix")
    r = len(B[0])
    return [list(row) + (list(B[i - 1]) if i else [0] * r) for i, row in enumerate(B)]


def member_delta(ctx: FieldCtx, B) -> bool:
    return rank_exact(ctx, btilde(ctx, B)) < len(B)


def member_delta0(ctx: FieldCtx, B) -> bool:
    return member_delta(ctx, B) and any(ctx.coerce(x) for x in B[0])


def stratum_index(ctx: FieldCtx, B) -> int | None:
    """Least i in 2..l with rank of the first i rows of B~ below i."""
    Bt = btilde(ctx, B)
    for i in range(2, len(B) + 1):
        if rank_exact(ctx, Bt[:i]) < i:
            return i
    return None


def btilde_batch(B: np.ndarray) -> np.ndarray:
    """B~ for a stack (N, l, r)."""
    shifted = np.zeros_like(B)
    shifted[:, 1:, :] = B[:, :-1, :]
    return np.concatenate([B, shifted], axis=2)


def strata_batch(ctx: FieldCtx, B: np.ndarray) -> np.ndarray:
    """Stratum index per matrix (0 when outside Delta)."""
    N, l, _ = B.shape
    Bt = btilde_batch(B)
    out = np.zeros(N, dtype=np.int64)
    for i in range(2, l + 1):
        todo = np.flatnonzero(out == 0)
        if todo.size == 0:
            break
        rk = batched_rank(ctx, Bt[todo, :i, :])
        out[todo[rk < i]] = i
    return out


def projective_chunks(ctx: FieldCtx, N: int, chunk: int = DELTA_CHUNK) -> Iterator[np.ndarray]:
    """Canonical representatives of P^{N-1}(GF(q)) in blocks of at most ~chunk rows."""
    q = ctx.q
    for piv in range(N):
        free = N - piv - 1
        split = 0
        while split < free and q ** (free - split) > chunk:
            split += 1
        tail = bulk._lex_block(q, free - split)
        for head in np.ndindex(*(q,) * split):
            blk = np.zeros((tail.shape[0], N), dtype=np.int64)
            blk[:, piv] = 1
            blk[:, piv + 1:piv + 1 + split] = np.asarray(head, dtype=np.int64)
            blk[:, piv + 1 + split:] = tail
            yield blk


class DeltaCounts(NamedTuple):
    l: int
    r: int
    q: int
    projective_total: int
    delta: int
    delta0: int
    strata: dict

    @property
    def affine_delta(self) -> int:
        return self.delta * (self.q - 1)

    @property
    def affine_delta0(self) -> int:
        return self.delta0 * (self.q - 1)


def count_delta(l: int, r: int, ctx: FieldCtx, bound: int = DELTA_BOUND) -> DeltaCounts:
    """Projective counts of Delta(l,r) and Delta^0(l,r) over GF(q), by exhaustion.

    Membership is invariant under scaling, so affine counts of nonzero matrices
    are the projective counts times q - 1.
    """
    if ctx.q ** (l * r) > bound:
        raise ResourceCapExceeded(f"q^(lr) = {ctx.q ** (l * r)} exceeds {bound}")
    total = delta = delta0 = 0
    strata = {i: 0 for i in range(2, l + 1)}
    for P in projective_chunks(ctx, l * r):
        B = P.reshape(-1, l, r)
        st = strata_batch(ctx, B)
        total += B.shape[0]
        delta += int((st > 0).sum())
        delta0 += int((st > 2).sum())
        for i in strata:
            strata[i] += int((st == i).sum())
    return DeltaCounts(l, r, ctx.q, total, delta, delta0, strata)


def delta_codim(l: int, r: int) -> tuple[int, int]:
    """Codimensions of Delta(l,r) and Delta^0(l,r) in P(Mat(l,r)), 3 <= l <= 2r."""
    return min(r, 2 * r - l + 1), 2 * r - l + 1


# ---------------------------------------------------------------------------
# cubics


class SingularPoint(NamedTuple):
    field: FieldCtx
    point: tuple[int, ...]
    branch: str


def _vanishes_with_partials(F: MultiPoly, pt) -> bool:
    return evaluate(F, pt) == 0 and all(evaluate(G, pt) == 0 for G in partials(F))


def singular_point_from_degenerate_flag(F: MultiPoly, flag: Flag) -> SingularPoint:
    """A singular point of the cubic X_F produced from a flag with rank J_3 < 3.

    ``branch`` is ``"a3"`` (a_3 != 0, p itself), ``"p_singular"`` or
    ``"quadratic"`` (the point s p + v with s^2 + beta s + alpha + beta^2 = 0).
    The returned point may live in the quadratic extension of the field of F.
    """
    ctx = F.ctx
    if F.d != 3:
        raise ValueError("cubic forms only")
    if ctx.char == 3:
        raise ValueError("characteristic 3 is excluded")
    J = jacobian_closed_form(F, flag, 3)
    if J.rank() == 3:
        raise ValueError("flag is a smooth point of Y_(F,3)")
    ac = adapted_coeffs(F, flag)
    if ac.a[3]:
        return _checked(F, ctx, flag.p, "a3")
    a0, a1, a2 = ac.side[0], ac.side[1], ac.side[2]
    if not any(a0):
        return _checked(F, ctx, flag.p, "p_singular")
    j0 = next(j for j, x in enumerate(a0) if x)
    beta = ctx.div(a1[j0], a0[j0])
    alpha = ctx.div(ctx.sub(a2[j0], ctx.mul(beta, a1[j0])), a0[j0])
    for x0, x1, x2 in zip(a0, a1, a2):
        if x1 != ctx.mul(beta, x0) or x2 != ctx.add(ctx.mul(alpha, x0), ctx.mul(beta, x1)):
            raise InconsistentInput("no (alpha, beta) for a nonsingular degenerate flag")
    c0 = ctx.add(alpha, ctx.mul(beta, beta))
    roots = root_codes(ctx, [c0, beta, 1])
    E, emb = ctx, None
    if not roots:
        E = extension(ctx, 2)
        emb = embedding(ctx, E)
        roots = root_codes(E, [emb[c0], emb[beta], 1])
    s = min(roots)
    p, v = flag.p, flag.v
    if emb is not None:
        p, v = [emb[x] for x in p], [emb[x] for x in v]
    pt = normalize_point(E, [E.add(E.mul(s, x), y) for x, y in zip(p, v)])
    return _checked(F, E, pt, "quadratic")


def _checked(F: MultiPoly, E: FieldCtx, pt, branch: str) -> SingularPoint:
    FE = F if E == F.ctx else F.map_coeffs(E, embedding(F.ctx, E))
    if not _vanishes_with_partials(FE, pt):
        raise InconsistentInput(f"candidate {pt} is not a singular point")
    return SingularPoint(E, tuple(pt), branch)


# ---------------------------------------------------------------------------
# W_{d,m} inside one fibre of Y_{d,m} -> Gamma


class FibreCounts(NamedTuple):
    """Affine counts over the coordinates (a_m, a_{k,j}) of one fibre Y_{d,m}(p,L)."""

    n: int
    m: int
    q: int
    ambient_dim: int
    W: int
    W0: int
    W2: int


def fibre_jacobians(ctx: FieldCtx, m: int, c: int, A: np.ndarray) -> np.ndarray:
    """J_m for a_m = c and side coefficients A (shape (N, m, n-1))."""
    N, _, r = A.shape
    J = np.zeros((N, m, 2 * r + 1), dtype=np.int64)
    J[:, m - 1, 0] = ctx.scale_int(m, c)
    J[:, :, 1:r + 1] = A
    J[:, 1:, r + 1:] = A[:, :-1, :]
    return J


def fibre_locus_counts(n: int, m: int, ctx: FieldCtx, chunk: int = DELTA_CHUNK,
                       bound: int = DELTA_BOUND) -> FibreCounts:
    """Count W, W^0 and W_2 points of a fibre Y_{d,m}(p,L) (any d >= m).

    J_m only involves a_m and a_{k,j} (k < m), so the fibre splits as a product
    of these 1 + m(n-1) coordinates with free ones; the counts returned are over
    the former.  Rank is invariant under nonzero scaling of a_m and of the whole
    block A, so one representative per class is evaluated.
    """
    r = n - 1
    size = m * r
    if ctx.q ** (size + 1) > bound:
        raise ResourceCapExceeded(f"q^{size + 1} exceeds {bound}")
    q = ctx.q
    W = W0 = W2 = 0

    def tally(A: np.ndarray, c: int, weight: int) -> tuple[int, int, int]:
        rk = batched_rank(ctx, fibre_jacobians(ctx, m, c, A))
        w = rk < m
        if m >= 2:
            rk2 = batched_rank(ctx, fibre_jacobians(ctx, 2, 0, A[:, :2, :]))
            w2 = w & (rk2 < 2)
        else:
            w2 = np.zeros_like(w)
        return weight * int(w.sum()), weight * int((w & ~w2).sum()), weight * int(w2.sum())

    zero = np.zeros((1, m, r), dtype=np.int64)
    for c, weight in ((0, 1), (1, q - 1)):
        a, b, e = tally(zero, c, weight)
        W, W0, W2 = W + a, W0 + b, W2 + e
    for P in projective_chunks(ctx, size, chunk):
        A = P.reshape(-1, m, r)
        for c, weight in ((0, q - 1), (1, (q - 1) ** 2)):
            a, b, e = tally(A, c, weight)
            W, W0, W2 = W + a, W0 + b, W2 + e
    return FibreCounts(n, m, q, size + 1, W, W0, W2)


def w_codim(n: int, m: int, char: int) -> tuple[int | None, int | None]:
    """Codimensions of W_{d,m} and W^0_{d,m} in Y_{d,m} (None where not stated)."""
    if m == 1:
        return n, None
    if m == 2:
        return n - 1, None
    if m == 2 * n - 1 and m % char:
        return 1, None
    if 3 <= m <= 2 * n - 2:
        if m % char:
            return min(n - 1, 2 * n - m), 2 * n - m
        return min(n - 1, 2 * n - m - 1), 2 * n - m - 1
    return None, None
