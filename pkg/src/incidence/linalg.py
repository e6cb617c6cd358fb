"""Dense linear algebra over a FieldCtx, on lists of codes and batched on arrays."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .fields import FieldCtx


def echelon(ctx: FieldCtx, M: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[int]]:
    """Reduced row echelon form and pivot columns."""
    R = [list(row) for row in M]
    if not R:
        return R, []
    ncols = len(R[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(R)) if R[i][c]), None)
        if piv is None:
            continue
        R[r], R[piv] = R[piv], R[r]
        inv = ctx.inv(R[r][c])
        R[r] = [ctx.mul(inv, x) for x in R[r]]
        for i in range(len(R)):
            if i != r and R[i][c]:
                f = R[i][c]
                R[i] = [ctx.sub(x, ctx.mul(f, y)) for x, y in zip(R[i], R[r])]
        pivots.append(c)
        r += 1
        if r == len(R):
            break
    return R, pivots


def rank(ctx: FieldCtx, M: Sequence[Sequence[int]]) -> int:
    return len(echelon(ctx, M)[1])


def inverse(ctx: FieldCtx, A: Sequence[Sequence[int]]) -> list[list[int]]:
    n = len(A)
    aug = [list(row) + [1 if i == j else 0 for j in range(n)] for i, row in enumerate(A)]
    R, piv = echelon(ctx, aug)
    if piv[:n] != list(range(n)):
        raise ValueError("singular matrix")
    return [row[n:] for row in R]


def matvec(ctx: FieldCtx, A: Sequence[Sequence[int]], x: Sequence[int]) -> list[int]:
    return [ctx.sum(ctx.mul(a, b) for a, b in zip(row, x)) for row in A]


def matmul(ctx: FieldCtx, A, B) -> list[list[int]]:
    cols = list(zip(*B))
    return [[ctx.sum(ctx.mul(a, b) for a, b in zip(row, col)) for col in cols] for row in A]


def batched_rank(ctx: FieldCtx, M: np.ndarray) -> np.ndarray:
    """Ranks of a stack of matrices, shape (B, r, c)."""
    M = np.array(M, dtype=np.int64, copy=True)
    B, r, c = M.shape
    rk = np.zeros(B, dtype=np.int64)
    if B == 0 or r == 0:
        return rk
    rows = np.arange(r)
    bidx = np.arange(B)
    for col in range(c):
        avail = rows[None, :] >= rk[:, None]
        nz = (M[:, :, col] != 0) & avail
        has = nz.any(axis=1)
        if not has.any():
            continue
        piv = np.argmax(nz, axis=1)
        sel = bidx[has]
        tgt = rk[has]
        src = piv[has]
        # swap pivot row into position rk
        tmp = M[sel, tgt].copy()
        M[sel, tgt] = M[sel, src]
        M[sel, src] = tmp
        prow = M[sel, tgt]
        prow = ctx.vmul(ctx.vinv(prow[:, col])[:, None], prow)
        M[sel, tgt] = prow
        below = rows[None, :] > tgt[:, None]
        fac = np.where(below, M[sel, :, col], 0)
        M[sel] = ctx.vsub(M[sel], ctx.vmul(fac[:, :, None], prow[:, None, :]))
        rk[has] += 1
    return rk
