"""Point-line flags, intersection multiplicity, and rational points of X_F, Y_{F,m}, Z_F."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence

from . import bulk
from .fields import FieldCtx, embedding, extension
from .mpoly import MultiPoly, ResourceCapExceeded, evaluate, restrict_to_line_general

INF = math.inf
ENUM_BOUND = 5_000_000


class FlagError(ValueError):
    pass


def normalize_point(ctx: FieldCtx, x: Sequence[int]) -> tuple[int, ...]:
    x = [ctx.coerce(c) for c in x]
    lead = next((c for c in x if c), 0)
    if not lead:
        raise FlagError("the zero vector is not a projective point")
    inv = ctx.inv(lead)
    return tuple(ctx.mul(inv, c) for c in x)


def pivot(x: Sequence[int]) -> int:
    return next(i for i, c in enumerate(x) if c)


@dataclass(frozen=True)
class Flag:
    """A point p on the line spanned by p and v, both stored in canonical form.

    p has first nonzero coordinate 1; v has ``v[pivot(p)] == 0`` and first nonzero
    coordinate 1, which singles out one representative per line through p.
    """

    p: tuple[int, ...]
    v: tuple[int, ...]

    def __str__(self) -> str:
        return f"{','.join(map(str, self.p))};{','.join(map(str, self.v))}"


def make_flag(ctx: FieldCtx, p: Sequence, v: Sequence) -> Flag:
    p = normalize_point(ctx, p)
    v = [ctx.coerce(c) for c in v]
    if len(v) != len(p):
        raise FlagError("p and v have different lengths")
    i = pivot(p)
    c = v[i]
    v = [ctx.sub(a, ctx.mul(c, b)) for a, b in zip(v, p)]
    if not any(v):
        raise FlagError("p and v span only a point")
    return Flag(p, normalize_point(ctx, v))


def parse_flag(ctx: FieldCtx, text: str) -> Flag:
    """``"p0,p1,..;v0,v1,.."`` with integer codes."""
    try:
        a, b = text.split(";")
        return make_flag(ctx, [int(x) for x in a.split(",")], [int(x) for x in b.split(",")])
    except ValueError as exc:
        if isinstance(exc, FlagError):
            raise
        raise FlagError(f"bad flag {text!r}") from exc


def standard_flag(n: int) -> Flag:
    e0 = (1,) + (0,) * n
    e1 = (0, 1) + (0,) * (n - 1)
    return Flag(e0, e1)


def adapted_basis(ctx: FieldCtx, flag: Flag) -> list[list[int]]:
    """Matrix A whose columns are p, v and the unit vectors off the pivots of p and v.

    Under ``F -> F(A x)`` the flag becomes p = (1:0:...:0), L = {x_2 = ... = x_n = 0}.
    """
    n1 = len(flag.p)
    used = {pivot(flag.p), pivot(flag.v)}
    cols = [list(flag.p), list(flag.v)]
    for c in range(n1):
        if c not in used:
            e = [0] * n1
            e[c] = 1
            cols.append(e)
    return [[cols[j][i] for j in range(n1)] for i in range(n1)]


def multiplicity(F: MultiPoly, flag: Flag):
    """Order of vanishing of F along the line at p; INF if F vanishes on the line."""
    coeffs = restrict_to_line_general(F, flag.p, flag.v)
    return next((k for k, c in enumerate(coeffs) if c), INF)


# ---------------------------------------------------------------------------
# enumeration


def count_points(q: int, n: int) -> int:
    return (q ** (n + 1) - 1) // (q - 1)


def count_flags(q: int, n: int) -> int:
    return count_points(q, n) * count_points(q, n - 1)


def count_lines(q: int, n: int) -> int:
    return count_points(q, n) * count_points(q, n - 1) // (q + 1)


def enumerate_points(ctx: FieldCtx, n: int) -> Iterator[tuple[int, ...]]:
    """Canonical points of P^n, in the same order as :func:`bulk.points_array`."""
    for piv in range(n + 1):
        for free in itertools.product(range(ctx.q), repeat=n - piv):
            yield (0,) * piv + (1,) + free


def enumerate_flags(ctx: FieldCtx, n: int, bound: int = ENUM_BOUND) -> Iterator[Flag]:
    if n < 2:
        raise FlagError("flags need n >= 2")
    total = count_flags(ctx.q, n)
    if total > bound:
        raise ResourceCapExceeded(f"{total} flags exceed the bound {bound}")
    for p in enumerate_points(ctx, n):
        i = pivot(p)
        for w in enumerate_points(ctx, n - 1):
            yield Flag(p, w[:i] + (0,) + w[i:])


def enumerate_lines(ctx: FieldCtx, n: int, bound: int = ENUM_BOUND) -> Iterator[tuple[tuple, tuple]]:
    """Lines as reduced row echelon pairs (r1, r2)."""
    total = count_lines(ctx.q, n)
    if total > bound:
        raise ResourceCapExceeded(f"{total} lines exceed the bound {bound}")
    for i in range(n + 1):
        for j in range(i + 1, n + 1):
            free1 = [c for c in range(i + 1, n + 1) if c != j]
            free2 = list(range(j + 1, n + 1))
            for a in itertools.product(range(ctx.q), repeat=len(free1)):
                r1 = [0] * (n + 1)
                r1[i] = 1
                for c, x in zip(free1, a):
                    r1[c] = x
                for b in itertools.product(range(ctx.q), repeat=len(free2)):
                    r2 = [0] * (n + 1)
                    r2[j] = 1
                    for c, x in zip(free2, b):
                        r2[c] = x
                    yield tuple(r1), tuple(r2)


class SchemePoints(NamedTuple):
    which: str
    count: int
    points: list


def _check_m(m, d: int):
    return bulk.check_m(m, d)


def enumerate_scheme(F: MultiPoly, which: str, m=None, method: str = "bulk") -> SchemePoints:
    """Rational points of X_F, Y_{F,m} or Z_F over the coefficient field of F.

    ``which`` is ``"X"``, ``"Y"`` or ``"Z"``.  For Y, ``m`` is 1..d or ``INF``.
    ``method="naive"`` walks every point/flag/line with the single-item routines
    and serves as the oracle for the vectorised default.
    """
    ctx, n = F.ctx, F.n
    which = which.upper()
    if which == "X":
        if method == "naive":
            pts = [p for p in enumerate_points(ctx, n) if evaluate(F, p) == 0]
        else:
            pts = [tuple(map(int, r)) for r in bulk.x_points(F)]
        return SchemePoints("X", len(pts), pts)
    if which == "Y":
        if m is None:
            raise FlagError("Y needs a multiplicity bound m")
        m = _check_m(m, F.d)
        if method == "naive":
            flags = []
            for p in enumerate_points(ctx, n):
                if evaluate(F, p):
                    continue
                i = pivot(p)
                for w in enumerate_points(ctx, n - 1):
                    fl = Flag(p, w[:i] + (0,) + w[i:])
                    if multiplicity(F, fl) >= m:
                        flags.append(fl)
        else:
            batch = bulk.y_flags(F, m)
            flags = [Flag(p, v) for p, v in batch.as_tuples()]
        return SchemePoints("Y", len(flags), flags)
    if which == "Z":
        if method == "naive":
            lines = [L for L in enumerate_lines(ctx, n) if not any(restrict_to_line_general(F, *L))]
        else:
            lines = bulk.z_lines(F)
        return SchemePoints("Z", len(lines), lines)
    raise FlagError(f"unknown scheme {which!r}")


def y_count(F: MultiPoly, m) -> int:
    return len(bulk.y_flags(F, m))


# ---------------------------------------------------------------------------
# search over extension fields


class ExtensionSearch(NamedTuple):
    found: bool
    degree: int | None
    witness: Flag | None = None
    field: FieldCtx | None = None
    searched: tuple = ()


def base_change(F: MultiPoly, E: FieldCtx) -> MultiPoly:
    return F.map_coeffs(E, embedding(F.ctx, E))


def y_flags_over(F: MultiPoly, m, E: FieldCtx, max_points: int | None = None) -> bulk.FlagBatch:
    """Y_{F,m}(E) for an extension E of the coefficient field."""
    FE = base_change(F, E)
    cap = bulk.MAX_POINTS if max_points is None else max_points
    if count_points(E.q, F.n) <= cap:
        return bulk.y_flags(FE, m)
    m = _check_m(m, F.d)
    if F.n == 2 and (m == INF or m >= 3):
        from .planar import flex_candidates

        cand = flex_candidates(F, E)
        return bulk.y_flags(FE, m, candidates=cand)
    raise ResourceCapExceeded(f"Y search over GF({E.spec}) exceeds the point cap {cap}")


def nonempty_over_extensions(F: MultiPoly, m, max_deg: int,
                             max_points: int | None = None) -> ExtensionSearch:
    """Look for a point of Y_{F,m} over GF(q^j), j = 1..max_deg, in increasing j.

    ``found=False`` only means nothing was found within the bound.
    """
    if max_deg < 1:
        raise ValueError("max_deg must be >= 1")
    searched = []
    for j in range(1, max_deg + 1):
        E = extension(F.ctx, j)
        batch = y_flags_over(F, m, E, max_points)
        searched.append(j)
        if len(batch):
            p, v = batch.as_tuples()[0]
            return ExtensionSearch(True, j, Flag(p, v), E, tuple(searched))
    return ExtensionSearch(False, None, None, None, tuple(searched))


def lift_point(F: MultiPoly, E: FieldCtx, p: Sequence[int]) -> tuple[int, ...]:
    return tuple(embedding(F.ctx, E)[c] for c in p)


def fibre_size(q: int, n: int) -> int:
    """Lines through a point of P^n."""
    return count_points(q, n - 1)
