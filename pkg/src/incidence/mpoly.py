"""Sparse homogeneous polynomials over a finite field.

A :class:`MultiPoly` maps exponent vectors to nonzero coefficient codes.  The
restriction helpers expand ``F`` along a parametrised line, either in the affine
chart ``(xi, zeta)`` around the standard flag or through an arbitrary pair of
projective points.
"""

from __future__ import annotations

import itertools
import random
import re
from dataclasses import dataclass, field
from functools import cached_property
from math import comb
from typing import Iterator, Sequence

from .fields import FieldCtx, FieldElem, parse_field

Exponent = tuple[int, ...]


class PolyError(ValueError):
    pass


class ResourceCapExceeded(RuntimeError):
    """An enumeration would exceed its configured bound."""


def monomials(nvars: int, d: int) -> list[Exponent]:
    """All exponent vectors of total degree d in nvars variables, lex-descending."""
    if nvars == 1:
        return [(d,)]
    out = []
    for e0 in range(d, -1, -1):
        for rest in monomials(nvars - 1, d - e0):
            out.append((e0,) + rest)
    return out


@dataclass(frozen=True)
class PolyRing:
    """Degree-d forms in x_0..x_n over ctx."""

    ctx: FieldCtx
    n: int
    d: int

    def __post_init__(self):
        if self.n < 1 or self.d < 0:
            raise PolyError(f"invalid ring n={self.n} d={self.d}")

    @cached_property
    def monomials(self) -> list[Exponent]:
        return monomials(self.n + 1, self.d)

    @property
    def dim(self) -> int:
        return comb(self.n + self.d, self.n)

    def with_degree(self, d: int) -> PolyRing:
        return PolyRing(self.ctx, self.n, d)


@dataclass(frozen=True, eq=False)
class MultiPoly:
    ring: PolyRing
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        n1, d = self.ring.n + 1, self.ring.d
        clean = {}
        for e, c in self.terms.items():
            e = tuple(int(x) for x in e)
            if len(e) != n1 or min(e) < 0 or sum(e) != d:
                raise PolyError(f"exponent {e} is not a degree-{d} monomial in {n1} variables")
            c = self.ring.ctx.coerce(c)
            if c:
                clean[e] = c
        object.__setattr__(self, "terms", clean)

    # -- basic protocol ----------------------------------------------------

    @property
    def ctx(self) -> FieldCtx:
        return self.ring.ctx

    @property
    def n(self) -> int:
        return self.ring.n

    @property
    def d(self) -> int:
        return self.ring.d

    def __eq__(self, other) -> bool:
        return isinstance(other, MultiPoly) and self.ring == other.ring and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.ring, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        return f"MultiPoly({self.ring.ctx!r}, n={self.n}, d={self.d}, {self})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, reverse=True):
            mon = "*".join(f"x{i}^{k}" if k > 1 else f"x{i}" for i, k in enumerate(e) if k)
            c = self.ctx.decode(self.terms[e])
            parts.append(f"{c}*{mon}" if mon else str(c))
        return " + ".join(parts)

    def is_zero(self) -> bool:
        return not self.terms

    def coeff(self, e: Exponent) -> int:
        return self.terms.get(tuple(e), 0)

    def coeff_vector(self) -> list[int]:
        return [self.terms.get(e, 0) for e in self.ring.monomials]

    @classmethod
    def from_vector(cls, ring: PolyRing, vec: Sequence[int]) -> MultiPoly:
        return cls(ring, {e: c for e, c in zip(ring.monomials, vec) if c})

    @classmethod
    def from_dict(cls, ctx: FieldCtx, n: int, terms: dict) -> MultiPoly:
        """Build from ``{exponent: coefficient}``; integer coefficients are taken mod p."""
        if not terms:
            raise PolyError("cannot infer the degree of the zero polynomial")
        d = sum(next(iter(terms)))
        return cls(PolyRing(ctx, n, d), {
            e: ctx.from_int(c) if isinstance(c, int) else ctx.encode(c) for e, c in terms.items()
        })

    # -- arithmetic ----------------------------------------------------------

    def _check_same(self, other: MultiPoly) -> None:
        if self.ctx != other.ctx or self.n != other.n:
            raise PolyError("polynomials live in different rings")

    def __add__(self, other: MultiPoly) -> MultiPoly:
        self._check_same(other)
        if self.d != other.d and self.terms and other.terms:
            raise PolyError("sum of forms of different degree")
        ring = self.ring if self.terms else other.ring
        ctx = self.ctx
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = ctx.add(out.get(e, 0), c)
        return MultiPoly(ring, out)

    def __neg__(self) -> MultiPoly:
        return MultiPoly(self.ring, {e: self.ctx.neg(c) for e, c in self.terms.items()})

    def __sub__(self, other: MultiPoly) -> MultiPoly:
        return self + (-other)

    def __mul__(self, other: MultiPoly) -> MultiPoly:
        self._check_same(other)
        ctx = self.ctx
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = ctx.add(out.get(e, 0), ctx.mul(c1, c2))
        return MultiPoly(self.ring.with_degree(self.d + other.d), out)

    def scale(self, c: int) -> MultiPoly:
        return MultiPoly(self.ring, {e: self.ctx.mul(c, v) for e, v in self.terms.items()})

    def map_coeffs(self, ctx: FieldCtx, table: Sequence[int]) -> MultiPoly:
        """Push coefficients through a field embedding given as a code table."""
        return MultiPoly(PolyRing(ctx, self.n, self.d), {e: table[c] for e, c in self.terms.items()})


def variable(ring: PolyRing, i: int) -> MultiPoly:
    e = [0] * (ring.n + 1)
    e[i] = 1
    return MultiPoly(ring.with_degree(1), {tuple(e): 1})


def constant(ring: PolyRing, c: int) -> MultiPoly:
    return MultiPoly(ring.with_degree(0), {(0,) * (ring.n + 1): c})


# ---------------------------------------------------------------------------


def evaluate(F: MultiPoly, pt: Sequence) -> int:
    """F(pt) as a code."""
    ctx = F.ctx
    if len(pt) != F.n + 1:
        raise PolyError(f"point has {len(pt)} coordinates, expected {F.n + 1}")
    x = [ctx.coerce(v) for v in pt]
    powers = [[1] * (F.d + 1) for _ in x]
    for i, xi in enumerate(x):
        for k in range(1, F.d + 1):
            powers[i][k] = ctx.mul(powers[i][k - 1], xi)
    acc = 0
    for e, c in F.terms.items():
        t = c
        for i, ei in enumerate(e):
            if ei:
                t = ctx.mul(t, powers[i][ei])
                if not t:
                    break
        acc = ctx.add(acc, t)
    return acc


def partials(F: MultiPoly) -> list[MultiPoly]:
    """Formal partial derivatives; integer factors are reduced mod the characteristic."""
    if F.d < 1:
        raise PolyError("derivative of a constant form")
    ctx, ring = F.ctx, F.ring.with_degree(F.d - 1)
    out = []
    for i in range(F.n + 1):
        terms = {}
        for e, c in F.terms.items():
            if e[i]:
                c2 = ctx.scale_int(e[i], c)
                if c2:
                    terms[e[:i] + (e[i] - 1,) + e[i + 1:]] = c2
        out.append(MultiPoly(ring, terms))
    return out


def hasse(F: MultiPoly, beta: Exponent) -> MultiPoly:
    """Hasse derivative: coefficient of y^beta in F(x + y)."""
    k = sum(beta)
    ctx = F.ctx
    terms: dict = {}
    for e, c in F.terms.items():
        if all(a >= b for a, b in zip(e, beta)):
            m = 1
            for a, b in zip(e, beta):
                m *= comb(a, b)
            v = ctx.scale_int(m, c)
            if v:
                terms[tuple(a - b for a, b in zip(e, beta))] = v
    return MultiPoly(F.ring.with_degree(F.d - k), terms)


def _linear_powers(ctx: FieldCtx, a: int, b: int, d: int) -> list[list[int]]:
    """Coefficient lists of (a + b t)^e for e = 0..d."""
    out = [[1]]
    for _ in range(d):
        prev = out[-1]
        nxt = [0] * (len(prev) + 1)
        for i, c in enumerate(prev):
            if c:
                nxt[i] = ctx.add(nxt[i], ctx.mul(c, a))
                nxt[i + 1] = ctx.add(nxt[i + 1], ctx.mul(c, b))
        out.append(nxt)
    return out


def _restrict(F: MultiPoly, base: Sequence[int], slope: Sequence[int]) -> list[int]:
    """Coefficients of t -> F(base + t * slope), length d + 1."""
    ctx, d = F.ctx, F.d
    pw = [_linear_powers(ctx, a, b, d) for a, b in zip(base, slope)]
    out = [0] * (d + 1)
    for e, c in F.terms.items():
        acc = [c]
        for i, ei in enumerate(e):
            if not ei:
                continue
            fac = pw[i][ei]
            nxt = [0] * (len(acc) + len(fac) - 1)
            for s, x in enumerate(acc):
                if x:
                    for r, y in enumerate(fac):
                        if y:
                            nxt[s + r] = ctx.add(nxt[s + r], ctx.mul(x, y))
            acc = nxt
        for s, x in enumerate(acc):
            if x:
                out[s] = ctx.add(out[s], x)
    return out


def restrict_to_chart_line(F: MultiPoly, xi: Sequence, zeta: Sequence) -> list[int]:
    """Coefficients f_0..f_d of ``F(1, t + xi_1, zeta_2 t + xi_2, ..., zeta_n t + xi_n)``."""
    n, ctx = F.n, F.ctx
    if len(xi) != n or len(zeta) != n - 1:
        raise PolyError(f"chart coordinates need {n} xi and {n - 1} zeta values")
    xi = [ctx.coerce(v) for v in xi]
    zeta = [ctx.coerce(v) for v in zeta]
    base = [1] + xi
    slope = [0, 1] + zeta
    return _restrict(F, base, slope)


def restrict_to_line_general(F: MultiPoly, p: Sequence, v: Sequence) -> list[int]:
    """Coefficients of ``t -> F(p + t v)`` for projectively independent p, v."""
    from .linalg import rank

    ctx = F.ctx
    p = [ctx.coerce(x) for x in p]
    v = [ctx.coerce(x) for x in v]
    if len(p) != F.n + 1 or len(v) != F.n + 1:
        raise PolyError("wrong number of coordinates")
    if rank(ctx, [p, v]) < 2:
        raise PolyError("p and v are projectively dependent")
    return _restrict(F, p, v)


def transform(F: MultiPoly, A: Sequence[Sequence[int]]) -> MultiPoly:
    """The form ``x -> F(A x)``."""
    from .linalg import rank

    ctx, n1 = F.ctx, F.n + 1
    A = [[ctx.coerce(a) for a in row] for row in A]
    if len(A) != n1 or any(len(r) != n1 for r in A):
        raise PolyError("matrix has the wrong shape")
    if rank(ctx, A) < n1:
        raise PolyError("singular change of coordinates")
    ring1 = F.ring.with_degree(1)
    lin = []
    for i in range(n1):
        terms = {}
        for j in range(n1):
            if A[i][j]:
                e = [0] * n1
                e[j] = 1
                terms[tuple(e)] = A[i][j]
        lin.append(MultiPoly(ring1, terms))
    one = constant(F.ring, 1)
    cache: dict = {}

    def power(i: int, k: int) -> MultiPoly:
        if k == 0:
            return one
        key = (i, k)
        if key not in cache:
            cache[key] = power(i, k - 1) * lin[i]
        return cache[key]

    out: dict = {}
    for e, c in F.terms.items():
        prod = one
        for i, ei in enumerate(e):
            if ei:
                prod = prod * power(i, ei)
        for e2, c2 in prod.terms.items():
            out[e2] = ctx.add(out.get(e2, 0), ctx.mul(c, c2))
    return MultiPoly(F.ring, out)


# ---------------------------------------------------------------------------
# sampling and sweeps


def sample_poly(ring: PolyRing, seed: int) -> MultiPoly:
    """Uniform sample among nonzero coefficient vectors, determined by seed."""
    rng = random.Random(seed)
    q = ring.ctx.q
    while True:
        vec = [rng.randrange(q) for _ in ring.monomials]
        if any(vec):
            return MultiPoly.from_vector(ring, vec)


def enumerate_polys(ring: PolyRing, bound: int = 1 << 16) -> Iterator[MultiPoly]:
    """Every nonzero coefficient vector once (scalar multiples are not identified)."""
    total = ring.ctx.q ** ring.dim
    if total > bound:
        raise ResourceCapExceeded(f"{total} polynomials exceed the bound {bound}")
    for vec in itertools.product(range(ring.ctx.q), repeat=ring.dim):
        if any(vec):
            yield MultiPoly.from_vector(ring, vec)


# ---------------------------------------------------------------------------
# text format


def dumps(F: MultiPoly) -> str:
    """Serialise as ``poly n=<n> d=<d> field=<spec>`` followed by ``c e0 .. en`` lines."""
    lines = [f"poly n={F.n} d={F.d} field={F.ctx.spec}"]
    for e in F.ring.monomials:
        c = F.terms.get(e)
        if c:
            lines.append(" ".join([str(F.ctx.decode(c))] + [str(x) for x in e]))
    return "\n".join(lines) + "\n"


_HEADER = re.compile(r"^poly\s+n=(\d+)\s+d=(\d+)\s+field=(\S+)\s*$")


def loads(text: str) -> MultiPoly:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("#")]
    if not lines:
        raise PolyError("empty polynomial file")
    m = _HEADER.match(lines[0])
    if not m:
        raise PolyError(f"bad header {lines[0]!r}")
    n, d, ctx = int(m.group(1)), int(m.group(2)), parse_field(m.group(3))
    ring = PolyRing(ctx, n, d)
    terms: dict = {}
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != n + 2:
            raise PolyError(f"term line {ln!r} needs a coefficient and {n + 1} exponents")
        coords = tuple(int(x) for x in parts[0].split(","))
        if ctx.k == 1 and len(coords) == 1:
            c = coords[0] % ctx.p
        else:
            c = ctx.encode(FieldElem(coords))
        e = tuple(int(x) for x in parts[1:])
        if e in terms:
            raise PolyError(f"repeated monomial {e}")
        terms[e] = c
    return MultiPoly(ring, terms)


def fermat(ctx: FieldCtx, n: int, d: int) -> MultiPoly:
    """x_0^d + ... + x_n^d."""
    terms = {}
    for i in range(n + 1):
        e = [0] * (n + 1)
        e[i] = d
        terms[tuple(e)] = 1
    return MultiPoly(PolyRing(ctx, n, d), terms)
