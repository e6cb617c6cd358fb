"""Exact arithmetic in GF(p) and GF(p^k).

Elements are handled internally as integer *codes*: the element
``c_0 + c_1 u + ... + c_{k-1} u^{k-1}`` of ``GF(p)[u]/(min_poly)`` has code
``c_0 + c_1 p + ... + c_{k-1} p^{k-1}``.  Integers ``0 <= c < p`` therefore
encode the prime subfield, and ``0``/``1`` are the additive/multiplicative
identities in every field.

:class:`FieldElem` is the public value type (a coefficient vector with no
hidden context).  Every operation takes the :class:`FieldCtx` explicitly and
validates the shape of the elements it is given.
"""

from __future__ import annotations

import itertools
from array import array
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np

MAX_K = 16
#: Largest field size for which exp/log tables are built.
TABLE_LIMIT = 1 << 20
#: Largest field size for which an explicit addition table is built (odd p, k > 1).
ADD_TABLE_LIMIT = 1024
#: Default bound on field sizes for operations that enumerate the field.
ENUM_LIMIT = 1 << 20


class FieldError(ValueError):
    """Invalid field construction or mixed-field operation."""


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 3.3e24."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    for sp in small:
        if n % sp == 0:
            return n == sp
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def prime_factors(n: int) -> list[int]:
    out = []
    f = 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1
    if n > 1:
        out.append(n)
    return out


# ---------------------------------------------------------------------------
# dense polynomials over GF(p), coefficient lists low -> high


def _ptrim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmod(a: list[int], m: list[int], p: int) -> list[int]:
    a = _ptrim(list(a))
    dm = len(m) - 1
    inv_lead = pow(m[-1], p - 2, p)
    while len(a) - 1 >= dm:
        c = a[-1] * inv_lead % p
        shift = len(a) - 1 - dm
        for i, mi in enumerate(m):
            a[shift + i] = (a[shift + i] - c * mi) % p
        _ptrim(a)
    return a


def _pmulmod(a: list[int], b: list[int], m: list[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _pmod(out, m, p)


def _ppowmod(a: list[int], e: int, m: list[int], p: int) -> list[int]:
    result = [1]
    base = _pmod(a, m, p)
    while e:
        if e & 1:
            result = _pmulmod(result, base, m, p)
        base = _pmulmod(base, base, m, p)
        e >>= 1
    return result


def _pgcd(a: list[int], b: list[int], p: int) -> list[int]:
    a, b = _ptrim(list(a)), _ptrim(list(b))
    while b:
        a, b = b, _pmod(a, b, p)
    return a


def _psub(a: list[int], b: list[int], p: int) -> list[int]:
    n = max(len(a), len(b))
    a = a + [0] * (n - len(a))
    b = b + [0] * (n - len(b))
    return _ptrim([(x - y) % p for x, y in zip(a, b)])


def is_irreducible(f: Sequence[int], p: int) -> bool:
    """Rabin's test for a monic polynomial over GF(p) (coefficients low -> high)."""
    f = list(f)
    k = len(f) - 1
    if k < 1:
        return False
    if k == 1:
        return True
    x = [0, 1]
    if _psub(_ppowmod(x, p**k, f, p), x, p):
        return False
    for r in prime_factors(k):
        h = _psub(_ppowmod(x, p ** (k // r), f, p), x, p)
        if len(_pgcd(f, h, p)) - 1 != 0:
            return False
    return True


def lex_first_irreducible(p: int, k: int) -> tuple[int, ...]:
    """First monic irreducible of degree k, ordered on (c_{k-1}, ..., c_0)."""
    for high_to_low in itertools.product(range(p), repeat=k):
        f = list(reversed(high_to_low)) + [1]
        if f[0] == 0:
            continue
        if is_irreducible(f, p):
            return tuple(f)
    raise FieldError(f"no irreducible polynomial of degree {k} over GF({p})")


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FieldElem:
    """A field element as its coordinate vector over GF(p)."""

    coeffs: tuple[int, ...]

    def __str__(self) -> str:
        if len(self.coeffs) == 1:
            return str(self.coeffs[0])
        return ",".join(map(str, self.coeffs))


class FieldCtx:
    """The field GF(p^k) together with its arithmetic.

    Use :func:`make_field` rather than constructing this directly; contexts are
    cached so equal parameters give the identical object.
    """

    def __init__(self, p: int, k: int, min_poly: tuple[int, ...] = ()):
        self.p = p
        self.k = k
        self.q = p**k
        # monic, low -> high, length k + 1; empty for prime fields
        self.min_poly = min_poly
        self._inv_cache: dict[int, int] = {}
        if k > 1 and self.q <= TABLE_LIMIT:
            self._build_tables()
        if k > 1 and p != 2 and self.q <= ADD_TABLE_LIMIT:
            q = self.q
            tab = array("q", bytes(8 * q * q))
            digits = [self._digits(a) for a in range(q)]
            for a in range(q):
                da = digits[a]
                for b in range(a, q):
                    c = self._undigits([(x + y) % p for x, y in zip(da, digits[b])])
                    tab[a * q + b] = c
                    tab[b * q + a] = c
            self._add_tab = tab
        else:
            self._add_tab = None

    # -- representation ----------------------------------------------------

    def __repr__(self) -> str:
        return f"GF({self.spec})"

    def __reduce__(self):
        return (make_field, (self.p, self.k))

    def __eq__(self, other) -> bool:
        return isinstance(other, FieldCtx) and (self.p, self.k, self.min_poly) == (other.p, other.k, other.min_poly)

    def __hash__(self) -> int:
        return hash((self.p, self.k, self.min_poly))

    @property
    def spec(self) -> str:
        return str(self.p) if self.k == 1 else f"{self.p}^{self.k}"

    @property
    def char(self) -> int:
        return self.p

    def _digits(self, a: int) -> list[int]:
        out = []
        for _ in range(self.k):
            a, r = divmod(a, self.p)
            out.append(r)
        return out

    def _undigits(self, ds: Iterable[int]) -> int:
        c = 0
        for d in reversed(list(ds)):
            c = c * self.p + d
        return c

    def encode(self, x: FieldElem) -> int:
        """Code of a :class:`FieldElem`, checking that it belongs to this field."""
        if not isinstance(x, FieldElem) or len(x.coeffs) != self.k:
            raise FieldError(f"{x!r} is not an element of {self!r}")
        if any(not 0 <= c < self.p for c in x.coeffs):
            raise FieldError(f"{x!r} is not canonical in {self!r}")
        return self._undigits(x.coeffs)

    def decode(self, a: int) -> FieldElem:
        return FieldElem(tuple(self._digits(a)))

    def coerce(self, x) -> int:
        """Accept a code, a FieldElem, or an integer (mapped through the prime subfield)."""
        if isinstance(x, FieldElem):
            return self.encode(x)
        x = int(x)
        if 0 <= x < self.q:
            return x
        raise FieldError(f"{x} is not a valid code in {self!r}")

    def from_int(self, n: int) -> int:
        """Image of the integer n under Z -> GF(p) -> this field."""
        return n % self.p

    def elements(self) -> range:
        if self.q > ENUM_LIMIT:
            raise FieldError(f"refusing to enumerate {self!r}: q > {ENUM_LIMIT}")
        return range(self.q)

    @cached_property
    def nonzero(self) -> range:
        return range(1, self.q)

    # -- scalar arithmetic -------------------------------------------------

    def _build_tables(self) -> None:
        q, p, m = self.q, self.p, list(self.min_poly)
        order = q - 1
        facs = prime_factors(order)

        def slow_pow(code: int, e: int) -> int:
            return self._undigits(_pad(_ppowmod(_ptrim(self._digits(code)), e, m, p), self.k))

        gen = next(
            g for g in range(2, q) if all(slow_pow(g, order // r) != 1 for r in facs)
        )
        exp = array("q", bytes(8 * 2 * order))
        log = array("q", bytes(8 * q))
        cur = [1] + [0] * (self.k - 1)
        gd = _ptrim(self._digits(gen))
        for i in range(order):
            c = self._undigits(cur)
            exp[i] = c
            exp[i + order] = c
            log[c] = i
            cur = _pad(_pmulmod(_ptrim(cur), gd, m, p), self.k)
        self.generator = gen
        self._exp = exp
        self._log = log

    def add(self, a: int, b: int) -> int:
        if self.k == 1:
            s = a + b
            return s - self.p if s >= self.p else s
        if self.p == 2:
            return a ^ b
        if self._add_tab is not None:
            return self._add_tab[a * self.q + b]
        p, out, scale = self.p, 0, 1
        while a or b:
            a, x = divmod(a, p)
            b, y = divmod(b, p)
            out += ((x + y) % p) * scale
            scale *= p
        return out

    def neg(self, a: int) -> int:
        if self.k == 1:
            return (self.p - a) % self.p
        if self.p == 2:
            return a
        p, out, scale = self.p, 0, 1
        while a:
            a, x = divmod(a, p)
            out += ((p - x) % p) * scale
            scale *= p
        return out

    def sub(self, a: int, b: int) -> int:
        if self.k == 1:
            s = a - b
            return s + self.p if s < 0 else s
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if self.k == 1:
            return a * b % self.p
        if a == 0 or b == 0:
            return 0
        if self.q <= TABLE_LIMIT:
            return self._exp[self._log[a] + self._log[b]]
        prod = _pmulmod(_ptrim(self._digits(a)), _ptrim(self._digits(b)), list(self.min_poly), self.p)
        return self._undigits(_pad(prod, self.k))

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        if self.k == 1:
            return pow(a, self.p - 2, self.p)
        if self.q <= TABLE_LIMIT:
            lg = self._log[a]
            return self._exp[(self.q - 1 - lg) % (self.q - 1)]
        return self.pow(a, self.q - 2)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            return self.pow(self.inv(a), -e)
        if self.k == 1:
            return pow(a, e, self.p)
        if a == 0:
            return 1 if e == 0 else 0
        if self.q <= TABLE_LIMIT:
            return self._exp[self._log[a] * e % (self.q - 1)]
        result, base = 1, a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def scale_int(self, n: int, a: int) -> int:
        """n·a for an integer n."""
        return self.mul(n % self.p, a)

    def sum(self, xs: Iterable[int]) -> int:
        if self.k == 1:
            return sum(xs) % self.p
        out = 0
        for x in xs:
            out = self.add(out, x)
        return out

    # -- vectorised arithmetic on int64 arrays of codes ----------------------

    @cached_property
    def _np(self) -> dict:
        t: dict = {}
        if self.k > 1:
            if self.q > TABLE_LIMIT:
                raise FieldError(f"vector arithmetic not available for {self!r}")
            t["exp"] = np.frombuffer(self._exp, dtype=np.int64)
            log = np.frombuffer(self._log, dtype=np.int64).copy()
            t["log"] = log
            inv = np.zeros(self.q, dtype=np.int64)
            inv[1:] = t["exp"][(self.q - 1 - log[1:]) % (self.q - 1)]
            t["inv"] = inv
            if self._add_tab is not None:
                t["add"] = np.frombuffer(self._add_tab, dtype=np.int64).reshape(self.q, self.q)
            neg = np.array([self.neg(a) for a in range(self.q)], dtype=np.int64)
            t["neg"] = neg
        else:
            if self.p < 1 << 31 and self.p <= ENUM_LIMIT:
                inv = np.zeros(self.p, dtype=np.int64)
                inv[1:] = [pow(a, self.p - 2, self.p) for a in range(1, self.p)]
                t["inv"] = inv
        return t

    def vadd(self, a, b):
        if self.k == 1:
            return (a + b) % self.p
        if self.p == 2:
            return np.bitwise_xor(a, b)
        tab = self._np.get("add")
        if tab is not None:
            return tab[a, b]
        out = np.zeros(np.broadcast(a, b).shape, dtype=np.int64)
        scale = 1
        for _ in range(self.k):
            out += ((a // scale % self.p + b // scale % self.p) % self.p) * scale
            scale *= self.p
        return out

    def vneg(self, a):
        if self.k == 1:
            return (-a) % self.p
        if self.p == 2:
            return a
        return self._np["neg"][a]

    def vsub(self, a, b):
        if self.k == 1:
            return (a - b) % self.p
        return self.vadd(a, self.vneg(b))

    def vmul(self, a, b):
        if self.k == 1:
            return (a * b) % self.p
        t = self._np
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        r = t["exp"][t["log"][a] + t["log"][b]]
        return np.where((a == 0) | (b == 0), 0, r)

    def vinv(self, a):
        return self._np["inv"][a]

    def vpow(self, a, e: int):
        a = np.asarray(a, dtype=np.int64)
        if e == 0:
            return np.ones_like(a)
        if self.k == 1:
            out = np.ones_like(a)
            base = a.copy()
            while e:
                if e & 1:
                    out = out * base % self.p
                base = base * base % self.p
                e >>= 1
            return out
        t = self._np
        r = t["exp"][t["log"][a] * e % (self.q - 1)]
        return np.where(a == 0, 0, r)

    def vscale_int(self, n: int, a):
        c = n % self.p
        if c == 0:
            return np.zeros_like(np.asarray(a, dtype=np.int64))
        if c == 1:
            return np.asarray(a, dtype=np.int64)
        return self.vmul(np.int64(c), a)

    # -- misc ----------------------------------------------------------------

    def vsum(self, arrs: Sequence, shape) -> np.ndarray:
        if self.k == 1:
            out = np.zeros(shape, dtype=np.int64)
            for a in arrs:
                out += a
            return out % self.p
        out = np.zeros(shape, dtype=np.int64)
        for a in arrs:
            out = self.vadd(out, a)
        return out


def _pad(a: list[int], k: int) -> list[int]:
    return list(a) + [0] * (k - len(a))


def make_field(p: int, k: int = 1) -> FieldCtx:
    """The field GF(p^k) with the lexicographically first monic irreducible modulus.

    >>> make_field(2, 2).min_poly
    (1, 1, 1)
    """
    return _make_field(p, k)


@lru_cache(maxsize=None)
def _make_field(p: int, k: int) -> FieldCtx:
    if not isinstance(p, int) or not is_prime(p):
        raise FieldError(f"{p} is not prime")
    if not 1 <= k <= MAX_K:
        raise FieldError(f"extension degree {k} out of range 1..{MAX_K}")
    if p**k > 1 << 64:
        raise FieldError(f"GF({p}^{k}) exceeds the supported size 2^64")
    if k == 1:
        return FieldCtx(p, 1)
    return FieldCtx(p, k, lex_first_irreducible(p, k))


def parse_field(spec: str) -> FieldCtx:
    """Parse ``"p"`` or ``"p^k"``."""
    spec = str(spec).strip()
    try:
        if "^" in spec:
            p, k = spec.split("^")
            return make_field(int(p), int(k))
        return make_field(int(spec), 1)
    except ValueError as exc:
        if isinstance(exc, FieldError):
            raise
        raise FieldError(f"bad field spec {spec!r}") from exc


def arith(ctx: FieldCtx, a: FieldElem, b, op: str) -> FieldElem:
    """Apply ``op`` in {add, sub, mul, div, pow} to FieldElem operands.

    For ``pow`` the second operand is a non-negative integer exponent.
    """
    x = ctx.encode(a)
    if op == "pow":
        if not isinstance(b, int) or b < 0:
            raise FieldError("pow takes a non-negative integer exponent")
        return ctx.decode(ctx.pow(x, b))
    y = ctx.encode(b)
    if op == "add":
        r = ctx.add(x, y)
    elif op == "sub":
        r = ctx.sub(x, y)
    elif op == "mul":
        r = ctx.mul(x, y)
    elif op == "div":
        r = ctx.div(x, y)
    else:
        raise FieldError(f"unknown operation {op!r}")
    return ctx.decode(r)


def enumerate_elements(ctx: FieldCtx) -> Iterator[FieldElem]:
    for a in ctx.elements():
        yield ctx.decode(a)


def poly_eval(ctx: FieldCtx, coeffs: Sequence[int], x: int) -> int:
    """Horner evaluation of a univariate polynomial given by codes (low -> high)."""
    acc = 0
    for c in reversed(coeffs):
        acc = ctx.add(ctx.mul(acc, x), c)
    return acc


def root_codes(ctx: FieldCtx, coeffs: Sequence[int]) -> list[int]:
    """Roots (codes, ascending) of a univariate polynomial by exhaustive scan."""
    coeffs = list(coeffs)
    if not any(coeffs):
        raise ValueError("zero polynomial: every element is a root")
    if ctx.q > ENUM_LIMIT:
        raise FieldError(f"root scan over {ctx!r} exceeds the enumeration bound")
    xs = np.arange(ctx.q, dtype=np.int64)
    acc = np.zeros(ctx.q, dtype=np.int64)
    for c in reversed(coeffs):
        acc = ctx.vadd(ctx.vmul(acc, xs), np.int64(c))
    return [int(i) for i in np.flatnonzero(acc == 0)]


def univariate_roots(ctx: FieldCtx, coeffs: Sequence[FieldElem]) -> set[FieldElem]:
    """All roots in the field of ``sum coeffs[i] t^i``, found by scanning every element."""
    codes = [ctx.encode(c) for c in coeffs]
    return {ctx.decode(r) for r in root_codes(ctx, codes)}


# ---------------------------------------------------------------------------
# subfield embeddings


@lru_cache(maxsize=None)
def embedding(small: FieldCtx, big: FieldCtx) -> tuple[int, ...]:
    """Code table of a field embedding GF(p^k) -> GF(p^{kj}).

    The generator ``u`` of the small field is sent to the smallest root (by code)
    of its minimal polynomial in the big field, so the map is deterministic.
    """
    if small.p != big.p or big.k % small.k:
        raise FieldError(f"{small!r} does not embed in {big!r}")
    if small.k == 1:
        return tuple(range(small.p))
    u = min(root_codes(big, list(small.min_poly)))
    powers = [1]
    for _ in range(small.k - 1):
        powers.append(big.mul(powers[-1], u))
    table = []
    for a in range(small.q):
        acc = 0
        for c, pw in zip(small._digits(a), powers):
            if c:
                acc = big.add(acc, big.mul(c, pw))
        table.append(acc)
    return tuple(table)


def extension(ctx: FieldCtx, j: int) -> FieldCtx:
    """GF(q^j) for ctx = GF(q)."""
    return make_field(ctx.p, ctx.k * j)
