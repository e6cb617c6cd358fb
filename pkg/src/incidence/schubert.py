"""Schubert calculus on the Grassmannian of lines G = G(2, n+1) and on the
point-line flag variety Gamma.

Classes on G are integer combinations of sigma_{a,b} with n-1 >= a >= b >= 0.
Gamma is the projectivisation of the rank-2 tautological bundle over G; its
Chow ring is generated over A(G) by the point class h subject to
h^2 = sigma_1 h - sigma_{1,1}, so every class has a normal form with h-exponent
at most 1.  The point class of Gamma is h sigma_{n-1,n-1}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Iterator

Partition2 = tuple[int, int]


def _check_partition(lam: Partition2, n: int) -> Partition2:
    a, b = lam
    if not (a >= b >= 0):
        raise ValueError(f"{lam} is not a partition with at most two parts")
    return (a, b)


def in_box(lam: Partition2, n: int) -> bool:
    return lam[0] <= n - 1


def partitions(n: int, size: int | None = None) -> Iterator[Partition2]:
    """Partitions in the 2 x (n-1) box, optionally of a fixed size."""
    for a in range(n):
        for b in range(a + 1):
            if size is None or a + b == size:
                yield (a, b)


def _clean(d: dict) -> dict:
    return {k: v for k, v in d.items() if v}


@dataclass(frozen=True)
class ChowClassG:
    n: int
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "terms", _clean(self.terms))

    @classmethod
    def sigma(cls, n: int, a: int, b: int = 0) -> ChowClassG:
        lam = _check_partition((a, b), n)
        return cls(n, {lam: 1} if in_box(lam, n) else {})

    @classmethod
    def one(cls, n: int) -> ChowClassG:
        return cls(n, {(0, 0): 1})

    def __add__(self, other: ChowClassG) -> ChowClassG:
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return ChowClassG(self.n, out)

    def __neg__(self) -> ChowClassG:
        return ChowClassG(self.n, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other: ChowClassG) -> ChowClassG:
        return self + (-other)

    def scale(self, c: int) -> ChowClassG:
        return ChowClassG(self.n, {k: c * v for k, v in self.terms.items()})

    def __mul__(self, other: ChowClassG) -> ChowClassG:
        return product_G(self, other, self.n)

    def degree_parts(self) -> set[int]:
        return {a + b for a, b in self.terms}

    def integral(self) -> int:
        return self.terms.get((self.n - 1, self.n - 1), 0)


def pieri(lam: Partition2, c: int, n: int) -> ChowClassG:
    """sigma_c * sigma_{a,b} in A(G(2, n+1))."""
    a, b = _check_partition(lam, n)
    if c < 0:
        raise ValueError("c must be non-negative")
    out = {}
    total = a + b + c
    for a2 in range(a, n):
        b2 = total - a2
        if b <= b2 <= a:
            out[(a2, b2)] = 1
    return ChowClassG(n, out)


def _times_special(x: ChowClassG, c: int) -> ChowClassG:
    out: dict = {}
    for lam, v in x.terms.items():
        for mu in pieri(lam, c, x.n).terms:
            out[mu] = out.get(mu, 0) + v
    return ChowClassG(x.n, out)


def product_G(x: ChowClassG, y: ChowClassG, n: int) -> ChowClassG:
    """Product in A(G); sigma_{a,b} = sigma_a sigma_b - sigma_{a+1} sigma_{b-1}."""
    total = ChowClassG(n)
    for (a, b), v in y.terms.items():
        if b == 0:
            part = _times_special(x, a)
        else:
            part = _times_special(_times_special(x, b), a) - _times_special(_times_special(x, b - 1), a + 1)
        total = total + part.scale(v)
    return total


@dataclass(frozen=True)
class ChowClassGamma:
    """sum of coeff * sigma_lambda * h^e with e in {0, 1}."""

    n: int
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "terms", _clean(self.terms))

    @classmethod
    def from_G(cls, x: ChowClassG, e: int = 0) -> ChowClassGamma:
        return cls(x.n, {(lam, e): v for lam, v in x.terms.items()})

    @classmethod
    def one(cls, n: int) -> ChowClassGamma:
        return cls(n, {((0, 0), 0): 1})

    @classmethod
    def h(cls, n: int) -> ChowClassGamma:
        return cls(n, {((0, 0), 1): 1})

    @classmethod
    def sigma(cls, n: int, a: int, b: int = 0) -> ChowClassGamma:
        return cls.from_G(ChowClassG.sigma(n, a, b))

    def parts(self) -> tuple[ChowClassG, ChowClassG]:
        """(x0, x1) with self = x0 + x1 h."""
        x0 = {lam: v for (lam, e), v in self.terms.items() if e == 0}
        x1 = {lam: v for (lam, e), v in self.terms.items() if e == 1}
        return ChowClassG(self.n, x0), ChowClassG(self.n, x1)

    def __add__(self, other: ChowClassGamma) -> ChowClassGamma:
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return ChowClassGamma(self.n, out)

    def __neg__(self) -> ChowClassGamma:
        return ChowClassGamma(self.n, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other: ChowClassGamma) -> ChowClassGamma:
        return self + (-other)

    def scale(self, c: int) -> ChowClassGamma:
        return ChowClassGamma(self.n, {k: c * v for k, v in self.terms.items()})

    def __mul__(self, other: ChowClassGamma) -> ChowClassGamma:
        return product_Gamma(self, other, self.n)

    def __pow__(self, k: int) -> ChowClassGamma:
        out = ChowClassGamma.one(self.n)
        for _ in range(k):
            out = out * self
        return out

    def degrees(self) -> set[int]:
        return {a + b + e for (a, b), e in self.terms}


def product_Gamma(x: ChowClassGamma, y: ChowClassGamma, n: int) -> ChowClassGamma:
    """Product in A(Gamma), reduced with h^2 = sigma_1 h - sigma_{1,1}."""
    x0, x1 = x.parts()
    y0, y1 = y.parts()
    s1 = ChowClassG.sigma(n, 1)
    s11 = ChowClassG.sigma(n, 1, 1)
    hh = x1 * y1
    c0 = x0 * y0 - hh * s11
    c1 = x0 * y1 + x1 * y0 + hh * s1
    return ChowClassGamma.from_G(c0, 0) + ChowClassGamma.from_G(c1, 1)


def integrate_Gamma(x: ChowClassGamma, n: int) -> int:
    """Degree of the zero-dimensional part: coefficient of h sigma_{n-1,n-1}."""
    return x.terms.get(((n - 1, n - 1), 1), 0)


def integrate_G(x: ChowClassG, n: int) -> int:
    return x.terms.get((n - 1, n - 1), 0)


def euler_class(n: int, d: int, m: int) -> ChowClassGamma:
    """prod_{k<m} ((d-k) h + k (sigma_1 - h)), the class of Y_{F,m} for general F."""
    if not 1 <= m <= d:
        raise ValueError(f"need 1 <= m <= d, got m={m}, d={d}")
    h = ChowClassGamma.h(n)
    s1 = ChowClassGamma.sigma(n, 1)
    out = ChowClassGamma.one(n)
    for k in range(m):
        out = out * (h.scale(d - k) + (s1 - h).scale(k))
    return out


def predict(n: int, d: int, m: int) -> dict:
    """Expected dimension, zero-dimensional count and degrees of Y_{F,m}."""
    e = euler_class(n, d, m)
    dim = 2 * n - m - 1
    out = {
        "n": n,
        "d": d,
        "m": m,
        "expected_dim": dim,
        "count": None,
        "empty_for_general": dim < 0,
        "degrees": {},
        "euler_class_terms": format_terms(e),
    }
    if dim == 0:
        out["count"] = integrate_Gamma(e, n)
    if dim >= 0:
        h = ChowClassGamma.h(n)
        s1 = ChowClassGamma.sigma(n, 1)
        for a in range(dim + 1):
            out["degrees"][f"h^{a}*s1^{dim - a}"] = integrate_Gamma(e * h ** a * s1 ** (dim - a), n)
    return out


def format_terms(x: ChowClassGamma) -> list[dict]:
    return [
        {"sigma": [a, b], "h": e, "coeff": v}
        for ((a, b), e), v in sorted(x.terms.items())
    ]


def catalan(k: int) -> int:
    return comb(2 * k, k) // (k + 1)


def hook_length_count(n: int) -> int:
    """Standard Young tableaux of the 2 x (n-1) rectangle, by the hook length formula."""
    cols = n - 1
    num = 1
    for i in range(1, 2 * cols + 1):
        num *= i
    den = 1
    for row in range(2):
        for col in range(cols):
            den *= (cols - col - 1) + (2 - row - 1) + 1
    return num // den
