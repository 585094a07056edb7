"""Exact coefficient domains: integers, rationals, prime fields and F2.

Values inside a domain are kept as *raw* canonical representatives
(``int`` for Z, F_p and F2; ``Fraction`` for Q) so that the formula
evaluators can run on plain Python numbers.  :class:`Scalar` wraps a raw
value together with its domain for the public, type-checked API.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import (
    DivisionByZero,
    DivisionInNonField,
    DomainMismatch,
    InvalidDomain,
)

INTEGER = "Z"
RATIONAL = "Q"
PRIME_FIELD = "Fp"
F2_KIND = "F2"

MAX_PRIME = 2**61 - 1


def is_prime(m: int) -> bool:
    """Deterministic Miller-Rabin, exact for every m < 3.3e24."""
    if m < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    for p in small:
        if m % p == 0:
            return m == p
    d, s = m - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, m)
        if x in (1, m - 1):
            continue
        for _ in range(s - 1):
            x = x * x % m
            if x == m - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class Domain:
    kind: str
    modulus: int = 0

    def __post_init__(self):
        if self.kind in (INTEGER, RATIONAL):
            if self.modulus != 0:
                raise InvalidDomain(f"{self.kind} takes no modulus")
        elif self.kind == F2_KIND:
            if self.modulus != 2:
                raise InvalidDomain("F2 has modulus 2")
        elif self.kind == PRIME_FIELD:
            p = self.modulus
            if not is_prime(p):
                raise InvalidDomain(f"modulus {p} is not prime")
            if p > MAX_PRIME:
                raise InvalidDomain(f"modulus {p} exceeds 2^61-1")
        else:
            raise InvalidDomain(f"unknown domain kind {self.kind!r}")

    # constructors -------------------------------------------------------

    @classmethod
    def integers(cls) -> "Domain":
        return cls(INTEGER)

    @classmethod
    def rationals(cls) -> "Domain":
        return cls(RATIONAL)

    @classmethod
    def prime_field(cls, p: int) -> "Domain":
        return cls(PRIME_FIELD, p)

    @classmethod
    def f2(cls) -> "Domain":
        return cls(F2_KIND, 2)

    @classmethod
    def parse(cls, text: str) -> "Domain":
        """Parse ``Z``, ``Q``, ``F2`` or ``Fp:<p>``."""
        t = text.strip()
        if t == INTEGER:
            return cls.integers()
        if t == RATIONAL:
            return cls.rationals()
        if t == F2_KIND:
            return cls.f2()
        if t.startswith("Fp:"):
            try:
                p = int(t[3:])
            except ValueError:
                raise InvalidDomain(f"bad prime in {text!r}") from None
            return cls.prime_field(p)
        raise InvalidDomain(f"unknown domain {text!r}")

    def __str__(self) -> str:
        if self.kind == PRIME_FIELD:
            return f"Fp:{self.modulus}"
        return self.kind

    # properties ---------------------------------------------------------

    @property
    def characteristic(self) -> int:
        return self.modulus

    @property
    def is_field(self) -> bool:
        return self.kind != INTEGER

    @property
    def is_modular(self) -> bool:
        return self.modulus != 0

    # raw arithmetic -----------------------------------------------------

    def embed(self, k) -> int | Fraction:
        """Image of an integer (or, for Q / F_p, a rational) in this domain."""
        if isinstance(k, Fraction):
            if k.denominator == 1:
                k = k.numerator
            elif self.kind == RATIONAL:
                return k
            elif self.is_modular:
                return self.div(k.numerator % self.modulus, k.denominator % self.modulus)
            else:
                raise InvalidDomain(f"{k} is not an integer")
        k = int(k)
        if self.is_modular:
            return k % self.modulus
        if self.kind == RATIONAL:
            return Fraction(k)
        return k

    @property
    def zero(self):
        return Fraction(0) if self.kind == RATIONAL else 0

    @property
    def one(self):
        return Fraction(1) if self.kind == RATIONAL else 1

    def add(self, a, b):
        if self.modulus:
            return (a + b) % self.modulus
        return a + b

    def sub(self, a, b):
        if self.modulus:
            return (a - b) % self.modulus
        return a - b

    def neg(self, a):
        if self.modulus:
            return -a % self.modulus
        return -a

    def mul(self, a, b):
        if self.modulus:
            return a * b % self.modulus
        return a * b

    def inv(self, a):
        if not self.is_field:
            raise DivisionInNonField(f"cannot invert in {self}")
        if a == 0:
            raise DivisionByZero("inverse of zero")
        if self.modulus:
            return pow(a, -1, self.modulus)
        return 1 / a

    def div(self, a, b):
        if not self.is_field:
            raise DivisionInNonField(f"cannot divide in {self}")
        if b == 0:
            raise DivisionByZero("division by zero")
        if self.modulus:
            return a * pow(b, -1, self.modulus) % self.modulus
        return Fraction(a) / b

    def sum(self, values: Iterable):
        total = self.zero
        for v in values:
            total = total + v
        return self.embed(total) if self.kind != RATIONAL else total

    def product(self, values: Iterable):
        acc = self.one
        m = self.modulus
        for v in values:
            acc = acc * v
            if m:
                acc %= m
        return acc

    def normalize(self, value):
        """Canonical representative of an arbitrary int/Fraction/str."""
        if isinstance(value, str):
            return self.parse_value(value)
        if isinstance(value, Scalar):
            if value.domain != self:
                raise DomainMismatch(f"{value.domain} value in {self}")
            return value.value
        return self.embed(value)

    def parse_value(self, text: str):
        t = text.strip()
        if "/" in t:
            num, den = t.split("/", 1)
            return self.embed(Fraction(int(num), int(den)))
        return self.embed(int(t))

    def format(self, value) -> str:
        if isinstance(value, Fraction):
            if value.denominator == 1:
                return str(value.numerator)
            return f"{value.numerator}/{value.denominator}"
        return str(value)

    def random(self, rng: random.Random, bound: int = 9):
        """Random element; integers and numerators drawn from [-bound, bound]."""
        if self.modulus:
            return rng.randrange(self.modulus)
        if self.kind == RATIONAL:
            return Fraction(rng.randint(-bound, bound), rng.randint(1, bound))
        return rng.randint(-bound, bound)


ZZ = Domain.integers()
QQ = Domain.rationals()
F2 = Domain.f2()


def prime_field(p: int) -> Domain:
    return Domain.prime_field(p)


class Scalar:
    """An immutable element of a :class:`Domain`."""

    __slots__ = ("domain", "value")

    def __init__(self, domain: Domain, value):
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "value", domain.normalize(value))

    def __setattr__(self, name, value):
        raise AttributeError("Scalar is immutable")

    def _other(self, other) -> "Scalar":
        if isinstance(other, Scalar):
            if other.domain != self.domain:
                raise DomainMismatch(f"{self.domain} vs {other.domain}")
            return other
        if isinstance(other, (int, Fraction)):
            return Scalar(self.domain, other)
        return NotImplemented

    def __add__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return Scalar(self.domain, self.domain.add(self.value, o.value))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return Scalar(self.domain, self.domain.sub(self.value, o.value))

    def __rsub__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return Scalar(self.domain, self.domain.mul(self.value, o.value))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return Scalar(self.domain, self.domain.div(self.value, o.value))

    def __neg__(self):
        return Scalar(self.domain, self.domain.neg(self.value))

    def __pow__(self, k: int):
        if k < 0:
            return Scalar(self.domain, self.domain.inv(self.value)) ** (-k)
        if self.domain.modulus:
            return Scalar(self.domain, pow(self.value, k, self.domain.modulus))
        return Scalar(self.domain, self.value**k)

    def __eq__(self, other):
        if isinstance(other, Scalar):
            return self.domain == other.domain and self.value == other.value
        if isinstance(other, (int, Fraction)):
            return self.value == self.domain.embed(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.domain, self.value))

    def __bool__(self):
        return self.value != 0

    def __repr__(self):
        return f"Scalar({self.domain}, {self.domain.format(self.value)})"

    def __str__(self):
        return self.domain.format(self.value)


def int_embed(k: int, domain: Domain) -> Scalar:
    """Image of ``k`` under the canonical ring map Z -> domain."""
    return Scalar(domain, domain.embed(int(k)))


class Matrix:
    """Square matrix over a single domain, stored as raw canonical values."""

    __slots__ = ("n", "domain", "rows")

    def __init__(self, rows: Sequence[Sequence], domain: Domain = ZZ):
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ValueError("matrix must be square")
        self.n = n
        self.domain = domain
        self.rows = tuple(tuple(domain.normalize(x) for x in r) for r in rows)

    def __getitem__(self, ij) -> Scalar:
        i, j = ij
        return Scalar(self.domain, self.rows[i][j])

    def __eq__(self, other):
        return (
            isinstance(other, Matrix)
            and self.domain == other.domain
            and self.rows == other.rows
        )

    def __hash__(self):
        return hash((self.domain, self.rows))

    def __repr__(self):
        body = "; ".join(" ".join(self.domain.format(x) for x in r) for r in self.rows)
        return f"Matrix[{self.domain}]({body})"

    def over(self, domain: Domain) -> "Matrix":
        """Reinterpret the entries in another domain (via int/rational embedding)."""
        return Matrix(self.rows, domain)

    @classmethod
    def identity(cls, n: int, domain: Domain = ZZ) -> "Matrix":
        return cls([[int(i == j) for j in range(n)] for i in range(n)], domain)

    @classmethod
    def random(
        cls, n: int, domain: Domain, rng: random.Random, bound: int = 9
    ) -> "Matrix":
        return cls([[domain.random(rng, bound) for _ in range(n)] for _ in range(n)], domain)


def parse_matrix(text: str) -> Matrix:
    """Parse the text format: header ``n d`` followed by n rows of n entries."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValueError("empty matrix file")
    header = lines[0].split()
    if len(header) != 2:
        raise ValueError("header must be 'n domain'")
    n = int(header[0])
    domain = Domain.parse(header[1])
    body = lines[1:]
    if len(body) != n:
        raise ValueError(f"expected {n} rows, found {len(body)}")
    rows = []
    for ln in body:
        toks = ln.split()
        if len(toks) != n:
            raise ValueError(f"expected {n} entries per row: {ln!r}")
        rows.append([domain.parse_value(t) for t in toks])
    return Matrix(rows, domain)


def format_matrix(A: Matrix) -> str:
    out = [f"{A.n} {A.domain}"]
    for r in A.rows:
        out.append(" ".join(A.domain.format(x) for x in r))
    return "\n".join(out) + "\n"
