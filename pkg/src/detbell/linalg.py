"""Exact rank computations: fraction-free over Q, modular over F_p, bitsets over F2."""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

from .errors import NonFieldDomain
from .scalar import Domain


def _integer_rows(rows: Sequence[Sequence]) -> list[list[int]]:
    out = []
    for r in rows:
        den = 1
        for x in r:
            if isinstance(x, Fraction):
                den = lcm(den, x.denominator)
        out.append([int(x * den) for x in r])
    return out


def rank_bareiss(rows: Sequence[Sequence]) -> int:
    """Rank over Q by fraction-free (Bareiss) elimination."""
    M = _integer_rows(rows)
    if not M:
        return 0
    m, ncols = len(M), len(M[0])
    rank = 0
    prev = 1
    for c in range(ncols):
        piv = next((i for i in range(rank, m) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        p = M[rank][c]
        for i in range(rank + 1, m):
            a = M[i][c]
            row_i, row_p = M[i], M[rank]
            for j in range(c, ncols):
                row_i[j] = (p * row_i[j] - a * row_p[j]) // prev
        prev = p
        rank += 1
        if rank == m:
            break
    return rank


def rank_mod_p(rows: Sequence[Sequence[int]], p: int) -> int:
    M = [[x % p for x in r] for r in rows]
    if not M:
        return 0
    m, ncols = len(M), len(M[0])
    rank = 0
    for c in range(ncols):
        piv = next((i for i in range(rank, m) if M[i][c]), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        inv = pow(M[rank][c], -1, p)
        row_p = [x * inv % p for x in M[rank]]
        M[rank] = row_p
        for i in range(rank + 1, m):
            a = M[i][c]
            if a:
                M[i] = [(x - a * y) % p for x, y in zip(M[i], row_p)]
        rank += 1
        if rank == m:
            break
    return rank


def rank_f2_bits(vectors: Iterable[int]) -> int:
    """Rank of F2 vectors packed as Python ints."""
    return len(XorBasis(vectors))


def rank(rows: Sequence[Sequence], domain: Domain) -> int:
    if not domain.is_field:
        raise NonFieldDomain(f"rank needs a field, got {domain}")
    if domain.modulus == 2:
        return rank_f2_bits(pack_bits(r) for r in rows)
    if domain.modulus:
        return rank_mod_p(rows, domain.modulus)
    return rank_bareiss(rows)


def pack_bits(row: Sequence[int]) -> int:
    v = 0
    for j, x in enumerate(row):
        if x % 2:
            v |= 1 << j
    return v


class XorBasis:
    """Incremental row-echelon basis over F2 keyed by leading bit."""

    def __init__(self, vectors: Iterable[int] = ()):
        self.pivots: dict[int, int] = {}
        for v in vectors:
            self.insert(v)

    def reduce(self, v: int) -> int:
        while v:
            top = v.bit_length() - 1
            b = self.pivots.get(top)
            if b is None:
                return v
            v ^= b
        return 0

    def insert(self, v: int) -> bool:
        """Add v; return True when it enlarged the span."""
        r = self.reduce(v)
        if r:
            self.pivots[r.bit_length() - 1] = r
            return True
        return False

    def contains(self, v: int) -> bool:
        return self.reduce(v) == 0

    def copy(self) -> "XorBasis":
        b = XorBasis()
        b.pivots = dict(self.pivots)
        return b

    def __len__(self):
        return len(self.pivots)
