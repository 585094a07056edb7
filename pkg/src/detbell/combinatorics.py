"""Index sets for the determinant formulas.

Subsets of [n] = {1, ..., n} are bitmasks: element ``i`` is bit ``i - 1``.

Enumeration orders are fixed so that streams are reproducible:

* partial partitions: by support size (largest first), then by the tuple
  of parts (each part a sorted tuple, parts ordered by least element);
* ordered partial partitions: by support size (smallest first), then by
  number of parts, then by the tuple of parts.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, permutations, product
from math import comb, factorial
from typing import Iterator, Sequence

MAX_GROUND = 63


def _check_n(n: int) -> None:
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n > MAX_GROUND:
        raise ValueError(f"ground sets larger than {MAX_GROUND} are not supported")


def mask_of(elements) -> int:
    m = 0
    for e in elements:
        m |= 1 << (e - 1)
    return m


def elements_of(mask: int) -> tuple[int, ...]:
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def _lowbit(mask: int) -> int:
    return (mask & -mask).bit_length()


@dataclass(frozen=True)
class PartialPartition:
    """Set of disjoint nonempty subsets of [n], parts sorted by least element."""

    n: int
    parts: tuple[int, ...]

    def __post_init__(self):
        seen = 0
        for p in self.parts:
            if p == 0:
                raise ValueError("empty part")
            if p & seen:
                raise ValueError("parts overlap")
            if p >> self.n:
                raise ValueError("part outside [n]")
            seen |= p
        if list(self.parts) != sorted(self.parts, key=_lowbit):
            object.__setattr__(self, "parts", tuple(sorted(self.parts, key=_lowbit)))

    @classmethod
    def of(cls, n: int, blocks: Sequence[Sequence[int]]) -> "PartialPartition":
        return cls(n, tuple(sorted((mask_of(b) for b in blocks), key=_lowbit)))

    @property
    def support(self) -> int:
        s = 0
        for p in self.parts:
            s |= p
        return s

    def blocks(self) -> tuple[tuple[int, ...], ...]:
        return tuple(elements_of(p) for p in self.parts)

    def part_of(self, i: int) -> int:
        """Mask of the part containing ``i`` (0 when ``i`` is uncovered)."""
        bit = 1 << (i - 1)
        for p in self.parts:
            if p & bit:
                return p
        return 0

    def related(self, i: int, j: int) -> bool:
        """The partial equivalence relation: i and j share a part."""
        p = self.part_of(i)
        return bool(p and p >> (j - 1) & 1)

    def has_singletons(self) -> bool:
        return any(p & (p - 1) == 0 for p in self.parts)

    def __len__(self):
        return len(self.parts)

    def __repr__(self):
        inner = ", ".join("{" + ",".join(map(str, b)) + "}" for b in self.blocks())
        return "{" + inner + "}"


@dataclass(frozen=True)
class OrderedPartialPartition:
    """Tuple (X_1, ..., X_k) of disjoint nonempty subsets of [n]; order matters."""

    n: int
    parts: tuple[int, ...]

    def __post_init__(self):
        seen = 0
        for p in self.parts:
            if p == 0 or p & seen or p >> self.n:
                raise ValueError(f"invalid ordered partial partition {self.parts}")
            seen |= p

    @classmethod
    def of(cls, n: int, blocks: Sequence[Sequence[int]]) -> "OrderedPartialPartition":
        return cls(n, tuple(mask_of(b) for b in blocks))

    @property
    def support(self) -> int:
        s = 0
        for p in self.parts:
            s |= p
        return s

    def blocks(self) -> tuple[tuple[int, ...], ...]:
        return tuple(elements_of(p) for p in self.parts)

    def level(self, i: int) -> int:
        """Index of the part containing ``i`` or -1."""
        bit = 1 << (i - 1)
        for k, p in enumerate(self.parts):
            if p & bit:
                return k
        return -1

    def precedes(self, x: int, y: int) -> bool:
        """The induced relation: x is in X_a, y in X_b with a <= b."""
        a, b = self.level(x), self.level(y)
        return a >= 0 and b >= 0 and a <= b

    def up_set(self, i: int) -> int:
        """Mask of all j with i preceding j."""
        a = self.level(i)
        if a < 0:
            return 0
        m = 0
        for p in self.parts[a:]:
            m |= p
        return m

    def relation(self) -> frozenset[tuple[int, int]]:
        return frozenset(
            (x, y)
            for x in range(1, self.n + 1)
            for y in range(1, self.n + 1)
            if self.precedes(x, y)
        )

    def __len__(self):
        return len(self.parts)

    def __repr__(self):
        inner = ", ".join("{" + ",".join(map(str, b)) + "}" for b in self.blocks())
        return "(" + inner + ")"


# ---------------------------------------------------------------------------
# counting


@lru_cache(maxsize=None)
def bell(n: int) -> int:
    """Bell number via the Bell triangle."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


@lru_cache(maxsize=None)
def bell_nk(n: int, k: int) -> int:
    """Partitions of [n] into exactly k parts, every part of size >= 2."""
    if n < 0 or k < 0:
        raise ValueError("arguments must be nonnegative")
    if k == 0:
        return 1 if n >= 0 else 0
    if n < 2 * k:
        return 0
    return (k + 1) * bell_nk(n - 1, k) + (n - 1) * bell_nk(n - 2, k - 1)


@lru_cache(maxsize=None)
def stirling2(k: int, m: int) -> int:
    """Stirling number of the second kind {k over m}."""
    if k < 0 or m < 0:
        raise ValueError("arguments must be nonnegative")
    if k == m:
        return 1
    if m == 0 or m > k:
        return 0
    return m * stirling2(k - 1, m) + stirling2(k - 1, m - 1)


def sign(P: PartialPartition) -> int:
    s = 1
    for p in P.parts:
        if popcount(p) % 2 == 0:
            s = -s
    return s


def count_opp(n: int) -> int:
    """|OPP(n)| recounted as a sum of ordered set partitions over supports."""
    # ordered set partitions of a k-set into m blocks: m! S(k, m)
    return sum(
        comb(n, k) * sum(factorial(m) * stirling2(k, m) for m in range(k + 1))
        for k in range(n + 1)
    )


# ---------------------------------------------------------------------------
# enumeration


def _set_partitions(mask: int, min_size: int, max_parts: int | None) -> Iterator[tuple[int, ...]]:
    """Partitions of the set ``mask`` into blocks of size >= min_size."""
    if mask == 0:
        yield ()
        return
    if max_parts is not None and max_parts <= 0:
        return
    low = mask & -mask
    rest = elements_of(mask & ~low)
    rest_bits = [1 << (e - 1) for e in rest]
    nxt = None if max_parts is None else max_parts - 1
    for size in range(max(min_size - 1, 0), len(rest_bits) + 1):
        for combo in combinations(rest_bits, size):
            block = low
            for b in combo:
                block |= b
            for tail in _set_partitions(mask & ~block, min_size, nxt):
                yield (block,) + tail


def _parts_key(parts: Sequence[int]) -> tuple:
    return tuple(elements_of(p) for p in parts)


def enum_partial_partitions(
    n: int, no_singletons: bool = False, max_parts: int | None = None
) -> Iterator[PartialPartition]:
    """Every partial partition of [n] exactly once.

    With ``no_singletons`` the stream has ``bell(n)`` items; ``max_parts``
    restricts to at most that many parts.
    """
    _check_n(n)
    min_size = 2 if no_singletons else 1
    for size in range(n, -1, -1):
        if no_singletons and size == 1:
            continue
        grade = []
        for support in combinations(range(1, n + 1), size):
            for parts in _set_partitions(mask_of(support), min_size, max_parts):
                grade.append(parts)
        grade.sort(key=_parts_key)
        for parts in grade:
            yield PartialPartition(n, parts)


def _ordered_set_partitions(mask: int, m: int) -> Iterator[tuple[int, ...]]:
    for parts in _set_partitions(mask, 1, m):
        if len(parts) == m:
            yield from permutations(parts)


def enum_opp(n: int) -> Iterator[OrderedPartialPartition]:
    """Every ordered partial partition of [n] exactly once."""
    _check_n(n)
    for size in range(n + 1):
        for m in range(size + 1):
            if size and m == 0:
                continue
            grade = []
            for support in combinations(range(1, n + 1), size):
                grade.extend(_ordered_set_partitions(mask_of(support), m))
            grade.sort(key=_parts_key)
            for parts in grade:
                yield OrderedPartialPartition(n, parts)


def check_opp_axioms(n: int, rel) -> bool:
    """Transitive, weakly reflexive and weakly connected relation on [n]."""
    rel = set(rel)
    dom = range(1, n + 1)
    for (x, y) in rel:
        if (x, x) not in rel or (y, y) not in rel:
            return False
        for z in dom:
            if (y, z) in rel and (x, z) not in rel:
                return False
    refl = [x for x in dom if (x, x) in rel]
    for x in refl:
        for y in refl:
            if (x, y) not in rel and (y, x) not in rel:
                return False
    return True


def opp_flip(P: OrderedPartialPartition, z: int) -> OrderedPartialPartition:
    """The fixed-point-free involution f_z on OPP(n)."""
    if not 1 <= z <= P.n:
        raise ValueError(f"z={z} outside [1, {P.n}]")
    bit = 1 << (z - 1)
    parts = list(P.parts)
    j = P.level(z)
    if j == 0 and parts[0] == bit:
        return OrderedPartialPartition(P.n, tuple(parts[1:]))
    if j >= 1 and parts[j] == bit:
        merged = parts[:j - 1] + [parts[j - 1] | bit] + parts[j + 1:]
        return OrderedPartialPartition(P.n, tuple(merged))
    if j >= 0:
        split = parts[:j] + [parts[j] & ~bit, bit] + parts[j + 1:]
        return OrderedPartialPartition(P.n, tuple(split))
    return OrderedPartialPartition(P.n, (bit,) + tuple(parts))


# ---------------------------------------------------------------------------
# coefficient oracle


def is_permutation(f: Sequence[int]) -> bool:
    return sorted(f) == list(range(1, len(f) + 1))


def permutation_sign(f: Sequence[int]) -> int:
    """Sign of a permutation of [n] given in one-line notation."""
    seen = [False] * len(f)
    s = 1
    for start in range(len(f)):
        if seen[start]:
            continue
        length = 0
        i = start
        while not seen[i]:
            seen[i] = True
            i = f[i] - 1
            length += 1
        if length % 2 == 0:
            s = -s
    return s


def is_compatible(P: PartialPartition, f: Sequence[int]) -> bool:
    for i in range(1, len(f) + 1):
        fi = f[i - 1]
        covered = P.part_of(i) != 0
        if fi == i:
            if covered:
                return False
        else:
            if not P.part_of(fi):
                return False
            if covered and not P.related(i, fi):
                return False
    return True


def compatible_partial_partitions(f: Sequence[int]) -> Iterator[PartialPartition]:
    """Partial partitions of [n] compatible with f: [n] -> [n] (1-based tuple)."""
    n = len(f)
    if any(not 1 <= x <= n for x in f):
        raise ValueError("f must map [n] into [n]")
    for P in enum_partial_partitions(n):
        if is_compatible(P, f):
            yield P


def coefficient(f: Sequence[int]) -> int:
    """c_f = sum of sgn(P) |P|! over compatible P, computed in Z."""
    return sum(sign(P) * factorial(len(P)) for P in compatible_partial_partitions(f))


def all_functions(n: int) -> Iterator[tuple[int, ...]]:
    return product(range(1, n + 1), repeat=n)


def subsets(n: int) -> Iterator[int]:
    return iter(range(1 << n))


def in_trees(n: int) -> Iterator[tuple[int, ...]]:
    """Directed graphs (j_1..j_n) on {0..n} rooted at 0 that are in-trees.

    Every vertex i >= 1 points to j_i != i; the graph is an in-tree when the
    undirected graph is a tree, checked with union-find.
    """
    choices = [[j for j in range(n + 1) if j != i] for i in range(1, n + 1)]
    for targets in product(*choices):
        parent = list(range(n + 1))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        ok = True
        for i, j in enumerate(targets, start=1):
            ri, rj = find(i), find(j)
            if ri == rj:
                ok = False
                break
            parent[ri] = rj
        if ok:
            yield targets


__all__ = [
    "PartialPartition",
    "OrderedPartialPartition",
    "bell",
    "bell_nk",
    "stirling2",
    "sign",
    "count_opp",
    "enum_partial_partitions",
    "enum_opp",
    "check_opp_axioms",
    "opp_flip",
    "compatible_partial_partitions",
    "coefficient",
    "permutation_sign",
    "is_permutation",
    "in_trees",
    "mask_of",
    "elements_of",
    "popcount",
]
