"""The axis-aligned tile F_A whose lattice translates tile R^n.

C_A is the box prod [0, a_ii].  F_A is the closure of C_A minus its
translates C_A + A 1_S for nonempty S.  For admissible A (positive
diagonal, negative off-diagonal, positive row sums) F_A tiles space under
the lattice A Z^n, its vertices are indexed by ordered partial partitions
and its volume equals det A.

Everything here is exact: coordinates are Fractions, and the box tests
that need numpy first scale the matrix to even integers.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import ceil, lcm
from typing import Iterable, Sequence

import numpy as np

from .combinatorics import (
    OrderedPartialPartition,
    elements_of,
    enum_opp,
    opp_flip,
    popcount,
)
from .errors import NonTermination, NotAdmissible
from .scalar import Matrix

Vec = tuple[Fraction, ...]


def as_rational(A) -> tuple[tuple[Fraction, ...], ...]:
    rows = A.rows if isinstance(A, Matrix) else A
    return tuple(tuple(Fraction(x) for x in r) for r in rows)


def check_admissible(A) -> tuple[tuple[Fraction, ...], ...]:
    """Return A as Fractions or raise NotAdmissible naming the failed condition."""
    if isinstance(A, Matrix) and A.domain.modulus:
        raise NotAdmissible("admissible matrices live over Z or Q")
    R = as_rational(A)
    n = len(R)
    for i in range(n):
        if R[i][i] <= 0:
            raise NotAdmissible(f"diagonal entry ({i + 1},{i + 1}) is not positive")
        for j in range(n):
            if i != j and R[i][j] >= 0:
                raise NotAdmissible(f"off-diagonal entry ({i + 1},{j + 1}) is not negative")
        if sum(R[i]) <= 0:
            raise NotAdmissible(f"row {i + 1} does not have positive sum")
    return R


def is_admissible(A) -> bool:
    try:
        check_admissible(A)
    except NotAdmissible:
        return False
    return True


def random_admissible(n: int, rng: random.Random, bound: int = 9, den: int = 3) -> Matrix:
    """Random admissible rational matrix with small numerators and denominators."""
    from .scalar import QQ

    rows = []
    for i in range(n):
        off = [Fraction(-rng.randint(1, bound), rng.randint(1, den)) for _ in range(n)]
        off[i] = 0
        diag = -sum(off) + Fraction(rng.randint(1, bound), rng.randint(1, den))
        off[i] = diag
        rows.append(off)
    return Matrix(rows, QQ)


def canonical_matrix(n: int) -> Matrix:
    """B = (n+1) I - J."""
    return Matrix([[n if i == j else -1 for j in range(n)] for i in range(n)])


def column_sum(R, S: int) -> Vec:
    """A 1_S for a subset mask S."""
    n = len(R)
    cols = elements_of(S)
    return tuple(sum((R[i][j - 1] for j in cols), Fraction(0)) for i in range(n))


def translate_box(R, S: int) -> tuple[Vec, Vec]:
    t = column_sum(R, S)
    return t, tuple(t[i] + R[i][i] for i in range(len(R)))


# ---------------------------------------------------------------------------
# vertices and the flip graph


@dataclass
class PolytopeSkeleton:
    n: int
    vertices: dict  # OrderedPartialPartition -> coordinates
    edges: list  # (OPP, OPP, axis label z)

    def degree(self) -> dict:
        deg = {v: 0 for v in self.vertices}
        for a, b, _ in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg


def vertex(R, P: OrderedPartialPartition) -> Vec:
    """v_i = sum of a_ij over all j with i preceding j."""
    n = len(R)
    return tuple(
        sum((R[i][j - 1] for j in elements_of(P.up_set(i + 1))), Fraction(0))
        for i in range(n)
    )


def skeleton(A) -> PolytopeSkeleton:
    R = check_admissible(A)
    n = len(R)
    verts = {P: vertex(R, P) for P in enum_opp(n)}
    edges = []
    seen = set()
    for P in verts:
        for z in range(1, n + 1):
            Q = opp_flip(P, z)
            key = (frozenset((P, Q)), z)
            if key not in seen:
                seen.add(key)
                edges.append((P, Q, z))
    return PolytopeSkeleton(n, verts, edges)


def check_edges_axis_parallel(sk: PolytopeSkeleton) -> bool:
    """Endpoints of an edge with label z differ exactly in coordinate z."""
    for P, Q, z in sk.edges:
        a, b = sk.vertices[P], sk.vertices[Q]
        diff = [i + 1 for i in range(sk.n) if a[i] != b[i]]
        if diff != [z]:
            return False
    return True


def face_components(sk: PolytopeSkeleton, labels: Iterable[int]) -> list[set]:
    """Connected components of the subgraph keeping only edges with the given labels."""
    labels = set(labels)
    adj = {v: [] for v in sk.vertices}
    for P, Q, z in sk.edges:
        if z in labels:
            adj[P].append(Q)
            adj[Q].append(P)
    comps, seen = [], set()
    for v in sk.vertices:
        if v in seen:
            continue
        stack, comp = [v], set()
        seen.add(v)
        while stack:
            u = stack.pop()
            comp.add(u)
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        comps.append(comp)
    return comps


def check_faces(sk: PolytopeSkeleton, labels: Sequence[int]) -> bool:
    """Each component is flat off the labelled axes and spans every labelled axis."""
    labels = set(labels)
    for comp in face_components(sk, labels):
        pts = [sk.vertices[v] for v in comp]
        for i in range(sk.n):
            values = {p[i] for p in pts}
            if (i + 1) in labels:
                if len(values) < 2:
                    return False
            elif len(values) != 1:
                return False
    return True


# ---------------------------------------------------------------------------
# volume by inclusion-exclusion over chains


@dataclass
class ChainTerm:
    chain: tuple[int, ...]  # subset masks S_1 < S_2 < ... < S_k
    sign: int
    lo: Vec
    hi: Vec
    sides: Vec

    @property
    def volume(self) -> Fraction:
        v = Fraction(1)
        for s in self.sides:
            v *= s
        return v


def chains(n: int) -> Iterable[tuple[int, ...]]:
    """Chains of subsets of [n] with every successive gap of size at least 2."""
    full = (1 << n) - 1

    def extend(chain, top):
        yield chain
        rest = full & ~top
        sub = rest
        while sub:
            if popcount(sub) >= 2:
                yield from extend(chain + (top | sub,), top | sub)
            sub = (sub - 1) & rest

    yield from extend((), 0)


def side_lengths(R, chain: Sequence[int]) -> Vec:
    """Closed-form sides: within a gap, minus the sum over that gap; outside, a_ii plus the top sum."""
    n = len(R)
    top = chain[-1] if chain else 0
    out = []
    for i in range(n):
        bit = 1 << i
        if top & bit:
            prev = 0
            for S in chain:
                if S & bit:
                    gap = S & ~prev
                    break
                prev = S
            out.append(-sum((R[i][j - 1] for j in elements_of(gap) if j != i + 1), Fraction(0)))
        else:
            out.append(R[i][i] + sum((R[i][j - 1] for j in elements_of(top)), Fraction(0)))
    return tuple(out)


def chain_box(R, chain: Sequence[int]) -> tuple[Vec, Vec]:
    """Intersection of C_A with C_A + A 1_S for every S in the chain."""
    n = len(R)
    lo = [Fraction(0)] * n
    hi = [R[i][i] for i in range(n)]
    for S in chain:
        a, b = translate_box(R, S)
        lo = [max(x, y) for x, y in zip(lo, a)]
        hi = [min(x, y) for x, y in zip(hi, b)]
    return tuple(lo), tuple(hi)


def volume_terms(A) -> list[ChainTerm]:
    R = check_admissible(A)
    out = []
    for ch in chains(len(R)):
        lo, hi = chain_box(R, ch)
        sides = tuple(max(Fraction(0), h - l) for l, h in zip(lo, hi))
        out.append(ChainTerm(ch, (-1) ** len(ch), lo, hi, sides))
    return out


def volume_inclusion_exclusion(A) -> Fraction:
    return sum((t.sign * t.volume for t in volume_terms(A)), Fraction(0))


def volume_all_families(A) -> Fraction:
    """Inclusion-exclusion over every family of translates (no chain shortcut); tiny n only."""
    R = check_admissible(A)
    n = len(R)
    subsets = list(range(1, 1 << n))
    total = Fraction(0)
    for fam in range(1 << len(subsets)):
        members = [S for k, S in enumerate(subsets) if fam >> k & 1]
        lo, hi = chain_box(R, members)
        v = Fraction(1)
        for l, h in zip(lo, hi):
            v *= max(Fraction(0), h - l)
        total += (-1) ** len(members) * v
    return total


# ---------------------------------------------------------------------------
# membership


def _in_open_box(p, lo, hi) -> bool:
    return all(l < x < h for x, l, h in zip(p, lo, hi))


def _in_closed_box(p, lo, hi) -> bool:
    return all(l <= x <= h for x, l, h in zip(p, lo, hi))


def contains(A, x: Sequence, _R=None) -> bool:
    """Exact test x in F_A (closed), by probing the open cells around x."""
    R = _R or check_admissible(A)
    n = len(R)
    x = tuple(Fraction(c) for c in x)
    c_hi = tuple(R[i][i] for i in range(n))
    if not _in_closed_box(x, (0,) * n, c_hi):
        return False
    boxes = [translate_box(R, S) for S in range(1, 1 << n)]
    gaps = []
    for i in range(n):
        walls = {Fraction(0), c_hi[i]}
        for lo, hi in boxes:
            walls.update((lo[i], hi[i]))
        gaps.extend(abs(x[i] - w) for w in walls if w != x[i])
    eps = min(gaps) / 2 if gaps else Fraction(1, 2)
    for sigma in product((-1, 1), repeat=n):
        y = tuple(xi + s * eps for xi, s in zip(x, sigma))
        if _in_open_box(y, (0,) * n, c_hi) and not any(_in_closed_box(y, lo, hi) for lo, hi in boxes):
            return True
    return False


# ---------------------------------------------------------------------------
# cell decomposition (integer scaled) for overlap tests


@dataclass
class CellComplex:
    """F_A as a union of closed grid cells, in coordinates scaled by `scale`."""

    scale: int
    A: np.ndarray  # scaled integer matrix
    lo: np.ndarray  # (cells, n)
    hi: np.ndarray


def cell_complex(A) -> CellComplex:
    R = check_admissible(A)
    n = len(R)
    den = 1
    for r in R:
        for x in r:
            den = lcm(den, x.denominator)
    scale = 2 * den
    M = np.array([[int(x * scale) for x in r] for r in R], dtype=np.int64)
    diag = np.diag(M)
    boxes = []
    for S in range(1, 1 << n):
        cols = [j - 1 for j in elements_of(S)]
        t = M[:, cols].sum(axis=1)
        boxes.append((t, t + diag))
    axes = []
    for i in range(n):
        walls = {0, int(diag[i])}
        for lo, hi in boxes:
            walls.update((int(lo[i]), int(hi[i])))
        walls = sorted(w for w in walls if 0 <= w <= diag[i])
        axes.append(walls)
    grids = np.meshgrid(*[np.arange(len(w) - 1) for w in axes], indexing="ij")
    idx = np.stack([g.ravel() for g in grids], axis=1)
    lo = np.stack([np.array(axes[i])[idx[:, i]] for i in range(n)], axis=1)
    hi = np.stack([np.array(axes[i])[idx[:, i] + 1] for i in range(n)], axis=1)
    centre2 = lo + hi  # twice the centre, stays integral
    inside = np.ones(len(lo), dtype=bool)
    for blo, bhi in boxes:
        hit = np.all((centre2 > 2 * blo) & (centre2 < 2 * bhi), axis=1)
        inside &= ~hit
    return CellComplex(scale, M, lo[inside], hi[inside])


def _overlap(cc: CellComplex, shift: np.ndarray, strict: bool) -> bool:
    lo2, hi2 = cc.lo + shift, cc.hi + shift
    # bounding-box prefilter
    if np.any(cc.hi.max(axis=0) < lo2.min(axis=0)) or np.any(hi2.max(axis=0) < cc.lo.min(axis=0)):
        return False
    a_lo, a_hi = cc.lo[:, None, :], cc.hi[:, None, :]
    b_lo, b_hi = lo2[None, :, :], hi2[None, :, :]
    if strict:
        ok = np.all((a_lo < b_hi) & (b_lo < a_hi), axis=2)
    else:
        ok = np.all((a_lo <= b_hi) & (b_lo <= a_hi), axis=2)
    return bool(ok.any())


def is_neighbour_offset(v: Sequence[int]) -> bool:
    return any(v) and (all(x in (0, 1) for x in v) or all(x in (0, -1) for x in v))


@dataclass
class NeighbourReport:
    n: int
    neighbours: list = field(default_factory=list)  # offsets whose tiles touch
    interior_overlaps: list = field(default_factory=list)
    unexpected_contacts: list = field(default_factory=list)
    missing_contacts: list = field(default_factory=list)
    checked: int = 0

    @property
    def ok(self) -> bool:
        return (
            not self.interior_overlaps
            and not self.unexpected_contacts
            and not self.missing_contacts
            and len(self.neighbours) == 2 * (2**self.n - 1)
        )


def check_neighbors(A, radius: int = 2) -> NeighbourReport:
    """Test every lattice offset with |v|_inf <= radius against F_A (n <= 3)."""
    R = check_admissible(A)
    n = len(R)
    if n > 3:
        raise ValueError("neighbour checks are limited to n <= 3")
    cc = cell_complex(R)
    rep = NeighbourReport(n)
    for v in product(range(-radius, radius + 1), repeat=n):
        if not any(v):
            continue
        rep.checked += 1
        shift = cc.A @ np.array(v, dtype=np.int64)
        if _overlap(cc, shift, strict=True):
            rep.interior_overlaps.append(v)
        touch = _overlap(cc, shift, strict=False)
        if touch:
            rep.neighbours.append(v)
        if is_neighbour_offset(v) and not touch:
            rep.missing_contacts.append(v)
        if not is_neighbour_offset(v) and touch:
            rep.unexpected_contacts.append(v)
    return rep


def tiles_intersect(A, v: Sequence[int], interior: bool = False) -> bool:
    cc = cell_complex(A)
    return _overlap(cc, cc.A @ np.array(v, dtype=np.int64), strict=interior)


# ---------------------------------------------------------------------------
# coverage


@dataclass
class CoverResult:
    x: Vec
    tile: tuple[int, ...]  # u with x in F_A + A u
    peeled: tuple[int, ...]  # b with y - A b in F_A after the descent
    steps: int


def mat_vec(R, v) -> Vec:
    return tuple(sum((R[i][j] * v[j] for j in range(len(v))), Fraction(0)) for i in range(len(R)))


def cover_point(A, x: Sequence, _R=None) -> CoverResult:
    """Find u in Z^n with x in F_A + A u by descending into C_A, then peeling translates."""
    R = _R or check_admissible(A)
    n = len(R)
    x = tuple(Fraction(c) for c in x)
    rowsum = [sum(r) for r in R]
    # lift into the positive orthant along A 1, whose entries are the positive row sums
    t = max([0] + [ceil(-xi / rs) for xi, rs in zip(x, rowsum) if xi < 0])
    w = [t] * n  # y = x + A w
    y = [xi + t * rs for xi, rs in zip(x, rowsum)]
    budget = 10 * int(sum(abs(a) for r in R for a in r) + sum(abs(c) for c in y) + 1)
    steps = 0
    while True:
        over = next((i for i in range(n) if y[i] > R[i][i]), None)
        if over is None:
            break
        steps += 1
        if steps > budget:
            raise NonTermination(f"descent exceeded {budget} steps at {x}")
        for k in range(n):
            y[k] -= R[k][over]
        w[over] -= 1
    # peel off positive translates until the point lands in F_A
    b = [0] * n
    boxes = [(S, translate_box(R, S)) for S in range(1, 1 << n)]
    while not contains(None, y, _R=R):
        S, (lo, _hi) = next(
            (S, box) for S, box in boxes if _in_closed_box(y, box[0], box[1])
        )
        steps += 1
        if steps > budget:
            raise NonTermination(f"peeling exceeded {budget} steps at {x}")
        y = [yi - li for yi, li in zip(y, lo)]
        for j in elements_of(S):
            b[j - 1] += 1
    u = tuple(b[j] - w[j] for j in range(n))
    return CoverResult(x, u, tuple(b), steps)


@dataclass
class CoverageReport:
    points: int
    covered: int
    max_steps: int
    failures: list

    @property
    def ok(self) -> bool:
        return self.covered == self.points and not self.failures


def check_coverage(A, samples: Iterable[Sequence]) -> CoverageReport:
    R = check_admissible(A)
    covered = 0
    max_steps = 0
    failures = []
    count = 0
    for x in samples:
        count += 1
        res = cover_point(None, x, _R=R)
        p = tuple(xi - si for xi, si in zip(res.x, mat_vec(R, res.tile)))
        if contains(None, p, _R=R):
            covered += 1
        else:
            failures.append(tuple(x))
        max_steps = max(max_steps, res.steps)
    return CoverageReport(count, covered, max_steps, failures)


def random_points(n: int, rng: random.Random, count: int, bound: int = 20, den: int = 7) -> list[Vec]:
    return [
        tuple(Fraction(rng.randint(-bound * den, bound * den), den) for _ in range(n))
        for _ in range(count)
    ]


# ---------------------------------------------------------------------------
# colouring and the canonical matrix


def colouring(v: Sequence[int]) -> int:
    """Colour of the tile F_A + A v: coordinate sum modulo n + 1."""
    return sum(v) % (len(v) + 1)


def cube_census(n: int) -> tuple[int, bool]:
    """Unit cubes of F_B for B = (n+1)I - J, checked against the sorted-corner rule."""
    B = canonical_matrix(n)
    R = check_admissible(B)
    count = 0
    agree = True
    for x in product(range(1, n + 1), repeat=n):
        centre = tuple(Fraction(2 * xi - 1, 2) for xi in x)
        inside = contains(None, centre, _R=R)
        rule = all(1 <= xi <= i + 1 for i, xi in enumerate(sorted(x)))
        agree &= inside == rule
        count += inside
    return count, agree


# ---------------------------------------------------------------------------
# drawing


PALETTE = ("#4c9f70", "#e0b84f", "#5b7fc7", "#c75b5b", "#9a6bc7", "#5bb8c7", "#c78f5b")


def svg_tiling(A, scale: float = 20.0) -> str:
    """SVG of F_A (n = 2) with its six neighbours, coloured by lattice coordinate sum."""
    cc = cell_complex(A)
    if cc.lo.shape[1] != 2:
        raise ValueError("drawing needs n = 2")
    offsets = [(0, 0)] + [v for v in product((-1, 0, 1), repeat=2) if is_neighbour_offset(v)]
    rects = []
    pts = []
    for v in offsets:
        shift = cc.A @ np.array(v, dtype=np.int64)
        colour = PALETTE[colouring(v)]
        for lo, hi in zip(cc.lo + shift, cc.hi + shift):
            pts.extend([lo, hi])
            rects.append((lo, hi, colour, v == (0, 0)))
    pts = np.array(pts)
    mn, mx = pts.min(axis=0), pts.max(axis=0)
    f = scale / cc.scale
    width, height = (mx - mn) * f + 20
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{height:.0f}">']
    for lo, hi, colour, centre in rects:
        x = (lo[0] - mn[0]) * f + 10
        y = (mx[1] - hi[1]) * f + 10  # flip so y points up
        w, h = (hi - lo) * f
        stroke = "#000" if centre else "none"
        out.append(
            f'<rect x="{x:.2f}" y="{y:.2f}" width="{w:.2f}" height="{h:.2f}" '
            f'fill="{colour}" stroke="{stroke}" stroke-width="0.3"/>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
