"""Tensor rank decompositions of the determinant and permanent tensors.

A formula that is a sum of products of row-wise linear forms gives a
decomposition directly: the linear form of row i in term k becomes the
i-th tensor factor of the k-th rank-1 term.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations, permutations
from math import comb, factorial
from typing import Sequence

from .combinatorics import bell, bell_nk, permutation_sign
from .det_formulas import FormulaKind, formula
from .errors import (
    DimensionTooLarge,
    DivisionInNonField,
    InvalidQ,
    NonFieldDomain,
    SchemaViolation,
)
from .linalg import rank
from .scalar import Domain, is_prime

MAX_DENSE_N = 7


@dataclass(frozen=True)
class Rank1Term:
    coeff: object  # raw domain value
    vectors: tuple[tuple, ...]


@dataclass
class TensorDecomposition:
    n: int
    target: str  # "det" or "per"
    domain: Domain
    terms: list[Rank1Term]

    @property
    def rank(self) -> int:
        return len(self.terms)


@dataclass
class CheckResult:
    valid: bool
    witness: tuple[int, ...] | None = None  # 1-based multi-index
    expected: object = None
    found: object = None

    def __bool__(self):
        return self.valid


def decomposition_from_formula(kind: FormulaKind, n: int, domain: Domain) -> TensorDecomposition:
    """Replace a_ij by e_j in the i-th tensor factor of every outer term."""
    F = formula(kind, n, domain.characteristic)
    scale = domain.one
    if F.divisor != 1:
        if not domain.is_field:
            raise DivisionInNonField(f"{kind.value} needs 1/{F.divisor} in {domain}")
        scale = domain.inv(domain.embed(F.divisor))
    terms = []
    for t in F.terms:
        c = domain.mul(domain.embed(t.coeff), scale)
        if c == 0:
            continue
        vecs = tuple(tuple(domain.embed(x) for x in row) for row in t.dense_rows(n))
        terms.append(Rank1Term(c, vecs))
    return TensorDecomposition(n, kind.target, domain, terms)


# ---------------------------------------------------------------------------
# dense tensors


@dataclass
class DenseTensor:
    n: int
    order: int
    domain: Domain
    data: list  # flat, mixed radix with the first factor most significant

    def __getitem__(self, idx: Sequence[int]):
        k = 0
        for j in idx:
            k = k * self.n + j
        return self.data[k]


def _check_size(n: int) -> None:
    if n > MAX_DENSE_N:
        raise DimensionTooLarge(f"dense expansion capped at n = {MAX_DENSE_N}")


def leibniz_tensor(n: int, domain: Domain, permanent: bool = False) -> DenseTensor:
    _check_size(n)
    data = [domain.zero] * (n**n)
    for sigma in permutations(range(n)):
        k = 0
        for j in sigma:
            k = k * n + j
        s = 1 if permanent else permutation_sign([x + 1 for x in sigma])
        data[k] = domain.embed(s)
    return DenseTensor(n, n, domain, data)


def expand(D: TensorDecomposition) -> DenseTensor:
    n, dom = D.n, D.domain
    _check_size(n)
    data = [dom.zero] * (n**n)
    for term in D.terms:
        partial = [(0, term.coeff)]
        for vec in term.vectors:
            nz = [(j, x) for j, x in enumerate(vec) if x != 0]
            partial = [(k * n + j, c * x) for k, c in partial for j, x in nz]
        for k, c in partial:
            data[k] = data[k] + c
    if dom.modulus:
        data = [x % dom.modulus for x in data]
    return DenseTensor(n, n, dom, data)


def expand_and_check(D: TensorDecomposition) -> CheckResult:
    """Compare the expanded decomposition with the Leibniz tensor entrywise."""
    got = expand(D)
    want = leibniz_tensor(D.n, D.domain, permanent=D.target == "per")
    for k, (a, b) in enumerate(zip(got.data, want.data)):
        if a != b:
            idx = []
            for _ in range(D.n):
                k, j = divmod(k, D.n)
                idx.append(j + 1)
            return CheckResult(False, tuple(reversed(idx)), b, a)
    return CheckResult(True)


def flattening(T: DenseTensor, s: int) -> list[list]:
    """The n^s x n^(n-s) matrix grouping the first s factors."""
    if not 1 <= s <= T.order - 1:
        raise ValueError("row arity must lie in [1, order-1]")
    cols = T.n ** (T.order - s)
    return [T.data[i * cols:(i + 1) * cols] for i in range(T.n**s)]


def flattening_rank(T, s: int) -> int:
    """Rank of a flattening of a dense tensor or of an expanded decomposition."""
    if isinstance(T, TensorDecomposition):
        T = expand(T)
    if not T.domain.is_field:
        raise NonFieldDomain(f"flattening rank needs a field, got {T.domain}")
    return rank(flattening(T, s), T.domain)


def antisymmetric_basis(n: int, s: int, domain: Domain) -> list[list]:
    """One signed symmetrization per increasing index tuple of length s."""
    out = []
    for I in combinations(range(n), s):
        v = [domain.zero] * (n**s)
        for perm in permutations(range(s)):
            k = 0
            for p in perm:
                k = k * n + I[p]
            v[k] = domain.add(v[k], domain.embed(permutation_sign([p + 1 for p in perm])))
        out.append(v)
    return out


def change_basis(D: TensorDecomposition, L: Sequence[Sequence[int]]) -> TensorDecomposition:
    """Apply v -> L v to every tensor factor (the tensor scales by det L)."""
    dom = D.domain
    terms = []
    for t in D.terms:
        vecs = tuple(
            tuple(dom.embed(sum(L[i][j] * v[j] for j in range(D.n))) for i in range(D.n))
            for v in t.vectors
        )
        terms.append(Rank1Term(t.coeff, vecs))
    return TensorDecomposition(D.n, D.target, dom, terms)


# ---------------------------------------------------------------------------
# bounds


def prime_power(q: int) -> tuple[int, int] | None:
    """(p, k) with q = p^k, or None."""
    if q < 2:
        return None
    for p in range(2, q + 1):
        if q % p == 0:
            k = 0
            while q % p == 0:
                q //= p
                k += 1
            return (p, k) if q == 1 and is_prime(p) else None
    return None  # pragma: no cover


def lower_bound_general(n: int) -> int:
    """Middle flattening rank plus one.

    The +1 needs a flattening side of arity >= 2 (no nonzero elementary
    tensor is antisymmetric there), so for n <= 2 only the flattening rank
    itself is a bound, and it is exact: det_1 and det_2 have rank 1 and 2.
    """
    if n <= 2:
        return comb(n, n // 2)
    return comb(n, n // 2) + 1


def lower_bound_fq(n: int, q: int) -> int:
    """Field-size-aware lower bound on the tensor rank of det_n over F_q."""
    if prime_power(q) is None:
        raise InvalidQ(f"q = {q} is not a prime power")
    c = comb(n, n // 2)
    if n <= 3:
        return lower_bound_general(n)
    r = c + 1
    if n == 4:
        # least r with r/2 <= q^(r-6) - 1
        while r > 2 * (q ** (r - c) - 1):
            r += 1
        return r
    # least r with r + 1 <= q^(r-C)
    while r + 1 > q ** (r - c):
        r += 1
    return r


def upper_bounds(n: int, q: int | None = None) -> dict[str, int]:
    """Known explicit decompositions of det_n (term counts)."""
    out = {"leibniz": factorial(n), "main": bell(n)}
    if q is not None:
        pk = prime_power(q)
        if pk is None:
            raise InvalidQ(f"q = {q} is not a prime power")
        p = pk[0]
        out["charp"] = sum(bell_nk(n, k) for k in range(0, min(p - 1, n // 2) + 1))
        if p == 2:
            out["char2"] = 2**n - n
    return out


def bounds_table(n: int, q: int | None = None) -> dict:
    lower = lower_bound_general(n) if q is None else lower_bound_fq(n, q)
    ups = upper_bounds(n, q)
    table = {"n": n, "q": q, "lower": lower, "upper": min(ups.values()), "upper_by": ups}
    if n == 4 and q == 2:
        table["exact"] = 12
    return table


# ---------------------------------------------------------------------------
# JSON


def export_decomposition(D: TensorDecomposition) -> dict:
    dom = D.domain
    return {
        "n": D.n,
        "target": D.target,
        "domain": str(dom),
        "terms": [
            {"coeff": dom.format(t.coeff), "vectors": [[int(x) for x in v] for v in t.vectors]}
            for t in D.terms
        ],
    }


def import_decomposition(doc) -> TensorDecomposition:
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as e:
            raise SchemaViolation(f"not JSON: {e}") from None
    if not isinstance(doc, dict):
        raise SchemaViolation("document must be an object")
    for key in ("n", "target", "domain", "terms"):
        if key not in doc:
            raise SchemaViolation(f"missing key {key!r}")
    n = doc["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 0:
        raise SchemaViolation("n must be a nonnegative integer")
    if doc["target"] not in ("det", "per"):
        raise SchemaViolation("target must be 'det' or 'per'")
    try:
        dom = Domain.parse(doc["domain"])
    except Exception as e:
        raise SchemaViolation(f"bad domain: {e}") from None
    if not isinstance(doc["terms"], list):
        raise SchemaViolation("terms must be a list")
    terms = []
    for k, t in enumerate(doc["terms"]):
        if not isinstance(t, dict) or "coeff" not in t or "vectors" not in t:
            raise SchemaViolation(f"term {k} needs coeff and vectors")
        if not isinstance(t["coeff"], str):
            raise SchemaViolation(f"term {k}: coeff must be a string")
        try:
            c = dom.parse_value(t["coeff"])
        except Exception as e:
            raise SchemaViolation(f"term {k}: bad coeff: {e}") from None
        vecs = t["vectors"]
        if not isinstance(vecs, list) or len(vecs) != n:
            raise SchemaViolation(f"term {k}: expected {n} vectors")
        for v in vecs:
            if not isinstance(v, list) or len(v) != n:
                raise SchemaViolation(f"term {k}: every vector must have length {n}")
            if not all(isinstance(x, int) and not isinstance(x, bool) for x in v):
                raise SchemaViolation(f"term {k}: vector entries must be integers")
        terms.append(Rank1Term(c, tuple(tuple(dom.embed(x) for x in v) for v in vecs)))
    return TensorDecomposition(n, doc["target"], dom, terms)


def load_decomposition(path) -> TensorDecomposition:
    with open(path) as fh:
        return import_decomposition(json.load(fh))


def save_decomposition(D: TensorDecomposition, path) -> None:
    doc = export_decomposition(D)
    terms = ",\n".join("  " + json.dumps(t) for t in doc["terms"])
    head = json.dumps({k: doc[k] for k in ("n", "target", "domain")})[:-1]
    with open(path, "w") as fh:
        fh.write(f'{head}, "terms": [\n{terms}\n]}}\n')
