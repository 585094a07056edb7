"""Determinant and permanent formulas as explicit sums of row products.

Every formula here has the same shape: a sum of integer-coefficient terms,
each term a product over rows i of a linear form in row i's entries.  A
formula is therefore materialized as a list of :class:`OuterTerm` values
(plus a global divisor, used only by Glynn's formula), and one evaluator
serves them all.  The same term lists feed the tensor decomposition
builder, where each row form becomes one tensor factor.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from itertools import permutations, product
from math import factorial
from typing import Iterator

from .combinatorics import (
    bell,
    bell_nk,
    elements_of,
    enum_partial_partitions,
    in_trees,
    permutation_sign,
    popcount,
    sign,
)
from .errors import (
    DivisionInNonField,
    GlynnInCharacteristic2,
    WrongCharacteristic,
)
from .poly import Poly
from .scalar import ZZ, Domain, Matrix, Scalar

# sparse linear form: ((column, coefficient), ...) with 0-based columns
RowForm = tuple[tuple[int, int], ...]


class FormulaKind(enum.Enum):
    LEIBNIZ = "leibniz"
    LEIBNIZ_PERMANENT = "leibniz-per"
    RYSER = "ryser"
    GLYNN = "glynn"
    MAIN_BELL = "main"
    CHAR_P = "charp"
    CHAR_2 = "char2"
    IN_TREE = "intree"

    @property
    def target(self) -> str:
        if self in (FormulaKind.LEIBNIZ_PERMANENT, FormulaKind.RYSER, FormulaKind.GLYNN):
            return "per"
        return "det"

    @classmethod
    def parse(cls, text: str) -> "FormulaKind":
        for k in cls:
            if k.value == text or k.name.lower() == text.lower():
                return k
        raise ValueError(f"unknown formula {text!r}; choose from {[k.value for k in cls]}")


@dataclass(frozen=True)
class OuterTerm:
    coeff: int
    rows: tuple[RowForm, ...]
    label: object = field(default=None, compare=False)

    def dense_rows(self, n: int) -> list[list[int]]:
        out = []
        for form in self.rows:
            v = [0] * n
            for j, c in form:
                v[j] += c
            out.append(v)
        return out


@dataclass
class Formula:
    kind: FormulaKind
    n: int
    terms: list[OuterTerm]
    divisor: int = 1

    @property
    def target(self) -> str:
        return self.kind.target


@dataclass
class EvalStats:
    """Bookkeeping of the work an evaluation performed."""

    products: int = 0
    factors: int = 0
    skipped: int = 0


def check_kind(kind: FormulaKind, characteristic: int) -> None:
    if kind is FormulaKind.CHAR_P and characteristic == 0:
        raise WrongCharacteristic("the char-p formula needs characteristic p > 0")
    if kind is FormulaKind.CHAR_2 and characteristic != 2:
        raise WrongCharacteristic("the char-2 formula needs characteristic 2")
    if kind is FormulaKind.GLYNN and characteristic == 2:
        raise GlynnInCharacteristic2("Glynn's formula divides by 2^(n-1)")


def _unit(j: int) -> RowForm:
    return ((j, 1),)


def _indicator(mask: int) -> RowForm:
    return tuple((e - 1, 1) for e in elements_of(mask))


# ---------------------------------------------------------------------------
# term generators


def leibniz_terms(n: int, signed: bool = True) -> Iterator[OuterTerm]:
    for sigma in permutations(range(n)):
        s = permutation_sign([x + 1 for x in sigma]) if signed else 1
        yield OuterTerm(s, tuple(_unit(j) for j in sigma), sigma)


def ryser_terms(n: int) -> Iterator[OuterTerm]:
    if n == 0:
        yield OuterTerm(1, (), 0)
        return
    for S in range(1, 1 << n):
        s = -1 if (popcount(S) + n) % 2 else 1
        form = _indicator(S)
        yield OuterTerm(s, (form,) * n, S)


def glynn_terms(n: int) -> Iterator[OuterTerm]:
    if n == 0:
        yield OuterTerm(1, (), ())
        return
    for tail in product((1, -1), repeat=n - 1):
        delta = (1,) + tail
        s = 1
        for d in delta:
            s *= d
        # each row form is sum_j delta_j a_{i,j}
        form = tuple((j, d) for j, d in enumerate(delta))
        yield OuterTerm(s, (form,) * n, delta)


def main_term(P) -> OuterTerm:
    """The term of the Bell-number formula indexed by a partial partition P."""
    n = P.n
    support = P.support
    rows = []
    for i in range(1, n + 1):
        part = P.part_of(i)
        if part:
            rows.append(_indicator(part & ~(1 << (i - 1))))
        else:
            rows.append(((i - 1, 1),) + _indicator(support))
    return OuterTerm(sign(P) * factorial(len(P)), tuple(rows), P)


def main_terms(n: int, max_parts: int | None = None) -> Iterator[OuterTerm]:
    for P in enum_partial_partitions(n, no_singletons=True, max_parts=max_parts):
        yield main_term(P)


def char2_terms(n: int) -> Iterator[OuterTerm]:
    for S in range(1 << n):
        if popcount(S) == 1:
            continue
        rows = tuple(_indicator(S ^ (1 << i)) for i in range(n))
        yield OuterTerm(1, rows, S)


def intree_terms(n: int) -> Iterator[OuterTerm]:
    s = -1 if n % 2 else 1
    root_form = tuple((j, -1) for j in range(n))
    for tree in in_trees(n):
        rows = tuple(root_form if t == 0 else _unit(t - 1) for t in tree)
        yield OuterTerm(s, rows, tree)


def formula(kind: FormulaKind, n: int, characteristic: int = 0) -> Formula:
    """Materialize the outer terms of ``kind`` for n x n matrices."""
    check_kind(kind, characteristic)
    divisor = 1
    if kind is FormulaKind.LEIBNIZ:
        terms = leibniz_terms(n)
    elif kind is FormulaKind.LEIBNIZ_PERMANENT:
        terms = leibniz_terms(n, signed=False)
    elif kind is FormulaKind.RYSER:
        terms = ryser_terms(n)
    elif kind is FormulaKind.GLYNN:
        terms = glynn_terms(n)
        divisor = 2 ** (n - 1) if n else 1
    elif kind is FormulaKind.MAIN_BELL:
        terms = main_terms(n)
    elif kind is FormulaKind.CHAR_P:
        terms = main_terms(n, max_parts=characteristic - 1)
    elif kind is FormulaKind.CHAR_2:
        terms = char2_terms(n)
    elif kind is FormulaKind.IN_TREE:
        terms = intree_terms(n)
    else:  # pragma: no cover
        raise ValueError(kind)
    return Formula(kind, n, list(terms), divisor)


# ---------------------------------------------------------------------------
# evaluation


def evaluate_terms(F: Formula, A: Matrix, stats: EvalStats | None = None):
    """Raw-value sum of the terms of F at A (before the global divisor)."""
    dom = A.domain
    m = dom.modulus
    rows = A.rows
    total = dom.zero
    for term in F.terms:
        c = dom.embed(term.coeff)
        if c == 0:
            if stats:
                stats.skipped += 1
            continue
        acc = c
        for i, form in enumerate(term.rows):
            r = rows[i]
            v = 0
            for j, cj in form:
                v += cj * r[j]
            acc = acc * v
            if m:
                acc %= m
        if stats:
            stats.products += 1
            stats.factors += len(term.rows)
        total = total + acc
        if m:
            total %= m
    return total


def evaluate(kind: FormulaKind, A: Matrix, stats: EvalStats | None = None) -> Scalar:
    dom = A.domain
    F = formula(kind, A.n, dom.characteristic)
    total = evaluate_terms(F, A, stats)
    if F.divisor != 1:
        if dom.is_field:
            total = dom.div(total, dom.embed(F.divisor))
        else:
            if total % F.divisor:
                raise DivisionInNonField(
                    f"Glynn sum {total} not divisible by {F.divisor} in Z"
                )
            total //= F.divisor
    return Scalar(dom, total)


def det_leibniz(A: Matrix) -> Scalar:
    return evaluate(FormulaKind.LEIBNIZ, A)


def per_leibniz(A: Matrix) -> Scalar:
    return evaluate(FormulaKind.LEIBNIZ_PERMANENT, A)


def per_ryser(A: Matrix) -> Scalar:
    return evaluate(FormulaKind.RYSER, A)


def per_glynn(A: Matrix) -> Scalar:
    return evaluate(FormulaKind.GLYNN, A)


def det_main(A: Matrix) -> Scalar:
    return evaluate(FormulaKind.MAIN_BELL, A)


def det_charp(A: Matrix) -> Scalar:
    return evaluate(FormulaKind.CHAR_P, A)


def det_char2(A: Matrix) -> Scalar:
    return evaluate(FormulaKind.CHAR_2, A)


def det_intree(A: Matrix) -> Scalar:
    return evaluate(FormulaKind.IN_TREE, A)


def applicable_kinds(domain: Domain) -> list[FormulaKind]:
    p = domain.characteristic
    kinds = [FormulaKind.LEIBNIZ, FormulaKind.LEIBNIZ_PERMANENT, FormulaKind.RYSER]
    if p != 2:
        kinds.append(FormulaKind.GLYNN)
    kinds.append(FormulaKind.MAIN_BELL)
    if p:
        kinds.append(FormulaKind.CHAR_P)
    if p == 2:
        kinds.append(FormulaKind.CHAR_2)
    kinds.append(FormulaKind.IN_TREE)
    return kinds


def compare_all(A: Matrix) -> dict[FormulaKind, tuple[Scalar, bool]]:
    """Evaluate every applicable formula and flag agreement with Leibniz."""
    det = det_leibniz(A)
    per = per_leibniz(A)
    out = {}
    for kind in applicable_kinds(A.domain):
        try:
            value = evaluate(kind, A)
        except DivisionInNonField:
            continue
        ref = per if kind.target == "per" else det
        out[kind] = (value, value == ref)
    return out


# ---------------------------------------------------------------------------
# counting and symbolic forms


def term_count(kind: FormulaKind, n: int, characteristic: int = 0) -> int:
    """Number of outer terms the evaluator multiplies (nonzero coefficients)."""
    check_kind(kind, characteristic)
    p = characteristic
    if kind in (FormulaKind.LEIBNIZ, FormulaKind.LEIBNIZ_PERMANENT):
        return factorial(n)
    if kind is FormulaKind.RYSER:
        return 2**n - 1 if n else 1
    if kind is FormulaKind.GLYNN:
        return 2 ** (n - 1) if n else 1
    if kind in (FormulaKind.MAIN_BELL, FormulaKind.CHAR_P):
        if p == 0:
            return bell(n)
        # |P|! vanishes in characteristic p exactly when |P| >= p
        return sum(bell_nk(n, k) for k in range(0, min(p - 1, n // 2) + 1))
    if kind is FormulaKind.CHAR_2:
        return 2**n - n
    if kind is FormulaKind.IN_TREE:
        return (n + 1) ** (n - 1) if n else 1
    raise ValueError(kind)  # pragma: no cover


def var(n: int, i: int, j: int) -> int:
    """Variable id of the entry a_{i,j} (0-based)."""
    return i * n + j


def leibniz_polynomial(n: int, signed: bool = True) -> Poly:
    terms = {}
    for sigma in permutations(range(n)):
        s = permutation_sign([x + 1 for x in sigma]) if signed else 1
        terms[tuple(sorted(var(n, i, sigma[i]) for i in range(n)))] = s
    return Poly(terms, ZZ)


def formula_polynomial(kind: FormulaKind, n: int, domain: Domain = ZZ) -> Poly:
    """Expand a formula with independent indeterminates for the entries."""
    F = formula(kind, n, domain.characteristic)
    total = Poly(dom=domain)
    for term in F.terms:
        c = domain.embed(term.coeff)
        if c == 0:
            continue
        prod = Poly.constant(1, domain)
        for i, form in enumerate(term.rows):
            prod = prod * Poly.linear({var(n, i, j): cj for j, cj in form}, domain)
        total.add_scaled(prod, c)
    if F.divisor != 1:
        total = total.scale(domain.inv(domain.embed(F.divisor)))
    return total
