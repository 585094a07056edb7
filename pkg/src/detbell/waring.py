"""Waring decompositions of the determinant polynomial.

Each outer term of the Bell-number formula is a product of n linear forms,
and a product of n linear forms is a combination of 2^(n-1) n-th powers:

    x_1 ... x_n = 1/(2^(n-1) n!) * sum over e in {+1,-1}^(n-1) of
                  (e_1 ... e_(n-1)) (x_1 + e_1 x_2 + ... + e_(n-1) x_n)^n
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from math import factorial
from typing import Sequence

from .combinatorics import bell
from .det_formulas import FormulaKind, formula, leibniz_polynomial, var
from .errors import BadCharacteristic, DegreeTooLarge, DivisionInNonField
from .poly import Poly
from .scalar import QQ, Domain

MAX_VERIFY_N = 4


class LinearForm:
    """Finitely supported map (i, j) -> coefficient, 0-based indices."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: dict | None = None):
        self.coeffs = {k: v for k, v in (coeffs or {}).items() if v != 0}

    def combine(self, other: "LinearForm", c, dom: Domain) -> "LinearForm":
        """self + c * other."""
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = dom.add(out.get(k, dom.zero), dom.mul(c, v))
        return LinearForm(out)

    def to_poly(self, n: int, dom: Domain) -> Poly:
        return Poly.linear({var(n, i, j): c for (i, j), c in self.coeffs.items()}, dom)

    def __eq__(self, other):
        return isinstance(other, LinearForm) and self.coeffs == other.coeffs

    def __repr__(self):
        return f"LinearForm({self.coeffs})"


@dataclass
class WaringDecomposition:
    n: int
    domain: Domain
    forms: list[tuple[object, LinearForm]]

    @property
    def rank(self) -> int:
        return len(self.forms)


@dataclass
class WaringCheck:
    valid: bool
    witness: tuple | None = None  # first differing monomial, as 1-based (i, j) pairs

    def __bool__(self):
        return self.valid


def _check_domain(n: int, dom: Domain) -> None:
    p = dom.characteristic
    if 0 < p <= n:
        raise BadCharacteristic(f"characteristic {p} <= degree {n}: Waring rank is infinite")
    if not dom.is_field:
        raise DivisionInNonField(f"the power identity divides by 2^(n-1) n!, not possible in {dom}")


def product_to_powers(factors: Sequence[LinearForm], dom: Domain = QQ) -> list[tuple[object, LinearForm]]:
    """Write the product of n linear forms as sum c * l^n with 2^(n-1) terms."""
    n = len(factors)
    _check_domain(n, dom)
    if n == 0:
        return [(dom.one, LinearForm())]
    scale = dom.inv(dom.embed(2 ** (n - 1) * factorial(n)))
    out = []
    for eps in product((1, -1), repeat=n - 1):
        form = LinearForm({k: dom.normalize(v) for k, v in factors[0].coeffs.items()})
        s = 1
        for e, f in zip(eps, factors[1:]):
            form = form.combine(f, dom.embed(e), dom)
            s *= e
        out.append((dom.mul(dom.embed(s), scale), form))
    return out


def waring_from_formula(n: int, dom: Domain = QQ) -> WaringDecomposition:
    """Apply the power identity to every term of the Bell-number formula."""
    _check_domain(n, dom)
    forms = []
    for term in formula(FormulaKind.MAIN_BELL, n, dom.characteristic).terms:
        c = dom.embed(term.coeff)
        if c == 0:
            continue
        factors = [
            LinearForm({(i, j): dom.embed(cj) for j, cj in row})
            for i, row in enumerate(term.rows)
        ]
        for k, form in product_to_powers(factors, dom):
            forms.append((dom.mul(c, k), form))
    return WaringDecomposition(n, dom, forms)


def expand_waring(W: WaringDecomposition) -> Poly:
    n, dom = W.n, W.domain
    total = Poly(dom=dom)
    for c, form in W.forms:
        total.add_scaled(form.to_poly(n, dom) ** n, c)
    return total


def verify_waring(W: WaringDecomposition) -> WaringCheck:
    """Expand sum c_k l_k^n and compare with the determinant polynomial."""
    if W.n > MAX_VERIFY_N:
        raise DegreeTooLarge(f"symbolic check capped at degree {MAX_VERIFY_N}")
    got = expand_waring(W)
    want = Poly(leibniz_polynomial(W.n).terms, W.domain)
    if got == want:
        return WaringCheck(True)
    diff = (got - want).terms
    mono = min(diff)
    return WaringCheck(False, tuple((v // W.n + 1, v % W.n + 1) for v in mono))


def reference_bounds(n: int) -> dict[str, int]:
    """2^(n-1) B_n from this construction and n * n! from roots-of-unity constructions."""
    return {"bell": 2 ** max(n - 1, 0) * bell(n), "n_factorial": n * factorial(n)}


def export_waring(W: WaringDecomposition) -> dict:
    dom = W.domain
    return {
        "n": W.n,
        "domain": str(dom),
        "terms": [
            {
                "coeff": dom.format(c),
                "form": {f"{i + 1},{j + 1}": dom.format(v) for (i, j), v in sorted(f.coeffs.items())},
            }
            for c, f in W.forms
        ],
    }
