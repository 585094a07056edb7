"""Sparse multivariate polynomials over a domain.

A monomial is a sorted tuple of variable ids (repeats encode powers), which
keeps multilinear determinant expansions compact.
"""

from __future__ import annotations

from typing import Iterable, Mapping

from .scalar import ZZ, Domain


class Poly:
    __slots__ = ("dom", "terms")

    def __init__(self, terms: Mapping[tuple, object] | None = None, dom: Domain = ZZ):
        self.dom = dom
        clean = {}
        if terms:
            for mono, c in terms.items():
                c = dom.normalize(c)
                if c != 0:
                    clean[tuple(sorted(mono))] = c
        self.terms = clean

    @classmethod
    def constant(cls, c, dom: Domain = ZZ) -> "Poly":
        return cls({(): c}, dom)

    @classmethod
    def linear(cls, coeffs: Mapping[int, object], dom: Domain = ZZ) -> "Poly":
        """Linear form sum c_v * x_v."""
        return cls({(v,): c for v, c in coeffs.items()}, dom)

    @classmethod
    def monomial(cls, variables: Iterable[int], c=1, dom: Domain = ZZ) -> "Poly":
        return cls({tuple(variables): c}, dom)

    def _raw(self, terms: dict) -> "Poly":
        p = Poly(dom=self.dom)
        p.terms = {m: c for m, c in terms.items() if c != 0}
        return p

    def __add__(self, other: "Poly") -> "Poly":
        dom = self.dom
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = dom.add(out[m], c) if m in out else c
        return self._raw(out)

    def __neg__(self) -> "Poly":
        return self._raw({m: self.dom.neg(c) for m, c in self.terms.items()})

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def scale(self, c) -> "Poly":
        c = self.dom.normalize(c)
        return self._raw({m: self.dom.mul(c, v) for m, v in self.terms.items()})

    def __mul__(self, other: "Poly") -> "Poly":
        dom = self.dom
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(sorted(m1 + m2))
                c = dom.mul(c1, c2)
                out[m] = dom.add(out[m], c) if m in out else c
        return self._raw(out)

    def __pow__(self, k: int) -> "Poly":
        result = Poly.constant(1, self.dom)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def add_scaled(self, other: "Poly", c) -> None:
        """In-place ``self += c * other`` (used for large accumulations)."""
        dom = self.dom
        c = dom.normalize(c)
        t = self.terms
        for m, v in other.terms.items():
            x = dom.mul(c, v)
            if m in t:
                y = dom.add(t[m], x)
                if y == 0:
                    del t[m]
                else:
                    t[m] = y
            elif x != 0:
                t[m] = x

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.dom == other.dom and self.terms == other.terms

    def __len__(self):
        return len(self.terms)

    def is_multilinear(self) -> bool:
        return all(len(set(m)) == len(m) for m in self.terms)

    def __repr__(self):
        return f"Poly({len(self.terms)} terms over {self.dom})"
