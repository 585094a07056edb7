from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from detbell.errors import NonFieldDomain
from detbell.linalg import XorBasis, pack_bits, rank, rank_bareiss, rank_f2_bits, rank_mod_p
from detbell.poly import Poly
from detbell.scalar import F2, QQ, ZZ, prime_field


def rank_oracle(rows):
    """Textbook Gauss-Jordan over Fractions."""
    M = [[Fraction(x) for x in r] for r in rows]
    r = 0
    cols = len(M[0]) if M else 0
    for c in range(cols):
        piv = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                f = M[i][c] / M[r][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        r += 1
    return r


small_matrices = st.integers(1, 6).flatmap(
    lambda m: st.integers(1, 6).flatmap(
        lambda n: st.lists(st.lists(st.integers(-3, 3), min_size=n, max_size=n), min_size=m, max_size=m)
    )
)


class TestRank:
    @given(small_matrices)
    def test_bareiss_matches_oracle(self, rows):
        assert rank_bareiss(rows) == rank_oracle(rows)

    @given(small_matrices)
    def test_bareiss_on_fractions(self, rows):
        frac = [[Fraction(x, 3) for x in r] for r in rows]
        assert rank_bareiss(frac) == rank_oracle(rows)

    @given(small_matrices)
    def test_f2_bits_match_mod_p(self, rows):
        assert rank_f2_bits(pack_bits(r) for r in rows) == rank_mod_p(rows, 2)

    def test_mod_p_detects_dependence(self):
        # rows independent over Q but dependent mod 3
        rows = [[1, 1], [1, 4]]
        assert rank_mod_p(rows, 3) == 1
        assert rank(rows, QQ) == 2

    def test_rank_needs_field(self):
        with pytest.raises(NonFieldDomain):
            rank([[1]], ZZ)

    def test_rank_dispatch(self):
        rows = [[1, 2], [2, 4]]
        assert rank(rows, QQ) == 1
        assert rank(rows, F2) == 1
        assert rank(rows, prime_field(5)) == 1

    def test_empty(self):
        assert rank_bareiss([]) == 0
        assert rank_mod_p([], 5) == 0


class TestXorBasis:
    @given(st.lists(st.integers(0, 2**16 - 1), max_size=20))
    def test_span_membership(self, vecs):
        B = XorBasis(vecs)
        for v in vecs:
            assert B.contains(v)
        acc = 0
        for v in vecs[::2]:
            acc ^= v
        assert B.contains(acc)
        bits = [[v >> k & 1 for k in range(16)] for v in vecs]
        assert len(B) == (rank_mod_p(bits, 2) if vecs else 0)

    def test_insert_reports_growth(self):
        B = XorBasis()
        assert B.insert(0b101)
        assert B.insert(0b011)
        assert not B.insert(0b110)
        assert not B.insert(0)

    def test_copy_is_independent(self):
        B = XorBasis([1])
        C = B.copy()
        C.insert(2)
        assert len(B) == 1 and len(C) == 2


class TestPoly:
    def test_square(self):
        x = Poly.linear({0: 1, 1: 1})
        sq = x**2
        assert sq.terms == {(0, 0): 1, (0, 1): 2, (1, 1): 1}

    def test_difference_of_squares(self):
        a = Poly.linear({0: 1, 1: 1}, QQ)
        b = Poly.linear({0: 1, 1: -1}, QQ)
        xy = (a**2 - b**2).scale(Fraction(1, 4))
        assert xy.terms == {(0, 1): 1}

    def test_cancellation_removes_terms(self):
        p = Poly.linear({0: 1})
        p.add_scaled(Poly.linear({0: 1}), -1)
        assert len(p) == 0

    @given(st.dictionaries(st.integers(0, 3), st.integers(-3, 3), max_size=4),
           st.dictionaries(st.integers(0, 3), st.integers(-3, 3), max_size=4))
    def test_commutative(self, a, b):
        p, q = Poly.linear(a), Poly.linear(b)
        assert p * q == q * p

    def test_multilinear_flag(self):
        x = Poly.linear({0: 1, 1: 1})
        assert x.is_multilinear()
        assert not (x * x).is_multilinear()

    def test_mod_2(self):
        x = Poly.linear({0: 1, 1: 1}, F2)
        assert (x * x).terms == {(0, 0): 1, (1, 1): 1}
