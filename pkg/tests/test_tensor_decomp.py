import json
import random
from importlib import resources
from itertools import product
from math import comb

import pytest
from hypothesis import given
from hypothesis import strategies as st

from detbell import tensor_decomp as td
from detbell.det_formulas import FormulaKind as K
from detbell.det_formulas import applicable_kinds, det_leibniz, term_count
from detbell.errors import DimensionTooLarge, DivisionInNonField, InvalidQ, SchemaViolation
from detbell.linalg import rank
from detbell.scalar import F2, QQ, ZZ, Matrix, prime_field

F3, F5 = prime_field(3), prime_field(5)


def fixture_path(name):
    return resources.files("detbell") / "data" / name


def random_invertible_f2(rng, n=4):
    while True:
        L = [[rng.randint(0, 1) for _ in range(n)] for _ in range(n)]
        if rank(L, F2) == n:
            return L


def contract(D, A):
    """Evaluate a decomposition as a polynomial in the rows of A."""
    dom = D.domain
    total = dom.zero
    for t in D.terms:
        acc = t.coeff
        for v, row in zip(t.vectors, A):
            acc = dom.mul(acc, dom.embed(sum(x * y for x, y in zip(v, row))))
        total = dom.add(total, acc)
    return total


class TestBuilder:
    def test_main_n3_first_term(self):
        D = td.decomposition_from_formula(K.MAIN_BELL, 3, QQ)
        assert D.rank == 5
        assert D.terms[0].vectors == ((0, 1, 1), (1, 0, 1), (1, 1, 0))
        assert D.terms[0].coeff == 1

    def test_char2_n4(self):
        D = td.decomposition_from_formula(K.CHAR_2, 4, F2)
        assert D.rank == 12
        assert td.expand_and_check(D)

    def test_main_n2_z(self):
        assert td.decomposition_from_formula(K.MAIN_BELL, 2, ZZ).rank == 2

    def test_glynn_in_z(self):
        with pytest.raises(DivisionInNonField):
            td.decomposition_from_formula(K.GLYNN, 3, ZZ)

    @pytest.mark.parametrize("n", range(0, 6))
    @pytest.mark.parametrize("dom", [ZZ, QQ, F2, F3, F5])
    def test_every_formula_valid(self, dom, n):
        for kind in applicable_kinds(dom):
            if kind is K.GLYNN and not dom.is_field:
                continue
            D = td.decomposition_from_formula(kind, n, dom)
            assert td.expand_and_check(D), (kind, dom, n)
            assert D.target == kind.target
            assert D.rank == term_count(kind, n, dom.characteristic)


class TestChecker:
    def test_sign_flip_detected(self):
        D = td.decomposition_from_formula(K.MAIN_BELL, 3, QQ)
        t = D.terms[1]
        D.terms[1] = td.Rank1Term(-t.coeff, t.vectors)
        res = td.expand_and_check(D)
        assert not res
        want = td.leibniz_tensor(3, QQ)[[j - 1 for j in res.witness]]
        got = td.expand(D)[[j - 1 for j in res.witness]]
        assert (res.expected, res.found) == (want, got) and want != got

    def test_leibniz_valid(self):
        assert td.expand_and_check(td.decomposition_from_formula(K.LEIBNIZ, 3, ZZ))

    def test_permanent_target(self):
        D = td.decomposition_from_formula(K.RYSER, 3, ZZ)
        assert td.expand_and_check(D)
        D.target = "det"
        assert not td.expand_and_check(D)

    def test_dense_cap(self):
        with pytest.raises(DimensionTooLarge):
            td.leibniz_tensor(8, ZZ)


class TestFlattening:
    @pytest.mark.parametrize("n", range(2, 6))
    @pytest.mark.parametrize("dom", [QQ, F2])
    def test_middle_flattening(self, dom, n):
        T = td.leibniz_tensor(n, dom)
        assert td.flattening_rank(T, n // 2) == comb(n, n // 2)

    def test_examples(self):
        assert td.flattening_rank(td.leibniz_tensor(4, F2), 2) == 6
        assert td.flattening_rank(td.leibniz_tensor(2, QQ), 1) == 2

    def test_on_decomposition(self):
        D = td.decomposition_from_formula(K.MAIN_BELL, 4, QQ)
        assert td.flattening_rank(D, 2) == 6

    def test_bad_arity(self):
        with pytest.raises(ValueError):
            td.flattening(td.leibniz_tensor(3, QQ), 0)

    def test_antisymmetric_basis(self):
        B = td.antisymmetric_basis(4, 2, F2)
        assert len(B) == 6
        assert all(sum(1 for x in v if x) == 2 for v in B)
        assert rank(B, F2) == 6
        top = td.antisymmetric_basis(3, 3, QQ)
        assert len(top) == 1 and sum(1 for x in top[0] if x) == 6
        assert td.antisymmetric_basis(1, 1, QQ) == [[1]]

    @pytest.mark.parametrize("n", range(2, 5))
    def test_no_rank1_antisymmetric_tensor_f2(self, n):
        B = td.antisymmetric_basis(n, 2, F2)
        r = rank(B, F2)
        for v, w in product(product((0, 1), repeat=n), repeat=2):
            vw = [a * b for a in v for b in w]
            if rank(B + [vw], F2) == r:
                assert not any(vw)

    @given(st.lists(st.integers(-2, 2), min_size=4, max_size=4),
           st.lists(st.integers(-2, 2), min_size=4, max_size=4))
    def test_no_rank1_antisymmetric_tensor_q(self, v, w):
        B = td.antisymmetric_basis(4, 2, QQ)
        vw = [a * b for a in v for b in w]
        if rank(B + [vw], QQ) == 6:
            assert not any(vw)


class TestBounds:
    def test_fq_rows(self):
        assert [td.lower_bound_fq(4, q) for q in (2, 3, 4, 5)] == [9, 8, 8, 7]
        assert td.lower_bound_fq(4, 7) == 7

    def test_general(self):
        assert td.lower_bound_general(4) == 7
        assert [td.lower_bound_general(n) for n in range(3, 8)] == [4, 7, 11, 21, 36]

    def test_general_small_n_is_exact(self):
        # det_1 and det_2 have rank 1 and 2, so no +1 there
        assert [td.lower_bound_general(n) for n in (0, 1, 2)] == [1, 1, 2]
        assert td.decomposition_from_formula(K.MAIN_BELL, 2, QQ).rank == 2

    def test_n5_q2_integer_search(self):
        # least r with r + 1 <= 2^(r - 10)
        r = next(r for r in range(11, 40) if r + 1 <= 2 ** (r - 10))
        assert r == 14
        assert td.lower_bound_fq(5, 2) == 14

    def test_small_n_uses_general_bound(self):
        assert td.lower_bound_fq(3, 2) == td.lower_bound_general(3)

    @pytest.mark.parametrize("q", [0, 1, 6, 10, 12])
    def test_invalid_q(self, q):
        with pytest.raises(InvalidQ):
            td.lower_bound_fq(4, q)

    def test_prime_power(self):
        assert td.prime_power(8) == (2, 3)
        assert td.prime_power(9) == (3, 2)
        assert td.prime_power(12) is None

    @pytest.mark.parametrize("n", range(2, 8))
    @pytest.mark.parametrize("q", [None, 2, 3, 4, 5])
    def test_lower_below_upper(self, n, q):
        t = td.bounds_table(n, q)
        assert t["lower"] <= t["upper"]

    def test_table_n4_q2(self):
        t = td.bounds_table(4, 2)
        assert (t["lower"], t["upper"], t["exact"]) == (9, 12, 12)


class TestJson:
    def test_roundtrip(self):
        D = td.decomposition_from_formula(K.MAIN_BELL, 3, QQ)
        E = td.import_decomposition(json.dumps(td.export_decomposition(D)))
        assert E.terms == D.terms and E.domain == D.domain and E.n == D.n

    def test_save_load(self, tmp_path):
        D = td.decomposition_from_formula(K.GLYNN, 3, F5)
        path = tmp_path / "g.json"
        td.save_decomposition(D, path)
        E = td.load_decomposition(path)
        assert E.terms == D.terms
        assert td.expand_and_check(E)

    @pytest.mark.parametrize(
        "doc",
        [
            "not json",
            [],
            {"n": 2, "target": "det", "domain": "Q"},
            {"n": -1, "target": "det", "domain": "Q", "terms": []},
            {"n": 2, "target": "sum", "domain": "Q", "terms": []},
            {"n": 2, "target": "det", "domain": "R", "terms": []},
            {"n": 2, "target": "det", "domain": "Q", "terms": [{"coeff": 1, "vectors": [[1, 0], [0, 1]]}]},
            {"n": 2, "target": "det", "domain": "Q", "terms": [{"coeff": "1", "vectors": [[1, 0]]}]},
            {"n": 2, "target": "det", "domain": "Q", "terms": [{"coeff": "1", "vectors": [[1, 0], [0]]}]},
            {"n": 2, "target": "det", "domain": "Q", "terms": [{"coeff": "x", "vectors": [[1, 0], [0, 1]]}]},
            {"n": 2, "target": "det", "domain": "Q", "terms": [{"coeff": "1", "vectors": [[1, 0.5], [0, 1]]}]},
        ],
    )
    def test_schema_violations(self, doc):
        with pytest.raises(SchemaViolation):
            td.import_decomposition(doc)

    def test_shipped_fixture(self):
        D = td.load_decomposition(fixture_path("det4_f2_12.json"))
        assert (D.n, D.domain, D.rank) == (4, F2, 12)
        assert td.expand_and_check(D)

    def test_shipped_fixture_matches_builder(self):
        D = td.load_decomposition(fixture_path("det4_f2_12.json"))
        assert D.terms == td.decomposition_from_formula(K.CHAR_2, 4, F2).terms

    def test_shipped_fixture_exhaustive(self):
        D = td.load_decomposition(fixture_path("det4_f2_12.json"))
        for bits in range(1 << 16):
            A = [[bits >> (4 * i + j) & 1 for j in range(4)] for i in range(4)]
            assert contract(D, A) == det_leibniz(Matrix(A, F2)).value


class TestChangeOfBasis:
    def test_gl4_f2(self, rng):
        D = td.load_decomposition(fixture_path("det4_f2_12.json"))
        for _ in range(5):
            L = random_invertible_f2(rng)
            assert td.expand_and_check(td.change_basis(D, L))

    def test_singular_breaks_f2(self):
        D = td.load_decomposition(fixture_path("det4_f2_12.json"))
        L = [[1, 1, 0, 0], [1, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
        assert not td.expand_and_check(td.change_basis(D, L))

    def test_q_scales_by_det(self):
        rng = random.Random(3)
        D = td.decomposition_from_formula(K.MAIN_BELL, 3, QQ)
        L = [[rng.randint(-2, 2) for _ in range(3)] for _ in range(3)]
        dL = det_leibniz(Matrix(L, QQ)).value
        got = td.expand(td.change_basis(D, L)).data
        want = td.leibniz_tensor(3, QQ).data
        assert got == [dL * x for x in want]
