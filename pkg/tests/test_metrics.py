import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from topicbridge.errors import ContractViolation, ParameterError
from topicbridge.metrics import assign_common_topics, cscore, dscore, top_terms
from topicbridge.textpipe import Vocabulary


def direct_cscore(A, B):
    k_c = len(A)
    return sum((a - b) ** 2 for ra, rb in zip(A, B) for a, b in zip(ra, rb)) / k_c


def direct_dscore(A, B, eps=1e-10):
    def smooth(row):
        s = [x + eps for x in row]
        t = sum(s)
        return [x / t for x in s]

    def kl(p, q):
        return sum(pi * math.log(pi / qi) for pi, qi in zip(p, q))

    P = [smooth(r) for r in A]
    Q = [smooth(r) for r in B]
    k_d = len(A)
    total = sum(kl(p, q) + kl(q, p) for p in P for q in Q)
    return total / (2 * k_d * k_d)


def brute_force_assignment(H_prev, H_new, k_c):
    k = len(H_prev)
    D = [[sum((a - b) ** 2 for a, b in zip(H_prev[i], H_new[j])) for j in range(k)] for i in range(k)]
    best = math.inf
    for rows in itertools.combinations(range(k), k_c):
        for cols in itertools.permutations(range(k), k_c):
            best = min(best, sum(D[i][j] for i, j in zip(rows, cols)))
    return best


nonneg = st.floats(0.0, 10.0, allow_nan=False, allow_infinity=False)


def matrix_pair(max_rows=4, max_cols=6):
    return st.tuples(st.integers(1, max_rows), st.integers(2, max_cols)).flatmap(
        lambda s: st.tuples(arrays(np.float64, s, elements=nonneg), arrays(np.float64, s, elements=nonneg)))


class TestCScore:
    def test_identity_and_zero(self):
        assert cscore(np.eye(2), np.zeros((2, 2))) == 1.0

    def test_identical_inputs(self):
        A = np.random.default_rng(0).random((3, 7))
        assert cscore(A, A.copy()) == 0.0

    def test_shape_mismatch(self):
        with pytest.raises(ContractViolation):
            cscore(np.ones((2, 3)), np.ones((3, 3)))

    @settings(max_examples=60, deadline=None)
    @given(matrix_pair())
    def test_matches_direct_formula_and_symmetric(self, pair):
        A, B = pair
        expected = direct_cscore(A.tolist(), B.tolist())
        assert cscore(A, B) == pytest.approx(expected, rel=1e-12, abs=1e-12)
        assert cscore(A, B) == cscore(B, A)
        assert cscore(A, B) >= 0


class TestDScore:
    def test_opposite_one_hot_rows(self):
        eps = 1e-10
        expected = (1.0 / (1.0 + 2 * eps)) * math.log((1.0 + eps) / eps)
        assert dscore([[1.0, 0.0]], [[0.0, 1.0]], eps) == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(23.02585, rel=1e-6)

    def test_uniform_rows_give_zero(self):
        U = np.full((3, 5), 0.2)
        assert dscore(U, U) == 0.0

    def test_single_row_identical_is_exactly_zero(self):
        a = np.random.default_rng(1).random((1, 9))
        assert dscore(a, a.copy()) == 0.0

    def test_identical_rows_in_both_sets(self):
        row = np.random.default_rng(2).random(6)
        A = np.tile(row, (3, 1))
        assert dscore(A, A.copy()) == 0.0
        # rescaling changes the smoothed rows only at the epsilon level
        assert dscore(A, A * 4.0) < 1e-18

    def test_all_zero_rows_are_handled(self):
        assert dscore(np.zeros((2, 4)), np.zeros((2, 4))) == 0.0
        assert np.isfinite(dscore(np.zeros((2, 4)), np.eye(2, 4)))

    def test_distinct_rows_against_themselves_are_positive(self):
        # cross-pair averaging: a set of different rows compared with itself
        # still pairs row i with row j != i
        A = np.eye(2, 3)
        assert dscore(A, A) > 0

    @settings(max_examples=60, deadline=None)
    @given(matrix_pair())
    def test_matches_direct_formula(self, pair):
        A, B = pair
        expected = direct_dscore(A.tolist(), B.tolist())
        assert dscore(A, B) == pytest.approx(expected, rel=1e-10, abs=1e-10)

    @settings(max_examples=60, deadline=None)
    @given(matrix_pair(), st.floats(0.01, 100.0))
    def test_nonnegative_symmetric_scale_invariant(self, pair, c):
        A, B = pair
        d = dscore(A, B)
        assert d >= 0
        assert dscore(B, A) == pytest.approx(d, rel=1e-12, abs=1e-12)
        A1, B1 = A + 1.0, B + 1.0  # keep smoothing small relative to row mass
        assert dscore(c * A1, c * B1) == pytest.approx(dscore(A1, B1), rel=1e-6, abs=1e-12)


class TestAssignment:
    def test_permutation_recovered(self):
        rng = np.random.default_rng(3)
        H = rng.random((5, 8))
        perm = rng.permutation(5)
        a = assign_common_topics(H, H[perm], 5)
        assert a.total_distance == 0.0
        for i, j in a.pairs:
            assert perm[j] == i
        assert a.distinct_prev == () and a.distinct_new == ()

    def test_identical_pair_chosen(self):
        H_prev = np.array([[1.0, 0, 0, 0], [0, 1.0, 0, 0], [0, 0, 1.0, 0]])
        H_new = np.array([[0, 0, 0, 1.0], [0, 1.0, 0, 0], [0, 0, 0, 2.0]])
        a = assign_common_topics(H_prev, H_new, 1)
        assert a.pairs == ((1, 1),)
        assert a.distinct_prev == (0, 2) and a.distinct_new == (0, 2)
        assert a.total_distance == brute_force_assignment(H_prev.tolist(), H_new.tolist(), 1) == 0.0

    @pytest.mark.parametrize("k_c", [0, 4, 1.5])
    def test_bad_k_c(self, k_c):
        with pytest.raises(ParameterError):
            assign_common_topics(np.ones((3, 2)), np.ones((3, 2)), k_c)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            k = int(rng.integers(1, 7))
            k_c = int(rng.integers(1, min(k, 3) + 1))
            A, B = rng.random((k, 5)), rng.random((k, 5))
            a = assign_common_topics(A, B, k_c)
            assert len(a.pairs) == k_c
            assert len(set(a.common_prev)) == len(set(a.common_new)) == k_c
            assert a.total_distance == pytest.approx(
                brute_force_assignment(A.tolist(), B.tolist(), k_c), rel=1e-12, abs=1e-14)

    def test_not_worse_than_greedy(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            A, B = rng.random((5, 4)), rng.random((5, 4))
            D = ((A[:, None] - B[None]) ** 2).sum(-1)
            used_r, used_c, greedy = set(), set(), 0.0
            for idx in np.argsort(D, axis=None):
                i, j = divmod(int(idx), 5)
                if i in used_r or j in used_c:
                    continue
                used_r.add(i), used_c.add(j)
                greedy += D[i, j]
                if len(used_r) == 3:
                    break
            assert assign_common_topics(A, B, 3).total_distance <= greedy + 1e-12


class TestTopTerms:
    def test_direct_sort(self):
        assert top_terms([0.1, 0.9, 0.5], ["a", "b", "c"], 2) == ["b", "c"]

    def test_ties_use_vocabulary_order(self):
        assert top_terms([1.0, 1.0, 1.0], ["x", "y", "z"], 3) == ["x", "y", "z"]

    def test_full_permutation_with_vocabulary(self):
        vocab = Vocabulary(("a", "b", "c", "d"), (1, 1, 1, 1), 1)
        assert top_terms([0.2, 0.0, 0.7, 0.2], vocab, 4) == ["c", "a", "d", "b"]

    def test_with_weights(self):
        assert top_terms([0.1, 0.9], ["a", "b"], 1, with_weights=True) == [("b", 0.9)]

    def test_count_too_large(self):
        with pytest.raises(ParameterError):
            top_terms([1.0, 2.0], ["a", "b"], 3)

    @settings(max_examples=50, deadline=None)
    @given(arrays(np.float64, st.integers(1, 12), elements=st.sampled_from([0.0, 0.5, 1.0, 2.0])),
           st.integers(1, 12))
    def test_stable_total_order(self, w, count):
        count = min(count, w.size)
        terms = [f"t{i}" for i in range(w.size)]
        out = top_terms(w, terms, count)
        assert out == top_terms(w, terms, count)
        assert len(set(out)) == count
        ranked = sorted(range(w.size), key=lambda i: (-w[i], i))
        assert out == [terms[i] for i in ranked[:count]]
