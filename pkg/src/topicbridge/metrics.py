"""Commonness / distinctiveness / reconstruction metrics and topic utilities."""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ContractViolation, ParameterError

DSCORE_EPSILON = 1e-10


@dataclass(frozen=True)
class MetricRecord:
    time_index: int
    method: str
    cscore: float
    dscore: float
    re: float
    wall_clock: float


def _pair(A, B):
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    if A.shape != B.shape:
        raise ContractViolation(f"shape mismatch: {A.shape} vs {B.shape}")
    return A, B


def cscore(A, B):
    """Mean squared Frobenius distance between two stacks of common topics.

    ``(1/k_c) * ||A - B||_F^2`` with ``k_c = A.shape[0]``; 0 for identical
    inputs, smaller is better.
    """
    A, B = _pair(A, B)
    D = A - B
    return float(np.vdot(D, D)) / A.shape[0]


def to_distributions(A, epsilon=DSCORE_EPSILON):
    """Additively smooth each row by ``epsilon`` and renormalize it to sum to 1."""
    S = np.asarray(A, dtype=np.float64) + epsilon
    return S / S.sum(axis=1, keepdims=True)


def symmetric_kl_matrix(P, Q):
    """``out[i, j] = KL(P_i || Q_j) + KL(Q_j || P_i)`` for row-stochastic P, Q.

    Evaluated as ``sum_k (p_k - q_k)(log p_k - log q_k)``: every term is
    non-negative and identical rows give exactly 0.
    """
    dP = P[:, None, :] - Q[None, :, :]
    dlog = np.log(P)[:, None, :] - np.log(Q)[None, :, :]
    return np.einsum("ijk,ijk->ij", dP, dlog)


def dscore(A, B, epsilon=DSCORE_EPSILON):
    """Average symmetric KL divergence over every (row of A, row of B) pair.

    Rows are smoothed and normalized first, so all-zero rows are fine and
    the score ignores row scale. The sum over all ``k_d**2`` cross pairs is
    divided by ``2 * k_d**2``. Larger means more distinct.
    """
    A, B = _pair(A, B)
    k_d = A.shape[0]
    S = symmetric_kl_matrix(to_distributions(A, epsilon), to_distributions(B, epsilon))
    return float(S.sum()) / (2.0 * k_d * k_d)


@dataclass(frozen=True)
class TopicAssignment:
    """Result of matching previous-step topics to new-step topics.

    ``pairs`` holds ``(prev_row, new_row)`` tuples sorted by ``prev_row``.
    """

    pairs: tuple
    distinct_prev: tuple
    distinct_new: tuple
    total_distance: float

    @property
    def common_prev(self):
        return [i for i, _ in self.pairs]

    @property
    def common_new(self):
        return [j for _, j in self.pairs]


def pairwise_sq_distances(A, B):
    diff = A[:, None, :] - B[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def assign_common_topics(H_prev, H_new, k_c):
    """Pick ``k_c`` disjoint (prev, new) row pairs of minimum total squared distance.

    The rows left unmatched on either side are the distinct topics. Solved
    exactly as a square assignment problem: ``k - k_c`` zero-cost dummy rows
    and columns soak up the unmatched topics, and dummy-to-dummy links are
    forbidden so exactly ``k_c`` real pairs survive.
    """
    H_prev, H_new = _pair(H_prev, H_new)
    k = H_prev.shape[0]
    if int(k_c) != k_c or not 1 <= k_c <= k:
        raise ParameterError(f"k_c must be an integer in [1, {k}], got {k_c}")
    k_c = int(k_c)
    D = pairwise_sq_distances(H_prev, H_new)

    pad = k - k_c
    size = k + pad
    cost = np.zeros((size, size))
    cost[:k, :k] = D
    cost[k:, k:] = np.inf
    rows, cols = linear_sum_assignment(cost)

    pairs = tuple((int(i), int(j)) for i, j in zip(rows, cols) if i < k and j < k)
    matched_prev = {i for i, _ in pairs}
    matched_new = {j for _, j in pairs}
    return TopicAssignment(
        pairs=pairs,
        distinct_prev=tuple(i for i in range(k) if i not in matched_prev),
        distinct_new=tuple(j for j in range(k) if j not in matched_new),
        total_distance=float(sum(D[i, j] for i, j in pairs)),
    )


def top_terms(topic_row, vocab, count, with_weights=False):
    """Highest-weighted terms of one topic row.

    Ties are broken by ascending vocabulary index, so the ranking is a total
    order and reproducible.
    """
    w = np.asarray(topic_row, dtype=np.float64).ravel()
    terms = getattr(vocab, "terms", vocab)
    if len(terms) != w.size:
        raise ContractViolation(f"topic row has {w.size} weights but vocabulary has {len(terms)} terms")
    if int(count) != count or not 1 <= count <= w.size:
        raise ParameterError(f"count must be an integer in [1, {w.size}], got {count}")
    order = np.argsort(-w, kind="stable")[: int(count)]
    if with_weights:
        return [(terms[i], float(w[i])) for i in order]
    return [terms[i] for i in order]
