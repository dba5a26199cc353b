"""Joint online NMF: per-step common/distinct topic discovery against prior topics.

One step links the previous topics ``H_t`` (k_prev x n) to a new batch ``U``
(m x n) by minimising

    1/2 ||H* - L* H_t||^2 + 1/2 ||U - W_U H_U||^2
        + alpha * cscore(H*_c, H_Uc) - beta * capped_dscore(H*_d, H_Ud)

over non-negative ``H*``, ``W_U``, ``H_U`` and an unconstrained ``L*``. The
first ``k_c`` rows of ``H*``/``H_U`` (columns of ``W_U``) are the common
topics and the remaining ``k_d`` are distinct. The distinctiveness term is
subtracted so that minimisation pushes distinct topics apart; each pair's
symmetric KL is capped to keep the objective bounded below.
"""

import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ContractViolation, NumericError, ParameterError
from .factorization import SolverOptions, as_nonnegative
from .metrics import DSCORE_EPSILON, symmetric_kl_matrix, to_distributions

log = logging.getLogger(__name__)

ARMIJO = 1e-4
SHRINK = 0.5
MIN_STEP = 1e-20
_BLOCKS = ("W_U", "H_U", "H_star", "L_star")


@dataclass(frozen=True)
class JointParams:
    k_c: int = 2
    k_d: int = 3
    alpha: float = 1000.0
    beta: float = 0.1
    solver: SolverOptions = field(default_factory=SolverOptions)
    dscore_epsilon: float = DSCORE_EPSILON
    kl_cap: float = 50.0

    def __post_init__(self):
        for name in ("k_c", "k_d"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ParameterError(f"{name} must be an integer >= 1, got {v}")
        if not self.alpha >= 0:
            raise ParameterError(f"alpha must be >= 0, got {self.alpha}")
        if not self.beta >= 0:
            raise ParameterError(f"beta must be >= 0, got {self.beta}")
        if not self.dscore_epsilon > 0:
            raise ParameterError(f"dscore_epsilon must be > 0, got {self.dscore_epsilon}")
        if not self.kl_cap > 0:
            raise ParameterError(f"kl_cap must be > 0, got {self.kl_cap}")

    @property
    def k(self):
        return self.k_c + self.k_d


@dataclass(frozen=True)
class JointFactorization:
    H_star: np.ndarray
    L_star: np.ndarray
    W_U: np.ndarray
    H_U: np.ndarray
    k_c: int
    objective_trace: tuple = ()
    n_iter: int = 0

    @property
    def k(self):
        return self.H_U.shape[0]

    @property
    def k_d(self):
        return self.k - self.k_c


class ObjectiveTerms(NamedTuple):
    prior_fit: float
    data_fit: float
    commonness: float
    distinctiveness: float

    @property
    def total(self):
        return self.prior_fit + self.data_fit + self.commonness + self.distinctiveness


class JointGradients(NamedTuple):
    H_star: np.ndarray
    L_star: np.ndarray
    W_U: np.ndarray
    H_U: np.ndarray


def _check_inputs(H_t, U, J):
    arrays = {"H_t": H_t, "U": U, "H_star": J.H_star, "L_star": J.L_star,
              "W_U": J.W_U, "H_U": J.H_U}
    for name, a in arrays.items():
        if not np.all(np.isfinite(a)):
            raise NumericError(f"{name} contains NaN or Inf")
    k, n = J.H_U.shape
    m = U.shape[0]
    if (J.H_star.shape != (k, n) or J.L_star.shape != (k, H_t.shape[0])
            or J.W_U.shape != (m, k) or H_t.shape[1] != n or U.shape[1] != n):
        raise ContractViolation(
            f"inconsistent shapes: H_t {H_t.shape}, U {U.shape}, H* {J.H_star.shape}, "
            f"L* {J.L_star.shape}, W_U {J.W_U.shape}, H_U {J.H_U.shape}")
    if not 1 <= J.k_c < k:
        raise ContractViolation(f"k_c={J.k_c} leaves no distinct topics among k={k}")


def _kl_pairs(A, B, eps, cap):
    P, Q = to_distributions(A, eps), to_distributions(B, eps)
    S = symmetric_kl_matrix(P, Q)
    return P, Q, S, np.minimum(S, cap)


def _terms(H_t, U, H_star, L_star, W_U, H_U, k_c, params):
    R1 = H_star - L_star @ H_t
    R2 = U - W_U @ H_U
    C = H_star[:k_c] - H_U[:k_c]
    k_d = H_U.shape[0] - k_c
    _, _, _, S = _kl_pairs(H_star[k_c:], H_U[k_c:], params.dscore_epsilon, params.kl_cap)
    return ObjectiveTerms(
        prior_fit=0.5 * float(np.vdot(R1, R1)),
        data_fit=0.5 * float(np.vdot(R2, R2)),
        commonness=params.alpha * float(np.vdot(C, C)) / k_c,
        distinctiveness=-params.beta * float(S.sum()) / (2.0 * k_d * k_d),
    )


def joint_objective_terms(H_t, U, J, params):
    """The four additive parts of the joint objective, for diagnostics."""
    H_t = np.asarray(H_t, dtype=np.float64)
    U = np.asarray(U, dtype=np.float64)
    _check_inputs(H_t, U, J)
    return _terms(H_t, U, J.H_star, J.L_star, J.W_U, J.H_U, J.k_c, params)


def joint_objective(H_t, U, J, params):
    return joint_objective_terms(H_t, U, J, params).total


def _kl_row_gradients(A, B, eps, cap):
    """Gradient of ``sum_ij min(S_ij, cap)`` w.r.t. the raw rows of A and B.

    ``S_ij`` is the symmetric KL between normalized smoothed rows; pairs at
    or above the cap contribute nothing.
    """
    P, Q, S, _ = _kl_pairs(A, B, eps, cap)
    M = (S < cap).astype(np.float64)
    logP, logQ = np.log(P), np.log(Q)
    gP = M.sum(axis=1)[:, None] * (logP + 1.0) - M @ logQ - (M @ Q) / P
    gQ = M.sum(axis=0)[:, None] * (logQ + 1.0) - M.T @ logP - (M.T @ P) / Q

    def through_normalization(g, D, raw):
        s = raw.sum(axis=1, keepdims=True) + eps * raw.shape[1]
        return (g - np.sum(D * g, axis=1, keepdims=True)) / s

    return through_normalization(gP, P, A), through_normalization(gQ, Q, B)


def _gradients(H_t, U, H_star, L_star, W_U, H_U, k_c, params):
    k_d = H_U.shape[0] - k_c
    R1 = H_star - L_star @ H_t
    R2 = U - W_U @ H_U

    g_Hs = R1.copy()
    g_L = -R1 @ H_t.T
    g_W = -R2 @ H_U.T
    g_HU = -W_U.T @ R2

    gc = (2.0 * params.alpha / k_c) * (H_star[:k_c] - H_U[:k_c])
    g_Hs[:k_c] += gc
    g_HU[:k_c] -= gc

    if params.beta > 0:
        gA, gB = _kl_row_gradients(H_star[k_c:], H_U[k_c:], params.dscore_epsilon, params.kl_cap)
        scale = -params.beta / (2.0 * k_d * k_d)
        g_Hs[k_c:] += scale * gA
        g_HU[k_c:] += scale * gB
    return JointGradients(g_Hs, g_L, g_W, g_HU)


def joint_gradients(H_t, U, J, params):
    """Analytic gradients of the joint objective for every block."""
    H_t = np.asarray(H_t, dtype=np.float64)
    U = np.asarray(U, dtype=np.float64)
    _check_inputs(H_t, U, J)
    return _gradients(H_t, U, J.H_star, J.L_star, J.W_U, J.H_U, J.k_c, params)


def split_common_distinct(J):
    """``(common H_U rows, distinct H_U rows, common H* rows, distinct H* rows)``."""
    c = J.k_c
    return J.H_U[:c], J.H_U[c:], J.H_star[:c], J.H_star[c:]


def rank_prior_topics(H_t, U, opts, n_iter=50):
    """Order the rows of ``H_t`` by how much of ``U`` each one explains.

    Fits non-negative coefficients for ``U`` with ``H_t`` held fixed and
    scores topic r by the total mass it reconstructs,
    ``sum(W[:, r]) * sum(H_t[r])``. Ties keep the original row order.
    """
    rng = np.random.default_rng(opts.seed)
    W = 1.0 - rng.random((U.shape[0], H_t.shape[0]))
    H = np.maximum(H_t, opts.epsilon)
    for _ in range(n_iter):
        W = W * (U @ H.T) / np.maximum(W @ (H @ H.T), opts.epsilon)
        W = np.maximum(W, opts.epsilon)
    mass = W.sum(axis=0) * H_t.sum(axis=1)
    return np.argsort(-mass, kind="stable")


def initialize(H_t, U, params, k_c=None, k_d=None, align=True):
    """Starting point for the joint solver.

    Prior topics are permuted so that the ``k_c`` rows most used by ``U``
    come first (``align=False`` keeps the given order); ``L*`` starts as that
    permutation, so ``H* = L* H_t`` holds exactly. ``H_U`` takes the prior
    common rows plus seeded uniform noise for the distinct rows, and ``W_U``
    is seeded uniform, rescaled so ``W_U H_U`` matches the scale of ``U``.
    """
    k_c = params.k_c if k_c is None else k_c
    k_d = params.k_d if k_d is None else k_d
    k, k_prev = k_c + k_d, H_t.shape[0]
    opts = params.solver
    rng = np.random.default_rng(opts.seed)

    order = rank_prior_topics(H_t, U, opts) if align else np.arange(k_prev)
    L0 = np.zeros((k, k_prev))
    for r in range(min(k, k_prev)):
        L0[r, order[r]] = 1.0
    H_star = L0 @ H_t

    scale = max(float(H_t.mean()), opts.epsilon)
    H_U = np.empty((k, H_t.shape[1]))
    n_common = min(k_c, k_prev)
    H_U[:n_common] = H_star[:n_common]
    H_U[n_common:] = scale * (1.0 - rng.random((k - n_common, H_t.shape[1])))
    H_star[k_prev:] = H_U[k_prev:]

    W_U = 1.0 - rng.random((U.shape[0], k))
    WH = W_U @ H_U
    denom = float(np.vdot(WH, WH))
    if denom > 0:
        W_U *= max(float(np.vdot(U, WH)) / denom, opts.epsilon)
    return JointFactorization(H_star, L0, W_U, H_U, k_c)


def _project(name, X):
    return X if name == "L_star" else np.maximum(X, 0.0)


def _take(state, name):
    return state[_BLOCKS.index(name)]


def joint_onmf_step(H_t, U, params, k_c=None, k_d=None, align=True, init=None, callback=None):
    """Solve one joint step by block-alternating projected gradient descent.

    Each sweep updates ``W_U``, ``H_U``, ``H*`` and ``L*`` in turn with a
    projected gradient step chosen by Armijo backtracking (trial step
    ``params.solver.step_size`` on the first sweep, then twice the block's
    last accepted step; halved until sufficient decrease). A block whose
    line search fails is left unchanged, so the objective never increases.
    Stops when the relative objective change drops below ``solver.tol`` or
    after ``solver.max_iters`` sweeps.

    ``k_c``/``k_d`` override the params (the runner uses this to shrink k on
    small batches); ``H_t`` may have a different number of rows than
    ``k_c + k_d``, in which case ``L*`` is rectangular. ``callback``, if
    given, is called after every sweep with ``(sweep, JointFactorization)``.
    """
    opts = params.solver
    H_t = as_nonnegative(H_t, "H_t")
    U = as_nonnegative(U, "U")
    k_c = params.k_c if k_c is None else int(k_c)
    k_d = params.k_d if k_d is None else int(k_d)
    k = k_c + k_d
    if k_c < 1 or k_d < 1:
        raise ParameterError(f"k_c and k_d must be >= 1, got {k_c}, {k_d}")
    if k > min(U.shape):
        raise ParameterError(f"k={k} exceeds min(U.shape)={min(U.shape)}")
    if H_t.shape[1] != U.shape[1]:
        raise ContractViolation(f"H_t has {H_t.shape[1]} columns but U has {U.shape[1]}")

    J0 = init if init is not None else initialize(H_t, U, params, k_c, k_d, align)
    _check_inputs(H_t, U, J0)
    state = [J0.W_U.copy(), J0.H_U.copy(), J0.H_star.copy(), J0.L_star.copy()]

    def F(s):
        return _terms(H_t, U, _take(s, "H_star"), _take(s, "L_star"),
                      _take(s, "W_U"), _take(s, "H_U"), k_c, params).total

    f = F(state)
    trace = [f]
    steps = dict.fromkeys(_BLOCKS, opts.step_size / 2.0)
    n_iter = 0
    for n_iter in range(1, opts.max_iters + 1):
        f_prev = f
        for b, name in enumerate(_BLOCKS):
            grads = _gradients(H_t, U, _take(state, "H_star"), _take(state, "L_star"),
                               _take(state, "W_U"), _take(state, "H_U"), k_c, params)
            g = getattr(grads, name)
            x = state[b]
            t = 2.0 * steps[name]
            while t >= MIN_STEP:
                cand = _project(name, x - t * g)
                trial = state.copy()
                trial[b] = cand
                f_new = F(trial)
                if f_new <= f + ARMIJO * float(np.vdot(g, cand - x)):
                    state, f = trial, f_new
                    steps[name] = t
                    break
                t *= SHRINK
            else:
                steps[name] = opts.step_size / 2.0
        trace.append(f)
        if callback is not None:
            callback(n_iter, JointFactorization(
                H_star=_take(state, "H_star"), L_star=_take(state, "L_star"),
                W_U=_take(state, "W_U"), H_U=_take(state, "H_U"), k_c=k_c,
                objective_trace=tuple(trace), n_iter=n_iter))
        if abs(f_prev - f) / max(abs(f_prev), opts.epsilon) < opts.tol:
            break

    if not np.isfinite(f):
        raise NumericError("joint objective became non-finite")
    return JointFactorization(
        H_star=_take(state, "H_star"), L_star=_take(state, "L_star"),
        W_U=_take(state, "W_U"), H_U=_take(state, "H_U"), k_c=k_c,
        objective_trace=tuple(trace), n_iter=n_iter)
