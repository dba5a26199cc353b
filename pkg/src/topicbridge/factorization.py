"""Frobenius-norm NMF kernels: multiplicative updates, batch and online solvers."""

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, NumericError, ParameterError


@dataclass(frozen=True)
class SolverOptions:
    """Iteration controls shared by every solver in the package.

    ``step_size`` is only used by the projected-gradient joint solver; the
    multiplicative-update solvers have no step length.
    """

    max_iters: int = 100
    tol: float = 1e-5
    seed: int = 42
    epsilon: float = 1e-12
    step_size: float = 1.0

    def __post_init__(self):
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ParameterError(f"max_iters must be a positive integer, got {self.max_iters}")
        if not self.tol >= 0:
            raise ParameterError(f"tol must be >= 0, got {self.tol}")
        if not self.epsilon > 0:
            raise ParameterError(f"epsilon must be > 0, got {self.epsilon}")
        if not self.step_size > 0:
            raise ParameterError(f"step_size must be > 0, got {self.step_size}")


@dataclass(frozen=True)
class FactorPair:
    """Non-negative factors with ``V ~= W @ H``.

    W is (m, k) and holds per-document topic weights; H is (k, n) and holds
    one topic per row.
    """

    W: np.ndarray
    H: np.ndarray
    n_iter: int = 0

    def __post_init__(self):
        if self.W.ndim != 2 or self.H.ndim != 2 or self.W.shape[1] != self.H.shape[0]:
            raise ContractViolation(
                f"W {self.W.shape} and H {self.H.shape} do not share an inner dimension")

    @property
    def k(self):
        return self.H.shape[0]

    def product(self):
        return self.W @ self.H


def as_nonnegative(V, name="V", allow_empty=False):
    """Validate and convert ``V`` to a float64 non-negative 2-D array."""
    V = np.asarray(V, dtype=np.float64)
    if V.ndim != 2:
        raise ContractViolation(f"{name} must be 2-D, got shape {V.shape}")
    if not allow_empty and (V.shape[0] < 1 or V.shape[1] < 1):
        raise ContractViolation(f"{name} must have at least one row and column, got {V.shape}")
    if not np.all(np.isfinite(V)):
        raise NumericError(f"{name} contains NaN or Inf")
    if V.size and V.min() < 0:
        raise ContractViolation(f"{name} has negative entries (min {V.min():g})")
    return V


def _check_dims(V, factors):
    m, n = V.shape
    if factors.W.shape[0] != m or factors.H.shape[1] != n:
        raise ContractViolation(
            f"factors W {factors.W.shape}, H {factors.H.shape} do not match V {V.shape}")


def frobenius_objective(V, W, H):
    """Squared Frobenius loss ``||V - WH||_F^2`` minimised by the solvers."""
    R = V - W @ H
    return float(np.vdot(R, R))


def reconstruction_error(V, factors):
    """Reported RE: the (unsquared) Frobenius norm ``||V - WH||_F``."""
    V = np.asarray(V, dtype=np.float64)
    if V.ndim != 2:
        raise ContractViolation(f"V must be 2-D, got shape {V.shape}")
    _check_dims(V, factors)
    return float(np.linalg.norm(V - factors.W @ factors.H))


def _mu_step(V, W, H, eps):
    W = np.maximum(W, eps)
    H = np.maximum(H, eps)
    H = H * (W.T @ V) / np.maximum(W.T @ W @ H, eps)
    H = np.maximum(H, eps)
    W = W * (V @ H.T) / np.maximum(W @ (H @ H.T), eps)
    W = np.maximum(W, eps)
    return W, H


def multiplicative_update_step(V, factors, epsilon=1e-12):
    """One Lee-Seung sweep (H then W) for the Frobenius objective.

    Factors are floored at ``epsilon`` before each division, so zeros cannot
    lock in and 0/0 never occurs.
    """
    V = as_nonnegative(V)
    _check_dims(V, factors)
    W, H = _mu_step(V, factors.W, factors.H, epsilon)
    return FactorPair(W, H, factors.n_iter + 1)


def _uniform(rng, shape):
    # (0, 1] rather than [0, 1): a hard zero would never move under MU.
    return 1.0 - rng.random(shape)


def _run_mu(V, W, H, opts, n_iter0=0):
    prev = frobenius_objective(V, np.maximum(W, opts.epsilon), np.maximum(H, opts.epsilon))
    n_iter = n_iter0
    for _ in range(opts.max_iters):
        W, H = _mu_step(V, W, H, opts.epsilon)
        n_iter += 1
        obj = frobenius_objective(V, W, H)
        if abs(prev - obj) / max(prev, opts.epsilon) < opts.tol:
            break
        prev = obj
    return W, H, n_iter


def nmf_factorize(V, k, opts=None, restarts=1):
    """Factorize ``V`` (m x n) into non-negative ``W`` (m x k) and ``H`` (k x n).

    Parameters
    ----------
    V : array_like
        Non-negative data matrix.
    k : int
        Number of topics, ``1 <= k <= min(m, n)``.
    opts : SolverOptions, optional
        Iteration cap, tolerance and seed.
    restarts : int
        Independent random initializations; the run with the lowest final
        objective is returned. All restarts draw from one generator seeded
        by ``opts.seed``, so ``restarts=1`` is the plain single run.

    Returns
    -------
    FactorPair
    """
    opts = opts or SolverOptions()
    V = as_nonnegative(V)
    m, n = V.shape
    if int(k) != k or not 1 <= k <= min(m, n):
        raise ParameterError(f"k must be an integer in [1, {min(m, n)}], got {k}")
    if restarts < 1:
        raise ParameterError(f"restarts must be >= 1, got {restarts}")
    k = int(k)

    rng = np.random.default_rng(opts.seed)
    best, best_obj = None, np.inf
    for _ in range(restarts):
        W0 = _uniform(rng, (m, k))
        H0 = _uniform(rng, (k, n))
        W, H, n_iter = _run_mu(V, W0, H0, opts)
        obj = frobenius_objective(V, W, H)
        if obj < best_obj:
            best, best_obj = FactorPair(W, H, n_iter), obj
    return best


def onmf_update(prev, U, opts=None):
    """Update factors of ``V_t`` to factors of ``V_{t+1} = [V_t; U]``.

    The raw history is never revisited. Its only trace is the compressed
    product ``W_t H_t``, rewritten as ``(W_t D^-1)(D H_t)`` where ``D`` holds
    the column norms of ``W_t``. The k-row surrogate ``D H_t`` is stacked on
    top of ``U`` and refactorized with H warm-started from ``H_t``, giving
    ``[D H_t; U] ~= [A; W_U] H_new``; the history rows of the new W are
    ``W_t D^-1 A``. The solve touches ``k + rows(U)`` rows regardless of t.

    Returns
    -------
    FactorPair
        W has ``rows(V_t) + rows(U)`` rows; its last ``rows(U)`` rows are the
        coefficients of the new batch.
    """
    opts = opts or SolverOptions()
    U = as_nonnegative(U, "U", allow_empty=True)
    W_t, H_t = prev.W, prev.H
    if U.shape[1] != H_t.shape[1]:
        raise ContractViolation(
            f"U has {U.shape[1]} columns but previous H has {H_t.shape[1]}")
    if U.shape[0] == 0:
        return prev

    k = H_t.shape[0]
    eps = opts.epsilon
    d = np.maximum(np.linalg.norm(W_t, axis=0), eps)
    S = d[:, None] * H_t
    stacked = np.vstack([S, U])

    rng = np.random.default_rng(opts.seed)
    A0 = np.eye(k)
    W_U0 = _uniform(rng, (U.shape[0], k))
    W0 = np.vstack([A0, W_U0])
    W, H, n_iter = _run_mu(stacked, W0, H_t.copy(), opts, prev.n_iter)

    A, W_U = W[:k], W[k:]
    W_hist = (W_t / d) @ A
    return FactorPair(np.vstack([W_hist, W_U]), H, n_iter)


def new_batch_factors(factors, rows):
    """The factor pair restricted to the last ``rows`` rows of W."""
    return FactorPair(factors.W[factors.W.shape[0] - rows:], factors.H, factors.n_iter)
