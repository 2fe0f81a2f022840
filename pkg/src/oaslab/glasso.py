"""Single-shot compressive sensing baseline recovered by group LASSO.

The objective is ``||y - A v||^2 + lam * sum_b ||v_b||`` (no 1/2 factor),
minimized by FISTA with a restart whenever an extrapolated step would
increase the objective.
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .model import ModelParams, mse, noise_variance, sample_block_sparse
from .sensing import measure, sample_dense_gaussian


@dataclass(frozen=True)
class GlassoOptions:
    max_iter: int = 5000
    tol: float = 1e-8
    lambda_grid: Optional[Sequence[float]] = None
    grid_size: int = 25
    grid_span: tuple = (1e-3, 1e1)
    restart: bool = True
    # bound on the proximal gradient mapping; None means 5e-7 * (1 + ||A^T y||),
    # which keeps the optimality residual of the result below 1e-6 * (1 + ||A^T y||)
    gtol: Optional[float] = None

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.gtol is not None and not self.gtol > 0:
            raise ValueError(f"gtol must be positive, got {self.gtol}")
        if self.lambda_grid is not None:
            grid = tuple(float(v) for v in self.lambda_grid)
            if not grid or min(grid) <= 0:
                raise ValueError("lambda_grid must be nonempty and strictly positive")
            object.__setattr__(self, "lambda_grid", grid)


def _blocks(v, L):
    v = np.asarray(v, dtype=float)
    if v.shape[-1] % L:
        raise ValueError(f"length {v.shape[-1]} is not divisible by block length {L}")
    return v.reshape(-1, L)


def block_soft_threshold(u, tau):
    """Proximal map of tau * ||.||_2 applied to each row of ``u``.

    Accepts a single block (1-d) or a stack of blocks (2-d, one per row).
    """
    if tau < 0:
        raise ValueError(f"threshold must be nonnegative, got {tau}")
    u = np.asarray(u, dtype=float)
    norms = np.linalg.norm(u, axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(norms > tau, 1.0 - tau / norms, 0.0)
    return scale * u


def group_norm_sum(v, L) -> float:
    return float(np.linalg.norm(_blocks(v, L), axis=1).sum())


def objective(A, y, v, lam, L) -> float:
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    v = np.asarray(v, dtype=float)
    if A.shape != (y.size, v.size):
        raise ValueError(f"A has shape {A.shape}, expected {(y.size, v.size)}")
    r = y - A @ v
    return float(r @ r) + lam * group_norm_sum(v, L)


def spectral_bound(A, min_iter=100, max_iter=2000, rtol=1e-12, inflate=1.01) -> float:
    """Upper estimate of the largest eigenvalue of A^T A by power iteration."""
    A = np.asarray(A, dtype=float)
    v = np.random.default_rng(0).standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    est = 0.0
    for k in range(max_iter):
        u = A.T @ (A @ v)
        new = float(v @ u)
        nrm = np.linalg.norm(u)
        if nrm == 0.0:
            return 0.0
        v = u / nrm
        if k >= min_iter and abs(new - est) <= rtol * new:
            est = new
            break
        est = new
    return inflate * est


def lambda_zero_threshold(A, y, L) -> float:
    """Smallest lam for which v = 0 minimizes the objective."""
    g = 2.0 * (np.asarray(A).T @ np.asarray(y))
    return float(np.linalg.norm(_blocks(g, L), axis=1).max())


def fista_solve(A, y, lam, L, opts: GlassoOptions = None, x0=None, lipschitz=None,
                callback=None):
    """Minimize ||y - A v||^2 + lam * sum_b ||v_b|| over v.

    ``lipschitz`` may pass a precomputed ``spectral_bound(A)`` when the same
    matrix is solved for several values of ``lam``.  ``callback(v, value)``
    is called with every accepted iterate and its objective.

    Iteration stops once the relative objective decrease falls below
    ``opts.tol`` and the proximal gradient mapping is below ``opts.gtol``.
    The optimality residual of the returned point is at most ``2 * gtol``.
    Objective changes at rounding level are not treated as ascent, so a
    small ``gtol`` can be reached even after the objective has stagnated.
    """
    opts = opts or GlassoOptions()
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    K, N = A.shape
    if N % L:
        raise ValueError(f"N={N} is not divisible by block length L={L}")
    if y.shape != (K,):
        raise ValueError(f"y of shape {y.shape} does not match A of shape {A.shape}")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(y)) and np.isfinite(lam)):
        raise ValueError("non-finite input to fista_solve")
    if lam < 0:
        raise ValueError(f"lam must be nonnegative, got {lam}")

    bound = spectral_bound(A) if lipschitz is None else lipschitz
    if bound == 0.0:
        return np.zeros(N)
    step = 1.0 / (2.0 * bound)
    thresh = step * lam
    Aty = A.T @ y
    gtol = opts.gtol if opts.gtol is not None else 5e-7 * (1.0 + np.linalg.norm(Aty))

    def F(Av, v):
        r = y - Av
        return float(r @ r) + lam * float(np.linalg.norm(v.reshape(-1, L), axis=1).sum())

    x = np.zeros(N) if x0 is None else np.array(x0, dtype=float)
    Ax = A @ x
    Fx = F(Ax, x)
    z, Az = x, Ax
    t = 1.0
    for _ in range(opts.max_iter):
        grad = 2.0 * (A.T @ Az - Aty)
        xn = block_soft_threshold((z - step * grad).reshape(-1, L), thresh).ravel()
        Axn = A @ xn
        Fn = F(Axn, xn)
        # objective differences below rounding carry no information
        if Fn > Fx + 1e-13 * max(abs(Fx), 1.0):
            if z is x:
                # a plain proximal step cannot ascend; we are at rounding level
                break
            if opts.restart:
                z, Az, t = x, Ax, 1.0
                continue
        rel = (Fx - Fn) / max(Fx, np.finfo(float).tiny)
        tn = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        beta = (t - 1.0) / tn
        z_prev = z
        z = xn + beta * (xn - x)
        Az = Axn + beta * (Axn - Ax)
        x, Ax, Fx, t = xn, Axn, Fn, tn
        if callback is not None:
            callback(x, Fx)
        if rel < opts.tol and np.linalg.norm(z_prev - xn) / step <= gtol:
            break
    return x


def kkt_residual(A, y, v, lam, L) -> float:
    """Largest violation of the block subgradient optimality conditions."""
    A = np.asarray(A, dtype=float)
    g = (2.0 * A.T @ (A @ v - y)).reshape(-1, L)
    vb = np.asarray(v, dtype=float).reshape(-1, L)
    norms = np.linalg.norm(vb, axis=1)
    active = norms > 0
    res = np.zeros(len(vb))
    res[active] = np.linalg.norm(g[active] + lam * vb[active] / norms[active, None], axis=1)
    res[~active] = np.maximum(np.linalg.norm(g[~active], axis=1) - lam, 0.0)
    return float(res.max()) if len(res) else 0.0


def pilot_lambda_grid(A, y, L, opts: GlassoOptions = None) -> np.ndarray:
    """Log-spaced lambda grid scaled by the median block correlation 2||A_b^T y||."""
    opts = opts or GlassoOptions()
    if opts.lambda_grid is not None:
        return np.asarray(opts.lambda_grid)
    scale = np.median(np.linalg.norm(_blocks(2.0 * (np.asarray(A).T @ y), L), axis=1))
    lo, hi = opts.grid_span
    return scale * np.logspace(np.log10(lo), np.log10(hi), opts.grid_size)


@dataclass
class GlassoTrial:
    """One single-shot instance: signal, dense matrix and its measurement."""

    x: np.ndarray
    A: np.ndarray
    y: np.ndarray


def draw_trial(params: ModelParams, K: int, signal_rng, sensing_rng) -> GlassoTrial:
    """Fresh signal, matrix and noise; the whole budget T goes into one shot."""
    signal = sample_block_sparse(params, signal_rng)
    A = sample_dense_gaussian(K, params.N, sensing_rng)
    y = measure(A, signal.values, noise_variance(params.T, params.sigma0_sq), sensing_rng)
    return GlassoTrial(signal.values, A, y)


def path_mse(trial: GlassoTrial, lambdas, L, opts: GlassoOptions = None) -> np.ndarray:
    """MSE at every lambda, solving from the largest down with warm starts.

    Returned values follow the order of ``lambdas`` as given.
    """
    opts = opts or GlassoOptions()
    lambdas = np.asarray(lambdas, dtype=float)
    bound = spectral_bound(trial.A)
    out = np.empty(lambdas.size)
    v = None
    for i in np.argsort(-lambdas, kind="stable"):
        v = fista_solve(trial.A, trial.y, lambdas[i], L, opts, x0=v, lipschitz=bound)
        out[i] = mse(trial.x, v)
    return out


def solve_mse(trial: GlassoTrial, lam, L, opts: GlassoOptions = None) -> float:
    return mse(trial.x, fista_solve(trial.A, trial.y, lam, L, opts))


def tune_lambda(trials: Sequence[GlassoTrial], L, opts: GlassoOptions = None, lambdas=None):
    """Grid-search lambda minimizing the trial-mean MSE.

    Every lambda is evaluated on the same trials.  Without an explicit grid
    one is derived from the first trial.  Returns ``(lambda_star, mse_star,
    lambdas, mean_mse)``.
    """
    opts = opts or GlassoOptions()
    trials = list(trials)
    if lambdas is None:
        lambdas = pilot_lambda_grid(trials[0].A, trials[0].y, L, opts)
    lambdas = np.asarray(lambdas, dtype=float)
    if lambdas.size == 0:
        raise ValueError("empty lambda grid")
    curve = np.mean([path_mse(tr, lambdas, L, opts) for tr in trials], axis=0)
    best = int(np.argmin(curve))
    return float(lambdas[best]), float(curve[best]), lambdas, curve
