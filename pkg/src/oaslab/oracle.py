"""Brute-force reference computations used to cross-check the fast paths.

Nothing here imports from :mod:`oaslab.oas` or :mod:`oaslab.glasso`; the
posterior statistics are integrated numerically and the group LASSO is solved
by exact block coordinate descent.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar


@dataclass(frozen=True)
class QuadratureSpec:
    half_width: float = 12.0  # in posterior standard deviations
    nodes: int = 401

    def __post_init__(self):
        if self.nodes < 201:
            raise ValueError(f"need at least 201 nodes, got {self.nodes}")
        if self.half_width < 8:
            raise ValueError(f"half-width must be at least 8, got {self.half_width}")


def _log_gauss(r2, var, dim):
    return -0.5 * r2 / var - 0.5 * dim * np.log(2.0 * np.pi * var)


def _coordinate_grid(w, a, sigma_sq, spec):
    """Grid along one coordinate centred on the numerically located mode."""

    def neg_log(x):
        return 0.5 * x * x + 0.5 * (w - a * x) ** 2 / sigma_sq

    center = minimize_scalar(neg_log, bracket=(-1.0, 1.0), tol=1e-12).x
    h = 1e-3
    curvature = (neg_log(center + h) - 2.0 * neg_log(center) + neg_log(center - h)) / h**2
    sd = 1.0 / np.sqrt(curvature)
    return np.linspace(center - spec.half_width * sd, center + spec.half_width * sd, spec.nodes)


def _stats_on_grid(wbar, a, sigma_sq, xi, spec):
    L = wbar.size
    axes = [_coordinate_grid(w, a, sigma_sq, spec) for w in wbar]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)  # (n^L, L)
    cell = np.prod([ax[1] - ax[0] for ax in axes])

    log_f = (
        np.log(xi)
        + _log_gauss(np.sum(pts**2, axis=1), 1.0, L)
        + _log_gauss(np.sum((wbar - a * pts) ** 2, axis=1), sigma_sq, L)
    )
    if xi < 1.0:
        log_zero = np.log1p(-xi) + _log_gauss(float(wbar @ wbar), sigma_sq, L)
    else:
        log_zero = -np.inf
    shift = max(log_f.max(), log_zero)
    f = np.exp(log_f - shift)
    # trapezoid weights on a tensor grid
    weights = np.ones(len(f))
    for k, ax in enumerate(axes):
        edge = np.isin(pts[:, k], (ax[0], ax[-1]))
        weights[edge] *= 0.5
    f = f * weights * cell
    p0 = np.exp(log_zero - shift)
    Z = f.sum() + p0
    mean = (f[:, None] * pts).sum(axis=0) / Z
    err = (f * np.sum((pts - mean) ** 2, axis=1)).sum() + p0 * float(mean @ mean)
    return mean, err / Z


def posterior_stats_quadrature(wbar, a, sigma_sq, xi, spec: QuadratureSpec = None, check=True):
    """Posterior mean and conditional MSE of x given wbar = a x + noise.

    The prior is x = 0 with probability 1 - xi and x ~ N(0, I_L) otherwise;
    the noise is N(0, sigma_sq I_L).  With ``check`` the result is compared
    against a run at doubled node count.
    """
    spec = spec or QuadratureSpec()
    wbar = np.atleast_1d(np.asarray(wbar, dtype=float))
    if wbar.size > 2:
        raise ValueError(f"quadrature oracle supports L <= 2, got L={wbar.size}")
    mean, err = _stats_on_grid(wbar, a, sigma_sq, xi, spec)
    if check:
        fine = QuadratureSpec(spec.half_width, 2 * spec.nodes - 1)
        mean2, err2 = _stats_on_grid(wbar, a, sigma_sq, xi, fine)
        drift = max(np.abs(mean2 - mean).max(), abs(err2 - err))
        if drift > 1e-10:
            raise ArithmeticError(f"quadrature not converged: change {drift:.3g} at doubled nodes")
    return mean, err


def _block_minimizer(G, g, lam):
    """argmin_v  v^T G v - g^T v + lam ||v||  for symmetric PSD G.

    This is the exact block update of coordinate descent with
    G = A_b^T A_b and g = 2 A_b^T r_b.
    """
    if np.linalg.norm(g) <= lam:
        return np.zeros_like(g)
    evals, Q = np.linalg.eigh(G)
    evals = np.maximum(evals, 0.0)
    gt = Q.T @ g
    if lam == 0.0:
        return np.linalg.lstsq(2.0 * G, g, rcond=None)[0]

    # stationarity: v = (2G + (lam/nu) I)^{-1} g with nu = ||v||
    def gap(nu):
        return np.sum(gt**2 / (2.0 * evals * nu + lam) ** 2) - 1.0

    hi = 1.0
    while gap(hi) > 0:
        hi *= 2.0
    nu = brentq(gap, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    return Q @ (gt / (2.0 * evals + lam / nu))


def glasso_reference(A, y, lam, L, max_sweeps=200000, tol=1e-12):
    """Group LASSO by cyclic block coordinate descent with exact block steps."""
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    K, N = A.shape
    if N > 64:
        raise ValueError(f"reference solver is limited to N <= 64, got N={N}")
    if N % L:
        raise ValueError(f"N={N} not divisible by L={L}")
    B = N // L
    cols = [A[:, b * L:(b + 1) * L] for b in range(B)]
    grams = [c.T @ c for c in cols]
    v = np.zeros(N)
    r = y.copy()

    def obj():
        return float(r @ r) + lam * sum(np.linalg.norm(v[b * L:(b + 1) * L]) for b in range(B))

    prev = obj()
    for _ in range(max_sweeps):
        moved = 0.0
        for b in range(B):
            sl = slice(b * L, (b + 1) * L)
            old = v[sl].copy()
            r += cols[b] @ old
            v[sl] = _block_minimizer(grams[b], 2.0 * cols[b].T @ r, lam)
            r -= cols[b] @ v[sl]
            moved = max(moved, np.abs(v[sl] - old).max())
        cur = obj()
        # objective stalls long before the iterate does; require both
        if prev - cur <= tol * max(1.0, abs(cur)) and moved <= 1e-14 * max(1.0, np.abs(v).max()):
            break
        prev = cur
    return v
