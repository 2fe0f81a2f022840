"""Deterministic agreement checks between the fast paths and the oracles."""

from dataclasses import dataclass

import numpy as np

from .glasso import GlassoOptions, fista_solve, lambda_zero_threshold
from .oas import BlockPosteriorParams, posterior_mean, posterior_mse_exact, posterior_mse_paper
from .oracle import QuadratureSpec, glasso_reference, posterior_stats_quadrature
from .sensing import apply, assemble_blockwise, backproject, make_principles


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    tolerance: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}: {self.value:.3e} (tol {self.tolerance:.0e})"


def posterior_grid(L, n, seed=0):
    """n random (wbar, a, sigma_sq, xi) cases spanning the experiments' range."""
    rng = np.random.default_rng(seed + L)
    a = rng.integers(1, 9, size=n).astype(float)
    M = 8
    sigma_T_sq = rng.choice([0.01, 0.05, 0.2], size=n)
    sigma_sq = a * M * sigma_T_sq
    xi = rng.choice([0.05, 0.1, 0.3, 0.5, 0.9], size=n)
    # half the points near the decision boundary, half on the active scale
    active = rng.random(n) < 0.5
    scale = np.where(active, np.sqrt(a**2 + sigma_sq), np.sqrt(sigma_sq) * 2.0)
    wbar = rng.standard_normal((n, L)) * scale[:, None]
    return wbar, a, sigma_sq, xi


def literal_published_d(wbar, a, sigma_sq, xi):
    """Published posterior information with the Gaussian densities evaluated directly."""
    L = wbar.size
    V = a * a + sigma_sq
    r2 = float(wbar @ wbar)
    phi_s = np.exp(-r2 / (2 * sigma_sq)) / (2 * np.pi * sigma_sq) ** (L / 2)
    phi_v = np.exp(-r2 / (2 * V)) / (2 * np.pi * V) ** (L / 2)
    C = V * (1 + (1 - xi) * phi_s / (xi * phi_v))
    return (sigma_sq - a * a * r2 / C) / C


def check_posterior_quadrature(L, n=1000, tol=1e-8):
    wbar, a, s2, xi = posterior_grid(L, n)
    spec = QuadratureSpec(half_width=10.0, nodes=201)
    worst = 0.0
    for i in range(n):
        p = BlockPosteriorParams(a=a[i], sigma_sq=s2[i], xi=xi[i], L=L)
        mean, err = posterior_stats_quadrature(wbar[i], a[i], s2[i], xi[i], spec)
        worst = max(worst, np.abs(posterior_mean(wbar[i], p) - mean).max(),
                    abs(float(posterior_mse_exact(wbar[i], p)) - err))
    return Check(f"posterior mean/MSE vs quadrature, L={L}, {n} points", worst <= tol, worst, tol)


def check_published_formula(n=1000, tol=1e-10):
    worst = 0.0
    for L in (1, 2, 4):
        wbar, a, s2, xi = posterior_grid(L, n, seed=100)
        for i in range(n):
            ref = literal_published_d(wbar[i], a[i], s2[i], xi[i])
            if not np.isfinite(ref) or ref == 0.0:
                continue
            p = BlockPosteriorParams(a=a[i], sigma_sq=s2[i], xi=xi[i], L=L)
            worst = max(worst, abs(float(posterior_mse_paper(wbar[i], p)) - ref) / abs(ref))
    return Check("published posterior information vs literal transcription", worst <= tol, worst, tol)


def check_masking(n=100, tol=1e-12):
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(n):
        B = int(rng.integers(1, 13))
        L = int(rng.integers(1, 7))
        F = int(rng.integers(1, B + 1))
        K = F * L + int(rng.integers(0, L))
        U = make_principles(L, F, "random-orthogonal", rng)
        idx = rng.choice(B, size=F, replace=False)
        A = assemble_blockwise(U, idx, K, B)
        x = rng.standard_normal(B * L)
        v = backproject(A, apply(A, x)).reshape(B, L)
        mask = np.zeros(B, dtype=bool)
        mask[idx] = True
        expected = np.where(mask[:, None], x.reshape(B, L), 0.0)
        worst = max(worst, np.abs(v - expected).max())
    return Check(f"A^T A x masks x to sensed blocks, {n} instances", worst <= tol, worst, tol)


def glasso_instances(n=50, seed=11):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        L = int(rng.choice([1, 2, 4]))
        B = int(rng.integers(2, 20 // L + 1))
        N = B * L
        K = int(rng.integers(max(2, N // 2), N + 6))
        A = rng.standard_normal((K, N)) / np.sqrt(K)
        x = np.where(rng.random(B) < 0.4, 1.0, 0.0).repeat(L) * rng.standard_normal(N)
        y = A @ x + 0.1 * rng.standard_normal(K)
        lam = float(rng.uniform(0.05, 0.8)) * lambda_zero_threshold(A, y, L)
        yield A, y, lam, L


def check_fista_reference(n=50, tol=1e-5):
    opts = GlassoOptions(max_iter=200000, gtol=1e-10)
    worst = 0.0
    for A, y, lam, L in glasso_instances(n):
        ref = glasso_reference(A, y, lam, L)
        worst = max(worst, np.abs(fista_solve(A, y, lam, L, opts) - ref).max())
    return Check(f"FISTA vs coordinate-descent reference, {n} instances", worst <= tol, worst, tol)


def run_suite(points=1000, instances=50):
    return [
        check_posterior_quadrature(1, points),
        check_posterior_quadrature(2, points),
        check_published_formula(points),
        check_masking(100),
        check_fista_reference(instances),
    ]
