"""Bayesian oversampled adaptive sensing with block-wise orthogonal matrices.

Block ``b`` sensed ``a`` times has the accumulated statistic
``wbar_b = a * x_b + noise`` with noise variance ``sigma_sq = a * M * sigma^2(T)``
per entry.  Under the Bernoulli-Gaussian block prior the marginal of ``wbar_b``
is a two-component Gaussian mixture with variances ``sigma_sq`` (inactive) and
``V = a^2 + sigma_sq`` (active).  All mixture weights are handled through the
log ratio ``t`` of the inactive to the active component, so that the posterior
activity probability is ``expit(-t)``.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .model import BlockSparseSignal, ModelParams, mse, noise_variance
from .sensing import assemble_blockwise, backproject, make_principles, measure

METRICS = ("paper", "exact")


@dataclass(frozen=True)
class BlockPosteriorParams:
    """Per-block posterior parameters; ``a`` and ``sigma_sq`` may be arrays."""

    a: np.ndarray
    sigma_sq: np.ndarray
    xi: float
    L: int

    @property
    def V(self):
        return np.asarray(self.a, dtype=float) ** 2 + self.sigma_sq

    @classmethod
    def from_visits(cls, a, M, sigma_T_sq, xi, L):
        a = np.asarray(a, dtype=float)
        return cls(a=a, sigma_sq=a * M * sigma_T_sq, xi=xi, L=L)


def _check_visited(p):
    if np.any(np.asarray(p.a) < 1):
        raise ValueError("posterior statistics need at least one visit (a >= 1)")


def _sq_norm(wbar):
    wbar = np.asarray(wbar, dtype=float)
    return np.einsum("...i,...i->...", wbar, wbar)


def log_mixture_ratio(wbar_b, p: BlockPosteriorParams):
    """Log of (1-xi) phi(wbar | sigma_sq) / (xi phi(wbar | V))."""
    _check_visited(p)
    V = p.V
    return (
        np.log1p(-p.xi) - np.log(p.xi)
        + 0.5 * p.L * np.log(V / p.sigma_sq)
        + 0.5 * _sq_norm(wbar_b) * (1.0 / V - 1.0 / p.sigma_sq)
    )


def posterior_mean(wbar_b, p: BlockPosteriorParams):
    """E{x_b | wbar_b}, i.e. a * wbar_b / C(wbar_b) in overflow-free form."""
    q = expit(-log_mixture_ratio(wbar_b, p))
    return (p.a * q / p.V)[..., None] * np.asarray(wbar_b, dtype=float)


def posterior_mse_paper(wbar_b, p: BlockPosteriorParams):
    """Posterior information of the published update, (1/C)(sigma^2 - a^2 |wbar|^2 / C)."""
    q_over_V = expit(-log_mixture_ratio(wbar_b, p)) / p.V
    return q_over_V * (p.sigma_sq - np.asarray(p.a) ** 2 * _sq_norm(wbar_b) * q_over_V)


def posterior_mse_exact(wbar_b, p: BlockPosteriorParams):
    """E{||x_b - xhat_b||^2 | wbar_b} for the Bernoulli-Gaussian block prior.

    With q the posterior activity probability this is
    q L sigma^2 / V + q (1 - q) a^2 |wbar|^2 / V^2, which is never negative.
    """
    q = expit(-log_mixture_ratio(wbar_b, p))
    V = p.V
    return q * p.L * p.sigma_sq / V + q * (1.0 - q) * np.asarray(p.a) ** 2 * _sq_norm(wbar_b) / V**2


POSTERIOR_MSE = {"paper": posterior_mse_paper, "exact": posterior_mse_exact}


def worst_case_adapt(d, F: int) -> np.ndarray:
    """Indices of the F largest entries of ``d``, sorted ascending.

    Ties go to the smaller block index.
    """
    d = np.asarray(d, dtype=float)
    if not 1 <= F <= d.size:
        raise ValueError(f"F={F} out of range for {d.size} blocks")
    order = np.argsort(-d, kind="stable")
    return np.sort(order[:F])


@dataclass
class OasState:
    wbar: np.ndarray  # (B, L)
    visit_count: np.ndarray  # (B,)
    d: np.ndarray  # (B,)
    xhat: np.ndarray  # (B, L)
    m: int = 0
    index_sets: list = field(default_factory=list)

    @classmethod
    def initial(cls, B: int, L: int) -> "OasState":
        return cls(
            wbar=np.zeros((B, L)),
            visit_count=np.zeros(B, dtype=np.int64),
            d=np.full(B, np.inf),
            xhat=np.zeros((B, L)),
        )

    @property
    def estimate(self) -> np.ndarray:
        return self.xhat.ravel()


@dataclass(frozen=True)
class SensingContext:
    """Everything a subframe needs besides the state and the signal."""

    params: ModelParams
    K: int
    metric: str = "exact"
    principle_kind: str = "identity"

    def __post_init__(self):
        if self.K < self.params.L:
            raise ValueError(f"K={self.K} is smaller than the block length L={self.params.L}")
        if self.metric not in METRICS:
            raise ValueError(f"unknown adaptation metric {self.metric!r}; expected one of {METRICS}")

    @property
    def F(self) -> int:
        return min(self.K // self.params.L, self.params.B)

    @property
    def subframe_noise_var(self) -> float:
        p = self.params
        return noise_variance(p.T / p.M, p.sigma0_sq)


def oas_subframe(state: OasState, ctx: SensingContext, signal, rng) -> OasState:
    """Run one subframe of block-wise OAS, updating ``state`` in place."""
    p = ctx.params
    if state.m >= p.M:
        raise ValueError(f"all {p.M} subframes already used")
    x = signal.values if isinstance(signal, BlockSparseSignal) else np.asarray(signal, dtype=float)

    F = ctx.F
    sensed = worst_case_adapt(state.d, F)
    state.visit_count[sensed] += 1

    # K > B*L leaves more rows than blocks; those rows stay unused
    K_used = ctx.K if ctx.K // p.L <= p.B else p.B * p.L
    U = make_principles(p.L, F, ctx.principle_kind, rng)
    A = assemble_blockwise(U, sensed, K_used, p.B)
    y = measure(A, x, ctx.subframe_noise_var, rng)
    w = backproject(A, y).reshape(p.B, p.L)
    state.wbar[sensed] += w[sensed]

    post = BlockPosteriorParams.from_visits(
        state.visit_count[sensed], p.M, noise_variance(p.T, p.sigma0_sq), p.xi, p.L
    )
    wb = state.wbar[sensed]
    state.xhat[sensed] = posterior_mean(wb, post)
    state.d[sensed] = POSTERIOR_MSE[ctx.metric](wb, post)
    state.m += 1
    state.index_sets.append(sensed)
    return state


@dataclass
class OasRun:
    estimate: np.ndarray
    trace: np.ndarray  # MSE after each subframe
    state: OasState


def run_blockwise_oas(params: ModelParams, K: int, signal, rng, metric="exact",
                      principle_kind="identity") -> OasRun:
    ctx = SensingContext(params, K, metric, principle_kind)
    x = signal.values if isinstance(signal, BlockSparseSignal) else np.asarray(signal, dtype=float)
    state = OasState.initial(params.B, params.L)
    trace = np.empty(params.M)
    for m in range(params.M):
        oas_subframe(state, ctx, x, rng)
        trace[m] = mse(x, state.estimate)
    return OasRun(state.estimate.copy(), trace, state)


def run_basic_oas(params: ModelParams, K: int, signal, rng, metric="exact",
                  principle_kind="identity") -> OasRun:
    """Sample-wise OAS that ignores the block structure.

    Runs the same engine with blocks of length one, so every sample carries
    its own Bernoulli(xi)-Gaussian prior and F = K samples are sensed per
    subframe.
    """
    if K < 1:
        raise ValueError(f"K must be positive, got {K}")
    flat = ModelParams(B=params.N, L=1, xi=params.xi, sigma0_sq=params.sigma0_sq,
                       T=params.T, M=params.M)
    return run_blockwise_oas(flat, K, signal, rng, metric, principle_kind)
