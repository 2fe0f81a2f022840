"""Block sparse signal model, time-limited noise and the distortion metric."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the random block sparse source and the sensing budget.

    B blocks of length L (so N = B*L samples), each block active with
    probability ``xi``.  ``sigma0_sq`` is the noise variance for one unit of
    sensing time, ``T`` the total sensing time and ``M`` the number of
    subframes it is split into.
    """

    B: int
    L: int
    xi: float = 0.1
    sigma0_sq: float = 0.01
    T: float = 1.0
    M: int = 8

    def __post_init__(self):
        for name in ("B", "L", "M"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if not 0.0 < self.xi < 1.0:
            raise ValueError(f"xi must lie in (0, 1), got {self.xi!r}")
        if not self.sigma0_sq > 0:
            raise ValueError(f"sigma0_sq must be positive, got {self.sigma0_sq!r}")
        if not self.T > 0:
            raise ValueError(f"T must be positive, got {self.T!r}")

    @property
    def N(self) -> int:
        return self.B * self.L

    @classmethod
    def from_length(cls, N: int, L: int, **kwargs) -> "ModelParams":
        """Build parameters for a signal of N samples split into blocks of L."""
        if L < 1 or N % L:
            raise ValueError(f"block length {L} does not divide N={N}")
        return cls(B=N // L, L=L, **kwargs)


@dataclass(frozen=True)
class BlockSparseSignal:
    values: np.ndarray
    active: np.ndarray

    @property
    def blocks(self) -> np.ndarray:
        """View of ``values`` as a (B, L) array."""
        return self.values.reshape(len(self.active), -1)


def sample_block_sparse(params: ModelParams, rng: np.random.Generator) -> BlockSparseSignal:
    active = rng.random(params.B) < params.xi
    s = rng.standard_normal((params.B, params.L))
    values = np.where(active[:, None], s, 0.0).ravel()
    return BlockSparseSignal(values=values, active=active)


def noise_variance(t: float, sigma0_sq: float) -> float:
    """Noise variance of a measurement integrated over duration ``t``."""
    if not t > 0:
        raise ValueError(f"sensing duration must be positive, got {t!r}")
    return sigma0_sq / t


def mse(x, xhat) -> float:
    """Normalized squared error ||xhat - x||^2 / N."""
    x = np.asarray(x, dtype=float)
    xhat = np.asarray(xhat, dtype=float)
    if x.shape != xhat.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {xhat.shape}")
    diff = xhat - x
    return float(diff @ diff) / x.size


def to_db(mean_mse: float) -> float:
    if not mean_mse > 0:
        raise ValueError(f"cannot convert nonpositive MSE {mean_mse!r} to dB")
    return 10.0 * np.log10(mean_mse)
