"""Block-wise orthogonal and dense Gaussian sensing matrices.

Block indices are zero-based throughout: a block-wise orthogonal matrix with
index set ``(i_0, ..., i_{F-1})`` places principle ``U_f`` in row block ``f``
and column block ``i_f``.  Rows past ``F*L`` are zero.
"""

from dataclasses import dataclass

import numpy as np

PRINCIPLE_KINDS = ("identity", "random-orthogonal")


@dataclass(frozen=True)
class PrincipleSet:
    principles: np.ndarray  # (F, L, L)

    @property
    def F(self) -> int:
        return self.principles.shape[0]

    @property
    def L(self) -> int:
        return self.principles.shape[1]


@dataclass(frozen=True)
class BlockwiseSensingMatrix:
    principles: PrincipleSet
    index_set: np.ndarray
    K: int
    B: int

    @property
    def L(self) -> int:
        return self.principles.L

    @property
    def F(self) -> int:
        return self.principles.F

    @property
    def shape(self):
        return (self.K, self.B * self.L)

    def to_dense(self) -> np.ndarray:
        L = self.L
        A = np.zeros(self.shape)
        for f, b in enumerate(self.index_set):
            A[f * L:(f + 1) * L, b * L:(b + 1) * L] = self.principles.principles[f]
        return A


def _random_orthogonal(L, rng):
    q, r = np.linalg.qr(rng.standard_normal((L, L)))
    # sign fix makes the draw Haar distributed
    return q * np.where(np.diag(r) < 0, -1.0, 1.0)


def make_principles(L: int, F: int, kind: str = "identity", rng=None) -> PrincipleSet:
    if L < 1 or F < 1:
        raise ValueError(f"need L >= 1 and F >= 1, got L={L}, F={F}")
    if kind == "identity":
        U = np.broadcast_to(np.eye(L), (F, L, L)).copy()
    elif kind == "random-orthogonal":
        if rng is None:
            raise ValueError("random-orthogonal principles need a random generator")
        U = np.stack([_random_orthogonal(L, rng) for _ in range(F)])
    else:
        raise ValueError(f"unknown principle kind {kind!r}; expected one of {PRINCIPLE_KINDS}")
    return PrincipleSet(U)


def assemble_blockwise(principles: PrincipleSet, index_set, K: int, B: int) -> BlockwiseSensingMatrix:
    index_set = np.asarray(index_set, dtype=np.intp)
    F = K // principles.L
    if index_set.ndim != 1 or len(index_set) != F or principles.F != F:
        raise ValueError(
            f"K={K}, L={principles.L} needs F={F} principles and indices, "
            f"got {principles.F} principles and {index_set.size} indices"
        )
    if len(np.unique(index_set)) != F:
        raise ValueError(f"duplicate block indices in {index_set.tolist()}")
    if F and (index_set.min() < 0 or index_set.max() >= B):
        raise ValueError(f"block indices {index_set.tolist()} out of range [0, {B})")
    return BlockwiseSensingMatrix(principles, index_set, int(K), int(B))


def sample_dense_gaussian(K: int, N: int, rng: np.random.Generator) -> np.ndarray:
    """K x N matrix with i.i.d. N(0, 1/K) entries."""
    if K < 1 or N < 1:
        raise ValueError(f"need K, N >= 1, got K={K}, N={N}")
    return rng.standard_normal((K, N)) / np.sqrt(K)


def apply(A, x) -> np.ndarray:
    """Noiseless product A @ x for either matrix representation."""
    x = np.asarray(x, dtype=float)
    if isinstance(A, BlockwiseSensingMatrix):
        if x.shape != (A.B * A.L,):
            raise ValueError(f"signal of shape {x.shape} does not match A with N={A.B * A.L}")
        y = np.zeros(A.K)
        blocks = x.reshape(A.B, A.L)[A.index_set]
        y[:A.F * A.L] = np.einsum("fij,fj->fi", A.principles.principles, blocks).ravel()
        return y
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[1] != x.size:
        raise ValueError(f"signal of length {x.size} does not match matrix of shape {A.shape}")
    return A @ x


def measure(A, x, noise_var: float, rng: np.random.Generator) -> np.ndarray:
    """Noisy measurement A x + z with z ~ N(0, noise_var I_K)."""
    if noise_var < 0:
        raise ValueError(f"noise variance must be nonnegative, got {noise_var!r}")
    y = apply(A, x)
    return y + np.sqrt(noise_var) * rng.standard_normal(y.size)


def backproject(A: BlockwiseSensingMatrix, y) -> np.ndarray:
    """A^T y evaluated block by block, without forming A."""
    y = np.asarray(y, dtype=float)
    if y.shape != (A.K,):
        raise ValueError(f"measurement of shape {y.shape} does not match K={A.K}")
    L = A.L
    w = np.zeros((A.B, L))
    segments = y[:A.F * L].reshape(A.F, L)
    w[A.index_set] = np.einsum("fji,fj->fi", A.principles.principles, segments)
    return w.ravel()
