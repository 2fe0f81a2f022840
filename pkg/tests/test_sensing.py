import numpy as np
import pytest

from oaslab.sensing import (
    apply, assemble_blockwise, backproject, make_principles, measure, sample_dense_gaussian,
)
from conftest import ScriptedRng


def orth_error(U):
    return np.abs(U @ U.T - np.eye(U.shape[0])).max()


def test_identity_principles():
    ps = make_principles(3, 2, "identity")
    assert ps.F == 2 and ps.L == 3
    for U in ps.principles:
        assert np.array_equal(U, np.eye(3))


def test_random_orthogonal_principles(rng):
    ps = make_principles(4, 5, "random-orthogonal", rng)
    assert all(orth_error(U) <= 1e-10 for U in ps.principles)


def test_length_one_principles_are_signs(rng):
    ps = make_principles(1, 6, "random-orthogonal", rng)
    assert set(np.abs(ps.principles.ravel())) == {1.0}


def test_principle_errors():
    with pytest.raises(ValueError):
        make_principles(0, 1)
    with pytest.raises(ValueError):
        make_principles(2, 1, "hadamard")
    with pytest.raises(ValueError):
        make_principles(2, 1, "random-orthogonal")


def test_figure_example_layout(rng):
    L, B = 3, 4
    ps = make_principles(L, 2, "random-orthogonal", rng)
    A = assemble_blockwise(ps, [1, 3], 2 * L + 1, B)  # blocks 2 and 4 in one-based terms
    D = A.to_dense()
    assert D.shape == (2 * L + 1, B * L)
    U1, U2 = ps.principles
    expected = np.zeros_like(D)
    expected[0:L, L:2 * L] = U1
    expected[L:2 * L, 3 * L:4 * L] = U2
    assert np.array_equal(D, expected)
    assert not D[-1].any()


def test_single_block_identity():
    A = assemble_blockwise(make_principles(5, 1), [0], 5, 1)
    assert np.array_equal(A.to_dense(), np.eye(5))


def test_entry_rule(rng):
    L, B, F = 3, 6, 4
    ps = make_principles(L, F, "random-orthogonal", rng)
    idx = [5, 0, 2, 3]
    D = assemble_blockwise(ps, idx, F * L + 2, B).to_dense()
    for f, b in enumerate(idx):
        rows = D[f * L:(f + 1) * L]
        nz_cols = np.flatnonzero(np.any(rows != 0, axis=0))
        assert set(nz_cols) <= set(range(b * L, (b + 1) * L))


@pytest.mark.parametrize("idx, K, msg", [
    ([0], 6, "needs F=2"),
    ([1, 1], 6, "duplicate"),
    ([0, 4], 6, "out of range"),
])
def test_assemble_errors(idx, K, msg):
    with pytest.raises(ValueError, match=msg):
        assemble_blockwise(make_principles(3, 2), idx, K, 4)


def test_noiseless_measure_equals_product(rng):
    A = assemble_blockwise(make_principles(2, 3, "random-orthogonal", rng), [4, 1, 2], 7, 5)
    x = rng.standard_normal(10)
    y = measure(A, x, 0.3, ScriptedRng(normal=0.0))
    assert np.allclose(y, A.to_dense() @ x, rtol=0, atol=1e-15)


def test_zero_rows_carry_pure_noise(rng):
    A = assemble_blockwise(make_principles(2, 2), [0, 1], 5, 3)
    x = rng.standard_normal(6)
    z = rng.standard_normal(5)
    y = measure(A, x, 0.25, ScriptedRng(normal=lambda n: z.copy()))
    assert np.array_equal(y[4:], 0.5 * z[4:])


def test_dense_measure_matches_hand_computation():
    A = np.array([[1.0, 0.0, 2.0, -1.0], [0.5, 1.0, 0.0, 0.0], [0.0, -2.0, 1.0, 3.0]])
    x = np.array([1.0, 2.0, -1.0, 0.5])
    z = np.array([0.1, -0.2, 0.3])
    y = measure(A, x, 4.0, ScriptedRng(normal=lambda n: z.copy()))
    # rows: 1 - 2 - 0.5, 0.5 + 2, -4 - 1 + 1.5 ; noise scaled by sqrt(4)
    assert np.allclose(y, [-1.5 + 0.2, 2.5 - 0.4, -3.5 + 0.6], atol=1e-15)


def test_measure_dimension_checks(rng):
    A = assemble_blockwise(make_principles(2, 1), [0], 2, 2)
    with pytest.raises(ValueError):
        measure(A, np.zeros(3), 0.1, rng)
    with pytest.raises(ValueError):
        measure(np.zeros((3, 4)), np.zeros(5), 0.1, rng)
    with pytest.raises(ValueError):
        backproject(A, np.zeros(3))


def test_backproject_masks_signal(rng):
    B, L = 6, 3
    A = assemble_blockwise(make_principles(L, 3, "random-orthogonal", rng), [0, 2, 5], 10, B)
    x = rng.standard_normal(B * L)
    v = backproject(A, apply(A, x)).reshape(B, L)
    mask = np.isin(np.arange(B), [0, 2, 5])
    assert np.allclose(v[mask], x.reshape(B, L)[mask], atol=1e-14)
    assert np.all(v[~mask] == 0.0)


def test_backproject_of_zero(rng):
    A = assemble_blockwise(make_principles(2, 2, "random-orthogonal", rng), [0, 1], 4, 3)
    assert not backproject(A, np.zeros(4)).any()


def test_backproject_matches_dense_small(rng):
    A = assemble_blockwise(make_principles(2, 2, "random-orthogonal", rng), [2, 0], 5, 3)
    y = rng.standard_normal(5)
    assert np.abs(backproject(A, y) - A.to_dense().T @ y).max() <= 1e-12


def test_backproject_matches_dense_suite(rng):
    for B in range(1, 7):
        for L in range(1, 5):
            for F in range(1, B + 1):
                K = F * L + int(rng.integers(0, L))
                ps = make_principles(L, F, "random-orthogonal", rng)
                A = assemble_blockwise(ps, rng.choice(B, F, replace=False), K, B)
                y = rng.standard_normal(K)
                assert np.abs(backproject(A, y) - A.to_dense().T @ y).max() <= 1e-12


def test_orthogonal_noise_invariance(rng):
    L = 4
    U = make_principles(L, 1, "random-orthogonal", rng).principles[0]
    xb, z = rng.standard_normal(L), rng.standard_normal(L)
    rotated = U.T @ (U @ xb + z)
    plain = np.eye(L).T @ (np.eye(L) @ xb + U.T @ z)
    assert np.abs(rotated - plain).max() <= 1e-12


def test_dense_gaussian_moments():
    K = 400
    A = sample_dense_gaussian(K, 400, np.random.default_rng(2))
    n = A.size
    var = 1.0 / K
    assert abs(A.mean()) <= 4 * np.sqrt(var / n)
    # standard error of the sample variance of Gaussian data
    assert abs(A.var() - var) <= 4 * var * np.sqrt(2.0 / (n - 1))


def test_dense_gaussian_is_seeded():
    a = sample_dense_gaussian(5, 7, np.random.default_rng(8))
    b = sample_dense_gaussian(5, 7, np.random.default_rng(8))
    assert np.array_equal(a, b)
