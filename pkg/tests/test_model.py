import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from oaslab.model import ModelParams, mse, noise_variance, sample_block_sparse, to_db
from conftest import ScriptedRng


def test_params_derived_length():
    p = ModelParams(B=100, L=4)
    assert p.N == 400
    assert ModelParams.from_length(1600, 16).B == 100


@pytest.mark.parametrize("kwargs", [
    dict(B=0, L=4), dict(B=4, L=0), dict(B=4, L=2, xi=0.0), dict(B=4, L=2, xi=1.0),
    dict(B=4, L=2, sigma0_sq=0.0), dict(B=4, L=2, T=-1.0), dict(B=4, L=2, M=0),
    dict(B=2.5, L=2),
])
def test_params_rejects_invalid(kwargs):
    with pytest.raises(ValueError):
        ModelParams(**kwargs)


def test_from_length_requires_divisor():
    with pytest.raises(ValueError, match="does not divide"):
        ModelParams.from_length(1600, 7)


def test_activation_rate_matches_xi():
    p = ModelParams(B=1000, L=1, xi=0.1)
    rng = np.random.default_rng(5)
    hits = sum(sample_block_sparse(p, rng).active.sum() for _ in range(100))
    n = 100 * p.B
    rate = hits / n
    assert abs(rate - 0.1) <= 0.01
    assert abs(rate - 0.1) <= 3 * math.sqrt(0.1 * 0.9 / n)


def test_all_inactive_gives_zero_signal():
    p = ModelParams(B=5, L=3, xi=0.1)
    sig = sample_block_sparse(p, ScriptedRng(uniform=0.999))
    assert not sig.active.any()
    assert np.all(sig.values == 0.0)


def test_support_matches_nonzero_blocks(rng):
    p = ModelParams(B=2, L=3, xi=0.5)
    for _ in range(20):
        sig = sample_block_sparse(p, rng)
        assert np.array_equal(np.all(sig.blocks != 0, axis=1), sig.active)
        for b in np.flatnonzero(~sig.active):
            # bit-exact zeros, including the sign bit
            assert sig.blocks[b].tobytes() == np.zeros(3).tobytes()


def test_active_blocks_are_standard_normal():
    p = ModelParams(B=20000, L=4, xi=0.5)
    sig = sample_block_sparse(p, np.random.default_rng(9))
    entries = sig.blocks[sig.active].ravel()
    assert stats.kstest(entries, "norm").pvalue > 1e-3


def test_seeded_sampling_is_deterministic():
    p = ModelParams(B=50, L=4)
    a = sample_block_sparse(p, np.random.default_rng(3))
    b = sample_block_sparse(p, np.random.default_rng(3))
    assert np.array_equal(a.values, b.values)


def test_noise_variance_examples():
    assert noise_variance(1.0, 0.01) == pytest.approx(0.01)
    assert noise_variance(1.0 / 8, 0.01) == pytest.approx(0.08)
    assert noise_variance(2.0, 0.3) == pytest.approx(noise_variance(1.0, 0.3) / 2)


@pytest.mark.parametrize("t", [0.0, -1.0])
def test_noise_variance_rejects_nonpositive_time(t):
    with pytest.raises(ValueError):
        noise_variance(t, 0.01)


@given(st.floats(1e-6, 1e6), st.floats(1e-6, 1e3))
def test_noise_variance_times_duration(t, s0):
    assert noise_variance(t, s0) * t == pytest.approx(s0, rel=1e-14)


def test_mse_examples():
    x = np.array([0.3, -1.0, 2.0])
    assert mse(x, x) == 0.0
    assert mse(np.zeros(4), np.ones(4)) == 1.0


def test_mse_matches_summation(rng):
    x, xhat = rng.standard_normal(6), rng.standard_normal(6)
    total = 0.0
    for a, b in zip(x, xhat):
        total += (a - b) ** 2
    assert mse(x, xhat) == pytest.approx(total / 6, rel=1e-14)


def test_mse_rejects_length_mismatch():
    with pytest.raises(ValueError):
        mse(np.zeros(3), np.zeros(4))


vectors = st.lists(st.floats(-100, 100), min_size=1, max_size=20)


@given(vectors, st.floats(-50, 50), st.randoms())
@settings(max_examples=50)
def test_mse_symmetric_and_shift_invariant(values, c, r):
    x = np.array(values)
    xhat = np.array([v + r.uniform(-1, 1) for v in values])
    assert mse(x, xhat) == mse(xhat, x)
    assert mse(x + c, xhat + c) == pytest.approx(mse(x, xhat), rel=1e-6, abs=1e-9)
    assert mse(x, xhat) >= 0


def test_to_db():
    assert to_db(0.01) == pytest.approx(-20.0)
    assert to_db(1.0) == 0.0
    assert to_db(10 ** (-29.94 / 10)) == pytest.approx(-29.94)
    for bad in (0.0, -1.0):
        with pytest.raises(ValueError):
            to_db(bad)
