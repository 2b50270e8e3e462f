import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from bsdegbt.paths import (EulerGeneric, GeometricBrownian, ScaledBrownian, build_grid,
                           sample_paths, standard_normals, uniform_words)


def test_grid_quarters():
    g = build_grid(1.0, 4)
    assert list(g.times) == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert np.all(g.dt == 0.25)


@pytest.mark.parametrize("T,n,dt", [(0.5, 10, 0.05), (0.3, 10, 0.03)])
def test_grid_step_sizes(T, n, dt):
    g = build_grid(T, n)
    assert len(g.times) == n + 1 and g.n_steps == n
    np.testing.assert_allclose(g.dt, dt, rtol=1e-12)
    assert g.times[-1] == T


@pytest.mark.parametrize("T,n", [(0.0, 4), (-1.0, 4), (1.0, 0), (1.0, 2.5)])
def test_grid_rejects_bad_input(T, n):
    with pytest.raises(ValueError):
        build_grid(T, n)


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-3, 1e3), st.integers(1, 500))
def test_grid_invariants(T, n):
    g = build_grid(T, n)
    assert g.times[0] == 0.0 and g.times[-1] == T
    assert np.all(np.diff(g.times) > 0)
    assert abs(g.dt.sum() - T) <= 1e-12 * T
    np.testing.assert_allclose(g.dt, T / n, rtol=1e-12)


def test_stream_is_chunk_independent():
    whole = uniform_words(17, 0, 1000)
    for start, count in [(0, 3), (1, 7), (5, 100), (998, 2), (333, 333)]:
        assert np.array_equal(uniform_words(17, start, count), whole[start:start + count])
    a = standard_normals(5, 30, 3, 4)
    b = standard_normals(5, 12, 3, 4, first_sample=9)
    assert np.array_equal(a[9:21], b)


def test_uniforms_open_interval():
    u = uniform_words(0, 0, 100000)
    assert u.min() > 0.0 and u.max() < 1.0


def test_same_seed_bit_identical():
    g = build_grid(1.0, 5)
    a = sample_paths(ScaledBrownian(1.0), np.zeros(3), g, 100, 4)
    b = sample_paths(ScaledBrownian(1.0), np.zeros(3), g, 100, 4)
    c = sample_paths(ScaledBrownian(1.0), np.zeros(3), g, 100, 5)
    assert a.X.tobytes() == b.X.tobytes() and a.dW.tobytes() == b.dW.tobytes()
    assert not np.array_equal(a.dW, c.dW)


def test_shapes_and_start():
    g = build_grid(0.5, 7)
    x0 = np.array([1.0, 2.0])
    p = sample_paths(ScaledBrownian(0.3), x0, g, 50, 0)
    assert p.X.shape == (50, 8, 2) and p.dW.shape == (50, 7, 2)
    assert np.all(p.X[:, 0] == x0)
    with pytest.raises(ValueError):
        p.X[0, 0, 0] = 1.0


def test_increment_variance():
    g = build_grid(0.3, 6)
    M = 20000
    p = sample_paths(ScaledBrownian(1.0), np.zeros(2), g, M, 1)
    var = p.dW.var(axis=0, ddof=1)
    dt = g.dt[0]
    # standard error of a Gaussian sample variance
    se = dt * np.sqrt(2.0 / (M - 1))
    assert np.all(np.abs(var - dt) < 5 * se)


def test_brownian_mean_at_maturity():
    M = 10000
    p = sample_paths(ScaledBrownian(1.0), np.zeros(1), build_grid(1.0, 4), M, 2)
    assert abs(p.X[:, -1, 0].mean()) < 5 / np.sqrt(M)


def test_scaled_brownian_variance():
    M = 10000
    p = sample_paths(ScaledBrownian(np.sqrt(2.0)), np.zeros(3), build_grid(0.3, 10), M, 3)
    var = p.X[:, -1].var(axis=0, ddof=1)
    se = 0.6 * np.sqrt(2.0 / (M - 1))
    assert np.all(np.abs(var - 0.6) < 5 * se)


def test_geometric_log_return_mean():
    M, T, mu, sigma = 10000, 1.0, 0.06, 0.02
    p = sample_paths(GeometricBrownian(mu, sigma), np.full(2, 100.0), build_grid(T, 5), M, 4)
    lr = np.log(p.X[:, -1] / 100.0)
    se = sigma * np.sqrt(T / M)
    assert np.all(np.abs(lr.mean(axis=0) - (mu - 0.5 * sigma ** 2) * T) < 5 * se)


def test_exact_samplers_refinement_invariant_in_law():
    M = 10000
    for kind in (ScaledBrownian(1.5), GeometricBrownian(0.05, 0.3)):
        a = sample_paths(kind, np.ones(1), build_grid(1.0, 1), M, 10).X[:, -1, 0]
        b = sample_paths(kind, np.ones(1), build_grid(1.0, 100), M, 11).X[:, -1, 0]
        res = stats.ks_2samp(a, b)
        crit = 1.628 * np.sqrt(2.0 / M)
        assert res.statistic < crit


def test_euler_matches_exact_brownian_pathwise():
    g = build_grid(1.0, 8)
    scale = np.array([0.5, 2.0, 1.0])
    exact = sample_paths(ScaledBrownian(scale), np.ones(3), g, 200, 9)
    euler = sample_paths(EulerGeneric(lambda t, x: np.zeros_like(x),
                                      lambda t, x: np.broadcast_to(scale, x.shape)),
                         np.ones(3), g, 200, 9)
    assert np.array_equal(exact.X, euler.X)
    assert np.array_equal(exact.dW, euler.dW)


def test_euler_substeps_aggregate_increments():
    g = build_grid(1.0, 4)
    kind = EulerGeneric(lambda t, x: -x, lambda t, x: np.ones_like(x), substeps=5)
    p = sample_paths(kind, np.ones(2), g, 4000, 3)
    var = p.dW.var(axis=0, ddof=1)
    assert np.all(np.abs(var - 0.25) < 5 * 0.25 * np.sqrt(2 / 3999))
    # Ornstein-Uhlenbeck mean decays like exp(-t)
    assert abs(p.X[:, -1].mean() - np.exp(-1.0)) < 0.05


def test_euler_full_matrix_diffusion():
    g = build_grid(1.0, 3)
    L = np.array([[1.0, 0.0], [0.5, 2.0]])
    kind = EulerGeneric(lambda t, x: np.zeros_like(x),
                        lambda t, x: np.broadcast_to(L, (x.shape[0], 2, 2)))
    p = sample_paths(kind, np.zeros(2), g, 10, 0)
    np.testing.assert_allclose(p.X[:, -1], p.dW.sum(axis=1) @ L.T, atol=1e-12)


def test_dimension_mismatch():
    g = build_grid(1.0, 2)
    with pytest.raises(ValueError):
        sample_paths(ScaledBrownian(np.ones(3)), np.zeros(2), g, 5, 0)
    with pytest.raises(ValueError):
        sample_paths(GeometricBrownian(np.zeros(4), 0.2), np.ones(2), g, 5, 0)
