import numpy as np
import pytest

from reflab import (build_grid, build_noise, coarsen_path, draw_path,
                    hs_norm_sq, increments_all, sample_increment,
                    validate_regularity)


def test_build_rejects_bad_parameters():
    g = build_grid(1, 1.0, 16)
    with pytest.raises(ValueError, match="mode count"):
        build_noise(g, 0, 2.0, 1.0)
    with pytest.raises(ValueError, match="trace-class violation"):
        build_noise(g, 4, 1.0, 1.0)
    with pytest.raises(ValueError, match="trace-class violation"):
        build_noise(g, 4, 0.5, 1.0)
    with pytest.raises(ValueError, match="amp"):
        build_noise(g, 4, 2.0, -0.1)


def test_eigenvalue_decay_and_smoothing_index():
    g = build_grid(1, 1.0, 16)
    spec = build_noise(g, 6, 2.0, 0.3)
    k = np.arange(1, 7, dtype=float)
    assert np.allclose(spec.lam, 0.09 * k ** -2.0)
    assert spec.smoothing_index == 0.5
    spec2 = build_noise(build_grid(2, 1.0, 8, ny=8), 6, 3.0, 1.0)
    assert spec2.smoothing_index == 2.0


def test_modes_vanish_nowhere_needed_and_are_l2_normalized():
    # Dirichlet sines: interior samples of sqrt(2/L) sin(k pi x / L).
    g = build_grid(1, 2.0, 127)
    spec = build_noise(g, 5, 2.0, 1.0)
    # grid quadrature of e_k^2 approximates 1 for each mode
    sq = (spec.modes ** 2).sum(axis=1) * g.vol
    assert np.all(np.abs(sq - 1.0) < 1e-3)
    # orthogonality of distinct modes under the same quadrature
    gram = spec.modes @ spec.modes.T * g.vol
    off = gram - np.diag(np.diag(gram))
    assert np.max(np.abs(off)) < 1e-12


def test_modes_2d_tensor_ordering():
    g = build_grid(2, 1.0, 12, ny=12)
    spec = build_noise(g, 5, 2.0, 1.0)
    assert spec.modes.shape == (5, 12, 12)
    # first five by kx^2 + ky^2 with kx as tiebreak:
    # (1,1), (1,2), (2,1), (2,2), (1,3)
    xk = np.pi * g.x
    yk = np.pi * g.y
    expected = [(1, 1), (1, 2), (2, 1), (2, 2), (1, 3)]
    for i, (kx, ky) in enumerate(expected):
        ref = 2.0 * np.outer(np.sin(kx * xk), np.sin(ky * yk))
        assert np.allclose(spec.modes[i], ref), (i, kx, ky)


def test_hs_norm_single_mode_and_amp_scaling():
    g = build_grid(1, 1.0, 64)
    one = build_noise(g, 1, 2.0, 1.0)
    # lam_1 = 1 and ||e_1||^2 = 1 up to quadrature error
    assert abs(hs_norm_sq(one) - 1.0) < 1e-3
    base = build_noise(g, 8, 2.0, 0.3)
    doubled = build_noise(g, 8, 2.0, 0.6)
    assert np.isclose(hs_norm_sq(doubled), 4.0 * hs_norm_sq(base))


def test_draws_replay_bitwise():
    g = build_grid(1, 1.0, 32)
    spec = build_noise(g, 8, 2.0, 0.3)
    a = draw_path(spec, 100, seed=42)
    b = draw_path(spec, 100, seed=42)
    assert a.draws.shape == (100, 8)
    assert np.array_equal(a.draws, b.draws)
    c = draw_path(spec, 100, seed=43)
    assert not np.array_equal(a.draws, c.draws)


def test_increment_shape_bounds_and_linearity():
    g = build_grid(1, 1.0, 32)
    spec = build_noise(g, 8, 2.0, 0.3)
    path = draw_path(spec, 10, seed=7)
    dw = sample_increment(spec, path, 0, 0.01)
    assert dw.shape == (32,)
    with pytest.raises(IndexError, match="out of range"):
        sample_increment(spec, path, 10, 0.01)
    with pytest.raises(IndexError, match="out of range"):
        sample_increment(spec, path, -1, 0.01)
    # amp enters linearly through sqrt(lam), dt through sqrt(dt)
    spec2 = build_noise(g, 8, 2.0, 0.6)
    assert np.allclose(sample_increment(spec2, path, 3, 0.01), 2.0 * sample_increment(spec, path, 3, 0.01))
    assert np.allclose(sample_increment(spec, path, 3, 0.04), 2.0 * sample_increment(spec, path, 3, 0.01))
    # dt = 0 and amp = 0 both produce the zero field
    assert np.all(sample_increment(spec, path, 3, 0.0) == 0.0)
    zero = build_noise(g, 8, 2.0, 0.0)
    assert np.all(sample_increment(zero, path, 3, 0.01) == 0.0)


def test_increments_all_matches_per_step():
    g = build_grid(1, 1.0, 24)
    spec = build_noise(g, 6, 2.5, 0.4)
    path = draw_path(spec, 12, seed=11)
    allinc = increments_all(spec, path, 0.02)
    assert allinc.shape == (12, 24)
    for j in (0, 5, 11):
        assert np.allclose(allinc[j], sample_increment(spec, path, j, 0.02),
                           rtol=0.0, atol=1e-15)


def test_coarsen_preserves_brownian_increments():
    g = build_grid(1, 1.0, 16)
    spec = build_noise(g, 4, 2.0, 1.0)
    fine = draw_path(spec, 40, seed=9)
    for factor in (2, 4, 8):
        coarse = coarsen_path(fine, factor)
        assert coarse.draws.shape == (40 // factor, 4)
        dt_f, dt_c = 0.01, 0.01 * factor
        # sqrt(dt_c) Z_c equals the sum of the fine sqrt(dt_f) Z blocks
        lhs = np.sqrt(dt_c) * coarse.draws
        rhs = np.sqrt(dt_f) * fine.draws.reshape(40 // factor, factor, 4).sum(axis=1)
        assert np.allclose(lhs, rhs, atol=1e-14)
    with pytest.raises(ValueError, match="coarsen"):
        coarsen_path(fine, 7)


def test_pointwise_variance_matches_kl_sum():
    # var u(x0) of one increment = dt * sum_k lam_k e_k(x0)^2; check the
    # sample variance of 10^4 draws against a 3-standard-error budget.
    g = build_grid(1, 1.0, 63)
    spec = build_noise(g, 8, 2.0, 1.0)
    dt = 0.01
    node = 31  # x = 0.5 exactly
    target = dt * float((spec.lam * spec.modes[:, node] ** 2).sum())
    N = 10000
    path = draw_path(spec, N, seed=101)
    vals = increments_all(spec, path, dt)[:, node]
    var = vals.var(ddof=1)
    se = target * np.sqrt(2.0 / (N - 1))
    assert abs(var - target) < 3.0 * se


def test_time_summed_field_is_gaussian_with_t_variance():
    # the summed increments at a node ~ N(0, T * sum lam_k e_k^2)
    g = build_grid(1, 1.0, 63)
    spec = build_noise(g, 8, 2.0, 1.0)
    nt, T = 50, 0.5
    dt = T / nt
    node = 31
    target = T * float((spec.lam * spec.modes[:, node] ** 2).sum())
    N = 2000
    sums = np.empty(N)
    for i in range(N):
        path = draw_path(spec, nt, seed=31337 ^ i)
        sums[i] = increments_all(spec, path, dt)[:, node].sum()
    var = sums.var(ddof=1)
    se = target * np.sqrt(2.0 / (N - 1))
    assert abs(var - target) < 3.0 * se


def test_regularity_report_values():
    g = build_grid(1, 1.0, 16)
    spec = build_noise(g, 4, 2.0, 1.0)
    rep = validate_regularity(spec, p=2.0, d=1)
    assert rep["required"] == 1.0
    assert rep["implied"] == 0.5
    assert not rep["ok"]
    assert "warning" in rep["message"]
    # steeper decay clears the bar
    rep2 = validate_regularity(build_noise(g, 4, 4.0, 1.0), p=2.0, d=1)
    assert rep2["implied"] == 1.5
    assert rep2["ok"]
    assert rep2["message"] == "noise regularity ok"
    g2 = build_grid(2, 1.0, 8, ny=8)
    rep3 = validate_regularity(build_noise(g2, 4, 2.0, 1.0), p=2.0, d=2)
    assert rep3["required"] == 1.0
    rep4 = validate_regularity(build_noise(g2, 4, 2.0, 1.0), p=4.0, d=2)
    assert rep4["required"] == 1.5
