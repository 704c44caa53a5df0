import numpy as np
import pytest

from reflab import build_grid, divergence, gradient, norm, pos_neg_parts, truncate


def test_build_grid_1d_frozen():
    g = build_grid(1, 1.0, 3, T=1.0, nt=4)
    assert g.h == 0.25
    assert g.dt == 0.25
    assert g.dim == 1
    assert g.shape == (3,)
    assert g.vol == 0.25
    # interior nodes x_i = i*h
    assert np.allclose(g.x, [0.25, 0.5, 0.75])


def test_build_grid_2d_frozen():
    g = build_grid(2, 1.0, 63, ny=63, T=0.5, nt=100)
    assert abs(g.h - 1.0 / 64.0) < 1e-15
    assert abs(g.hy - 1.0 / 64.0) < 1e-15
    assert g.dt == 0.005
    assert g.shape == (63, 63)
    assert abs(g.vol - g.h * g.hy) < 1e-18


def test_build_grid_rejects_small_and_bad():
    with pytest.raises(ValueError, match="nx too small"):
        build_grid(1, 1.0, 1, T=1.0, nt=4)
    with pytest.raises(ValueError, match="nt too small"):
        build_grid(1, 1.0, 8, T=1.0, nt=1)
    with pytest.raises(ValueError, match="ny too small"):
        build_grid(2, 1.0, 8, ny=1, T=1.0, nt=4)
    with pytest.raises(ValueError):
        build_grid(3, 1.0, 8, T=1.0, nt=4)
    with pytest.raises(ValueError):
        build_grid(1, -1.0, 8, T=1.0, nt=4)
    with pytest.raises(ValueError):
        build_grid(1, 1.0, 8, T=0.0, nt=4)


def test_gradient_frozen_example():
    g = build_grid(1, 1.0, 3, T=1.0, nt=4)
    gr = gradient(np.array([0.1, 0.2, 0.1]), g)
    assert np.allclose(gr, [0.4, 0.0, -0.4], atol=1e-15)


def test_gradient_shapes():
    g1 = build_grid(1, 1.0, 7, T=1.0, nt=2)
    assert gradient(np.zeros(7), g1).shape == (7,)
    g2 = build_grid(2, 1.0, 5, ny=6, T=1.0, nt=2)
    assert gradient(np.zeros((5, 6)), g2).shape == (2, 5, 6)


def test_divergence_is_negative_adjoint_of_gradient():
    """Summation by parts with zero ghosts: (div q, f) = -(q, grad f)."""
    rng = np.random.Generator(np.random.Philox(7))
    g1 = build_grid(1, 1.0, 5, T=1.0, nt=2)
    g2 = build_grid(2, 1.5, 5, ny=4, T=1.0, nt=2)
    for _ in range(20):
        f = rng.standard_normal(5)
        q = rng.standard_normal(5)
        lhs = (divergence(q, g1) * f).sum() * g1.vol
        rhs = -(q * gradient(f, g1)).sum() * g1.vol
        assert abs(lhs - rhs) < 1e-12
        f2 = rng.standard_normal((5, 4))
        q2 = rng.standard_normal((2, 5, 4))
        lhs2 = (divergence(q2, g2) * f2).sum() * g2.vol
        rhs2 = -(q2 * gradient(f2, g2)).sum() * g2.vol
        assert abs(lhs2 - rhs2) < 1e-12


def test_norm_frozen_values():
    g = build_grid(1, 1.0, 3, T=1.0, nt=4)
    ones = np.ones(3)
    assert abs(norm(ones, g) - np.sqrt(0.75)) < 1e-15
    assert norm(np.array([-2.0, 1.0, 0.0]), g, kind="linf") == 2.0
    assert abs(norm(ones, g, kind="l1") - 0.75) < 1e-15


def test_norm_lp_and_w1p_match_manual():
    g = build_grid(1, 1.0, 4, T=1.0, nt=2)
    rng = np.random.Generator(np.random.Philox(8))
    f = rng.standard_normal(4)
    p = 3.0
    want = ((np.abs(f) ** p).sum() * g.h) ** (1.0 / p)
    assert abs(norm(f, g, kind="lp", p=p) - want) < 1e-14
    gr = gradient(f, g)
    ww = (np.abs(gr) ** p).sum() * g.h
    assert abs(norm(f, g, kind="w1p", p=p) - ww ** (1.0 / p)) < 1e-14


def test_norm_rejects_p_below_one():
    g = build_grid(1, 1.0, 4, T=1.0, nt=2)
    with pytest.raises(ValueError):
        norm(np.ones(4), g, kind="lp", p=0.5)
    with pytest.raises(ValueError):
        norm(np.ones(4), g, kind="nope")


def test_norm_homogeneity():
    g = build_grid(1, 2.0, 9, T=1.0, nt=2)
    rng = np.random.Generator(np.random.Philox(9))
    f = rng.standard_normal(9)
    for kind, p in (("l1", 2.0), ("l2", 2.0), ("lp", 3.5), ("linf", 2.0),
                    ("w1p", 2.5)):
        a = norm(3.0 * f, g, kind=kind, p=p)
        b = 3.0 * norm(f, g, kind=kind, p=p)
        assert abs(a - b) < 1e-12 * max(1.0, b)


def test_pos_neg_parts_frozen_and_properties():
    pos, negp = pos_neg_parts(np.array([-1.0, 2.0]))
    assert np.array_equal(pos, [0.0, 2.0])
    assert np.array_equal(negp, [1.0, 0.0])
    rng = np.random.Generator(np.random.Philox(10))
    for _ in range(10):
        u = rng.standard_normal(64)
        p, n = pos_neg_parts(u)
        assert np.array_equal(p - n, u)
        assert (p * n == 0.0).all()
        assert (p >= 0.0).all() and (n >= 0.0).all()


def test_truncate_frozen_and_nonexpansive():
    out = truncate(np.array([5.0, -3.0, 1.0]), 2.0)
    assert np.array_equal(out, [2.0, -2.0, 1.0])
    rng = np.random.Generator(np.random.Philox(11))
    for _ in range(10):
        u = 3.0 * rng.standard_normal(128)
        v = 3.0 * rng.standard_normal(128)
        gap = np.abs(truncate(u, 1.5) - truncate(v, 1.5)) - np.abs(u - v)
        assert (gap <= 1e-15).all()
    with pytest.raises(ValueError):
        truncate(np.ones(3), 0.0)


def test_grid_extent_identity():
    # the edge count times h spans the domain exactly
    g = build_grid(1, 2.5, 24, T=1.0, nt=3)
    assert abs((g.nx + 1) * g.h - g.extent) < 1e-12
