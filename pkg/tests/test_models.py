import numpy as np
import pytest

from reflab import build_grid
from reflab.models import (FluxModel, SmoothPosApprox, audit_assumptions,
                           eval_flux, eval_reaction, make_reaction,
                           obstacle_shift, smooth_pos)


def test_eval_flux_frozen_examples():
    out = eval_flux(FluxModel(p=2.0, conv=0.0), None, 0.0,
                    np.array([3.0, 4.0]))
    assert np.allclose(out, [3.0, 4.0], atol=1e-12)

    out = eval_flux(FluxModel(p=4.0, conv=0.0, eps=0.0), None, 0.0,
                    np.array([1.0, 0.0]))
    assert np.allclose(out, [1.0, 0.0])

    # p=3, F(lam) = (lam, 0), lam=2, xi=(0,2): |xi| xi + F = (2, 4)
    out = eval_flux(FluxModel(p=3.0, conv=1.0, eps=0.0), None, 2.0,
                    np.array([0.0, 2.0]))
    assert np.allclose(out, [2.0, 4.0])


def test_flux_model_validation():
    with pytest.raises(ValueError):
        FluxModel(p=1.0)
    with pytest.raises(ValueError):
        FluxModel(p=2.0, eps=-1e-3)


def test_constants_heat_case():
    cst = FluxModel(p=2.0, conv=0.0, eps=0.0).constants()
    assert cst["kappa"] == 0.0
    assert cst["C1"] == 1.0


def test_audit_builtin_clean():
    """(A1)-(A3) hold by construction for the built-in flux."""
    rep = audit_assumptions(FluxModel(p=3.0, conv=0.5, eps=0.0),
                            sample_count=10000, rng_seed=0)
    assert rep["ok"]
    assert sum(rep["counts"].values()) == 0
    assert rep["samples"] == 10000


def test_audit_flags_adversarial_model():
    class Backward:
        """a(xi) = -xi: anti-monotone on purpose."""
        p = 2.0
        conv = 0.0
        eps = 0.0

        def eval(self, lam, xi, x=None):
            return -np.asarray(xi)

        def constants(self, lam_box=10.0):
            return dict(C1=1.0, C2=1.0, C3=0.0, C4=0.0, g=0.0, h=0.0,
                        kappa=0.0, lam_box=lam_box)

    rep = audit_assumptions(Backward(), sample_count=2000, rng_seed=1)
    assert not rep["ok"]
    assert rep["counts"]["a1_monotonicity"] > 0
    assert len(rep["witnesses"]["a1_monotonicity"]) > 0


def test_obstacle_shift_rejects_convection():
    g = build_grid(1, 1.0, 8, T=1.0, nt=2)
    with pytest.raises(ValueError):
        obstacle_shift(FluxModel(p=2.0, conv=0.5), np.zeros(8), g)


def test_obstacle_shift_zero_psi_is_identity():
    g = build_grid(1, 1.0, 8, T=1.0, nt=2)
    m0 = FluxModel(p=3.0, conv=0.0, eps=0.0)
    m = obstacle_shift(m0, np.zeros(8), g)
    rng = np.random.Generator(np.random.Philox(2))
    for _ in range(20):
        lam = rng.uniform(-5, 5)
        xi = rng.uniform(-5, 5, size=1)
        x = int(rng.integers(0, 8))
        assert np.allclose(m.eval(lam, xi, x=x), m0.eval(lam, xi),
                           atol=1e-14)


def test_audit_shifted_model_clean():
    g = build_grid(1, 1.0, 16, T=1.0, nt=2)
    psi = -0.3 * np.sin(np.pi * g.x) ** 2
    m = obstacle_shift(FluxModel(p=1.5, conv=0.0), psi, g)
    rep = audit_assumptions(m, sample_count=10000, rng_seed=3)
    assert rep["ok"], rep["counts"]


def test_eval_reaction_frozen_examples():
    r = make_reaction(10.0)
    assert np.allclose(eval_reaction(r, np.array([-0.5])), [-5.0])

    r = make_reaction(3.0, kind="power", p=1.5)
    assert np.allclose(eval_reaction(r, np.array([-2.0])),
                       [-3.0 * np.sqrt(2.0)])


def test_reaction_penalty_inactive_on_nonnegative():
    r = make_reaction(50.0, base="pospart", coef=2.0)
    v = np.array([0.0, 0.3, 1.7])
    assert np.allclose(eval_reaction(r, v), 2.0 * v)


def test_reaction_zero_n_is_base():
    r = make_reaction(0.0, base="power", coef=3.0)
    rng = np.random.Generator(np.random.Philox(4))
    v = rng.uniform(-2, 2, size=100)
    want = 3.0 * np.sign(v) * np.abs(v) ** (r.p - 1.0)
    assert np.allclose(eval_reaction(r, v), want)


def test_reaction_penalty_sign():
    r = make_reaction(7.0)
    v = np.linspace(-1.0, -1e-6, 50)
    assert (eval_reaction(r, v) < 0.0).all()


def test_make_reaction_power_needs_p_in_range():
    with pytest.raises(ValueError):
        make_reaction(5.0, kind="power", p=2.5)
    with pytest.raises(ValueError):
        make_reaction(-1.0)


def test_smooth_pos_frozen_values():
    s = SmoothPosApprox(1.0)
    assert smooth_pos(s, -1.0) == 0.0
    assert smooth_pos(s, 2.0) == 1.5
    assert abs(smooth_pos(s, 1.0) - 0.5) < 1e-15
    with pytest.raises(ValueError):
        SmoothPosApprox(0.0)


def test_smooth_pos_envelope_and_curvature():
    for delta in (0.1, 1.0, 2.5):
        s = SmoothPosApprox(delta)
        r = np.linspace(-2 * delta, 3 * delta, 2001)
        assert (np.abs(s.value(r) - np.maximum(r, 0.0))
                <= delta / 2 + 1e-12).all()
        assert (s.second(r) <= 1.5 / delta + 1e-9).all()
        assert (s.second(r) >= -1e-12).all()


def test_smooth_pos_c2_at_knots():
    s = SmoothPosApprox(0.8)
    for knot in (0.0, 0.8):
        for f in (s.value, s.deriv, s.second):
            left = f(knot - 1e-9)
            right = f(knot + 1e-9)
            assert abs(left - right) < 1e-6


def test_smooth_pos_derivative_consistency():
    """Centered differences converge to the analytic derivative at O(step^2)."""
    s = SmoothPosApprox(1.3)
    r = np.linspace(-2.0, 3.0, 97)
    errs = []
    for step in (1e-3, 5e-4):
        fd = (s.value(r + step) - s.value(r - step)) / (2.0 * step)
        errs.append(np.abs(fd - s.deriv(r)).max())
    assert errs[1] <= errs[0] / 3.0  # ratio ~4 expected, allow slack


def test_shift_lookup_matches_gradient():
    g = build_grid(1, 1.0, 8, T=1.0, nt=2)
    psi = g.x ** 2
    m = obstacle_shift(FluxModel(p=2.0, conv=0.0), psi, g)
    from reflab import gradient
    gp = gradient(psi, g)
    for i in range(8):
        assert np.allclose(m.shift_at(i), [gp[i]])
