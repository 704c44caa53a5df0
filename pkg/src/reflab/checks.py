"""Self-check battery behind the `validate` subcommand.

Each check exercises one library invariant on a fixed miniature scenario
and reports a measured margin (how far inside the bound the result landed,
positive = pass).  Everything is seeded, so two runs of the battery produce
identical reports.
"""
from dataclasses import dataclass

import numpy as np

from .capacity import (estimate_capacity, lebesgue_lower_bound_check,
                       lebesgue_measure, make_problem, reflect_even,
                       reflected_capacity, reflected_problem, capacity_norm)
from .config import fingerprint, parse_config, standard_config, to_text
from .grids import build_grid, divergence, gradient, norm, pos_neg_parts, truncate
from .models import FluxModel, audit_assumptions, make_reaction, obstacle_shift, smooth_pos
from .noise import build_noise, draw_path, hs_norm_sq, increments_all, validate_regularity
from .reflection import eta_density, pair_with, sweep_report, weighted_mass
from .solver import SolverConfig, solve_coupled, solve_trajectory


@dataclass
class CheckResult:
    name: str
    ok: bool
    margin: float
    detail: str


def _result(name, ok, margin, detail=""):
    return CheckResult(name=name, ok=bool(ok), margin=float(margin),
                       detail=detail)


def _mini():
    """Small standard-flavored scenario used by the solver checks."""
    grid = build_grid(1, 1.0, 32, T=0.25, nt=100)
    flux = FluxModel(p=3.0, conv=0.5)
    spec = build_noise(grid, K=8, gamma=2.0, amp=0.3)
    u0 = 0.5 * np.sin(np.pi * grid.x / grid.extent)
    return grid, flux, spec, u0


def check_grid_duality():
    rng = np.random.Generator(np.random.Philox(11))
    worst = 0.0
    for dim in (1, 2):
        g = build_grid(dim, 1.0, 5, ny=5 if dim == 2 else None, T=1.0, nt=4)
        f = rng.standard_normal(g.shape)
        q = rng.standard_normal((dim,) + g.shape) if dim == 2 \
            else rng.standard_normal(g.shape)
        lhs = (divergence(q, g) * f).sum() * g.vol
        rhs = -(np.asarray(q) * gradient(f, g)).sum() * g.vol
        worst = max(worst, abs(lhs - rhs))
    return _result("grid.duality", worst < 1e-12, 1e-12 - worst,
                   f"max |(div q, f) + (q, grad f)| = {worst:.3e}")


def check_grid_parts():
    rng = np.random.Generator(np.random.Philox(12))
    u = rng.standard_normal(512)
    pos, negp = pos_neg_parts(u)
    err = max(abs(pos - negp - u).max(), abs(pos * negp).max())
    v = rng.standard_normal(512)
    expand = (abs(truncate(u, 2.0) - truncate(v, 2.0)) - abs(u - v)).max()
    ok = err < 1e-15 and expand <= 1e-15
    return _result("grid.parts_truncate", ok, 1e-15 - max(err, expand),
                   f"decomposition error {err:.1e}, "
                   f"truncation expansion {expand:.1e}")


def check_model_audit():
    rep = audit_assumptions(FluxModel(p=3.0, conv=0.5), sample_count=4000,
                            rng_seed=5)
    bad = sum(rep["counts"].values())
    return _result("model.audit_builtin", rep["ok"] and bad == 0, 1.0 - bad,
                   f"{rep['samples']} samples, {bad} violations")


def check_model_shifted_audit():
    g = build_grid(1, 1.0, 16, T=1.0, nt=4)
    psi = -0.5 * np.sin(np.pi * g.x) ** 2
    m = obstacle_shift(FluxModel(p=1.5, conv=0.0), psi, g)
    rep = audit_assumptions(m, sample_count=4000, rng_seed=6)
    bad = sum(rep["counts"].values())
    return _result("model.audit_shifted", rep["ok"] and bad == 0, 1.0 - bad,
                   f"{rep['samples']} samples, {bad} violations")


def check_model_smooth_pos():
    from .models import SmoothPosApprox
    r = np.linspace(-3.0, 3.0, 4001)
    delta = 0.7
    s = SmoothPosApprox(delta)
    err = abs(smooth_pos(s, r) - np.maximum(r, 0.0)).max()
    return _result("model.smooth_pos", err <= delta / 2 + 1e-12,
                   delta / 2 - err, f"max |eta - r+| = {err:.4f}, "
                   f"bound {delta / 2}")


def check_noise_replay():
    g = build_grid(1, 1.0, 32, T=0.25, nt=100)
    spec = build_noise(g, K=8, gamma=2.0, amp=0.3)
    a = draw_path(spec, 50, 77).draws
    b = draw_path(spec, 50, 77).draws
    same = np.array_equal(a, b)
    return _result("noise.replay", same, 1.0 if same else -1.0,
                   "bitwise identical redraw" if same else "draws differ")


def check_noise_scaling():
    g = build_grid(1, 1.0, 32, T=0.25, nt=100)
    s1 = build_noise(g, K=8, gamma=2.0, amp=0.3)
    s2 = build_noise(g, K=8, gamma=2.0, amp=0.6)
    p = draw_path(s1, 20, 99)
    d1 = increments_all(s1, p, g.dt)
    d2 = increments_all(s2, p, g.dt)
    err = abs(d2 - 2.0 * d1).max()
    return _result("noise.amp_linearity", err < 1e-14, 1e-14 - err,
                   f"max |dW(2a) - 2 dW(a)| = {err:.2e}")


def check_noise_hs():
    g = build_grid(1, 1.0, 64, T=1.0, nt=10)
    spec = build_noise(g, K=1, gamma=2.0, amp=1.0)
    err = abs(hs_norm_sq(spec) - 1.0)
    return _result("noise.hs_single_mode", err < 1e-3, 1e-3 - err,
                   f"|HS^2 - 1| = {err:.2e} at nx=64")


def check_noise_regularity():
    g = build_grid(1, 1.0, 32, T=0.25, nt=100)
    spec = build_noise(g, K=8, gamma=2.0, amp=0.3)
    rep = validate_regularity(spec, 3.0, 1)
    return _result("noise.regularity_report", True,
                   rep["implied"] - rep["required"], rep["message"])


def check_solver_determinism():
    grid, flux, spec, u0 = _mini()
    cfg = SolverConfig(grid=grid, flux=flux,
                       reaction=make_reaction(100.0), noise=spec, u0=u0)
    path = draw_path(spec, grid.nt, 3)
    a = solve_trajectory(cfg, path)
    b = solve_trajectory(cfg, path)
    same = np.array_equal(a.u, b.u)
    return _result("solver.determinism", same, 1.0 if same else -1.0,
                   "bitwise identical resolve" if same else "states differ")


def check_solver_positivity():
    grid, flux, _, u0 = _mini()
    cfg = SolverConfig(grid=grid, flux=flux,
                       reaction=make_reaction(1e6, base="pospart", coef=1.0),
                       noise=None, u0=u0)
    rec = solve_trajectory(cfg, draw_path(build_noise(grid, K=1, gamma=2.0,
                                                      amp=0.0), grid.nt, 0))
    floor = float(rec.u.min())
    return _result("solver.noise_free_positivity", floor >= -1e-7,
                   floor + 1e-7, f"min over space-time = {floor:.2e}")


def check_solver_penalty_monotone():
    grid, flux, spec, u0 = _mini()
    cfg = SolverConfig(grid=grid, flux=flux, reaction=make_reaction(10.0),
                       noise=spec, u0=u0)
    recs = solve_coupled(cfg, reactions=[make_reaction(10.0),
                                         make_reaction(1000.0)],
                         path=draw_path(spec, grid.nt, 3))
    m10 = eta_density(recs[0]).mass / 10.0
    m1000 = eta_density(recs[1]).mass / 1000.0
    return _result("solver.penalty_monotone", m1000 < m10, m10 - m1000,
                   f"|u-| L1 mass {m10:.3e} (n=10) -> {m1000:.3e} (n=1000)")


def check_solver_comparison():
    grid, flux, spec, u0 = _mini()
    cfg = SolverConfig(grid=grid, flux=flux, reaction=make_reaction(100.0),
                       noise=spec, u0=u0)
    r = make_reaction(100.0)
    lo, hi = solve_coupled(cfg, reactions=[r, r], u0s=[0.5 * u0, u0],
                           path=draw_path(spec, grid.nt, 3))
    gap = float((hi.u - lo.u).min())
    return _result("solver.comparison", gap >= -1e-7, gap + 1e-7,
                   f"min (u_big - u_small) = {gap:.2e}")


def check_solver_energy():
    grid, flux, spec, u0 = _mini()
    cfg = SolverConfig(grid=grid, flux=flux, reaction=make_reaction(100.0),
                       noise=spec, u0=u0)
    rec = solve_trajectory(cfg, draw_path(spec, grid.nt, 3))
    res = rec.ledger.final_residual
    scale = max(rec.ledger.dissipation_total, 1e-12)
    return _result("solver.energy_identity", res < 0.5 * scale,
                   0.5 * scale - res,
                   f"|residual| = {res:.3e} vs dissipation {scale:.3e}")


def check_solver_coercivity():
    from .solver import dissipation_coercivity
    grid, flux, spec, u0 = _mini()
    cfg = SolverConfig(grid=grid, flux=flux, reaction=make_reaction(100.0),
                       noise=spec, u0=u0)
    rec = solve_trajectory(cfg, draw_path(spec, grid.nt, 3))
    diss, floor = dissipation_coercivity(rec, flux)
    gap = float((diss - floor).min())
    return _result("solver.dissipation_floor", gap >= -1e-10, gap + 1e-10,
                   f"min (dissipation - floor) = {gap:.3e}")


def check_reflection_pairing():
    grid, flux, spec, u0 = _mini()
    cfg = SolverConfig(grid=grid, flux=flux, reaction=make_reaction(200.0),
                       noise=spec, u0=u0)
    rec = solve_trajectory(cfg, draw_path(spec, grid.nt, 3))
    m = eta_density(rec)
    f = np.sin(np.pi * grid.x)
    g2 = grid.x * (1.0 - grid.x)
    lin = abs(pair_with(m, 2.0 * f + 3.0 * g2)
              - 2.0 * pair_with(m, f) - 3.0 * pair_with(m, g2))
    total = abs(weighted_mass(m, np.ones(grid.nx)) - m.mass)
    ok = lin < 1e-10 and total < 1e-12 and m.density.min() >= 0.0
    return _result("reflection.pairing", ok, 1e-10 - max(lin, total),
                   f"linearity defect {lin:.1e}, mass defect {total:.1e}")


def check_reflection_sweep():
    grid, flux, spec, u0 = _mini()
    cfg = SolverConfig(grid=grid, flux=flux, reaction=make_reaction(10.0),
                       noise=spec, u0=u0)
    reactions = [make_reaction(n) for n in (10.0, 100.0, 1000.0)]
    recs = solve_coupled(cfg, reactions=reactions,
                         path=draw_path(spec, grid.nt, 3))
    rows = sweep_report(recs)["rows"]
    negs = [r["neg_l2"] for r in rows]
    slope = rows[0]["slope"]
    ok = negs[0] > negs[1] > negs[2] and slope is not None and slope < 0.0
    return _result("reflection.sweep_decay", ok,
                   min(negs[0] - negs[1], negs[1] - negs[2]),
                   f"neg_l2 {negs[0]:.3e} > {negs[1]:.3e} > {negs[2]:.3e}, "
                   f"slope {slope:.3f}")


def check_capacity_basics():
    g = build_grid(1, 1.0, 12, T=1.0, nt=8)
    empty = make_problem(g, np.zeros((8, 12), dtype=bool))
    zero = estimate_capacity(empty).value
    small = np.zeros((8, 12), dtype=bool)
    small[3:5, 5:7] = True
    big = small.copy()
    big[2:6, 4:9] = True
    ps, pb = make_problem(g, small), make_problem(g, big)
    es, eb = estimate_capacity(ps), estimate_capacity(pb)
    mono = eb.value - es.value
    lower = lebesgue_lower_bound_check(ps, es)
    ok = zero == 0.0 and mono >= -1e-6 * eb.value and lower
    return _result("capacity.basics", ok, mono,
                   f"cap(empty) = {zero}, cap small {es.value:.4f} <= "
                   f"cap big {eb.value:.4f}, lambda^(1/2) "
                   f"{np.sqrt(lebesgue_measure(ps)):.4f}")


def check_capacity_sandwich():
    g = build_grid(1, 1.0, 12, T=1.0, nt=8)
    mask = np.zeros((8, 12), dtype=bool)
    mask[3:5, 5:7] = True
    prob = make_problem(g, mask)
    est = estimate_capacity(prob)
    refl = reflected_capacity(prob)
    even = capacity_norm(reflected_problem(prob).grid,
                         reflect_even(est.minimizer))
    tol = 0.05 * est.value
    ok = (est.value - tol <= refl.value <= 3.0 * est.value + tol
          and refl.value <= even + 1e-9)
    margin = min(refl.value - est.value + tol,
                 3.0 * est.value + tol - refl.value)
    return _result("capacity.reflection_sandwich", ok, margin,
                   f"base {est.value:.4f}, reflected {refl.value:.4f}, "
                   f"even candidate {even:.4f}")


def check_config_fingerprint():
    cfg = standard_config()
    rt = parse_config(to_text(cfg))
    stable = fingerprint(rt) == fingerprint(cfg)
    cfg2 = standard_config()
    cfg2.seed += 1
    cfg3 = standard_config()
    cfg3.out_dir = "elsewhere"
    ok = (stable and fingerprint(cfg2) != fingerprint(cfg)
          and fingerprint(cfg3) == fingerprint(cfg))
    return _result("config.fingerprint", ok, 1.0 if ok else -1.0,
                   "round-trip stable, seed-sensitive, location-blind")


ALL_CHECKS = (
    check_grid_duality,
    check_grid_parts,
    check_model_audit,
    check_model_shifted_audit,
    check_model_smooth_pos,
    check_noise_replay,
    check_noise_scaling,
    check_noise_hs,
    check_noise_regularity,
    check_solver_determinism,
    check_solver_positivity,
    check_solver_penalty_monotone,
    check_solver_comparison,
    check_solver_energy,
    check_solver_coercivity,
    check_reflection_pairing,
    check_reflection_sweep,
    check_capacity_basics,
    check_capacity_sandwich,
    check_config_fingerprint,
)


def run_battery():
    """Run every check; exceptions become failed results, never aborts."""
    out = []
    for fn in ALL_CHECKS:
        try:
            out.append(fn())
        except Exception as e:  # a crashed check is a failed check
            name = fn.__name__.replace("check_", "", 1).replace("_", ".", 1)
            out.append(_result(name, False, -1.0, f"crashed: {e!r}"))
    return out


def render_report(results):
    lines = ["reflab validate: library invariant battery", ""]
    width = max(len(r.name) for r in results)
    for r in results:
        flag = "PASS" if r.ok else "FAIL"
        lines.append(f"{flag}  {r.name:<{width}}  margin {r.margin:+.3e}  "
                     f"{r.detail}")
    bad = sum(1 for r in results if not r.ok)
    lines.append("")
    lines.append(f"{len(results) - bad}/{len(results)} checks passed")
    return "\n".join(lines) + "\n"
