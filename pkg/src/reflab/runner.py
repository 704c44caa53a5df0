"""Experiment runners behind the CLI: build, solve, and write artifacts.

Output bodies are deterministic: floats are rendered with repr (shortest
round-trip), rows are emitted in a fixed order, and anything wall-clock
flavored (timestamps, runtimes) is confined to the manifest.  Re-running
the same config and seed therefore reproduces every CSV byte for byte.
"""
import hashlib
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .capacity import (estimate_capacity, lebesgue_lower_bound_check,
                       lebesgue_measure, make_problem, reflect_even,
                       reflected_capacity, capacity_norm, reflected_problem)
from .config import build_objects, capacity_cells, fingerprint, to_text
from .grids import build_grid
from .noise import draw_path, validate_regularity
from .reflection import sweep_report
from .solver import (SolverConfig, monte_carlo, path_sample, solve_coupled,
                     summarize_samples)


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return hashlib.sha256(text.encode()).hexdigest()


def write_csv(path, columns, rows, comments=()):
    lines = [f"# {c}" for c in comments]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(row[c]) for c in columns))
    return _write_text(path, "\n".join(lines) + "\n")


def _manifest(out_dir, cfg, command, seeds, outputs, warnings, wall):
    man = dict(
        tool="reflab",
        version=__version__,
        command=command,
        scenario=cfg.name,
        fingerprint=fingerprint(cfg),
        seeds=seeds,
        outputs=outputs,
        warnings=warnings,
        wall_time_s=wall,
        created_at=datetime.now(timezone.utc).isoformat(),
        config=to_text(cfg),
    )
    path = os.path.join(out_dir, "manifest.json")
    _write_text(path, json.dumps(man, indent=2, sort_keys=True) + "\n")
    return man


def _solver_setup(cfg, n=None, seed=None, store_fields=True):
    grid, flux, reaction, spec, u0 = build_objects(cfg, n=n)
    scfg = SolverConfig(grid=grid, flux=flux, reaction=reaction,
                        noise=spec if cfg.amp > 0 else None, u0=u0,
                        store_fields=store_fields)
    use_seed = cfg.seed if seed is None else seed
    path = draw_path(spec, grid.nt, use_seed)
    return scfg, spec, path, use_seed


def _regularity_warnings(cfg, spec):
    rep = validate_regularity(spec, cfg.p, cfg.dim)
    return [] if rep["ok"] else [rep["message"]]


def run_single(cfg, out_dir, seed=None):
    """Solve one trajectory; writes trajectory.csv, ledger.csv, manifest."""
    os.makedirs(out_dir, exist_ok=True)
    t0 = time.perf_counter()
    scfg, spec, path, used_seed = _solver_setup(cfg, seed=seed)
    rec = solve_coupled(scfg, path=path)[0]
    g = rec.grid
    tgrid = np.arange(g.nt + 1) * g.dt

    cols = (["t", "l2", "linf", "w1p", "neg_l2", "neg_lp", "neg_linf"]
            + [f"u_{i}" for i in range(1, g.nx + 1)])
    rows = []
    for j in range(g.nt + 1):
        row = dict(t=tgrid[j])
        for k in ("l2", "linf", "w1p", "neg_l2", "neg_lp", "neg_linf"):
            row[k] = rec.norms[k][j]
        for i in range(g.nx):
            row[f"u_{i + 1}"] = rec.u[j, i]
        rows.append(row)
    sha_t = write_csv(
        os.path.join(out_dir, "trajectory.csv"), cols, rows,
        comments=["reflab trajectory v1: time-major rows, node-minor columns",
                  f"interior nodes x_i = i*h, h = {g.h!r}",
                  f"record fingerprint {rec.fingerprint}"])

    led = rec.ledger
    res = led.residual_series()
    lcols = ["step", "t", "kinetic", "dissipation", "reaction_work",
             "penalty_work", "noise_work", "ito", "residual"]
    lrows = []
    for j in range(g.nt):
        lrows.append(dict(step=j, t=tgrid[j + 1], kinetic=led.kinetic[j],
                          dissipation=led.dissipation[j],
                          reaction_work=led.reaction_work[j],
                          penalty_work=led.penalty_work[j],
                          noise_work=led.noise_work[j], ito=led.ito[j],
                          residual=res[j]))
    sha_l = write_csv(
        os.path.join(out_dir, "ledger.csv"), lcols, lrows,
        comments=["reflab energy ledger v1: per-step identity terms, "
                  "residual column is the cumulative drift"])

    warnings = _regularity_warnings(cfg, spec)
    if rec.diagnostics["ledger_blowup"]:
        warnings.append("energy ledger blowup: refine dt")
    _manifest(out_dir, cfg, "single", dict(path_seed=used_seed),
              {"trajectory.csv": sha_t, "ledger.csv": sha_l}, warnings,
              time.perf_counter() - t0)
    return rec


def run_sweep(cfg, out_dir, seed=None):
    """Coupled penalty sweep over n_values on one path; writes sweep.csv."""
    os.makedirs(out_dir, exist_ok=True)
    t0 = time.perf_counter()
    grid, flux, _, spec, u0 = build_objects(cfg)
    from .models import make_reaction
    base = {"none": "zero", "pospart": "pospart",
            "power": "power"}[cfg.reaction]
    reactions = [make_reaction(n, kind=cfg.penalty, p=cfg.p, base=base,
                               coef=cfg.reaction_coef) for n in cfg.n_values]
    scfg = SolverConfig(grid=grid, flux=flux, reaction=reactions[0],
                        noise=spec if cfg.amp > 0 else None, u0=u0)
    used_seed = cfg.seed if seed is None else seed
    path = draw_path(spec, grid.nt, used_seed)
    recs = solve_coupled(scfg, reactions=reactions, path=path)
    report = sweep_report(recs)

    cols = ["n", "neg_l2", "sqrt_n_neg_l2", "mass", "phi_mass",
            "complementarity", "slope"]
    sha = write_csv(
        os.path.join(out_dir, "sweep.csv"), cols, report["rows"],
        comments=["reflab penalty sweep v1: one row per penalty strength",
                  f"note: {report['note']}",
                  f"truncation level K = {report['K']!r}"])
    warnings = _regularity_warnings(cfg, spec)
    _manifest(out_dir, cfg, "sweep", dict(path_seed=used_seed),
              {"sweep.csv": sha}, warnings, time.perf_counter() - t0)
    return report


def _one_path(args):
    cfg, idx, base_seed = args
    return path_sample(cfg, idx, base_seed)


def ensemble_samples(scfg, num_paths, base_seed, threads=1):
    """Per-path samples, optionally across a process pool; order is by
    path index either way, so the summary is thread-count independent."""
    if threads <= 1 or num_paths <= 1:
        pairs = [path_sample(scfg, i, base_seed) for i in range(num_paths)]
    else:
        with ProcessPoolExecutor(max_workers=int(threads)) as pool:
            pairs = list(pool.map(
                _one_path,
                [(scfg, i, base_seed) for i in range(num_paths)]))
    samples = [s for s, f in pairs if s is not None]
    failures = [f for s, f in pairs if f is not None]
    return samples, failures


def run_ensemble(cfg, out_dir, seed=None, threads=None):
    """Monte Carlo estimates; writes per-path samples and mean/se table."""
    os.makedirs(out_dir, exist_ok=True)
    t0 = time.perf_counter()
    scfg, spec, _, _ = _solver_setup(cfg, store_fields=False)
    base_seed = cfg.base_seed if seed is None else seed
    nthreads = cfg.threads if threads is None else threads
    samples, failures = ensemble_samples(scfg, cfg.num_paths, base_seed,
                                         threads=nthreads)
    summary = summarize_samples(samples, failures, cfg.num_paths, base_seed)

    pcols = ["path_index", "seed", "sup_l2_sq", "grad_int", "flux_dual_int",
             "penalty_int"]
    sha_p = write_csv(os.path.join(out_dir, "paths.csv"), pcols, samples,
                      comments=["reflab ensemble paths v1: one row per "
                                "completed path"])
    ecols = ["estimate", "mean", "se", "paths"]
    erows = [dict(estimate=k, mean=v["mean"], se=v["se"],
                  paths=summary["completed"])
             for k, v in summary["estimates"].items()]
    sha_e = write_csv(os.path.join(out_dir, "ensemble.csv"), ecols, erows,
                      comments=["reflab ensemble estimates v1"])
    warnings = _regularity_warnings(cfg, spec)
    warnings += [f"path {f['path_index']} failed: {f['error']}"
                 for f in failures]
    _manifest(out_dir, cfg, "ensemble",
              dict(base_seed=base_seed, num_paths=cfg.num_paths),
              {"paths.csv": sha_p, "ensemble.csv": sha_e}, warnings,
              time.perf_counter() - t0)
    return summary


def run_capacity(cfg, out_dir):
    """Estimate cap(E) for the configured obstacle set; writes JSON."""
    os.makedirs(out_dir, exist_ok=True)
    t0 = time.perf_counter()
    grid = build_grid(1 if cfg.cap_ny == 0 else 2, cfg.cap_extent, cfg.cap_nx,
                      ny=cfg.cap_ny or None, T=cfg.cap_T, nt=cfg.cap_nt)
    mask = capacity_cells(cfg.cap_cells, grid.nt, grid.shape)
    prob = make_problem(grid, mask)
    est = estimate_capacity(prob)
    refl = reflected_capacity(prob)
    even = capacity_norm(reflected_problem(prob).grid,
                         reflect_even(est.minimizer))
    lam = lebesgue_measure(prob)
    tol = 0.05 * max(est.value, 1e-12)
    result = dict(
        value=est.value,
        converged=bool(est.converged),
        iterations=est.iterations,
        lebesgue_measure=lam,
        lower_bound_ok=bool(lebesgue_lower_bound_check(prob, est)),
        reflected_value=refl.value,
        even_reflection_norm=even,
        sandwich_low=est.value - tol,
        sandwich_high=3.0 * est.value + tol,
        sandwich_ok=bool(est.value - tol <= refl.value
                         <= 3.0 * est.value + tol),
    )
    sha = _write_text(os.path.join(out_dir, "capacity.json"),
                      json.dumps(result, indent=2, sort_keys=True) + "\n")
    _manifest(out_dir, cfg, "capacity", {}, {"capacity.json": sha},
              [] if est.converged else ["optimizer hit max_iters"],
              time.perf_counter() - t0)
    return result
