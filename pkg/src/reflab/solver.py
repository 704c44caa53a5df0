"""Semi-implicit Euler-Maruyama advance of the penalized equation (1D).

Per step the gradient argument of the flux and the penalty are implicit,
the flux's scalar argument (upwind convection), the base reaction, and the
noise are explicit:

    v - dt*div a(x, u_j, D+ v) + dt*f(u_j) - dt*n*(v^-)^q = u_j + dW_j.

The implicit stage is unconditionally stable in the gradient term and in n,
so no step-size policy is imposed; a diagnostic flags energy blowup instead.
All comparisons across penalty strengths, reactions, or initial data reuse
one NoisePath (the underlying statements are per-path).  The energy ledger
accumulates every term of the discrete Ito identity with the scheme's own
quadrature and a left-endpoint stochastic sum, so its residual reduces to
quadratic-variation fluctuation plus inner-solver slack.
"""
import hashlib
import time
from dataclasses import dataclass, field

import numpy as np

from . import _stage
from ._stage import NonConvergence, NonFinite, edge_grad, neg, node_div, phi
from .noise import hs_norm_sq, increments_all

__all__ = ["SolverConfig", "EnergyLedger", "TrajectoryRecord",
           "NonConvergence", "NonFinite", "step", "solve_trajectory",
           "solve_coupled", "monte_carlo", "path_sample",
           "summarize_samples", "energy_residual",
           "dissipation_coercivity"]


@dataclass
class SolverConfig:
    grid: object
    flux: object
    reaction: object
    noise: object = None          # NoiseSpec, or None for deterministic runs
    u0: np.ndarray = None
    newton_tol: float = 1e-10
    newton_max_iters: int = 200
    newton_gate: float = 1e-6
    theta: float = 1.0            # penalty implicitness; only 1 is supported
    store_fields: bool = True

    def __post_init__(self):
        if self.grid.dim != 1:
            raise ValueError("the time stepper is one-dimensional; "
                             "use dim=1 grids")
        if self.newton_tol <= 0.0:
            raise ValueError("newton_tol must be positive")
        if self.theta != 1.0:
            raise ValueError("the penalty is always implicit (theta=1)")
        if getattr(self.flux, "shift", None) is not None:
            raise ValueError("obstacle-shifted models are audit objects; "
                             "solve the shifted problem with the base flux")
        if self.u0 is None:
            self.u0 = np.zeros(self.grid.nx)
        self.u0 = np.asarray(self.u0, dtype=float)
        if self.u0.shape != (self.grid.nx,):
            raise ValueError(f"u0 must have shape ({self.grid.nx},)")
        if (self.u0 < 0.0).any():
            raise ValueError("u0 must be >= 0 nodewise")
        if self.reaction.kind == "power" and self.reaction.p != self.flux.p:
            raise ValueError("power penalty exponent is tied to the flux "
                             "growth exponent; set reaction.p = flux.p")


@dataclass
class EnergyLedger:
    """Per-step terms of the discrete Ito identity (all grid-quadrature):
    kinetic = half-energy increment, dissipation = dt*(a, D+ u_{j+1}),
    reaction_work = dt*(f(u_j), u_{j+1}), penalty_work = dt*n*(neg^q, neg),
    noise_work = (u_j, dW_j), ito = dt*||Phi||_HS^2 / 2."""
    kinetic: np.ndarray
    dissipation: np.ndarray
    reaction_work: np.ndarray
    penalty_work: np.ndarray
    noise_work: np.ndarray
    ito: np.ndarray

    def residual_series(self):
        """Cumulative |LHS - RHS| drift of the identity, one entry per step."""
        return np.cumsum(self.kinetic + self.dissipation + self.reaction_work
                         + self.penalty_work - self.noise_work - self.ito)

    @property
    def final_residual(self):
        s = self.residual_series()
        return float(abs(s[-1])) if s.size else 0.0

    @property
    def dissipation_total(self):
        return float(self.dissipation.sum())


@dataclass
class TrajectoryRecord:
    fingerprint: str
    grid: object
    n: float
    u: np.ndarray                 # (nt+1, nx) when stored, else None
    norms: dict                   # l2, linf, w1p, neg_l2, neg_lp, neg_linf
    flux_dual_pp: np.ndarray      # per step: sum over edges of |a|^p' * h
    stoch_cumsum: np.ndarray      # partial sums of the left-endpoint integral
    newton_iters: np.ndarray
    ledger: EnergyLedger
    wall_time: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def nt(self):
        return self.newton_iters.size

    @property
    def final(self):
        if self.u is not None:
            return self.u[-1]
        return self.diagnostics["final_state"]


def _solve_fingerprint(cfg, reaction, u0, seed, nt):
    """Hash of everything that determines the solved numbers."""
    g, fl, ns = cfg.grid, cfg.flux, cfg.noise
    parts = [
        f"grid={g.dim},{g.extent!r},{g.nx},{g.ny},{g.T!r},{g.nt}",
        f"flux={fl.p!r},{fl.conv!r},{fl.eps!r}",
        f"reaction={reaction.n!r},{reaction.kind},{reaction.p!r},"
        f"{reaction.base_name},{reaction.base_coef!r}",
        "noise=none" if ns is None else
        f"noise={ns.K},{ns.gamma!r},{ns.amp!r}",
        f"seed={seed}",
        f"steps={nt}",
        f"u0={hashlib.sha256(np.ascontiguousarray(u0).tobytes()).hexdigest()}",
        f"tol={cfg.newton_tol!r},{cfg.newton_max_iters},{cfg.newton_gate!r}",
    ]
    return hashlib.sha256("\n".join(parts).encode()).hexdigest()


def _upwind_edges(u, c):
    """Edge values of the convective flux c*u, upwinded against the transport
    direction implied by +div F(u); ghost zeros supply the inflow boundary."""
    nb, nx = u.shape
    fe = np.zeros((nb, nx + 1))
    if c > 0.0:
        fe[:, :nx] = c * u
    elif c < 0.0:
        fe[:, 1:] = c * u
    return fe


def _run_lanes(cfg, reactions, u0s, path, num_steps=None):
    grid, flux = cfg.grid, cfg.flux
    nx, h, dt = grid.nx, grid.h, grid.dt
    p, eps, c = flux.p, flux.eps, flux.conv
    nt = path.draws.shape[0] if num_steps is None else int(num_steps)
    nb = len(reactions)
    pen_pows = {r.penalty_exponent for r in reactions}
    if len(pen_pows) != 1:
        raise ValueError("coupled lanes must share one penalty kind")
    pen_pow = pen_pows.pop()
    nvec = np.array([r.n for r in reactions], dtype=float)

    if cfg.noise is not None and cfg.noise.amp > 0.0:
        dW = increments_all(cfg.noise, path, dt)[:nt]
        hs = hs_norm_sq(cfg.noise)
    else:
        dW = np.zeros((nt, nx))
        hs = 0.0

    t0 = time.perf_counter()
    u = np.stack([np.asarray(z, dtype=float) for z in u0s])
    keys = ("l2", "linf", "w1p", "neg_l2", "neg_lp", "neg_linf")
    norms = {k: np.empty((nb, nt + 1)) for k in keys}
    led = {k: np.empty((nb, nt)) for k in
           ("kinetic", "dissipation", "reaction_work", "penalty_work",
            "noise_work", "ito")}
    flux_dual = np.empty((nb, nt))
    iters_rec = np.empty((nb, nt), dtype=int)
    fields = np.empty((nb, nt + 1, nx)) if cfg.store_fields else None
    if fields is not None:
        fields[:, 0] = u

    def record_state(j, v):
        g = edge_grad(v, h)
        nv = neg(v)
        norms["l2"][:, j] = np.sqrt((v * v).sum(axis=1) * h)
        norms["linf"][:, j] = np.abs(v).max(axis=1)
        norms["w1p"][:, j] = ((np.abs(g) ** p).sum(axis=1) * h) ** (1.0 / p)
        norms["neg_l2"][:, j] = np.sqrt((nv * nv).sum(axis=1) * h)
        norms["neg_lp"][:, j] = ((nv ** p).sum(axis=1) * h) ** (1.0 / p)
        norms["neg_linf"][:, j] = nv.max(axis=1)

    record_state(0, u)
    pc = p / (p - 1.0)
    for j in range(nt):
        dwj = dW[j][None, :]
        fe = _upwind_edges(u, c)
        fexp = np.stack([reactions[i].base_value(u[i]) for i in range(nb)])
        b = u + dwj + dt * node_div(fe, h) - dt * fexp
        try:
            v, its = _stage.step_batch(
                u, b, dt, h, p, eps, nvec, pen_pow,
                tol=cfg.newton_tol, max_iter=cfg.newton_max_iters,
                newton_gate=cfg.newton_gate)
        except NonConvergence as e:
            raise NonConvergence(f"step {j}: {e}", residuals=e.residuals,
                                 lanes=e.lanes) from None
        except NonFinite as e:
            raise NonFinite(f"step {j}: {e}") from None

        g = edge_grad(v, h)
        q = phi(g, p, eps) + fe
        nv = neg(v)
        led["kinetic"][:, j] = 0.5 * ((v * v).sum(axis=1)
                                      - (u * u).sum(axis=1)) * h
        led["dissipation"][:, j] = dt * (q * g).sum(axis=1) * h
        led["reaction_work"][:, j] = dt * (fexp * v).sum(axis=1) * h
        led["penalty_work"][:, j] = dt * nvec * (nv ** (pen_pow + 1.0)
                                                 ).sum(axis=1) * h
        led["noise_work"][:, j] = (u * dwj).sum(axis=1) * h
        led["ito"][:, j] = 0.5 * hs * dt
        flux_dual[:, j] = (np.abs(q) ** pc).sum(axis=1) * h
        iters_rec[:, j] = its
        record_state(j + 1, v)
        if fields is not None:
            fields[:, j + 1] = v
        u = v
    wall = time.perf_counter() - t0

    out = []
    for i in range(nb):
        ledger = EnergyLedger(**{k: led[k][i].copy() for k in led})
        e0 = 0.5 * norms["l2"][i, 0] ** 2
        esup = 0.5 * (norms["l2"][i] ** 2).max()
        diag = {"ledger_blowup": bool(esup > 1e6 * (e0 + hs * grid.T + 1e-12)),
                "final_state": u[i].copy()}
        out.append(TrajectoryRecord(
            fingerprint=_solve_fingerprint(cfg, reactions[i], u0s[i],
                                           path.seed, nt),
            grid=grid, n=float(nvec[i]),
            u=fields[i].copy() if fields is not None else None,
            norms={k: norms[k][i].copy() for k in norms},
            flux_dual_pp=flux_dual[i].copy(),
            stoch_cumsum=np.cumsum(led["noise_work"][i]),
            newton_iters=iters_rec[i].copy(), ledger=ledger,
            wall_time=wall, diagnostics=diag))
    return out


def step(u_j, cfg, dW_j):
    """One semi-implicit step; returns u_{j+1} with stage residual below
    newton_tol in the grid L2 norm."""
    grid, flux, r = cfg.grid, cfg.flux, cfg.reaction
    u = np.asarray(u_j, dtype=float)[None, :]
    fe = _upwind_edges(u, flux.conv)
    b = u + np.asarray(dW_j, dtype=float)[None, :] \
        + grid.dt * node_div(fe, grid.h) - grid.dt * r.base_value(u)
    v, _ = _stage.step_batch(
        u, b, grid.dt, grid.h, flux.p, flux.eps,
        np.array([r.n]), r.penalty_exponent,
        tol=cfg.newton_tol, max_iter=cfg.newton_max_iters,
        newton_gate=cfg.newton_gate)
    return v[0]


def solve_trajectory(cfg, path, num_steps=None):
    """Advance num_steps (default: all draws in the path) from cfg.u0."""
    return _run_lanes(cfg, [cfg.reaction], [cfg.u0], path,
                      num_steps=num_steps)[0]


def solve_coupled(cfg, reactions=None, u0s=None, path=None, num_steps=None):
    """Coupled lanes on one NoisePath; lanes vary in reaction and/or u0.
    This is what makes the pathwise comparison statements testable."""
    reactions = list(reactions) if reactions is not None else [cfg.reaction]
    if u0s is None:
        u0s = [cfg.u0] * len(reactions)
    u0s = [np.asarray(z, dtype=float) for z in u0s]
    if len(u0s) != len(reactions):
        raise ValueError("one u0 per reaction lane")
    for z in u0s:
        if (z < 0.0).any():
            raise ValueError("u0 must be >= 0 nodewise")
    return _run_lanes(cfg, reactions, u0s, path, num_steps=num_steps)


def energy_residual(rec):
    """|LHS - RHS| of the discrete energy identity at final time."""
    return rec.ledger.final_residual


def dissipation_coercivity(rec, flux):
    """Per-step dissipation against its structural floor
    dt*(kappa*|D| + C1*||D+ u||_p^p); returns (dissipation, floor)."""
    grid = rec.grid
    p = flux.p
    gpp = rec.norms["w1p"][1:] ** p
    floors = np.empty(rec.nt)
    for j in range(rec.nt):
        cst = flux.constants(lam_box=max(rec.norms["linf"][j], 1e-12))
        floors[j] = grid.dt * (cst["kappa"] * grid.extent + cst["C1"] * gpp[j])
    return rec.ledger.dissipation.copy(), floors


ESTIMATE_NAMES = ("sup_l2_sq", "grad_int", "flux_dual_int", "penalty_int")


def path_sample(cfg, path_index, base_seed):
    """One ensemble sample with seed base_seed XOR path_index; returns
    (sample, None) on success or (None, failure) on a solver error."""
    from .noise import draw_path
    seed = int(base_seed) ^ int(path_index)
    path = draw_path(cfg.noise, cfg.grid.nt, seed) if cfg.noise is not None \
        else _ZeroPath(cfg.grid.nt)
    try:
        rec = solve_trajectory(cfg, path)
    except (NonConvergence, NonFinite) as e:
        return None, dict(path_index=int(path_index), seed=seed, error=str(e))
    p, dt = cfg.flux.p, cfg.grid.dt
    return dict(
        path_index=int(path_index), seed=seed,
        sup_l2_sq=float((rec.norms["l2"] ** 2).max()),
        grad_int=float((rec.norms["w1p"][1:] ** p).sum() * dt),
        flux_dual_int=float(rec.flux_dual_pp.sum() * dt),
        penalty_int=float(rec.n * (rec.norms["neg_l2"][1:] ** 2).sum() * dt),
    ), None


def summarize_samples(samples, failures, num_paths, base_seed):
    est = {}
    for k in ESTIMATE_NAMES:
        a = np.asarray([s[k] for s in samples])
        if a.size == 0:
            est[k] = dict(mean=float("nan"), se=float("nan"))
        else:
            se = float(a.std(ddof=1) / np.sqrt(a.size)) if a.size > 1 else 0.0
            est[k] = dict(mean=float(a.mean()), se=se)
    return dict(estimates=est, num_paths=int(num_paths),
                completed=int(num_paths) - len(failures),
                failures=list(failures), base_seed=int(base_seed),
                samples=list(samples))


def monte_carlo(cfg, num_paths, base_seed):
    """Ensemble estimates over num_paths independent paths.  Per-path
    failures are collected in the summary, healthy paths kept."""
    if num_paths < 1:
        raise ValueError("num_paths must be >= 1")
    samples, failures = [], []
    for i in range(int(num_paths)):
        s, f = path_sample(cfg, i, base_seed)
        (samples if s is not None else failures).append(s if s is not None
                                                        else f)
    return summarize_samples(samples, failures, num_paths, base_seed)


class _ZeroPath:
    """Stand-in path for noise-free configs."""

    def __init__(self, nt):
        self.seed = 0
        self.draws = np.zeros((nt, 0))
