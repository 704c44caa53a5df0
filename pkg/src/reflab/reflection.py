"""Reflection-measure diagnostics.

The prelimit measure density is d_{j,i} = n * (u_{j+1}(x_i))^-, one row per
time step, so eta_n(cell) ~ density * dt * h^d.  The continuum limit is only
ever seen through Cauchy-style stabilization of weighted masses across the
n-sweep.  Quasi-everywhere statements have no grid analogue and are tested
nodewise with solver-tolerance slack; report headers carry that downgrade.
"""
from dataclasses import dataclass

import numpy as np

from .grids import truncate

QE_NOTE = ("quasi-everywhere statements are tested nodewise "
           "with solver-tolerance slack")


@dataclass(frozen=True, eq=False)
class MeasureGrid:
    grid: object
    n: float
    density: np.ndarray  # (nt, *grid.shape), >= 0

    @property
    def mass(self):
        return float(self.density.sum() * self.grid.dt * self.grid.vol)


def eta_density(rec):
    """Approximate reflection measure n*u^- of a stored trajectory."""
    if rec.u is None:
        raise ValueError("record was run without store_fields; densities "
                         "need the full trajectory")
    d = rec.n * np.maximum(-rec.u[1:], 0.0)
    return MeasureGrid(grid=rec.grid, n=rec.n, density=d)


def boundary_weight(grid):
    """phi(x) = min(1, dist(x, boundary)), exact for the box."""
    x = grid.x
    w = np.minimum(x, grid.extent - x)
    if grid.dim == 2:
        y = grid.y
        wy = np.minimum(y, grid.extent - y)
        w = np.minimum(w[:, None], wy[None, :])
    return np.minimum(1.0, w)


def smooth_test_battery(grid):
    """Five fixed smooth bounded test functions for mass-stabilization checks."""
    x = grid.x / grid.extent
    return [
        ("sine", np.sin(np.pi * x)),
        ("sine2", np.sin(2.0 * np.pi * x)),
        ("parabola", 4.0 * x * (1.0 - x)),
        ("gauss", np.exp(-((x - 0.5) / 0.2) ** 2)),
        ("ramp", x.copy()),
    ]


def _check_grid(m, shape):
    if shape != m.density.shape[1:]:
        raise ValueError(f"weight shape {shape} does not match the measure "
                         f"grid {m.density.shape[1:]}")


def weighted_mass(m, w):
    """Sum_j sum_i d_{j,i} w(x_i) dt h^d for a spatial weight field."""
    w = np.asarray(w, dtype=float)
    _check_grid(m, w.shape)
    return float((m.density * w).sum() * m.grid.dt * m.grid.vol)


def pair_with(m, test):
    """Pair the measure with a test function: spatial array, space-time
    array (nt rows), or callable test(t, x) evaluated at cell times."""
    if callable(test):
        t = (np.arange(1, m.density.shape[0] + 1) * m.grid.dt)
        vals = np.stack([np.asarray(test(tj, m.grid.x), dtype=float)
                         for tj in t])
    else:
        vals = np.asarray(test, dtype=float)
        if vals.shape == m.density.shape[1:]:
            vals = vals[None, ...]
    bshape = np.broadcast_shapes(vals.shape, m.density.shape)
    if bshape != m.density.shape:
        raise ValueError(f"test shape {vals.shape} does not broadcast over "
                         f"the measure {m.density.shape}")
    return float((m.density * vals).sum() * m.grid.dt * m.grid.vol)


def complementarity(rec_m, meas_n, K=1.0):
    """Integral of T_K((u_m)^+) against the measure of a larger penalty;
    the limit measure only charges the contact set, so this decays in n."""
    if rec_m.u is None:
        raise ValueError("record was run without store_fields")
    if rec_m.grid is not meas_n.grid and rec_m.grid != meas_n.grid:
        raise ValueError("records do not share a grid")
    if rec_m.n > meas_n.n:
        raise ValueError("complementarity expects m <= n penalty ordering")
    up = np.maximum(rec_m.u[1:], 0.0)
    return float((truncate(up, K) * meas_n.density).sum()
                 * meas_n.grid.dt * meas_n.grid.vol)


def sweep_report(records, K=1.0):
    """Table over an n-sweep of coupled records (shared grid and path).

    Columns: n, neg_l2 (= ||u^-||_{L2(Q_T)}), sqrt_n_neg_l2, mass, phi_mass,
    complementarity (against the smallest-n record), slope (log-log fit of
    neg_l2 against n; absent when fewer than two positive points).
    """
    records = list(records)
    if not records:
        raise ValueError("empty sweep")
    grid = records[0].grid
    nts = {r.nt for r in records}
    if any(r.grid is not grid and r.grid != grid for r in records) \
            or len(nts) != 1:
        raise ValueError("sweep records must share grid and step count")
    phi_w = boundary_weight(grid)
    base = min(records, key=lambda r: r.n)
    dt = grid.dt

    rows = []
    for r in records:
        m = eta_density(r)
        neg_l2 = float(np.sqrt((r.norms["neg_l2"][1:] ** 2).sum() * dt))
        rows.append(dict(
            n=r.n,
            neg_l2=neg_l2,
            sqrt_n_neg_l2=float(np.sqrt(r.n) * neg_l2),
            mass=m.mass,
            phi_mass=weighted_mass(m, phi_w),
            complementarity=complementarity(base, m, K=K),
        ))
    ns = np.array([row["n"] for row in rows])
    vals = np.array([row["neg_l2"] for row in rows])
    keep = vals > 0.0
    slope = None
    if keep.sum() >= 2 and len(set(ns[keep])) >= 2:
        slope = float(np.polyfit(np.log(ns[keep]), np.log(vals[keep]), 1)[0])
    for row in rows:
        row["slope"] = slope
    return dict(rows=rows, K=K, note=QE_NOTE)
