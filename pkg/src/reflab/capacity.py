"""Parabolic p=2 capacity on coarse space-time grids.

cap(E) is estimated by minimizing ||v||_W = sqrt(A) + sqrt(B) over fields
v >= 1 on E, where A is the time-integrated Dirichlet form and B the
time-integrated H^{-1} norm of the discrete time derivative.  Fields live
on nt cell-centered time slices of interior nodes; the obstacle set E is a
boolean mask over those cells.  The minimizer is found by projected
Barzilai-Borwein descent with the projection v <- max(v, 1_E) and the
stagnation stop rule (relative objective decrease below tol over a fixed
iteration window).
"""
from dataclasses import dataclass, replace

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu


def _laplacian(grid):
    """Sparse Dirichlet Laplacian on interior nodes, /h^2 scaled."""
    def lap1(m, h):
        main = np.full(m, 2.0 / h**2)
        off = np.full(m - 1, -1.0 / h**2)
        return sparse.diags([off, main, off], [-1, 0, 1], format="csr")
    if grid.dim == 1:
        return lap1(grid.nx, grid.h)
    ix = sparse.identity(grid.nx, format="csr")
    iy = sparse.identity(grid.ny, format="csr")
    return (sparse.kron(lap1(grid.nx, grid.h), iy)
            + sparse.kron(ix, lap1(grid.ny, grid.hy))).tocsr()


def _dirichlet(grid, v):
    """Per-slice Dirichlet form sum_edges |D+ v|^2 vol, boundary edges in."""
    nt = v.shape[0]
    out = np.zeros(nt)
    if grid.dim == 1:
        p = np.zeros((nt, grid.nx + 2))
        p[:, 1:-1] = v
        out = (np.diff(p, axis=1) ** 2).sum(axis=1) / grid.h**2
    else:
        px = np.zeros((nt, grid.nx + 2, grid.ny))
        px[:, 1:-1, :] = v
        py = np.zeros((nt, grid.nx, grid.ny + 2))
        py[:, :, 1:-1] = v
        out = ((np.diff(px, axis=1) ** 2).sum(axis=(1, 2)) / grid.h**2
               + (np.diff(py, axis=2) ** 2).sum(axis=(1, 2)) / grid.hy**2)
    return out * grid.vol


@dataclass(frozen=True, eq=False)
class CapacityProblem:
    grid: object
    mask: np.ndarray  # (nt, *grid.shape) bool, the obstacle cells
    max_iters: int = 20000
    tol: float = 1e-6
    window: int = 50


@dataclass(frozen=True, eq=False)
class CapacityEstimate:
    value: float
    minimizer: np.ndarray
    converged: bool
    iterations: int


def make_problem(grid, mask, max_iters=20000, tol=1e-6, window=50):
    mask = np.asarray(mask, dtype=bool)
    if grid.nx > 32 or (grid.dim == 2 and grid.ny > 32) or grid.nt > 32:
        raise ValueError("capacity grids are capped at 32 cells per axis")
    want = (grid.nt,) + grid.shape
    if mask.shape != want:
        raise ValueError(f"mask shape {mask.shape} != {want}")
    return CapacityProblem(grid=grid, mask=mask, max_iters=max_iters,
                           tol=tol, window=window)


class _Norm:
    """||.||_W evaluator with a factorized Laplacian, reused across calls."""

    def __init__(self, grid):
        self.grid = grid
        self.lap = _laplacian(grid)
        self.solve = splu(self.lap.tocsc()).solve
        self.nn = int(np.prod(grid.shape))

    def parts(self, v):
        g = self.grid
        a = float(_dirichlet(g, v).sum() * g.dt)
        w = np.diff(v.reshape(v.shape[0], self.nn), axis=0)
        if w.shape[0] == 0:
            return a, 0.0, None
        z = self.solve(w.T).T
        b = float((w * z).sum() * g.vol / g.dt)
        return a, b, z

    def value(self, v):
        a, b, _ = self.parts(v)
        return np.sqrt(a) + np.sqrt(b)

    def grad(self, v):
        g = self.grid
        a, b, z = self.parts(v)
        flat = v.reshape(v.shape[0], self.nn)
        ga = 2.0 * g.dt * g.vol * (self.lap @ flat.T).T
        out = ga / max(2.0 * np.sqrt(a), 1e-30)
        if z is not None and b > 0.0:
            gb = np.zeros_like(flat)
            gb[:-1] -= z
            gb[1:] += z
            out += (2.0 * g.vol / g.dt) * gb / (2.0 * np.sqrt(b))
        return out.reshape(v.shape), np.sqrt(a) + np.sqrt(b)


def capacity_norm(grid, v):
    """sqrt(A) + sqrt(B) of a space-time field on nt cell slices."""
    v = np.asarray(v, dtype=float)
    return float(_Norm(grid).value(v))


def lebesgue_measure(prob):
    return float(prob.mask.sum() * prob.grid.dt * prob.grid.vol)


def estimate_capacity(prob):
    """Projected BB descent for cap(E); empty E short-circuits to zero."""
    ind = prob.mask.astype(float)
    if not prob.mask.any():
        return CapacityEstimate(0.0, np.zeros_like(ind), True, 0)
    norm = _Norm(prob.grid)

    def proj(v):
        return np.maximum(v, ind)

    v = proj(np.zeros_like(ind))
    g, j = norm.grad(v)
    hist = [j]
    best_j, best_v = j, v
    alpha = 1.0 / max(float(np.abs(g).max()), 1.0)
    converged = False
    it = 0
    for it in range(1, prob.max_iters + 1):
        ref = max(hist[-10:])
        step = alpha
        for _ in range(30):
            vn = proj(v - step * g)
            gn, jn = norm.grad(vn)
            if jn <= ref - 1e-14 or step < 1e-16:
                break
            step *= 0.5
        if jn > ref:  # no usable move; let the stop rule see stagnation
            hist.append(hist[-1])
        else:
            s = (vn - v).ravel()
            y = (gn - g).ravel()
            sy = float(s @ y)
            alpha = float(s @ s) / sy if sy > 1e-30 else step * 2.0
            alpha = min(max(alpha, 1e-12), 1e12)
            v, g = vn, gn
            hist.append(jn)
            if jn < best_j:
                best_j, best_v = jn, vn
        w = prob.window
        if len(hist) > w and hist[-1 - w] - hist[-1] < prob.tol * abs(hist[-1]):
            converged = True
            break
    return CapacityEstimate(float(best_j), best_v, converged, it)


def lebesgue_lower_bound_check(prob, est, tol=1e-9):
    """lambda(E)^{1/2} <= cap(E), the capacity-null => Lebesgue-null bound."""
    return float(np.sqrt(lebesgue_measure(prob))) <= est.value + tol


def reflect_even(v):
    """Even reflection of cell-centered slices across t=0 and t=T."""
    v = np.asarray(v, dtype=float)
    return np.concatenate([v[::-1], v, v[::-1]], axis=0)


def reflected_problem(prob):
    """Same E viewed inside the tripled time interval (-T, 2T)."""
    g = prob.grid
    g3 = replace(g, T=3.0 * g.T, nt=3 * g.nt)
    mask3 = np.zeros((3 * g.nt,) + g.shape, dtype=bool)
    mask3[g.nt:2 * g.nt] = prob.mask
    return CapacityProblem(grid=g3, mask=mask3, max_iters=prob.max_iters,
                           tol=prob.tol, window=prob.window)


def reflected_capacity(prob):
    return estimate_capacity(reflected_problem(prob))
