"""Uniform tensor grids on a box with homogeneous Dirichlet data.

Fields live on interior nodes only; the zero boundary ring is implicit in
every stencil.  Scalar fields are arrays of shape (nx,) or (nx, ny), vector
fields carry a leading component axis.  All norms use the nodal rectangle
rule with weight h (1D) or h*hy (2D) so discrete identities close exactly.
"""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Grid:
    dim: int
    extent: float
    nx: int
    ny: int
    h: float
    hy: float
    T: float
    nt: int
    dt: float

    @property
    def shape(self):
        return (self.nx,) if self.dim == 1 else (self.nx, self.ny)

    @property
    def vol(self):
        """Quadrature weight of one node (rectangle rule)."""
        return self.h if self.dim == 1 else self.h * self.hy

    @property
    def x(self):
        return np.arange(1, self.nx + 1) * self.h

    @property
    def y(self):
        if self.dim == 1:
            raise ValueError("1D grid has no y axis")
        return np.arange(1, self.ny + 1) * self.hy

    def coords(self):
        """Node coordinates: (nx,) in 1D, a meshgrid pair in 2D."""
        if self.dim == 1:
            return self.x
        return np.meshgrid(self.x, self.y, indexing="ij")


def build_grid(dim, extent, nx, ny=None, T=1.0, nt=2):
    if dim not in (1, 2):
        raise ValueError(f"dim must be 1 or 2, got {dim}")
    if nx < 2:
        raise ValueError(f"nx too small: {nx}")
    if dim == 2:
        ny = nx if ny is None else ny
        if ny < 2:
            raise ValueError(f"ny too small: {ny}")
    else:
        ny = 0
    if extent <= 0:
        raise ValueError(f"extent must be positive, got {extent}")
    if T <= 0:
        raise ValueError(f"T must be positive, got {T}")
    if nt < 2:
        raise ValueError(f"nt too small: {nt}")
    h = extent / (nx + 1)
    hy = extent / (ny + 1) if dim == 2 else 0.0
    return Grid(dim=dim, extent=float(extent), nx=int(nx), ny=int(ny),
                h=h, hy=hy, T=float(T), nt=int(nt), dt=float(T) / nt)


def _pad_zero(f, axis):
    """Attach the zero boundary ring along one axis."""
    width = [(0, 0)] * f.ndim
    width[axis] = (1, 1)
    return np.pad(f, width)


def _centered(f, h, axis):
    fp = _pad_zero(f, axis)
    lo = [slice(None)] * f.ndim
    hi = [slice(None)] * f.ndim
    lo[axis] = slice(0, -2)
    hi[axis] = slice(2, None)
    return (fp[tuple(hi)] - fp[tuple(lo)]) / (2.0 * h)


def gradient(f, grid):
    """Centered-difference gradient with the zero ring.

    Returns an array of the field's shape in 1D, or (2, nx, ny) in 2D.
    """
    f = np.asarray(f, dtype=float)
    if grid.dim == 1:
        return _centered(f, grid.h, 0)
    return np.stack([_centered(f, grid.h, 0), _centered(f, grid.hy, 1)])


def divergence(g, grid):
    """Adjoint-consistent divergence: sum div(g)*w*vol = -sum g.grad(w)*vol.

    The centered stencil is antisymmetric under the zero ring, so the same
    stencil applied componentwise is exactly minus the gradient's transpose.
    """
    g = np.asarray(g, dtype=float)
    if grid.dim == 1:
        return _centered(g, grid.h, 0)
    return _centered(g[0], grid.h, 0) + _centered(g[1], grid.hy, 1)


def norm(f, grid, kind="l2", p=2.0):
    """Grid norm: 'l1' | 'l2' | 'lp' | 'linf' | 'w1p'."""
    f = np.asarray(f, dtype=float)
    if kind == "linf":
        return float(np.abs(f).max()) if f.size else 0.0
    if kind == "l1":
        return float(np.abs(f).sum() * grid.vol)
    if kind == "l2":
        return float(np.sqrt((f * f).sum() * grid.vol))
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if kind == "lp":
        return float((np.abs(f) ** p).sum() * grid.vol) ** (1.0 / p)
    if kind == "w1p":
        g = gradient(f, grid)
        if grid.dim == 1:
            mag = np.abs(g)
        else:
            mag = np.sqrt(g[0] ** 2 + g[1] ** 2)
        return float((mag ** p).sum() * grid.vol) ** (1.0 / p)
    raise ValueError(f"unknown norm kind {kind!r}")


def pos_neg_parts(f):
    """(f+, f-) with f = f+ - f- and f+ * f- = 0, both exact."""
    f = np.asarray(f, dtype=float)
    return np.maximum(f, 0.0), np.maximum(-f, 0.0)


def truncate(f, K):
    """T_K(r) = max(-K, min(r, K))."""
    if K <= 0:
        raise ValueError(f"truncation level must be positive, got {K}")
    return np.clip(np.asarray(f, dtype=float), -K, K)
