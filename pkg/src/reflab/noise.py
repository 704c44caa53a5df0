"""Truncated Karhunen-Loeve sampling of the additive Q-Wiener forcing.

Eigenpairs are Dirichlet sines on the box with amplitude decay
lam_k = amp^2 * k^(-gamma); gamma > 1 keeps Q trace class.  Gaussian draws
come from a counter-based generator keyed by the path seed, so every path
is replayable independent of evaluation order.
"""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class NoiseSpec:
    grid: object
    K: int
    gamma: float
    amp: float
    lam: np.ndarray
    modes: np.ndarray
    smoothing_index: float


@dataclass(frozen=True, eq=False)
class NoisePath:
    seed: int
    draws: np.ndarray  # (nt, K) standard normals


def build_noise(grid, K, gamma, amp):
    if K < 1:
        raise ValueError(f"mode count must be >= 1, got {K}")
    if gamma <= 1.0:
        raise ValueError(f"trace-class violation: gamma must exceed 1, got {gamma}")
    if amp < 0.0:
        raise ValueError(f"amp must be >= 0, got {amp}")
    L = grid.extent
    k = np.arange(1, K + 1, dtype=float)
    lam = amp ** 2 * k ** (-gamma)
    if grid.dim == 1:
        modes = np.sqrt(2.0 / L) * np.sin(np.outer(k, np.pi * grid.x / L))
    else:
        # tensor sines ranked by Laplacian eigenvalue, K lowest modes
        kmax = int(np.ceil(np.sqrt(K))) + 2
        pairs = [(kx, ky) for kx in range(1, kmax + 1)
                 for ky in range(1, kmax + 1)]
        pairs.sort(key=lambda q: (q[0] ** 2 + q[1] ** 2, q[0]))
        sx = np.sin(np.pi * np.outer(np.arange(1, kmax + 1), grid.x) / L)
        sy = np.sin(np.pi * np.outer(np.arange(1, kmax + 1), grid.y) / L)
        modes = np.stack([(2.0 / L) * np.outer(sx[kx - 1], sy[ky - 1])
                          for kx, ky in pairs[:K]])
    return NoiseSpec(grid=grid, K=int(K), gamma=float(gamma), amp=float(amp),
                     lam=lam, modes=modes,
                     smoothing_index=grid.dim * (float(gamma) - 1.0) / 2.0)


def hs_norm_sq(spec):
    """Sum_k lam_k ||e_k||^2 with the grid's own quadrature."""
    d = spec.modes.reshape(spec.K, -1)
    return float((spec.lam * (d * d).sum(axis=1) * spec.grid.vol).sum())


def draw_path(spec, nt, seed):
    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    return NoisePath(seed=int(seed), draws=rng.standard_normal((int(nt), spec.K)))


def coarsen_path(path, factor):
    """Block-sum the fine draws so the coarse increments ride the same
    Brownian path: Z_coarse = sum(block) / sqrt(factor)."""
    nt, K = path.draws.shape
    if nt % factor != 0:
        raise ValueError(f"cannot coarsen {nt} steps by {factor}")
    z = path.draws.reshape(nt // factor, factor, K).sum(axis=1)
    return NoisePath(seed=path.seed, draws=z / np.sqrt(factor))


def sample_increment(spec, path, step_index, dt):
    """dW_j = sqrt(dt) * sum_k sqrt(lam_k) zeta_{j,k} e_k, zero on the boundary."""
    nt = path.draws.shape[0]
    if not 0 <= step_index < nt:
        raise IndexError(f"step {step_index} out of range for {nt} draws")
    w = np.sqrt(spec.lam) * path.draws[step_index]
    flat = w @ spec.modes.reshape(spec.K, -1)
    return np.sqrt(dt) * flat.reshape(spec.grid.shape)


def increments_all(spec, path, dt):
    """All nt increment fields at once, shape (nt, *grid.shape)."""
    w = np.sqrt(spec.lam) * path.draws
    flat = w @ spec.modes.reshape(spec.K, -1)
    return np.sqrt(dt) * flat.reshape(path.draws.shape[0], *spec.grid.shape)


def validate_regularity(spec, p, d):
    """Compare the smoothness the decay gamma implies (Weyl asymptotics)
    with the index the well-posedness condition requires.  Advisory only:
    desk-scale grids cannot detect marginal smoothness loss."""
    required = max(d / 2.0, (2.0 + d) / 2.0 - d / p)
    implied = spec.smoothing_index
    ok = implied >= required
    msg = ("noise regularity ok" if ok else
           f"warning: decay gamma={spec.gamma} implies smoothness {implied:.3g}"
           f" below the required index {required:.3g}")
    return dict(required=required, implied=implied, ok=ok, message=msg)
