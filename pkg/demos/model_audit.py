"""Audit the structural assumptions behind the solver's convergence theory.

The flux must be strictly monotone in the gradient slot, coercive with
p-growth, and Lipschitz in the state slot.  The auditor samples random
tuples on a compact box and checks each inequality against constants
derived from the closed form; a model that cheats gets caught with
concrete witnesses.
"""
import numpy as np

from reflab import FluxModel, audit_assumptions, build_grid, obstacle_shift

builtin = FluxModel(p=3.0, conv=0.5, eps=1e-8)
rep = audit_assumptions(builtin, sample_count=20000, rng_seed=1)
print(f"builtin p-Laplace + convection: counts = {rep['counts']}")
print(f"  derived constants: C1 = {rep['constants']['C1']}, "
      f"kappa = {rep['constants']['kappa']:.4f}, h = {rep['constants']['h']}")

# shifting by the obstacle's gradient preserves every assumption, which is
# what lets nonzero obstacles ride on the zero-obstacle theory
g = build_grid(1, 1.0, 32)
psi = 0.3 * np.sin(2.0 * np.pi * g.x)
shifted = obstacle_shift(FluxModel(p=1.5, conv=0.0, eps=1e-8), psi, g)
rep2 = audit_assumptions(shifted, sample_count=20000, rng_seed=2)
print(f"obstacle-shifted (p = 1.5):     counts = {rep2['counts']}")
print(f"  shift bound sup|grad psi| = {shifted.shift_bound():.4f}")


class Backward:
    """An impostor: a(xi) = -xi reverses diffusion."""
    p = 2.0
    conv = 0.0
    eps = 0.0
    shift = None

    def eval(self, lam, xi, x=None):
        return -np.atleast_1d(np.asarray(xi, dtype=float))

    def constants(self, lam_box=10.0):
        return dict(C1=1.0, C2=1.0, C3=0.0, C4=0.0, g=0.0, h=0.0,
                    kappa=0.0, lam_box=lam_box)


rep3 = audit_assumptions(Backward(), sample_count=2000, rng_seed=3)
print(f"adversarial backward flux:      counts = {rep3['counts']}")
w = rep3["witnesses"]["a1_monotonicity"][0]
print(f"  first monotonicity witness: xi = {np.round(w['xi'], 3).tolist()}, "
      f"zeta = {np.round(w['zeta'], 3).tolist()}")
