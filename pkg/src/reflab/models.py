"""Flux, reaction, and smoothing models plus the structural-assumption auditor.

The built-in flux is the regularized p-Laplace with linear convection,
a(x, lam, xi) = (|xi|^2 + eps^2)^((p-2)/2) xi + c*lam*e1.  Monotonicity,
coercivity/growth, and Lipschitz-in-lam are pointwise conditions, so the
auditor samples random tuples on a compact box and reports violations with
witnesses; the constants it checks against are derived from the closed form
(via Young's inequality when convection or an obstacle shift is active) and
recorded in the report.
"""
from dataclasses import dataclass, field

import numpy as np

from .grids import gradient


def _phi(z2, p, eps):
    """(z2 + eps^2)^((p-2)/2) with the p<2 singularity at 0 removed."""
    s = z2 + eps * eps
    with np.errstate(divide="ignore"):
        w = np.where(s > 0.0, s, 1.0) ** ((p - 2.0) / 2.0)
    return np.where(s > 0.0, w, 0.0)


def _young_const(delta, a_exp, b_exp):
    # a*b <= delta*a^a_exp + C*b^b_exp for conjugate exponents
    return (delta * a_exp) ** (-b_exp / a_exp) / b_exp


@dataclass(frozen=True, eq=False)
class FluxModel:
    """Caratheodory flux with growth exponent p, convection amplitude conv,
    and regularization eps; shift holds an optional nodal gradient field
    (component-first) for obstacle-shifted instances."""
    p: float
    conv: float = 0.0
    eps: float = 1e-8
    shift: np.ndarray = None

    def __post_init__(self):
        if self.p <= 1.0:
            raise ValueError(f"growth exponent must exceed 1, got {self.p}")
        if self.eps < 0.0:
            raise ValueError(f"eps must be >= 0, got {self.eps}")

    def shift_at(self, x):
        """Shift vectors at flat node indices x, shape (d, len(x))."""
        if self.shift is None:
            return None
        d = self.shift.shape[0]
        flat = self.shift.reshape(d, -1)
        return flat[:, np.atleast_1d(np.asarray(x, dtype=int))]

    def shift_bound(self):
        if self.shift is None:
            return 0.0
        return float(np.sqrt((self.shift ** 2).sum(axis=0)).max())

    def eval(self, lam, xi, x=None):
        """Flux vectors for xi with a leading component axis; xi is either a
        single (d,) vector or a (d, N) batch with x a matching node index."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        z = xi
        if self.shift is not None:
            s = self.shift_at(0 if x is None else x)
            z = xi + (s[:, 0] if xi.ndim == 1 else s)
        z2 = (z * z).sum(axis=0)
        out = _phi(z2, self.p, self.eps) * z
        if self.conv != 0.0:
            lam = np.asarray(lam, dtype=float)
            out = out.copy()
            out[0] = out[0] + self.conv * lam
        return out

    def constants(self, lam_box=10.0):
        """Structural constants valid on |lam| <= lam_box (A2 needs the box
        only when convection is active; the shift enters through its sup)."""
        p, eps, c = self.p, self.eps, abs(self.conv)
        pc = p / (p - 1.0)
        S = self.shift_bound()
        if S == 0.0:
            if c == 0.0:
                C1 = 1.0
                kappa = -(eps ** p if p < 2.0 else 0.0)
            else:
                C1 = 0.5
                kappa = -((eps ** p if p < 2.0 else 0.0)
                          + _young_const(0.5, p, pc) * (c * lam_box) ** pc)
            C2 = max(1.0, 2.0 ** (p - 2.0))
            g = C2 * eps ** (p - 1.0) if p >= 2.0 else 0.0
            if c == 0.0:
                C3 = 0.0
            elif p >= 2.0:
                C3 = c
                g += c
            else:
                C3 = c * lam_box ** (2.0 - p)
            return dict(C1=C1, C2=C2, C3=C3, C4=0.0, g=g, h=c, kappa=kappa,
                        lam_box=lam_box)
        # obstacle-shifted instance (convection rejected at construction)
        C1 = 2.0 ** (-p)
        cy = _young_const(2.0 ** (-p), pc, p)
        kappa = -(1.5 * eps ** p + cy * S ** p + 0.5 * S ** p)
        C2 = max(1.0, 2.0 ** (p - 2.0))
        g = C2 * (S + eps) ** (p - 1.0)
        return dict(C1=C1, C2=C2, C3=0.0, C4=0.0, g=g, h=0.0, kappa=kappa,
                    lam_box=lam_box)


def eval_flux(m, x, lam, xi):
    """a(x, lam, xi); x indexes nodes of the stored coefficient field."""
    return m.eval(lam, xi, x=x)


def obstacle_shift(m, psi, grid):
    """Shifted model a~(x, xi) = a(x, xi + grad(psi)(x)) from Dirichlet psi."""
    if m.conv != 0.0:
        raise ValueError("obstacle shift requires a flux independent of lam "
                         "(set conv=0)")
    gpsi = gradient(np.asarray(psi, dtype=float), grid)
    if grid.dim == 1:
        gpsi = gpsi[None, :]
    base = m.shift if m.shift is not None else 0.0
    return FluxModel(p=m.p, conv=0.0, eps=m.eps, shift=base + gpsi)


@dataclass(frozen=True, eq=False)
class ReactionModel:
    """Penalized reaction f_n(r) = f(r) - n*(r^-)^q with q = 1 (linear kind)
    or q = p - 1 (power kind, the sub-quadratic variant)."""
    n: float
    kind: str = "linear"
    p: float = 2.0
    base: object = None
    base_name: str = "zero"
    base_coef: float = 0.0

    def __post_init__(self):
        if self.n < 0.0:
            raise ValueError(f"penalty strength must be >= 0, got {self.n}")
        if self.kind not in ("linear", "power"):
            raise ValueError(f"penalty kind must be linear|power, got {self.kind!r}")
        if self.kind == "power" and not 1.0 < self.p < 2.0:
            raise ValueError(f"power penalty needs 1 < p < 2, got p={self.p}")

    @property
    def penalty_exponent(self):
        return 1.0 if self.kind == "linear" else self.p - 1.0

    def base_value(self, v):
        if self.base is None:
            return np.zeros_like(np.asarray(v, dtype=float))
        return self.base(np.asarray(v, dtype=float))

    def penalty_value(self, v):
        """The non-negative magnitude n*(v^-)^q subtracted by f_n."""
        neg = np.maximum(-np.asarray(v, dtype=float), 0.0)
        return self.n * neg ** self.penalty_exponent


def make_reaction(n, kind="linear", p=2.0, base="zero", coef=0.0):
    """Named base choices: zero; pospart (coef * v^+, Lipschitz);
    power (coef * sign(v)|v|^(p-1), the non-decreasing sub-quadratic base)."""
    if base == "zero":
        fn = None
    elif base == "pospart":
        fn = lambda v: coef * np.maximum(v, 0.0)
    elif base == "power":
        fn = lambda v: coef * np.sign(v) * np.abs(v) ** (p - 1.0)
    else:
        raise ValueError(f"unknown reaction base {base!r}")
    return ReactionModel(n=float(n), kind=kind, p=float(p), base=fn,
                         base_name=base, base_coef=float(coef))


def eval_reaction(r, v):
    """f_n(v) = f(v) - n*(v^-)^q."""
    return r.base_value(v) - r.penalty_value(v)


@dataclass(frozen=True)
class SmoothPosApprox:
    """C^2 quartic-spline approximation of the positive part with width delta:
    0 below 0, -r^4/(2 d^3) + r^3/d^2 on [0, d], r - d/2 above."""
    delta: float

    def __post_init__(self):
        if self.delta <= 0.0:
            raise ValueError(f"delta must be positive, got {self.delta}")

    def value(self, r):
        r = np.asarray(r, dtype=float)
        d = self.delta
        mid = -r ** 4 / (2.0 * d ** 3) + r ** 3 / d ** 2
        return np.select([r <= 0.0, r <= d], [0.0, mid], default=r - d / 2.0)

    def deriv(self, r):
        r = np.asarray(r, dtype=float)
        d = self.delta
        mid = -2.0 * r ** 3 / d ** 3 + 3.0 * r ** 2 / d ** 2
        return np.select([r <= 0.0, r <= d], [0.0, mid], default=1.0)

    def second(self, r):
        r = np.asarray(r, dtype=float)
        d = self.delta
        mid = -6.0 * r ** 2 / d ** 3 + 6.0 * r / d ** 2
        return np.select([r <= 0.0, r <= d], [0.0, mid], default=0.0)


def smooth_pos(s, r):
    return s.value(r)


def audit_assumptions(m, sample_count=10000, rng_seed=0, box=10.0):
    """Sample (x, lam, xi, zeta) tuples on |lam|,|xi| <= box and check the
    monotonicity, coercivity, growth, and Lipschitz conditions against the
    model's derived constants.  Violations are report content, not errors.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    rng = np.random.Generator(np.random.Philox(key=rng_seed))
    shift = getattr(m, "shift", None)
    d = 2 if shift is None else shift.shape[0]
    N = int(sample_count)
    lam = rng.uniform(-box, box, N)
    lam2 = rng.uniform(-box, box, N)
    xi = rng.uniform(-box, box, (d, N))
    zeta = rng.uniform(-box, box, (d, N))
    if shift is not None:
        x = rng.integers(0, shift.reshape(d, -1).shape[1], N)
    else:
        x = None
    cst = m.constants(lam_box=box)

    a_xi = m.eval(lam, xi, x=x)
    a_zeta = m.eval(lam, zeta, x=x)
    a_lam2 = m.eval(lam2, xi, x=x)
    ximag = np.sqrt((xi * xi).sum(axis=0))
    amag = np.sqrt((a_xi * a_xi).sum(axis=0))

    sep = ((xi - zeta) ** 2).sum(axis=0) > 0.0
    mono = ((a_xi - a_zeta) * (xi - zeta)).sum(axis=0)
    bad_a1 = sep & ~(mono > 0.0)

    coer = (a_xi * xi).sum(axis=0)
    floor = cst["kappa"] + cst["C1"] * ximag ** m.p
    bad_coer = ~(coer >= floor)

    cap = cst["C2"] * ximag ** (m.p - 1.0) \
        + cst["C3"] * np.abs(lam) ** (m.p - 1.0) + cst["g"]
    bad_grow = ~(amag <= cap)

    dl = np.abs(lam - lam2)
    lip = np.sqrt(((a_xi - a_lam2) ** 2).sum(axis=0))
    # cancellation noise in lip is absolute (ulp of |a|), not O(dl)
    bad_a3 = ~(lip <= (cst["C4"] * ximag ** (m.p - 1.0) + cst["h"]) * dl
               + 1e-12 * (1.0 + amag))

    def witnesses(mask, limit=5):
        idx = np.flatnonzero(mask)[:limit]
        return [dict(lam=float(lam[i]), xi=xi[:, i].tolist(),
                     zeta=zeta[:, i].tolist()) for i in idx]

    counts = dict(a1_monotonicity=int(bad_a1.sum()),
                  a2_coercivity=int(bad_coer.sum()),
                  a2_growth=int(bad_grow.sum()),
                  a3_lipschitz=int(bad_a3.sum()))
    return dict(samples=N, seed=rng_seed, box=box, constants=cst,
                counts=counts,
                witnesses={k: witnesses(v) for k, v in
                           [("a1_monotonicity", bad_a1),
                            ("a2_coercivity", bad_coer),
                            ("a2_growth", bad_grow),
                            ("a3_lipschitz", bad_a3)]},
                ok=all(v == 0 for v in counts.values()))
