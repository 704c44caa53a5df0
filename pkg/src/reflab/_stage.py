"""Batched implicit stage solve for the 1D semi-implicit scheme.

Each lane solves  v - dt*div phi_p(D+ v) - dt*n*(v^-)^q = b  on the interior
nodes with homogeneous Dirichlet data, where D+ is the staggered edge
difference and q is 1 (linear penalty) or p-1 (power penalty).

The residual uses the exact negative part; the Jacobian treats r -> r^- by
active-set detection (derivative -1 on {v < 0}, 0 elsewhere).  For p < 2 the
flux coefficient starts as the Kacanov secant and switches to the true
Jacobian once the residual is below a gate, demoting back on creep; the
secant is a globally contracting majorization where the true Jacobian is
nearly singular (edge gradients near zero), so the hybrid is both robust
and quadratically convergent at the end.  For the power penalty the Jacobian
diagonal is floored near the kink; the residual itself is never modified.
"""
import numpy as np


class NonConvergence(RuntimeError):
    """Iteration budget exhausted; carries the last residual per lane."""

    def __init__(self, message, residuals=None, lanes=None):
        super().__init__(message)
        self.residuals = residuals
        self.lanes = lanes


class NonFinite(FloatingPointError):
    """NaN or Inf encountered inside the stage solve."""


def edge_grad(v, h):
    """D+ on the nx+1 edges, ghost zeros outside; v has shape (lanes, nx)."""
    nb, nx = v.shape
    g = np.empty((nb, nx + 1))
    g[:, 0] = v[:, 0] / h
    g[:, 1:-1] = (v[:, 1:] - v[:, :-1]) / h
    g[:, -1] = -v[:, -1] / h
    return g


def node_div(q, h):
    """Adjoint pairing of edge_grad: (node_div(q), v)*h = -(q, edge_grad(v))*h."""
    return (q[:, 1:] - q[:, :-1]) / h


def phi(g, p, eps):
    # the tiny floor removes the 0/0 at exactly-zero edges when eps = 0
    s = np.maximum(g * g + eps * eps, 1e-300)
    return s ** ((p - 2.0) / 2.0) * g


def phi_prime(g, p, eps):
    s = np.maximum(g * g + eps * eps, 1e-300)
    return s ** ((p - 2.0) / 2.0) * (1.0 + (p - 2.0) * g * g / s)


def phi_secant(g, p, eps):
    s = np.maximum(g * g + eps * eps, 1e-300)
    return s ** ((p - 2.0) / 2.0)


def neg(v):
    return np.maximum(-v, 0.0)


def thomas_batched(lo, di, up, rhs):
    """Tridiagonal solve vectorized over lanes."""
    nb, nx = di.shape
    c = np.empty_like(di)
    d = np.empty_like(di)
    c[:, 0] = up[:, 0] / di[:, 0]
    d[:, 0] = rhs[:, 0] / di[:, 0]
    for i in range(1, nx):
        m = di[:, i] - lo[:, i] * c[:, i - 1]
        c[:, i] = up[:, i] / m
        d[:, i] = (rhs[:, i] - lo[:, i] * d[:, i - 1]) / m
    x = np.empty_like(di)
    x[:, -1] = d[:, -1]
    for i in range(nx - 2, -1, -1):
        x[:, i] = d[:, i] - c[:, i] * x[:, i + 1]
    return x


def _resid(v, nvv, b, dt, h, p, eps, pen_pow):
    g = edge_grad(v, h)
    return v - dt * node_div(phi(g, p, eps), h) \
        - dt * nvv * neg(v) ** pen_pow - b


def step_batch(u, b, dt, h, p, eps, nvec, pen_pow, tol=1e-10,
               max_iter=200, newton_gate=1e-6):
    """Solve the implicit stage for every lane; returns (v, iteration counts).

    u is the previous state (used only for error reporting), b the assembled
    right-hand side.  nvec holds the per-lane penalty strength.
    """
    nb, nx = b.shape
    nvv = nvec[:, None]
    if not np.isfinite(b).all():
        raise NonFinite("non-finite right-hand side entering the stage solve")
    # Jacobian floor for the power penalty: a node within tol-scale of the
    # kink must not blow up the linear system
    if pen_pow != 1.0:
        y_floor = (tol / np.maximum(dt * nvec, 1e-300))[:, None] ** (1.0 / pen_pow)

    v = b.copy()
    done = np.zeros(nb, dtype=bool)
    iters = np.zeros(nb, dtype=int)
    gate = np.full(nb, np.inf if p >= 2.0 else newton_gate)
    prev_rn = np.full(nb, np.inf)
    prev_newton = np.zeros(nb, dtype=bool)

    for it in range(max_iter):
        R = _resid(v, nvv, b, dt, h, p, eps, pen_pow)
        rn = np.sqrt((R * R).sum(axis=1) * h)
        if not np.isfinite(rn).all():
            raise NonFinite("non-finite residual inside the stage solve")

        # a Newton lane contracting slower than 0.7 per sweep is creeping
        # (typical near-singular Jacobian at a local extremum); send it back
        # to the secant until much closer to the root
        creep = prev_newton & (rn > 0.7 * prev_rn) & (rn > tol)
        if creep.any():
            gate[creep] = np.maximum(gate[creep] * 0.01, 2.0 * tol)
        prev_rn = rn.copy()

        done |= rn <= tol
        if done.all():
            return v, iters
        act = ~done

        g = edge_grad(v, h)
        newton = rn <= gate
        prev_newton = newton & ~done
        if newton.all():
            fp = phi_prime(g, p, eps)
        elif not newton.any():
            fp = phi_secant(g, p, eps)
        else:
            fp = np.where(newton[:, None], phi_prime(g, p, eps),
                          phi_secant(g, p, eps))

        active = v < 0.0
        if pen_pow == 1.0:
            ps = nvv * active
        else:
            ps = nvv * pen_pow * np.maximum(neg(v), y_floor) ** (pen_pow - 1.0) \
                * active
        di = 1.0 + dt * ps + dt * (fp[:, :-1] + fp[:, 1:]) / h ** 2
        up_ = np.zeros_like(di)
        lo_ = np.zeros_like(di)
        up_[:, :-1] = -dt * fp[:, 1:-1] / h ** 2
        lo_[:, 1:] = -dt * fp[:, 1:-1] / h ** 2
        dlt = thomas_batched(lo_, di, up_, -R)
        dlt[done] = 0.0

        # per-lane Armijo halving on the residual norm
        lam = np.ones(nb)
        accepted = done.copy()
        vn = v.copy()
        for _ in range(40):
            trial = ~accepted
            if not trial.any():
                break
            vt = v + lam[:, None] * dlt
            Rt = _resid(vt, nvv, b, dt, h, p, eps, pen_pow)
            rt = np.sqrt((Rt * Rt).sum(axis=1) * h)
            ok = trial & (rt <= (1.0 - 1e-4 * lam) * rn)
            vn[ok] = vt[ok]
            accepted |= ok
            lam = np.where(accepted, lam, lam * 0.5)
        rest = ~accepted
        if rest.any():
            vt = v + lam[:, None] * dlt
            vn[rest] = vt[rest]
        v = vn
        iters += act.astype(int)
        # collapsed line search in Newton mode: same cure as creep
        demote = act & newton & (lam < 1.0 / 16.0)
        if demote.any():
            gate[demote] = np.maximum(gate[demote] * 0.01, 2.0 * tol)

    R = _resid(v, nvv, b, dt, h, p, eps, pen_pow)
    rn = np.sqrt((R * R).sum(axis=1) * h)
    done |= rn <= tol
    if not done.all():
        bad = np.flatnonzero(~done)
        raise NonConvergence(
            f"stage solve stalled in {bad.size} lane(s), "
            f"worst residual {rn[bad].max():.3e} after {max_iter} iterations",
            residuals=rn, lanes=bad)
    return v, iters
