"""Independent dense solve of the discrete capacity problem.

Run before the library's estimator is trusted: builds the space-time
W-norm objective from scratch (dense matrices, no reflab internals) and
solves  min ||L1 v||_2 + ||L2 v||_2  s.t.  v >= 1 on E  as a second-order
cone program.  The printed values are frozen into tests/test_capacity.py.

Problem pinned for the golden number: extent 1, T 1, nx 8 interior nodes,
nt 8 cell-centered time slices, E = the single central cell
(time index nt//2 = 4, node index nx//2 = 4, both 0-based).

Usage: python3 capacity_oracle.py
"""
import numpy as np
import cvxpy as cp


def dense_operators(nx, nt, extent=1.0, T=1.0):
    h = extent / (nx + 1)
    dt = T / nt
    vol = h

    # forward differences onto nx+1 edges, Dirichlet ghosts
    D = np.zeros((nx + 1, nx))
    for e in range(nx + 1):
        if e < nx:
            D[e, e] = 1.0 / h
        if e > 0:
            D[e, e - 1] = -1.0 / h
    # rows of L1: per time slice, per edge, weight sqrt(dt * vol)
    L1 = np.kron(np.eye(nt), np.sqrt(dt * vol) * D)

    lap = D.T @ D  # (nx, nx) Dirichlet Laplacian, 1/h^2 scaled
    mu, V = np.linalg.eigh(lap)
    S_half = V @ np.diag(mu ** -0.5) @ V.T  # (-lap)^(-1/2)
    # rows of L2: per time difference, weight sqrt(vol / dt)
    blocks = []
    for j in range(nt - 1):
        row = np.zeros((nx, nt * nx))
        row[:, j * nx:(j + 1) * nx] = -S_half
        row[:, (j + 1) * nx:(j + 2) * nx] = S_half
        blocks.append(np.sqrt(vol / dt) * row)
    L2 = np.vstack(blocks) if blocks else np.zeros((0, nt * nx))
    return L1, L2


def solve_capacity(nx, nt, mask, extent=1.0, T=1.0):
    L1, L2 = dense_operators(nx, nt, extent, T)
    v = cp.Variable(nt * nx)
    flat = mask.reshape(-1)
    cons = [v[np.where(flat)[0]] >= 1.0]
    obj = cp.Minimize(cp.norm(L1 @ v, 2) + cp.norm(L2 @ v, 2))
    prob = cp.Problem(obj, cons)
    val = prob.solve(solver=cp.CLARABEL)
    return float(val), v.value


def main():
    nx = nt = 8
    mask = np.zeros((nt, nx), dtype=bool)
    mask[nt // 2, nx // 2] = True
    val, vmin = solve_capacity(nx, nt, mask)
    print(f"golden central cell (8x8, extent=T=1): {val!r}")

    full = np.ones((nt, nx), dtype=bool)
    val_full, _ = solve_capacity(nx, nt, full)
    print(f"full cylinder Q_T: {val_full!r}")
    print(f"sqrt(T*|D|) = {np.sqrt(1.0 * 1.0)!r}")

    corner = np.zeros((nt, nx), dtype=bool)
    corner[0:2, 0:2] = True
    val_c, _ = solve_capacity(nx, nt, corner)
    print(f"corner 2x2 block: {val_c!r}")


if __name__ == "__main__":
    main()
