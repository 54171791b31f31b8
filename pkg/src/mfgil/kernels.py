"""Hot numeric kernels: numba-jitted with a pure-numpy fallback.

Backend selection: numba when available, unless the environment variable
MFGIL_NO_NUMBA is set to a nonempty value other than "0". Both backends
are deterministic given identical inputs (noise is sampled outside).
"""

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None


def use_numba():
    flag = os.environ.get("MFGIL_NO_NUMBA", "")
    if flag not in ("", "0"):
        return False
    return numba is not None


def _perturbed(e0, rho0, rho1):
    denom = e0 * rho1 + (1.0 - e0) * rho0
    if e0 <= 0.0:
        return 0.0
    if e0 >= 1.0:
        return 1.0
    if denom <= 0.0:
        return 0.0
    return e0 * rho1 / denom


def bi_sweep_numpy(grid, pi_pop1, e0, eta, v_next):
    """Expected continuation values for one backward-induction step.

    grid: (G,) uniform rho(1) grid; pi_pop1: (G, 2) population probability
    of action 1 per state; e0: (M,) noise draws; v_next: (2, G) values at
    t+1. Returns (G, 2): continuation per action, averaged over noise and
    linearly interpolated in rho(1).
    """
    rho1 = grid[:, None]
    rho0 = 1.0 - rho1
    e = e0[None, :]
    denom = e * rho1 + (1.0 - e) * rho0
    safe = denom > 0
    pert = np.where(safe, e * rho1 / np.where(safe, denom, 1.0), 0.0)
    pert = np.where(e <= 0.0, 0.0, np.where(e >= 1.0, 1.0, pert))  # (G, M)
    m1 = (1.0 - grid) * pi_pop1[:, 0] + grid * pi_pop1[:, 1]
    rho1_next = (1.0 - eta) * m1[:, None] + eta * pert
    v0 = np.interp(rho1_next, grid, v_next[0])
    v1 = np.interp(rho1_next, grid, v_next[1])
    out = np.empty((len(grid), 2))
    p1_a0 = eta * pert
    p1_a1 = 1.0 - eta + eta * pert
    out[:, 0] = ((1.0 - p1_a0) * v0 + p1_a0 * v1).mean(axis=1)
    out[:, 1] = ((1.0 - p1_a1) * v0 + p1_a1 * v1).mean(axis=1)
    return out


if numba is not None:

    @numba.njit(cache=True, parallel=True)
    def _bi_sweep_jit(grid, pi_pop1, e0, eta, v_next):  # pragma: no cover
        g_n = grid.shape[0]
        m_n = e0.shape[0]
        step = grid[1] - grid[0]
        out = np.zeros((g_n, 2))
        for g in numba.prange(g_n):
            rho1 = grid[g]
            rho0 = 1.0 - rho1
            m1 = rho0 * pi_pop1[g, 0] + rho1 * pi_pop1[g, 1]
            acc0 = 0.0
            acc1 = 0.0
            for m in range(m_n):
                e = e0[m]
                if e <= 0.0:
                    pert = 0.0
                elif e >= 1.0:
                    pert = 1.0
                else:
                    denom = e * rho1 + (1.0 - e) * rho0
                    pert = e * rho1 / denom if denom > 0.0 else 0.0
                rn = (1.0 - eta) * m1 + eta * pert
                pos = rn / step
                idx = int(pos)
                if idx >= g_n - 1:
                    idx = g_n - 2
                w = pos - idx
                v0 = (1.0 - w) * v_next[0, idx] + w * v_next[0, idx + 1]
                v1 = (1.0 - w) * v_next[1, idx] + w * v_next[1, idx + 1]
                p1a0 = eta * pert
                p1a1 = 1.0 - eta + eta * pert
                acc0 += (1.0 - p1a0) * v0 + p1a0 * v1
                acc1 += (1.0 - p1a1) * v0 + p1a1 * v1
            out[g, 0] = acc0 / m_n
            out[g, 1] = acc1 / m_n
        return out

    def bi_sweep_numba(grid, pi_pop1, e0, eta, v_next):
        return _bi_sweep_jit(
            np.ascontiguousarray(grid), np.ascontiguousarray(pi_pop1),
            np.ascontiguousarray(e0), float(eta), np.ascontiguousarray(v_next))

else:  # pragma: no cover
    bi_sweep_numba = None


def bi_sweep(grid, pi_pop1, e0, eta, v_next):
    if use_numba():
        return bi_sweep_numba(grid, pi_pop1, e0, eta, v_next)
    return bi_sweep_numpy(grid, pi_pop1, e0, eta, v_next)
