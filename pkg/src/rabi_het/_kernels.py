"""Hot loops of the collocation solver.

Every kernel exists twice: a plain numpy implementation and a numba
``@njit`` one. ``RABI_HET_JIT=0`` forces the numpy path; otherwise numba is
used when it can be imported. Both paths must agree to rounding error.

States are arrays of shape ``(m, 4)`` holding ``(u, u', v, v')`` rows.
``gamma`` is a linear friction ``-gamma * (u', v')`` added to the second
derivatives. It unfolds the boundary value problem and vanishes at any
heteroclinic solution, since friction makes the energy strictly monotone.
"""
from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is an optional accelerator
    numba = None

USE_JIT = numba is not None and os.environ.get("RABI_HET_JIT", "1").lower() not in ("0", "false", "no")


# --- numpy path -------------------------------------------------------------

def rhs_np(Y, lam, omega, gamma=0.0):
    u, du, v, dv = Y[:, 0], Y[:, 1], Y[:, 2], Y[:, 3]
    out = np.empty_like(Y)
    out[:, 0] = du
    out[:, 1] = u * u * u - u + lam * v * v * u - omega * v - gamma * du
    out[:, 2] = dv
    out[:, 3] = v * v * v - v + lam * u * u * v - omega * u - gamma * dv
    return out


def jac_np(Y, lam, omega, gamma=0.0):
    u, v = Y[:, 0], Y[:, 2]
    J = np.zeros((Y.shape[0], 4, 4))
    J[:, 0, 1] = 1.0
    J[:, 2, 3] = 1.0
    J[:, 1, 0] = 3.0 * u * u - 1.0 + lam * v * v
    J[:, 1, 1] = -gamma
    J[:, 1, 2] = 2.0 * lam * u * v - omega
    J[:, 3, 0] = 2.0 * lam * u * v - omega
    J[:, 3, 2] = 3.0 * v * v - 1.0 + lam * u * u
    J[:, 3, 3] = -gamma
    return J


def _dgamma_np(Y):
    g = np.zeros_like(Y)
    g[:, 1] = -Y[:, 1]
    g[:, 3] = -Y[:, 3]
    return g


def collocation_np(Y, h, lam, omega, gamma=0.0):
    """Lobatto IIIA (Hermite-Simpson) residuals and their Jacobian blocks.

    Returns ``res`` of shape (n-1, 4), blocks ``A = d res / d y_i`` and
    ``B = d res / d y_{i+1}`` of shape (n-1, 4, 4), and ``G = d res / d gamma``
    of shape (n-1, 4).
    """
    F = rhs_np(Y, lam, omega, gamma)
    J = jac_np(Y, lam, omega, gamma)
    g = _dgamma_np(Y)
    y0, y1 = Y[:-1], Y[1:]
    f0, f1 = F[:-1], F[1:]
    hc = h[:, None]
    ym = 0.5 * (y0 + y1) + 0.125 * hc * (f0 - f1)
    fm = rhs_np(ym, lam, omega, gamma)
    Jm = jac_np(ym, lam, omega, gamma)
    res = y1 - y0 - hc / 6.0 * (f0 + 4.0 * fm + f1)

    eye = np.eye(4)
    h3 = h[:, None, None]
    dm0 = 0.5 * eye + 0.125 * h3 * J[:-1]
    dm1 = 0.5 * eye - 0.125 * h3 * J[1:]
    A = -eye - h3 / 6.0 * (J[:-1] + 4.0 * np.matmul(Jm, dm0))
    B = eye - h3 / 6.0 * (4.0 * np.matmul(Jm, dm1) + J[1:])
    dym = 0.125 * hc * (g[:-1] - g[1:])
    gm = _dgamma_np(ym) + np.einsum("iab,ib->ia", Jm, dym)
    G = -hc / 6.0 * (g[:-1] + 4.0 * gm + g[1:])
    return res, A, B, G


# --- numba path -------------------------------------------------------------

if numba is not None:

    @numba.njit(cache=True)
    def _rhs_row(u, du, v, dv, lam, omega, gamma, out):
        out[0] = du
        out[1] = u * u * u - u + lam * v * v * u - omega * v - gamma * du
        out[2] = dv
        out[3] = v * v * v - v + lam * u * u * v - omega * u - gamma * dv

    @numba.njit(cache=True)
    def _jac_row(u, v, lam, omega, gamma, J):
        J[:, :] = 0.0
        J[0, 1] = 1.0
        J[2, 3] = 1.0
        J[1, 0] = 3.0 * u * u - 1.0 + lam * v * v
        J[1, 1] = -gamma
        J[1, 2] = 2.0 * lam * u * v - omega
        J[3, 0] = J[1, 2]
        J[3, 2] = 3.0 * v * v - 1.0 + lam * u * u
        J[3, 3] = -gamma

    @numba.njit(cache=True)
    def rhs_jit(Y, lam, omega, gamma):
        m = Y.shape[0]
        out = np.empty((m, 4))
        for i in range(m):
            _rhs_row(Y[i, 0], Y[i, 1], Y[i, 2], Y[i, 3], lam, omega, gamma, out[i])
        return out

    @numba.njit(cache=True)
    def jac_jit(Y, lam, omega, gamma):
        m = Y.shape[0]
        J = np.empty((m, 4, 4))
        for i in range(m):
            _jac_row(Y[i, 0], Y[i, 2], lam, omega, gamma, J[i])
        return J

    @numba.njit(cache=True)
    def collocation_jit(Y, h, lam, omega, gamma):
        n = Y.shape[0]
        res = np.empty((n - 1, 4))
        A = np.empty((n - 1, 4, 4))
        B = np.empty((n - 1, 4, 4))
        G = np.empty((n - 1, 4))
        gm = np.empty(4)
        f0 = np.empty(4)
        f1 = np.empty(4)
        fm = np.empty(4)
        ym = np.empty(4)
        J0 = np.empty((4, 4))
        J1 = np.empty((4, 4))
        Jm = np.empty((4, 4))
        d0 = np.empty((4, 4))
        d1 = np.empty((4, 4))
        _rhs_row(Y[0, 0], Y[0, 1], Y[0, 2], Y[0, 3], lam, omega, gamma, f1)
        _jac_row(Y[0, 0], Y[0, 2], lam, omega, gamma, J1)
        for i in range(n - 1):
            hi = h[i]
            f0[:] = f1
            J0[:, :] = J1
            _rhs_row(Y[i + 1, 0], Y[i + 1, 1], Y[i + 1, 2], Y[i + 1, 3], lam, omega, gamma, f1)
            _jac_row(Y[i + 1, 0], Y[i + 1, 2], lam, omega, gamma, J1)
            for a in range(4):
                ym[a] = 0.5 * (Y[i, a] + Y[i + 1, a]) + 0.125 * hi * (f0[a] - f1[a])
            _rhs_row(ym[0], ym[1], ym[2], ym[3], lam, omega, gamma, fm)
            _jac_row(ym[0], ym[2], lam, omega, gamma, Jm)
            # d/dgamma: g = (0, -u', 0, -v') at both ends and at the midpoint
            dyu = 0.125 * hi * (Y[i + 1, 1] - Y[i, 1])
            dyv = 0.125 * hi * (Y[i + 1, 3] - Y[i, 3])
            for a in range(4):
                gm[a] = Jm[a, 1] * dyu + Jm[a, 3] * dyv
            gm[1] -= ym[1]
            gm[3] -= ym[3]
            G[i, 0] = -hi / 6.0 * 4.0 * gm[0]
            G[i, 1] = -hi / 6.0 * (-Y[i, 1] + 4.0 * gm[1] - Y[i + 1, 1])
            G[i, 2] = -hi / 6.0 * 4.0 * gm[2]
            G[i, 3] = -hi / 6.0 * (-Y[i, 3] + 4.0 * gm[3] - Y[i + 1, 3])
            for a in range(4):
                res[i, a] = Y[i + 1, a] - Y[i, a] - hi / 6.0 * (f0[a] + 4.0 * fm[a] + f1[a])
                for b in range(4):
                    d0[a, b] = 0.125 * hi * J0[a, b]
                    d1[a, b] = -0.125 * hi * J1[a, b]
                d0[a, a] += 0.5
                d1[a, a] += 0.5
            for a in range(4):
                for b in range(4):
                    s0 = 0.0
                    s1 = 0.0
                    for k in range(4):
                        s0 += Jm[a, k] * d0[k, b]
                        s1 += Jm[a, k] * d1[k, b]
                    A[i, a, b] = -hi / 6.0 * (J0[a, b] + 4.0 * s0)
                    B[i, a, b] = -hi / 6.0 * (4.0 * s1 + J1[a, b])
                A[i, a, a] -= 1.0
                B[i, a, a] += 1.0
        return res, A, B, G

else:  # pragma: no cover
    rhs_jit = jac_jit = collocation_jit = None


def _as_float_array(Y):
    return np.ascontiguousarray(Y, dtype=np.float64)


def rhs(Y, lam, omega, gamma=0.0, jit=None):
    Y = _as_float_array(Y)
    if USE_JIT if jit is None else jit:
        return rhs_jit(Y, float(lam), float(omega), float(gamma))
    return rhs_np(Y, lam, omega, gamma)


def jac(Y, lam, omega, gamma=0.0, jit=None):
    Y = _as_float_array(Y)
    if USE_JIT if jit is None else jit:
        return jac_jit(Y, float(lam), float(omega), float(gamma))
    return jac_np(Y, lam, omega, gamma)


def collocation(Y, h, lam, omega, gamma=0.0, jit=None):
    Y = _as_float_array(Y)
    h = _as_float_array(h)
    if USE_JIT if jit is None else jit:
        return collocation_jit(Y, h, float(lam), float(omega), float(gamma))
    return collocation_np(Y, h, lam, omega, gamma)
