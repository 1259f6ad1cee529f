"""The scalar limit profiles of the two asymptotic regimes.

``u0`` solves ``u' = (u^2 - u^4 - c0^2) / (sqrt(2) sqrt(u^4 + c0^2))`` with
``u0(0) = sqrt(c0)`` and connects ``ubar0`` to ``vbar0``.  ``phi0`` solves
``phi' = 2 c0 - sin(phi)`` with ``phi0(0) = pi/2`` and decreases from
``pi - phibar0`` to ``phibar0``, where ``sin(phibar0) = 2 c0``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import BadC0, MeshTooCoarse, OutOfDomain

__all__ = [
    "LimitKind",
    "LimitProfile",
    "limit_equilibria",
    "limit_slow_rate",
    "u0_rhs",
    "phi0_rhs",
    "compute_u0",
    "compute_phi0",
    "sample",
]

RTOL = 1e-13
ATOL = 1e-15
SYMMETRY_TOL = 1e-8
STOP_DISTANCE = 1e-13


class LimitKind(enum.Enum):
    U0_STRONG = "u0_strong"
    PHI0_WEAK = "phi0_weak"


@dataclass(frozen=True)
class LimitProfile:
    kind: LimitKind
    mesh: np.ndarray
    values: np.ndarray
    derivs: np.ndarray
    c0: float
    L: float

    def __call__(self, x):
        return sample(self, x)

    def symmetry_residual(self) -> float:
        """Max violation of the mirror identity over mirrored mesh pairs."""
        a, b = self.values, self.values[::-1]
        if self.kind is LimitKind.U0_STRONG:
            return float(np.max(np.abs(a * b - self.c0)))
        return float(np.max(np.abs(a + b - math.pi)))


def _check_c0(c0):
    if not 0.0 < c0 < 0.5:
        raise BadC0(f"c0 must lie in (0, 1/2), got {c0!r}")


def limit_equilibria(c0: float) -> tuple[float, float]:
    """``(ubar0, vbar0)``, the c0-limits of the mixed equilibria."""
    s = math.sqrt(1.0 - 4.0 * c0 * c0)
    return c0 * math.sqrt(2.0 / (1.0 + s)), math.sqrt(0.5 * (1.0 + s))


def limit_slow_rate(c0: float, kind: LimitKind = LimitKind.U0_STRONG) -> float:
    root = math.sqrt(1.0 - 4.0 * c0 * c0)
    return math.sqrt(2.0) * root if kind is LimitKind.U0_STRONG else root


def u0_rhs(u, c0):
    u2 = u * u
    return (u2 - u2 * u2 - c0 * c0) / (math.sqrt(2.0) * np.sqrt(u2 * u2 + c0 * c0))


def phi0_rhs(phi, c0):
    return 2.0 * c0 - np.sin(phi)


def _integrate_half(f, y0, x_end, targets, c0):
    """Integrate ``y' = f(y)`` from 0 to ``x_end`` (either sign).

    Stops once within ``STOP_DISTANCE`` of the target equilibrium; the caller
    fills the remaining tail with the equilibrium value.
    """
    target = targets

    def stop(x, y):
        return abs(y[0] - target) - STOP_DISTANCE

    stop.terminal = True
    sol = solve_ivp(lambda x, y: f(y, c0), (0.0, x_end), [y0], method="DOP853",
                    rtol=RTOL, atol=ATOL, dense_output=True, events=stop)
    if sol.status < 0:  # pragma: no cover - DOP853 failure
        raise MeshTooCoarse(sol.message)
    return sol.sol, sol.t[-1]


def _build(kind, f, y0, left_target, right_target, c0, L, n):
    _check_c0(c0)
    if n < 64:
        raise MeshTooCoarse(f"need n >= 64 mesh points, got {n}")
    if L <= 0:
        raise ValueError("L must be positive")
    mesh = np.linspace(-L, L, n)
    right, x_r = _integrate_half(f, y0, L, right_target, c0)
    left, x_l = _integrate_half(f, y0, -L, left_target, c0)
    values = np.empty(n)
    for dense, lo, hi, tgt in ((right, 0.0, x_r, right_target), (left, x_l, 0.0, left_target)):
        m = (mesh >= lo) & (mesh <= hi)
        values[m] = dense(mesh[m])[0]
        beyond = (mesh > hi) if hi > 0 else (mesh < lo)
        values[beyond] = tgt
    # exact anchor at x = 0 when it is a node
    values[np.abs(mesh) == 0.0] = y0
    derivs = f(values, c0)
    prof = LimitProfile(kind=kind, mesh=mesh, values=values, derivs=np.asarray(derivs), c0=c0, L=float(L))
    if prof.symmetry_residual() > SYMMETRY_TOL:
        raise MeshTooCoarse(f"symmetry residual {prof.symmetry_residual():.3e} exceeds {SYMMETRY_TOL}")
    return prof


def default_half_length(c0: float, kind: LimitKind = LimitKind.U0_STRONG) -> float:
    return 12.0 / limit_slow_rate(c0, kind)


def compute_u0(c0: float, L: float | None = None, n: int = 2049) -> LimitProfile:
    """Strong-regime limit profile on a uniform mesh of ``n`` points over [-L, L]."""
    _check_c0(c0)
    if L is None:
        L = default_half_length(c0, LimitKind.U0_STRONG)
    ub, vb = limit_equilibria(c0)
    return _build(LimitKind.U0_STRONG, u0_rhs, math.sqrt(c0), ub, vb, c0, L, n)


def compute_phi0(c0: float, L: float | None = None, n: int = 2049) -> LimitProfile:
    """Weak-regime limit angle on a uniform mesh of ``n`` points over [-L, L]."""
    _check_c0(c0)
    if L is None:
        L = default_half_length(c0, LimitKind.PHI0_WEAK)
    pb = math.asin(2.0 * c0)
    return _build(LimitKind.PHI0_WEAK, phi0_rhs, 0.5 * math.pi, math.pi - pb, pb, c0, L, n)


def sample(profile: LimitProfile, x):
    """Cubic Hermite interpolation of ``(value, deriv)``, exact at mesh nodes.

    The derivative returned is the derivative of the interpolant's ODE
    right-hand side evaluated at the interpolated value, which keeps it
    consistent with the profile's own equation.
    """
    xs = np.asarray(x, dtype=float)
    mesh = profile.mesh
    if np.any(xs < mesh[0]) or np.any(xs > mesh[-1]):
        raise OutOfDomain(f"sample point outside [-{profile.L}, {profile.L}]")
    i = np.clip(np.searchsorted(mesh, xs, side="right") - 1, 0, len(mesh) - 2)
    x0, x1 = mesh[i], mesh[i + 1]
    h = x1 - x0
    t = (xs - x0) / h
    y0, y1 = profile.values[i], profile.values[i + 1]
    d0, d1 = profile.derivs[i] * h, profile.derivs[i + 1] * h
    t2, t3 = t * t, t * t * t
    val = (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * d0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * d1
    f = u0_rhs if profile.kind is LimitKind.U0_STRONG else phi0_rhs
    der = f(val, profile.c0)
    exact = t == 0.0
    val = np.where(exact, y0, val)
    der = np.where(exact, profile.derivs[i], der)
    if np.ndim(x) == 0:
        return float(val), float(der)
    return val, der
