"""Closed-form equilibria and the spectra of their linearizations."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .dynamics import jacobian
from .errors import DegenerateSpectrum
from .params import Params, Regime

__all__ = [
    "EquilibriumKind",
    "Equilibrium",
    "mixed_equilibria",
    "mixed_equilibria_from_ratio",
    "all_equilibria",
    "equilibrium",
    "slow_eigenvalues",
    "leading_order_rates",
    "algebraic_residual",
]


class EquilibriumKind(enum.Enum):
    ZERO = "zero"
    DIAGONAL = "diagonal"
    MIXED_LOW = "mixed_low"    # (ubar, vbar): the x -> -inf state
    MIXED_HIGH = "mixed_high"  # (vbar, ubar): the x -> +inf state


@dataclass(frozen=True)
class Equilibrium:
    point: np.ndarray          # (u, u', v, v') in the physical frame
    kind: EquilibriumKind
    eigenvalues: np.ndarray    # sorted by real part
    eigenvectors: np.ndarray   # columns, unit length, u-component >= 0

    @property
    def uv(self):
        return float(self.point[0]), float(self.point[2])

    def stable(self):
        """Eigenvalues and right eigenvectors with negative real part."""
        m = self.eigenvalues.real < 0
        return self.eigenvalues[m], self.eigenvectors[:, m]

    def unstable(self):
        m = self.eigenvalues.real > 0
        return self.eigenvalues[m], self.eigenvectors[:, m]


def mixed_equilibria_from_ratio(r: float) -> tuple[float, float]:
    s = math.sqrt(1.0 - 4.0 * r * r)
    # (1 - s)/2 rewritten as 2 r^2 / (1 + s) to avoid cancellation for small r
    return r * math.sqrt(2.0 / (1.0 + s)), math.sqrt(0.5 * (1.0 + s))


def mixed_equilibria(params: Params) -> tuple[float, float]:
    """``(ubar, vbar)`` with ``ubar vbar = r`` and ``ubar**2 + vbar**2 = 1``."""
    return mixed_equilibria_from_ratio(params.ratio)


def algebraic_residual(u: float, v: float, params: Params) -> float:
    """Max-norm of the right-hand sides of the equilibrium equations at ``(u, v)``."""
    lam, om = params.lam, params.omega
    a = u ** 3 - u + lam * v * v * u - om * v
    b = v ** 3 - v + lam * u * u * v - om * u
    return max(abs(a), abs(b))


def _eigendata(point, params):
    J = jacobian(point, params, fd=False)
    w, V = np.linalg.eig(J)
    order = np.lexsort((w.imag, w.real))
    w, V = w[order], V[:, order]
    if np.all(np.abs(w.imag) == 0.0):
        w, V = w.real, V.real
    V = V / np.linalg.norm(V, axis=0)
    for k in range(V.shape[1]):
        lead = V[0, k]
        if np.iscomplexobj(V) and abs(lead) > 0:
            V[:, k] *= abs(lead) / lead
        elif np.real(lead) < 0:
            V[:, k] *= -1.0
    return w, V


def equilibrium(kind: EquilibriumKind, params: Params) -> Equilibrium:
    kind = EquilibriumKind(kind)
    if kind is EquilibriumKind.ZERO:
        u = v = 0.0
    elif kind is EquilibriumKind.DIAGONAL:
        u = v = math.sqrt((1.0 + params.omega) / (1.0 + params.lam))
    else:
        ub, vb = mixed_equilibria(params)
        u, v = (ub, vb) if kind is EquilibriumKind.MIXED_LOW else (vb, ub)
    point = np.array([u, 0.0, v, 0.0])
    w, V = _eigendata(point, params)
    return Equilibrium(point=point, kind=kind, eigenvalues=w, eigenvectors=V)


def all_equilibria(params: Params) -> list[Equilibrium]:
    """The four equilibria in the closed positive quadrant.

    ``(1, 0)`` and ``(0, 1)`` are not equilibria once omega > 0.
    """
    return [equilibrium(k, params) for k in EquilibriumKind]


def slow_eigenvalues(params: Params) -> tuple[float, float]:
    """Smallest and largest positive eigenvalue at the ``(ubar, vbar)`` equilibrium.

    Values are rates in the physical variable ``x`` for both regimes; divide
    by ``eps`` to express weak-regime rates in the slow variable ``y = eps x``.
    """
    eq = equilibrium(EquilibriumKind.MIXED_LOW, params)
    w = eq.eigenvalues
    if np.any(np.abs(np.real(w)) < 1e-10) or np.iscomplexobj(w):
        raise DegenerateSpectrum(f"non-hyperbolic spectrum {w!r} at lambda={params.lam}")
    pos = np.sort(w[w > 0])
    return float(pos[0]), float(pos[-1])


def leading_order_rates(params: Params) -> tuple[float, float]:
    """Leading-order ``(slow, fast)`` rates in the regime's natural variable.

    Strong regime, variable ``x``: ``sqrt(2) sqrt(1 - 4 c0^2)`` and ``1/eps``.
    Weak regime, variable ``y``: ``sqrt(1 - 4 c0^2)`` and ``sqrt(2)/eps``.
    """
    root = math.sqrt(1.0 - 4.0 * params.c0 ** 2)
    if params.regime is Regime.STRONG:
        return math.sqrt(2.0) * root, 1.0 / params.eps
    return root, math.sqrt(2.0) / params.eps
