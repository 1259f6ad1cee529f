"""Vector fields, coordinate changes and conserved quantities.

Three coordinate frames describe the same first-order system:

* ``Frame.PHYSICAL``  ``(u, u', v, v')`` with ``' = d/dx``.
* ``Frame.HYPERBOLA`` ``(p, q, u, z)`` where ``uv - r = eps_s**2 p``,
  ``q = eps_s p'``, ``z = u'`` and ``eps_s = 1/sqrt(lambda - 1)``. The
  independent variable is still ``x``.
* ``Frame.POLAR`` ``(w1, w2, phi1, phi2)`` where ``u = R cos(phi/2)``,
  ``v = R sin(phi/2)``, ``R = 1 - eps_w**2 w1``, ``eps_w = sqrt(lambda - 1)``.
  Here derivatives are taken in the slow variable ``y = eps_w x``:
  ``w2 = eps_w dw1/dy`` and ``phi2 = dphi/dy``.

Each right-hand side is transcribed separately so that the Hamiltonians and
the frame changes can cross-check them.
"""
from __future__ import annotations

import enum
import math
import os

import numpy as np

from . import _kernels
from .errors import DomainViolation
from .params import Params

__all__ = [
    "Frame",
    "HamiltonianKind",
    "rhs",
    "jacobian",
    "to_frame",
    "hamiltonian",
    "slow_manifold_strong",
    "slow_manifold_weak",
]

U_FLOOR = 1e-8

FD_JACOBIAN = os.environ.get("RABI_HET_FD_JACOBIAN", "0").lower() in ("1", "true", "yes")


class Frame(enum.Enum):
    PHYSICAL = "physical_uv"
    HYPERBOLA = "hyperbola_pquz"
    POLAR = "polar_blowup"


class HamiltonianKind(enum.Enum):
    FULL = "full"                # PHYSICAL
    TILDE = "tilde"              # HYPERBOLA, written through (h, h', u, u')
    HAT_STRONG = "hat_strong"    # HYPERBOLA
    H0_REDUCED = "h0_reduced"    # reduced (u, z)
    HAT_WEAK = "hat_weak"        # POLAR
    HRED_WEAK = "hred_weak"      # reduced (phi1, phi2)


def _cols(state):
    s = np.asarray(state, dtype=float)
    if s.shape[0] not in (2, 4):
        raise ValueError(f"state must have leading dimension 2 or 4, got {s.shape}")
    return s


# --- right-hand sides -------------------------------------------------------

def _rhs_physical(s, params):
    u, du, v, dv = s
    lam, om = params.lam, params.omega
    return np.array([du, u ** 3 - u + lam * v * v * u - om * v,
                     dv, v ** 3 - v + lam * u * u * v - om * u])


def _rhs_hyperbola(s, params):
    p, q, u, z = s
    _check_u(u)
    e = params.eps_strong
    e2 = e * e
    r = params.ratio
    hr = e2 * p + r
    fast = ((1.0 + 2.0 * e2) * p + 2.0 * r) * (u * u + hr * hr / (u * u)) \
        - 2.0 * e2 * p - 2.0 * r * (1.0 + z * z / (u * u)) \
        + 2.0 * e * z / u * q - 2.0 * e2 * z * z / (u * u) * p
    dz = u ** 3 - u + hr * ((1.0 + e2) * p + r) / u
    return np.array([q / e, fast / e, z, dz])


def _rhs_polar(s, params):
    w1, w2, f1, f2 = s
    _check_angle(f1)
    e = params.eps_weak
    e2 = e * e
    R = 1.0 - e2 * w1
    _check_radius(R)
    r = params.ratio
    fast = -0.25 * R * f2 * f2 - R * (e2 * w1 * w1 - 2.0 * w1) \
        - 0.5 * R ** 3 * np.sin(f1) ** 2 + r * R * np.sin(f1)
    df2 = 2.0 * e * w2 * f2 / R + 0.5 * R * R * np.sin(2.0 * f1) - 2.0 * r * np.cos(f1)
    return np.array([w2 / e, fast / e, f2, df2])


def _check_u(u):
    if np.any(np.asarray(u) <= U_FLOOR):
        raise DomainViolation("hyperbola frame requires u > 1e-8")


def _check_angle(phi):
    phi = np.asarray(phi)
    if np.any(phi <= 0.0) or np.any(phi >= math.pi):
        raise DomainViolation("polar frame requires 0 < phi < pi")


def _check_radius(R):
    if np.any(np.asarray(R) <= 0.0):
        raise DomainViolation("polar frame requires R > 0")


_RHS = {Frame.PHYSICAL: _rhs_physical, Frame.HYPERBOLA: _rhs_hyperbola, Frame.POLAR: _rhs_polar}


def rhs(frame: Frame, state, params: Params) -> np.ndarray:
    """First-order vector field of ``frame``; ``state`` may be (4,) or (4, m)."""
    return _RHS[Frame(frame)](_cols(state), params)


def jacobian(state, params: Params, fd: bool | None = None, step: float = 1e-6) -> np.ndarray:
    """4x4 Jacobian of the physical-frame field at a single state.

    Analytic by default; ``fd=True`` (or ``RABI_HET_FD_JACOBIAN=1``) switches
    to central differences.
    """
    y = np.asarray(state, dtype=float)
    if fd is None:
        fd = FD_JACOBIAN
    if not fd:
        return _kernels.jac_np(y[None, :], params.lam, params.omega)[0]
    J = np.empty((4, 4))
    for k in range(4):
        d = np.zeros(4)
        d[k] = step * max(1.0, abs(y[k]))
        J[:, k] = (_rhs_physical(y + d, params) - _rhs_physical(y - d, params)) / (2.0 * d[k])
    return J


# --- frame changes ----------------------------------------------------------

def _physical_to_hyperbola(s, params):
    u, du, v, dv = s
    _check_u(u)
    e = params.eps_strong
    h = u * v - params.ratio
    dh = du * v + u * dv
    return np.array([h / e ** 2, dh / e, u, du])


def _hyperbola_to_physical(s, params):
    p, q, u, z = s
    _check_u(u)
    e = params.eps_strong
    h = e * e * p
    dh = e * q
    v = (h + params.ratio) / u
    dv = (dh - z * v) / u
    return np.array([u, z, v, dv])


def _physical_to_polar(s, params):
    u, du, v, dv = s
    R = np.hypot(u, v)
    _check_radius(R)
    phi = 2.0 * np.arctan2(v, u)
    _check_angle(phi)
    e = params.eps_weak
    dR = (u * du + v * dv) / R
    dphi = 2.0 * (u * dv - v * du) / (R * R)
    return np.array([(1.0 - R) / e ** 2, -dR / e ** 2, phi, dphi / e])


def _polar_to_physical(s, params):
    w1, w2, f1, f2 = s
    _check_angle(f1)
    e = params.eps_weak
    R = 1.0 - e * e * w1
    _check_radius(R)
    dR = -e * e * w2
    dphi = e * f2
    c, sn = np.cos(0.5 * f1), np.sin(0.5 * f1)
    return np.array([R * c, dR * c - 0.5 * R * sn * dphi, R * sn, dR * sn + 0.5 * R * c * dphi])


_TO_PHYSICAL = {Frame.PHYSICAL: lambda s, p: s, Frame.HYPERBOLA: _hyperbola_to_physical,
                Frame.POLAR: _polar_to_physical}
_FROM_PHYSICAL = {Frame.PHYSICAL: lambda s, p: s, Frame.HYPERBOLA: _physical_to_hyperbola,
                  Frame.POLAR: _physical_to_polar}


def to_frame(target: Frame, source: Frame, state, params: Params) -> np.ndarray:
    """Exact change of variables from ``source`` to ``target``.

    Works on a single state (4,) or a batch (4, m). Note the polar frame
    measures derivatives in ``y = eps_w x``.
    """
    s = _cols(state)
    phys = _TO_PHYSICAL[Frame(source)](s, params)
    return _FROM_PHYSICAL[Frame(target)](phys, params)


# --- Hamiltonians -----------------------------------------------------------

def _h_full(s, params):
    u, du, v, dv = s
    return 0.5 * du * du + 0.5 * dv * dv - 0.25 * (1.0 - u * u - v * v) ** 2 \
        - 0.5 * (params.lam - 1.0) * (u * v - params.ratio) ** 2


def _h_tilde(s, params):
    p, q, u, z = s
    _check_u(u)
    e = params.eps_strong
    h, dh = e * e * p, e * q
    r = params.ratio
    hr = h + r
    return 0.5 * z * z + (dh * u - hr * z) ** 2 / (2.0 * u ** 4) \
        - 0.25 * (1.0 - u * u - hr * hr / (u * u)) ** 2 - 0.5 * (params.lam - 1.0) * h * h


def _h_hat_strong(s, params):
    p, q, u, z = s
    _check_u(u)
    e = params.eps_strong
    e2 = e * e
    hr = e2 * p + params.ratio
    return 0.5 * z * z + (e * q * u - hr * z) ** 2 / (2.0 * u ** 4) \
        - 0.25 * (1.0 - u * u - hr * hr / (u * u)) ** 2 - 0.5 * e2 * p * p


def _h0_reduced(s, params):
    u, z = s
    _check_u(u)
    c0 = params.c0
    return (1.0 + c0 * c0 / u ** 4) * 0.5 * z * z - 0.25 * (1.0 - u * u - c0 * c0 / (u * u)) ** 2


def _h_hat_weak(s, params):
    w1, w2, f1, f2 = s
    e = params.eps_weak
    e2 = e * e
    R = 1.0 - e2 * w1
    twice = e2 * w2 * w2 + 0.25 * R * R * f2 * f2 - 0.5 * e2 * (2.0 * w1 - e2 * w1 * w1) ** 2 \
        - (0.5 * R * R * np.sin(f1) - params.ratio) ** 2
    return 0.5 * e2 * twice


def _h_red_weak(s, params):
    f1, f2 = s
    return 0.5 * f2 * f2 - 0.5 * (np.sin(f1) - 2.0 * params.c0) ** 2


_HAMILTONIANS = {
    HamiltonianKind.FULL: _h_full,
    HamiltonianKind.TILDE: _h_tilde,
    HamiltonianKind.HAT_STRONG: _h_hat_strong,
    HamiltonianKind.H0_REDUCED: _h0_reduced,
    HamiltonianKind.HAT_WEAK: _h_hat_weak,
    HamiltonianKind.HRED_WEAK: _h_red_weak,
}

HAMILTONIAN_FRAME = {
    HamiltonianKind.FULL: Frame.PHYSICAL,
    HamiltonianKind.TILDE: Frame.HYPERBOLA,
    HamiltonianKind.HAT_STRONG: Frame.HYPERBOLA,
    HamiltonianKind.H0_REDUCED: None,
    HamiltonianKind.HAT_WEAK: Frame.POLAR,
    HamiltonianKind.HRED_WEAK: None,
}


def hamiltonian(kind: HamiltonianKind, state, params: Params):
    """Evaluate the conserved quantity ``kind``.

    The two reduced kinds take 2-vectors: ``(u, z)`` for ``H0_REDUCED`` and
    ``(phi1, phi2)`` for ``HRED_WEAK``; all others take a 4-state in their frame.
    """
    kind = HamiltonianKind(kind)
    s = _cols(state)
    expect = 2 if HAMILTONIAN_FRAME[kind] is None else 4
    if s.shape[0] != expect:
        raise DomainViolation(f"{kind.value} expects a {expect}-vector state")
    return _HAMILTONIANS[kind](s, params)


# --- critical manifolds -----------------------------------------------------

def slow_manifold_strong(u, z, c0):
    """``p`` on the critical manifold of the hyperbola frame."""
    return 2.0 * c0 * (u * u + z * z) / (u ** 4 + c0 * c0) - 2.0 * c0


def slow_manifold_weak(phi1, phi2, c0):
    """``w1`` on the critical manifold of the polar frame."""
    s = np.sin(phi1)
    return phi2 * phi2 / 8.0 + 0.25 * s * s - 0.5 * c0 * s
