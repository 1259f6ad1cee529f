"""Model parameters for the Rabi-coupled two-component system.

The coupling ratio ``r = omega / (lambda - 1)`` is computed once, from
``c0 + omega_tilde(eps)``, and every downstream formula reads it from
:attr:`Params.ratio` instead of re-dividing ``omega`` by ``lambda - 1``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

from .errors import BadC0, BadLambda, ParamsError, RatioOutOfRange

__all__ = [
    "Regime",
    "Params",
    "make_params",
    "zero_omega_tilde",
    "quadratic_omega_tilde",
    "regime_eps",
]


class Regime(enum.Enum):
    STRONG = "strong"
    WEAK = "weak"

    @classmethod
    def parse(cls, value) -> "Regime":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ParamsError(f"unknown regime {value!r}") from None


def zero_omega_tilde(s: float) -> float:
    return 0.0


def quadratic_omega_tilde(c0: float) -> Callable[[float], float]:
    """Return ``s -> c0 * s**2``; with the strong scaling this gives omega = c0 * lambda."""

    def omega_tilde(s: float) -> float:
        return c0 * s * s

    omega_tilde.__name__ = "quadratic"
    return omega_tilde


def regime_eps(lam: float, regime: Regime) -> float:
    if regime is Regime.STRONG:
        return 1.0 / math.sqrt(lam - 1.0)
    return math.sqrt(lam - 1.0)


@dataclass(frozen=True)
class Params:
    lam: float
    omega: float
    c0: float
    ratio: float
    regime: Regime
    omega_tilde: Callable[[float], float] = field(default=zero_omega_tilde, compare=False, repr=False)

    @property
    def eps(self) -> float:
        """Small parameter of the active regime."""
        return regime_eps(self.lam, self.regime)

    @property
    def eps_strong(self) -> float:
        return 1.0 / math.sqrt(self.lam - 1.0)

    @property
    def eps_weak(self) -> float:
        return math.sqrt(self.lam - 1.0)

    @property
    def omega_tilde_name(self) -> str:
        return getattr(self.omega_tilde, "__name__", "custom")

    def with_lambda(self, lam: float) -> "Params":
        return make_params(lam, self.c0, self.omega_tilde, self.regime)


def make_params(lam: float, c0: float, omega_tilde: Callable[[float], float] | None = None,
                regime: Regime | str = Regime.STRONG) -> Params:
    """Build validated :class:`Params` from ``lambda``, ``c0`` and ``omega_tilde``.

    ``omega`` is derived as ``(c0 + omega_tilde(eps)) * (lambda - 1)`` with
    ``eps`` the small parameter of ``regime``.
    """
    regime = Regime.parse(regime)
    lam = float(lam)
    c0 = float(c0)
    if not math.isfinite(lam) or lam <= 1.0:
        raise BadLambda(f"lambda must exceed 1, got {lam!r}")
    if not math.isfinite(c0) or not 0.0 < c0 < 0.5:
        raise BadC0(f"c0 must lie in (0, 1/2), got {c0!r}")
    if omega_tilde is None:
        omega_tilde = zero_omega_tilde
    if omega_tilde(0.0) != 0.0:
        raise ParamsError("omega_tilde(0) must vanish")
    eps = regime_eps(lam, regime)
    ratio = c0 + float(omega_tilde(eps))
    if not math.isfinite(ratio) or not 0.0 < ratio < 0.5:
        raise RatioOutOfRange(f"omega/(lambda-1) = {ratio!r} outside (0, 1/2)")
    return Params(lam=lam, omega=ratio * (lam - 1.0), c0=c0, ratio=ratio,
                  regime=regime, omega_tilde=omega_tilde)
