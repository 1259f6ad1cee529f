"""Empirical checks of the asymptotic estimates.

Orders are measured, never assumed: sup-norm errors against the limit
profiles, log-log rate fits over parameter ladders, exponential tail fits,
and distances to the critical manifolds of the two slow-fast frames.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .bvp import Profile, SolveOptions, continue_in_lambda, limit_for
from .dynamics import Frame, slow_manifold_strong, slow_manifold_weak, to_frame
from .errors import DomainViolation, InsufficientData, RegimeMismatch, TailBelowFloor
from .limit_profiles import LimitKind, LimitProfile, limit_slow_rate, sample
from .params import Params, Regime, make_params

__all__ = [
    "RateFit",
    "Quantity",
    "sup_error_vs_limit",
    "fit_rate",
    "decay_fit",
    "tail_quantity",
    "slow_manifold_residual",
    "product_error",
    "radius_error",
    "lift_limit",
]

TAIL_FLOOR = 1e-13
MIN_TAIL_NODES = 20
MIN_SPAN = 4.0


@dataclass(frozen=True)
class RateFit:
    xs: np.ndarray
    errs: np.ndarray
    slope: float
    intercept: float
    r_squared: float

    @property
    def flagged(self) -> bool:
        """True unless r^2 >= 0.98 on >= 4 points spanning >= 1.5 decades."""
        span = np.log10(self.xs.max() / self.xs.min())
        return not (self.r_squared >= 0.98 and len(self.xs) >= 4 and span >= 1.5)

    @property
    def prefactor(self) -> float:
        return math.exp(self.intercept)


class Quantity(enum.Enum):
    PRODUCT_UV_MINUS_R = "product_uv_minus_r"
    UPRIME = "uprime"
    PHI_DEVIATION = "phi_deviation"
    R2_MINUS_1 = "r2_minus_1"


def _limit_kind(params):
    return LimitKind.U0_STRONG if params.regime is Regime.STRONG else LimitKind.PHI0_WEAK


def sup_error_vs_limit(profile: Profile, limit: LimitProfile | None = None) -> float:
    """Strong: ``max |u - u0(x)|``. Weak: ``max |phi - phi0(eps x)|``."""
    params = profile.params
    if limit is None:
        limit = limit_for(params, profile.L)
    if limit.kind is not _limit_kind(params):
        raise RegimeMismatch(f"{limit.kind.value} limit does not match the {params.regime.value} regime")
    if params.regime is Regime.STRONG:
        u0, _ = sample(limit, profile.mesh)
        return float(np.max(np.abs(profile.u - u0)))
    phi0, _ = sample(limit, params.eps * profile.mesh)
    return float(np.max(np.abs(profile.phi - phi0)))


def product_error(profile: Profile) -> float:
    return float(np.max(np.abs(profile.u * profile.v - profile.params.ratio)))


def radius_error(profile: Profile) -> float:
    return float(np.max(np.abs(profile.u ** 2 + profile.v ** 2 - 1.0)))


def fit_rate(pairs) -> RateFit:
    """Least-squares line through ``(log x, log err)``; the slope is the empirical order.

    Requires at least 3 pairs with positive values and ``max x / min x >= 4``.
    A constant error sequence gives slope 0 with ``r_squared = 0`` (flagged).
    """
    pairs = list(pairs)
    if len(pairs) < 3:
        raise InsufficientData(f"need at least 3 (x, err) pairs, got {len(pairs)}")
    xs = np.array([float(a) for a, _ in pairs])
    errs = np.array([float(b) for _, b in pairs])
    if np.any(xs <= 0) or np.any(errs <= 0):
        raise InsufficientData("rate fits need positive x and err")
    d = np.diff(xs)
    if not (np.all(d > 0) or np.all(d < 0)):
        raise InsufficientData("x values must be strictly monotone")
    if xs.max() / xs.min() < MIN_SPAN:
        raise InsufficientData(f"x values span a factor {xs.max() / xs.min():.3g} < {MIN_SPAN}")
    lx, le = np.log(xs), np.log(errs)
    if np.ptp(le) == 0.0:
        return RateFit(xs, errs, 0.0, float(le[0]), 0.0)
    fit = stats.linregress(lx, le)
    return RateFit(xs, errs, float(fit.slope), float(fit.intercept), float(fit.rvalue ** 2))


def tail_quantity(profile: Profile, quantity: Quantity):
    """Pointwise values of ``quantity`` whose magnitude decays in both tails."""
    q = Quantity(quantity)
    p = profile.params
    if q is Quantity.PRODUCT_UV_MINUS_R:
        return profile.u * profile.v - p.ratio
    if q is Quantity.UPRIME:
        return profile.du
    if q is Quantity.R2_MINUS_1:
        return profile.u ** 2 + profile.v ** 2 - 1.0
    phibar = math.asin(2.0 * p.ratio)
    phi = profile.phi
    return np.where(profile.mesh < 0, phi - (math.pi - phibar), phi - phibar)


def decay_fit(profile: Profile, quantity: Quantity, window=(0.4, 0.9)) -> tuple[float, float]:
    """Exponential rate and prefactor of ``|quantity| ~ A exp(-rate |x|)`` in the tails.

    Each tail is fitted over ``window[0] L <= |x| <= window[1] L``; the two
    rates and the two prefactors are averaged.
    """
    vals = np.abs(tail_quantity(profile, quantity))
    x = profile.mesh
    L = profile.L
    rates, prefs = [], []
    for side in (-1.0, 1.0):
        m = (side * x >= window[0] * L) & (side * x <= window[1] * L)
        ax, q = np.abs(x[m]), vals[m]
        good = q > TAIL_FLOOR
        if good.sum() < MIN_TAIL_NODES or not np.all(good):
            raise TailBelowFloor(f"{Quantity(quantity).value}: only {int(good.sum())} of {m.sum()} "
                                 f"tail nodes above {TAIL_FLOOR:g}")
        fit = stats.linregress(ax, np.log(q))
        rates.append(-fit.slope)
        prefs.append(math.exp(fit.intercept))
    return float(np.mean(rates)), float(np.mean(prefs))


def slow_manifold_residual(profile: Profile) -> float:
    """Distance, in the fast variable, from the critical manifold of the regime's frame.

    Strong: ``max |p - (2 c0 (u^2 + z^2)/(u^4 + c0^2) - 2 c0)|`` in the
    hyperbola frame. Weak: ``max |w1 - (phi2^2/8 + sin^2(phi1)/4 - c0 sin(phi1)/2)|``
    in the polar frame.
    """
    p = profile.params
    if p.regime is Regime.STRONG:
        if np.any(profile.u <= 1e-6):
            raise DomainViolation("strong-regime residual needs u > 1e-6 at every node")
        s = to_frame(Frame.HYPERBOLA, Frame.PHYSICAL, profile.states.T, p)
        return float(np.max(np.abs(s[0] - slow_manifold_strong(s[2], s[3], p.c0))))
    s = to_frame(Frame.POLAR, Frame.PHYSICAL, profile.states.T, p)
    return float(np.max(np.abs(s[0] - slow_manifold_weak(s[2], s[3], p.c0))))


def lift_limit(limit: LimitProfile, params: Params, mesh=None) -> Profile:
    """Lift the limit profile onto the critical manifold and express it in the physical frame.

    The result is not a solution for ``eps > 0``; its slow-manifold residual
    vanishes up to rounding.
    """
    if limit.kind is not _limit_kind(params):
        raise RegimeMismatch("limit profile does not match the regime")
    if params.regime is Regime.STRONG:
        x = limit.mesh if mesh is None else np.asarray(mesh)
        u, z = sample(limit, x)
        pq = np.vstack([slow_manifold_strong(u, z, params.c0), np.zeros_like(u), u, z])
        states = to_frame(Frame.PHYSICAL, Frame.HYPERBOLA, pq, params)
    else:
        e = params.eps
        x = limit.mesh / e if mesh is None else np.asarray(mesh)
        f, df = sample(limit, np.clip(e * x, -limit.L, limit.L))  # e * (m / e) may round past L
        w = np.vstack([slow_manifold_weak(f, df, params.c0), np.zeros_like(f), f, df])
        states = to_frame(Frame.PHYSICAL, Frame.POLAR, w, params)
    return Profile(params=params, mesh=np.asarray(x, dtype=float), states=states.T, phase_anchor=len(x) // 2)


# --- ladders and the verification report ------------------------------------

STRONG_LADDER = (25.0, 100.0, 400.0, 1600.0)
WEAK_LADDER = (1.04, 1.01, 1.0025)
STRONG_EPS_LADDER = (0.2, 0.1, 0.05, 0.025)
WEAK_EPS_LADDER = (0.2, 0.1, 0.05)


@dataclass
class Record:
    estimate_id: str
    fitted_slope: float
    expected_slope: float
    tolerance: float
    passed: bool
    extra: dict = field(default_factory=dict)

    def as_dict(self):
        d = {"estimate_id": self.estimate_id, "fitted_slope": self.fitted_slope,
             "expected_slope": self.expected_slope, "tolerance": self.tolerance, "pass": self.passed}
        d.update(self.extra)
        return d


def slope_record(estimate_id, fit: RateFit, expected, tol, min_r2=None) -> Record:
    ok = abs(fit.slope - expected) <= tol
    if min_r2 is not None:
        ok = ok and fit.r_squared >= min_r2
    return Record(estimate_id, fit.slope, expected, tol, bool(ok), {
        "r_squared": fit.r_squared, "flagged": fit.flagged, "prefactor": fit.prefactor,
        "xs": fit.xs.tolist(), "errs": fit.errs.tolist()})


def rate_record(estimate_id, rate, expected, rel_tol, prefactor) -> Record:
    """Decay-rate check reported in the same record shape; ``tolerance`` is relative."""
    ok = abs(rate - expected) <= rel_tol * expected
    return Record(estimate_id, rate, expected, rel_tol, bool(ok), {"prefactor": prefactor, "relative": True})


def strong_ladder(c0: float, lams=STRONG_LADDER, opts: SolveOptions | None = None, omega_tilde=None):
    path = [make_params(lam, c0, omega_tilde, Regime.STRONG) for lam in lams]
    return continue_in_lambda(path, opts or SolveOptions(n=2049))


def weak_ladder(c0: float, lams=WEAK_LADDER, opts: SolveOptions | None = None, omega_tilde=None):
    path = [make_params(lam, c0, omega_tilde, Regime.WEAK) for lam in lams]
    return continue_in_lambda(path, opts or SolveOptions(n=2049))


def run_verification(c0: float = 0.25, strong_lams=STRONG_LADDER, weak_lams=WEAK_LADDER,
                     strong_eps=STRONG_EPS_LADDER, weak_eps=WEAK_EPS_LADDER,
                     opts: SolveOptions | None = None, omega_tilde=None) -> dict:
    """Run every ladder and return the JSON-ready verification report."""
    opts = opts or SolveOptions(n=2049)
    records = []
    strong = strong_ladder(c0, strong_lams, opts, omega_tilde)
    weak = weak_ladder(c0, weak_lams, opts, omega_tilde)

    eps_s = [p.params.eps for p in strong]
    fit = fit_rate(zip(eps_s, [sup_error_vs_limit(p) for p in strong]))
    records.append(slope_record("strong_sup_u_minus_u0_vs_eps", fit, 1.0, 0.15, min_r2=0.98))
    fit = fit_rate(zip([1.0 / p.params.lam for p in strong], [product_error(p) for p in strong]))
    records.append(slope_record("strong_product_uv_minus_r_vs_inv_lambda", fit, 1.0, 0.2))
    top = max(strong, key=lambda p: p.params.lam)
    rate, pref = decay_fit(top, Quantity.UPRIME)
    records.append(rate_record("strong_uprime_decay_rate", rate, limit_slow_rate(c0), 0.05, pref))

    eps_w = [p.params.eps for p in weak]
    fit = fit_rate(zip(eps_w, [sup_error_vs_limit(p) for p in weak]))
    records.append(slope_record("weak_sup_phi_minus_phi0_vs_sqrt_lambda_minus_1", fit, 1.0, 0.2))
    fit = fit_rate(zip([p.params.lam - 1.0 for p in weak], [radius_error(p) for p in weak]))
    records.append(slope_record("weak_r2_minus_1_vs_lambda_minus_1", fit, 1.0, 0.2))
    low = min(weak, key=lambda p: p.params.lam)
    rate, pref = decay_fit(low, Quantity.R2_MINUS_1)
    expected = limit_slow_rate(c0, LimitKind.PHI0_WEAK) * low.params.eps
    records.append(rate_record("weak_r2_minus_1_decay_rate", rate, expected, 0.10, pref))

    if strong_eps:
        lams = [1.0 + 1.0 / e ** 2 for e in strong_eps]
        ladder = strong_ladder(c0, lams, opts, omega_tilde)
        fit = fit_rate(zip(strong_eps, [slow_manifold_residual(p) for p in ladder]))
        records.append(slope_record("strong_slow_manifold_residual_vs_eps", fit, 1.0, 0.25))
    if weak_eps:
        lams = [1.0 + e ** 2 for e in weak_eps]
        ladder = weak_ladder(c0, lams, opts, omega_tilde)
        fit = fit_rate(zip(weak_eps, [slow_manifold_residual(p) for p in ladder]))
        records.append(slope_record("weak_slow_manifold_residual_vs_eps", fit, 1.0, 0.25))

    profiles = strong + weak
    records.append(Record("hamiltonian_zero_level", max(p.diagnostics.hamiltonian_drift for p in profiles),
                          0.0, 1e-8, all(p.diagnostics.hamiltonian_drift <= 1e-8 for p in profiles),
                          {"quantity": "max node |H|"}))
    return {
        "schema_version": 1,
        "c0": c0,
        "omega_tilde": getattr(omega_tilde, "__name__", "zero") if omega_tilde else "zero",
        "records": [r.as_dict() for r in records],
        "all_pass": all(r.passed for r in records),
    }
