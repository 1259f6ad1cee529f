"""Collocation solver for the truncated heteroclinic boundary-value problem.

The first-order physical system is discretized with the 4th-order
Lobatto IIIA (Hermite-Simpson) scheme on a mesh symmetric about ``x = 0``.
Boundary conditions are projections onto the eigenspaces of the end
equilibria: at ``-L`` the deviation from ``(ubar, vbar)`` has no stable
component, at ``+L`` the deviation from ``(vbar, ubar)`` has no unstable
component (two rows each).  Together with the phase condition ``u(0) = v(0)``
that is one condition too many for a 4-dimensional system, so a friction
parameter ``gamma`` is added as an unknown (see :mod:`rabi_het._kernels`).
A converged solve reports it as ``Diagnostics.friction``; it vanishes to
solver tolerance because the energy is conserved only when ``gamma = 0``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
from scipy.interpolate import CubicHermiteSpline
from scipy.sparse.linalg import LinearOperator, onenormest, splu

from . import _kernels
from .dynamics import Frame, HamiltonianKind, hamiltonian, jacobian, rhs
from .equilibria import EquilibriumKind, equilibrium, slow_eigenvalues
from .errors import (ContinuationStalled, IllConditioned, LeftDomain, NewtonDiverged,
                     RabiHetError, RegimeMismatch)
from .limit_profiles import LimitKind, LimitProfile, compute_phi0, compute_u0, sample
from .params import Params, Regime

__all__ = [
    "Damping",
    "SolveOptions",
    "Diagnostics",
    "Profile",
    "default_half_length",
    "make_mesh",
    "limit_for",
    "initial_guess",
    "solve",
    "solve_params",
    "continue_in_lambda",
    "refine",
    "remesh",
    "boundary_residuals",
]

COND_LIMIT = 1e14


class Damping(enum.Enum):
    NONE = "none"
    BACKTRACKING = "backtracking"


@dataclass(frozen=True)
class SolveOptions:
    n: int = 2049
    L: float | None = None          # None: 12 / mu_slow
    tol: float = 1e-10
    max_iters: int = 25
    damping: Damping = Damping.BACKTRACKING
    grading: float = 0.0            # > 0 clusters nodes toward x = 0
    fd_jacobian: bool = False
    check_conditioning: bool = True

    def __post_init__(self):
        if self.n < 129 or self.n % 2 == 0:
            raise ValueError(f"n must be odd and >= 129, got {self.n}")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.L is not None and not self.L > 0:
            raise ValueError("L must be positive")


@dataclass
class Diagnostics:
    hamiltonian_drift: float = float("nan")
    bc_residual: float = float("nan")
    newton_iters: int = 0
    final_residual: float = float("nan")
    cond_estimate: float = float("nan")
    friction: float = 0.0               # unfolding parameter; ~0 at a connection
    refinement_change: float | None = None

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class Profile:
    params: Params
    mesh: np.ndarray
    states: np.ndarray                  # (n, 4): u, u', v, v'
    phase_anchor: int
    diagnostics: Diagnostics = field(default_factory=Diagnostics)

    @property
    def L(self) -> float:
        return float(self.mesh[-1])

    @property
    def n(self) -> int:
        return len(self.mesh)

    @property
    def u(self):
        return self.states[:, 0]

    @property
    def du(self):
        return self.states[:, 1]

    @property
    def v(self):
        return self.states[:, 2]

    @property
    def dv(self):
        return self.states[:, 3]

    @property
    def phi(self):
        return 2.0 * np.arctan2(self.v, self.u)

    @property
    def dphi(self):
        return 2.0 * (self.u * self.dv - self.v * self.du) / (self.u ** 2 + self.v ** 2)

    def hamiltonian(self):
        return hamiltonian(HamiltonianKind.FULL, self.states.T, self.params)

    def interpolant(self):
        """Piecewise cubic Hermite interpolant of the states, using the vector field as slope."""
        slopes = rhs(Frame.PHYSICAL, self.states.T, self.params).T
        return CubicHermiteSpline(self.mesh, self.states, slopes, axis=0)


def default_half_length(params: Params) -> float:
    return 12.0 / slow_eigenvalues(params)[0]


def make_mesh(n: int, L: float, grading: float = 0.0) -> np.ndarray:
    """Mesh on [-L, L], symmetric about 0, with 0 as the middle node."""
    s = np.linspace(-1.0, 1.0, n)
    if grading > 0:
        x = L * np.sinh(grading * s) / math.sinh(grading)
    else:
        x = L * s
    x[n // 2] = 0.0
    x = 0.5 * (x - x[::-1])  # exact mirror symmetry
    return x


def _resolve_L(params, opts):
    return default_half_length(params) if opts.L is None else float(opts.L)


def limit_for(params: Params, L: float, n: int = 4097) -> LimitProfile:
    """Limit profile of ``params.regime`` covering ``[-L, L]`` in physical x."""
    if params.regime is Regime.STRONG:
        return compute_u0(params.c0, L=1.02 * L + 1e-9, n=n)
    return compute_phi0(params.c0, L=1.02 * params.eps * L + 1e-9, n=n)


def initial_guess(params: Params, limit: LimitProfile | None = None,
                  opts: SolveOptions | None = None) -> Profile:
    """Seed built from the limit profile of the regime.

    Strong: ``u = u0(x)``, ``v = r / u0(x)``.  Weak: ``R = 1`` and
    ``phi = phi0(eps x)``.  Points beyond the limit's domain are clamped to
    its ends, where the profile is flat to within the tail error.
    """
    opts = opts or SolveOptions()
    L = _resolve_L(params, opts)
    if limit is None:
        limit = limit_for(params, L)
    expected = LimitKind.U0_STRONG if params.regime is Regime.STRONG else LimitKind.PHI0_WEAK
    if limit.kind is not expected:
        raise RegimeMismatch(f"{params.regime.value} regime needs a {expected.value} limit profile")
    x = make_mesh(opts.n, L, opts.grading)
    Y = np.empty((len(x), 4))
    if params.regime is Regime.STRONG:
        u0, z0 = sample(limit, np.clip(x, -limit.L, limit.L))
        r = params.ratio
        Y[:, 0] = u0
        Y[:, 1] = z0
        Y[:, 2] = r / u0
        Y[:, 3] = -r * z0 / (u0 * u0)
    else:
        e = params.eps
        f, df = sample(limit, np.clip(e * x, -limit.L, limit.L))
        df = e * df
        c, s = np.cos(0.5 * f), np.sin(0.5 * f)
        Y[:, 0] = c
        Y[:, 1] = -0.5 * s * df
        Y[:, 2] = s
        Y[:, 3] = 0.5 * c * df
    return Profile(params=params, mesh=x, states=Y, phase_anchor=len(x) // 2)


# --- boundary and phase rows ------------------------------------------------

@dataclass(frozen=True)
class _Boundary:
    left_point: np.ndarray
    right_point: np.ndarray
    left_rows: np.ndarray      # (2, 4) adjoint stable rows at the left end
    right_rows: np.ndarray     # (2, 4) adjoint unstable rows at the right end, fast first


def _boundary(params):
    lo = equilibrium(EquilibriumKind.MIXED_LOW, params)
    hi = equilibrium(EquilibriumKind.MIXED_HIGH, params)

    def adjoint_rows(eq, mask_fn):
        W = np.linalg.inv(eq.eigenvectors)
        rows = W[mask_fn(eq.eigenvalues)]
        return np.real(rows / np.linalg.norm(rows, axis=1, keepdims=True))

    left = adjoint_rows(lo, lambda w: np.real(w) < 0)
    right = adjoint_rows(hi, lambda w: np.real(w) > 0)[::-1]  # largest eigenvalue first
    return _Boundary(lo.point, hi.point, left, right)


def boundary_residuals(profile: Profile) -> np.ndarray:
    """All four projection residuals: two at -L, fast and slow at +L."""
    b = _boundary(profile.params)
    left = b.left_rows @ (profile.states[0] - b.left_point)
    right = b.right_rows @ (profile.states[-1] - b.right_point)
    return np.concatenate([left, right])


# --- Newton -----------------------------------------------------------------

class _System:
    """Residual and sparse Jacobian of the square collocation system.

    Unknowns are the ``4n`` nodal states followed by the friction ``gamma``
    of :mod:`rabi_het._kernels`.  Equations: two projection rows at each end,
    ``4(n-1)`` collocation rows and the phase row, ``4n + 1`` in total.
    With all four projections imposed every growing mode is pinned at the
    end where it grows, which keeps Newton steps bounded away from the
    solution; ``gamma`` absorbs the one surplus condition and is zero at a
    heteroclinic connection.
    """

    def __init__(self, params, mesh, fd_jacobian=False):
        self.params = params
        self.mesh = mesh
        self.h = np.diff(mesh)
        self.n = len(mesh)
        self.m = self.n // 2
        self.fd = fd_jacobian
        self.bnd = _boundary(params)
        n, m = self.n, self.m
        self.size = 4 * n + 1
        self.gamma_col = 4 * n
        # equation rows: 2 left BC, colloc 0..m-1, phase, colloc m..n-2, 2 right BC
        iv = np.arange(n - 1)
        self.colloc_row0 = 2 + 4 * iv + (iv >= m)
        self.phase_row = 2 + 4 * m
        self.right_eq = np.array([4 * n - 1, 4 * n])
        rows, cols = [], []
        for a in range(4):
            for b in range(4):
                rows.append(self.colloc_row0 + a)
                cols.append(4 * iv + b)
        for a in range(4):
            for b in range(4):
                rows.append(self.colloc_row0 + a)
                cols.append(4 * (iv + 1) + b)
        for a in range(4):
            rows.append(self.colloc_row0 + a)
            cols.append(np.full(n - 1, self.gamma_col))
        self._blk_rows = np.concatenate(rows)
        self._blk_cols = np.concatenate(cols)
        fixed_r, fixed_c, fixed_v = [], [], []
        for k in range(2):
            for b in range(4):
                fixed_r.append(k)
                fixed_c.append(b)
                fixed_v.append(self.bnd.left_rows[k, b])
        fixed_r += [self.phase_row, self.phase_row]
        fixed_c += [4 * m, 4 * m + 2]
        fixed_v += [1.0, -1.0]
        for k in range(2):
            for b in range(4):
                fixed_r.append(self.right_eq[k])
                fixed_c.append(4 * (n - 1) + b)
                fixed_v.append(self.bnd.right_rows[k, b])
        self._fix_rows = np.array(fixed_r)
        self._fix_cols = np.array(fixed_c)
        self._fix_vals = np.array(fixed_v)
        self._all_rows = np.concatenate([self._blk_rows, self._fix_rows])
        self._all_cols = np.concatenate([self._blk_cols, self._fix_cols])

    def pack(self, Y, gamma=0.0):
        return np.concatenate([np.asarray(Y, dtype=float).ravel(), [gamma]])

    def unpack(self, z):
        return z[:-1].reshape(-1, 4), float(z[-1])

    def _blocks(self, Y, gamma):
        p = self.params
        res, A, B, G = _kernels.collocation(Y, self.h, p.lam, p.omega, gamma)
        if self.fd:
            A, B, G = self._fd_blocks(Y, gamma)
        return res, A, B, G

    def _fd_blocks(self, Y, gamma):
        A = np.empty((self.n - 1, 4, 4))
        B = np.empty((self.n - 1, 4, 4))
        for k in range(4):
            for which, out in ((0, A), (1, B)):
                step = 1e-7 * np.maximum(1.0, np.abs(Y[:, k]))
                Yp, Ym = Y.copy(), Y.copy()
                Yp[:, k] += step
                Ym[:, k] -= step
                # perturb the node on one side of every interval at once
                if which == 0:
                    rp = self._interval_residual(Yp[:-1], Y[1:], gamma)
                    rm = self._interval_residual(Ym[:-1], Y[1:], gamma)
                    out[:, :, k] = (rp - rm) / (2.0 * step[:-1, None])
                else:
                    rp = self._interval_residual(Y[:-1], Yp[1:], gamma)
                    rm = self._interval_residual(Y[:-1], Ym[1:], gamma)
                    out[:, :, k] = (rp - rm) / (2.0 * step[1:, None])
        dg = 1e-7
        G = (self._interval_residual(Y[:-1], Y[1:], gamma + dg)
             - self._interval_residual(Y[:-1], Y[1:], gamma - dg)) / (2.0 * dg)
        return A, B, G

    def _interval_residual(self, y0, y1, gamma):
        p = self.params
        f0 = _kernels.rhs_np(y0, p.lam, p.omega, gamma)
        f1 = _kernels.rhs_np(y1, p.lam, p.omega, gamma)
        hc = self.h[:, None]
        ym = 0.5 * (y0 + y1) + 0.125 * hc * (f0 - f1)
        fm = _kernels.rhs_np(ym, p.lam, p.omega, gamma)
        return y1 - y0 - hc / 6.0 * (f0 + 4.0 * fm + f1)

    def residual(self, z, with_jacobian=True):
        Y, gamma = self.unpack(z)
        n, m = self.n, self.m
        if with_jacobian:
            res, A, B, G = self._blocks(Y, gamma)
        else:
            res = self._interval_residual(Y[:-1], Y[1:], gamma)
        F = np.empty(self.size)
        F[0:2] = self.bnd.left_rows @ (Y[0] - self.bnd.left_point)
        F[(self.colloc_row0[:, None] + np.arange(4)).ravel()] = res.ravel()
        F[self.phase_row] = Y[m, 0] - Y[m, 2]
        F[self.right_eq] = self.bnd.right_rows @ (Y[-1] - self.bnd.right_point)
        if not with_jacobian:
            return F, None
        data = np.concatenate([
            np.concatenate([A[:, a, b] for a in range(4) for b in range(4)]),
            np.concatenate([B[:, a, b] for a in range(4) for b in range(4)]),
            np.concatenate([G[:, a] for a in range(4)]),
            self._fix_vals,
        ])
        Jm = sp.csc_matrix((data, (self._all_rows, self._all_cols)), shape=(self.size, self.size))
        return F, Jm


def _cond_estimate(J, lu):
    n = J.shape[0]
    inv = LinearOperator((n, n), matvec=lambda b: lu.solve(b), rmatvec=lambda b: lu.solve(b, trans="T"),
                         dtype=float)
    return float(sp.linalg.norm(J, 1) * onenormest(inv))


def _positive(Y):
    return bool(np.all(Y[:, 0] > 0.0) and np.all(Y[:, 2] > 0.0))


def solve(params: Params, guess: Profile, opts: SolveOptions | None = None) -> Profile:
    """Newton iteration on the collocation system, seeded by ``guess``.

    The mesh of ``guess`` is used as is.  Raises :class:`NewtonDiverged`
    if the residual does not drop below ``opts.tol`` within
    ``opts.max_iters`` iterations, :class:`LeftDomain` if an iterate leaves
    the positive quadrant, and :class:`IllConditioned` if the final Newton
    matrix has a 1-norm condition estimate above 1e14.
    """
    opts = opts or SolveOptions()
    mesh = np.asarray(guess.mesh, dtype=float)
    mu_slow = slow_eigenvalues(params)[0]
    if mu_slow * mesh[-1] < 8.0:
        raise ValueError(f"half-length {mesh[-1]:.4g} too short: mu_slow * L = {mu_slow * mesh[-1]:.3g} < 8")
    Y = np.array(guess.states, dtype=float, copy=True)
    if not _positive(Y):
        raise LeftDomain("initial guess leaves the positive quadrant")
    system = _System(params, mesh, fd_jacobian=opts.fd_jacobian)

    z = system.pack(Y)
    F, J = system.residual(z)
    norm = float(np.max(np.abs(F)))
    iters = 0
    while norm > opts.tol:
        if iters >= opts.max_iters:
            raise NewtonDiverged(f"residual {norm:.3e} above tol {opts.tol:.1e} after {iters} iterations")
        try:
            lu = splu(J)
        except RuntimeError as exc:  # exactly singular
            raise NewtonDiverged(f"singular Newton matrix: {exc}") from exc
        step = lu.solve(-F)
        if not np.all(np.isfinite(step)):
            raise NewtonDiverged("non-finite Newton step")
        iters += 1
        if opts.damping is Damping.NONE:
            z = z + step
            if not _positive(system.unpack(z)[0]):
                raise LeftDomain(f"iterate {iters} leaves the positive quadrant")
            F, J = system.residual(z)
            norm = float(np.max(np.abs(F)))
            continue
        base = float(np.linalg.norm(F))
        alpha = 1.0
        left_domain = False
        while alpha >= 2.0 ** -12:
            trial = z + alpha * step
            if _positive(system.unpack(trial)[0]):
                Ft, _ = system.residual(trial, with_jacobian=False)
                nt = float(np.linalg.norm(Ft))
                if nt <= (1.0 - 1e-4 * alpha) * base or float(np.max(np.abs(Ft))) <= opts.tol:
                    break
            else:
                left_domain = True
            alpha *= 0.5
        else:
            if left_domain:
                raise LeftDomain(f"no step keeps the iterate positive at iteration {iters}")
            raise NewtonDiverged(f"line search failed at iteration {iters}, residual {norm:.3e}")
        z = trial
        F, J = system.residual(z)
        norm = float(np.max(np.abs(F)))

    Y, gamma = system.unpack(z)
    cond = float("nan")
    if opts.check_conditioning:
        lu = splu(J)
        cond = _cond_estimate(J, lu)
        if cond > COND_LIMIT:
            raise IllConditioned(f"Newton matrix condition estimate {cond:.3e} > {COND_LIMIT:.0e}")
    out = Profile(params=params, mesh=mesh, states=Y, phase_anchor=system.m)
    H = out.hamiltonian()
    diag = Diagnostics(
        hamiltonian_drift=float(np.max(np.abs(H))),
        bc_residual=float(np.max(np.abs(boundary_residuals(out)))),
        newton_iters=iters,
        final_residual=norm,
        cond_estimate=cond,
        friction=gamma,
    )
    return replace(out, diagnostics=diag)


def solve_params(params: Params, opts: SolveOptions | None = None) -> Profile:
    """Convenience: seed from the regime's limit profile and solve."""
    opts = opts or SolveOptions()
    return solve(params, initial_guess(params, None, opts), opts)


def remesh(profile: Profile, mesh: np.ndarray, params: Params | None = None) -> Profile:
    """Stretch ``profile`` onto ``mesh`` in the scaled coordinate ``x / L``.

    The stretch ratio also rescales the derivative components.  ``params``
    (default: the profile's) is attached to the result.
    """
    mesh = np.asarray(mesh, dtype=float)
    k = profile.L / mesh[-1]
    Y = profile.interpolant()(mesh * k)
    Y[:, 1] *= k
    Y[:, 3] *= k
    return Profile(params=params or profile.params, mesh=mesh, states=Y, phase_anchor=len(mesh) // 2)


def continue_in_lambda(params_path, opts: SolveOptions | None = None,
                       limit: LimitProfile | None = None, max_bisections: int = 4) -> list[Profile]:
    """Solve along a monotone path in lambda, each solve seeded by the previous one.

    A failed step is retried through up to ``max_bisections`` geometric
    midpoints in ``lambda - 1``; if that does not help,
    :class:`ContinuationStalled` names the failing lambda.
    """
    opts = opts or SolveOptions()
    path = list(params_path)
    if not path:
        return []
    lams = np.array([p.lam for p in path])
    if len(path) > 1 and not (np.all(np.diff(lams) > 0) or np.all(np.diff(lams) < 0)):
        raise ValueError("params_path must be strictly monotone in lambda")
    out = []
    prev = None
    for target in path:
        try:
            if prev is None:
                prof = solve(target, initial_guess(target, limit, opts), opts)
            else:
                prof = _continue_step(prev, target, opts, max_bisections)
        except RabiHetError as exc:
            raise ContinuationStalled(target.lam, exc) from exc
        out.append(prof)
        prev = prof
    return out


def _continue_step(prev, target, opts, depth):
    mesh = make_mesh(opts.n, _resolve_L(target, opts), opts.grading)
    try:
        return solve(target, remesh(prev, mesh, target), opts)
    except (NewtonDiverged, IllConditioned):
        if depth <= 0:
            raise
    mid_lam = 1.0 + math.sqrt((prev.params.lam - 1.0) * (target.lam - 1.0))
    mid = target.with_lambda(mid_lam)
    half = _continue_step(prev, mid, opts, depth - 1)
    return _continue_step(half, target, opts, depth - 1)


def refine(profile: Profile, factor: int, opts: SolveOptions | None = None) -> Profile:
    """Re-solve on a mesh ``factor`` times finer, seeded by interpolation.

    Coarse nodes are kept, so ``diagnostics.refinement_change`` (max change
    at the coarse nodes) estimates the coarse discretization error.
    """
    if factor not in (2, 3, 4):
        raise ValueError("factor must be 2, 3 or 4")
    n_new = factor * (profile.n - 1) + 1
    opts = replace(opts or SolveOptions(), n=n_new)
    x = profile.mesh
    fine = np.concatenate([np.linspace(x[i], x[i + 1], factor + 1)[:-1] for i in range(len(x) - 1)] + [x[-1:]])
    fine = 0.5 * (fine - fine[::-1])
    seed = Profile(params=profile.params, mesh=fine, states=profile.interpolant()(fine),
                   phase_anchor=len(fine) // 2)
    out = solve(profile.params, seed, opts)
    change = float(np.max(np.abs(out.states[::factor] - profile.states)))
    out.diagnostics.refinement_change = change
    return out
