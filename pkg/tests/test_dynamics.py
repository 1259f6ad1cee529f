import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp

from rabi_het import _kernels
from rabi_het.dynamics import (Frame, HamiltonianKind, hamiltonian, jacobian, rhs,
                               slow_manifold_strong, slow_manifold_weak, to_frame)
from rabi_het.equilibria import mixed_equilibria
from rabi_het.errors import DomainViolation
from rabi_het.params import Regime, make_params

P101 = make_params(101, 0.25)
W = make_params(1.01, 0.25, regime=Regime.WEAK)

positive = st.floats(0.2, 1.2)
slope = st.floats(-0.5, 0.5)


def test_rhs_vanishes_at_mixed_equilibrium():
    ub, vb = mixed_equilibria(P101)
    np.testing.assert_allclose(rhs(Frame.PHYSICAL, [ub, 0, vb, 0], P101), 0.0, atol=1e-12)


def test_rhs_hand_evaluated():
    p = make_params(2.0, 0.25)
    assert p.omega == 0.25
    np.testing.assert_array_equal(rhs(Frame.PHYSICAL, [1, 0, 0, 0], p), [0, 0, 0, -0.25])


def test_polar_rhs_at_equilibrium():
    phibar = math.asin(0.5)
    np.testing.assert_allclose(rhs(Frame.POLAR, [0, 0, phibar, 0], W), 0.0, atol=1e-14)


def test_to_frame_at_equilibrium():
    ub, vb = mixed_equilibria(P101)
    np.testing.assert_allclose(to_frame(Frame.HYPERBOLA, Frame.PHYSICAL, [ub, 0, vb, 0], P101),
                               [0, 0, ub, 0], atol=1e-13)
    ub, vb = mixed_equilibria(W)
    out = to_frame(Frame.POLAR, Frame.PHYSICAL, [ub, 0, vb, 0], W)
    # the low state (u < v) sits at the obtuse root of sin(phi) = 2r
    np.testing.assert_allclose(out, [0, 0, 5 * math.pi / 6, 0], atol=1e-10)
    assert math.sin(out[2]) == pytest.approx(0.5, abs=1e-13)


def test_to_frame_hand_evaluated():
    out = to_frame(Frame.HYPERBOLA, Frame.PHYSICAL, [0.5, 0.1, 0.6, -0.1], P101)
    # p = (0.3 - 0.25) / 0.01, dh = 0.06 - 0.05 = 0.01, q = dh / eps
    np.testing.assert_allclose(out, [5.0, 0.1, 0.5, 0.1], rtol=1e-12)


def test_hamiltonian_examples():
    ub, vb = mixed_equilibria(P101)
    assert hamiltonian(HamiltonianKind.FULL, [ub, 0, vb, 0], P101) == pytest.approx(0, abs=1e-14)
    assert hamiltonian(HamiltonianKind.HRED_WEAK, [math.pi / 2, 2 * 0.25 - 1], W) == 0.0
    p = make_params(2.0, 0.25)
    assert hamiltonian(HamiltonianKind.FULL, [1, 0, 1, 0], p) == pytest.approx(-0.53125, abs=1e-15)


def test_hamiltonian_wrong_shape():
    with pytest.raises(DomainViolation):
        hamiltonian(HamiltonianKind.H0_REDUCED, [0.5, 0.1, 0.6, 0.0], P101)


@pytest.mark.parametrize("frame, state, params", [
    (Frame.HYPERBOLA, [0.0, 0.0, 0.0, 0.1], P101),
    (Frame.HYPERBOLA, [0.0, 0.0, -0.3, 0.1], P101),
    (Frame.POLAR, [0.0, 0.0, 0.0, 0.1], W),
    (Frame.POLAR, [0.0, 0.0, math.pi, 0.1], W),
    (Frame.POLAR, [1e6, 0.0, 1.0, 0.1], W),
])
def test_domain_violations(frame, state, params):
    with pytest.raises(DomainViolation):
        rhs(frame, state, params)


def test_to_frame_rejects_nonpositive_u():
    with pytest.raises(DomainViolation):
        to_frame(Frame.HYPERBOLA, Frame.PHYSICAL, [0.0, 0.1, 0.6, 0.0], P101)


@given(u=positive, du=slope, v=positive, dv=slope, lam=st.floats(1.5, 1e3))
def test_hyperbola_round_trip_and_h(u, du, v, dv, lam):
    p = make_params(lam, 0.25)
    s = np.array([u, du, v, dv])
    t = to_frame(Frame.HYPERBOLA, Frame.PHYSICAL, s, p)
    back = to_frame(Frame.PHYSICAL, Frame.HYPERBOLA, t, p)
    np.testing.assert_allclose(back, s, rtol=1e-12, atol=1e-12)
    full = hamiltonian(HamiltonianKind.FULL, s, p)
    for kind in (HamiltonianKind.TILDE, HamiltonianKind.HAT_STRONG):
        assert hamiltonian(kind, t, p) == pytest.approx(full, rel=1e-10, abs=1e-10)


@given(u=positive, du=slope, v=positive, dv=slope, lam=st.floats(1.0001, 1.5))
def test_polar_round_trip_and_h(u, du, v, dv, lam):
    p = make_params(lam, 0.25, regime=Regime.WEAK)
    s = np.array([u, du, v, dv])
    t = to_frame(Frame.POLAR, Frame.PHYSICAL, s, p)
    back = to_frame(Frame.PHYSICAL, Frame.POLAR, t, p)
    np.testing.assert_allclose(back, s, rtol=1e-12, atol=1e-12)
    assert hamiltonian(HamiltonianKind.HAT_WEAK, t, p) == pytest.approx(
        hamiltonian(HamiltonianKind.FULL, s, p), rel=1e-9, abs=1e-12)


def test_frame_fields_agree_with_chain_rule():
    # d/dx of the hyperbola coordinates equals the hyperbola field at the mapped point
    rng = np.random.default_rng(1)
    for _ in range(50):
        s = np.array([rng.uniform(0.2, 1.0), rng.uniform(-0.3, 0.3), rng.uniform(0.2, 1.0),
                      rng.uniform(-0.3, 0.3)])
        f = rhs(Frame.PHYSICAL, s, P101)
        dt = 1e-6
        d = (to_frame(Frame.HYPERBOLA, Frame.PHYSICAL, s + dt * f, P101)
             - to_frame(Frame.HYPERBOLA, Frame.PHYSICAL, s - dt * f, P101)) / (2 * dt)
        g = rhs(Frame.HYPERBOLA, to_frame(Frame.HYPERBOLA, Frame.PHYSICAL, s, P101), P101)
        np.testing.assert_allclose(g, d, rtol=1e-6, atol=1e-5 * np.abs(g).max())
        # polar derivatives are taken in y = eps x
        dp = (to_frame(Frame.POLAR, Frame.PHYSICAL, s + dt * f, W)
              - to_frame(Frame.POLAR, Frame.PHYSICAL, s - dt * f, W)) / (2 * dt)
        f = rhs(Frame.PHYSICAL, s, W)
        dp = (to_frame(Frame.POLAR, Frame.PHYSICAL, s + dt * f, W)
              - to_frame(Frame.POLAR, Frame.PHYSICAL, s - dt * f, W)) / (2 * dt)
        gp = rhs(Frame.POLAR, to_frame(Frame.POLAR, Frame.PHYSICAL, s, W), W) * W.eps
        np.testing.assert_allclose(gp, dp, rtol=1e-5, atol=1e-5 * np.abs(gp).max())


def test_jacobian_matches_central_differences():
    rng = np.random.default_rng(7)
    for _ in range(100):
        lam = 10 ** rng.uniform(0.05, 3)
        p = make_params(lam, rng.uniform(0.05, 0.45))
        s = np.array([rng.uniform(0.05, 1.2), rng.uniform(-1, 1), rng.uniform(0.05, 1.2),
                      rng.uniform(-1, 1)])
        A = jacobian(s, p)
        F = jacobian(s, p, fd=True)
        assert np.abs(A - F).max() <= 1e-6 * max(1.0, np.abs(A).max())


def test_kernels_agree():
    if _kernels.numba is None:
        pytest.skip("numba not installed")
    rng = np.random.default_rng(3)
    Y = rng.uniform(0.1, 1.0, size=(257, 4))
    h = np.full(256, 0.01)
    a = _kernels.collocation(Y, h, 101.0, 25.0, jit=False)
    b = _kernels.collocation(Y, h, 101.0, 25.0, jit=True)
    for x, y in zip(a, b):
        np.testing.assert_allclose(x, y, rtol=1e-13, atol=1e-13)
    np.testing.assert_allclose(_kernels.rhs(Y, 101.0, 25.0, jit=True),
                               _kernels.rhs(Y, 101.0, 25.0, jit=False), rtol=1e-14)


def _integrate(frame, s0, p, span, tol):
    return solve_ivp(lambda x, y: rhs(frame, y, p), span, s0, method="DOP853",
                     rtol=tol, atol=tol, dense_output=True)


@settings(max_examples=20, deadline=None)
@given(u=st.floats(0.3, 0.9), v=st.floats(0.3, 0.9), du=st.floats(-0.2, 0.2), dv=st.floats(-0.2, 0.2))
def test_conservation_physical(u, v, du, dv):
    p = make_params(5.0, 0.25)
    tol = 1e-11
    sol = _integrate(Frame.PHYSICAL, [u, du, v, dv], p, (0.0, 1.0), tol)
    H = hamiltonian(HamiltonianKind.FULL, sol.y, p)
    drift = np.abs(H - H[0])
    # tolerances act on the state, so scale by the size of the quartic terms
    scale = 1.0 + p.lam * np.abs(sol.y).max() ** 4
    assert np.all(drift <= 10 * tol * scale * (1 + sol.t))


def test_conservation_hyperbola_and_polar():
    tol = 1e-11
    s = to_frame(Frame.HYPERBOLA, Frame.PHYSICAL, [0.5, 0.1, 0.55, -0.05], P101)
    sol = _integrate(Frame.HYPERBOLA, s, P101, (0.0, 0.5), tol)
    H = hamiltonian(HamiltonianKind.HAT_STRONG, sol.y, P101)
    assert np.abs(H - H[0]).max() <= 1e-9
    s = to_frame(Frame.POLAR, Frame.PHYSICAL, [0.7, 0.0, 0.7, 0.01], W)
    sol = _integrate(Frame.POLAR, s, W, (0.0, 0.05), tol)
    H = hamiltonian(HamiltonianKind.HAT_WEAK, sol.y, W)
    assert np.abs(H - H[0]).max() <= 1e-12


def test_frame_equivalence():
    tol = 1e-12
    s0 = np.array([0.5, 0.1, 0.55, -0.05])
    a = _integrate(Frame.PHYSICAL, s0, P101, (0.0, 0.3), tol).y[:, -1]
    t0 = to_frame(Frame.HYPERBOLA, Frame.PHYSICAL, s0, P101)
    b = _integrate(Frame.HYPERBOLA, t0, P101, (0.0, 0.3), tol).y[:, -1]
    np.testing.assert_allclose(to_frame(Frame.PHYSICAL, Frame.HYPERBOLA, b, P101), a, atol=1e-8)


def test_swap_symmetry():
    p = make_params(5.0, 0.25)
    s0 = np.array([0.4, 0.2, 0.7, -0.1])
    fwd = _integrate(Frame.PHYSICAL, s0, p, (0.0, 1.0), 1e-12)
    # (v(-x), u(-x)) starts from the swapped state with reversed slopes
    mirrored = _integrate(Frame.PHYSICAL, [s0[2], -s0[3], s0[0], -s0[1]], p, (0.0, -1.0), 1e-12)
    xs = np.linspace(0, 1, 11)
    a = fwd.sol(xs)
    b = mirrored.sol(-xs)
    np.testing.assert_allclose(a[0], b[2], atol=1e-9)
    np.testing.assert_allclose(a[2], b[0], atol=1e-9)


def test_slow_manifolds_vanish_at_equilibria():
    ub = math.sin(math.pi / 12)
    assert slow_manifold_strong(ub, 0.0, 0.25) == pytest.approx(0.0, abs=1e-14)
    assert slow_manifold_weak(math.pi / 6, 0.0, 0.25) == pytest.approx(0.0, abs=1e-15)
