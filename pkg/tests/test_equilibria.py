import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import brentq

from rabi_het.equilibria import (EquilibriumKind, algebraic_residual, all_equilibria, equilibrium,
                                 leading_order_rates, mixed_equilibria, mixed_equilibria_from_ratio,
                                 slow_eigenvalues)
from rabi_het.errors import DegenerateSpectrum
from rabi_het.params import Regime, make_params


def bisection_oracle(params):
    """Root of the first equilibrium equation on the circle u = sin t, v = cos t, t in (0, pi/4)."""
    def g(t):
        u, v = math.sin(t), math.cos(t)
        return u * (u * u + params.lam * v * v - 1.0) - params.omega * v

    t = brentq(g, 1e-12, math.pi / 4 - 1e-12, xtol=1e-16, rtol=1e-15)
    return math.sin(t), math.cos(t)


def test_mixed_equilibria_quarter():
    p = make_params(101, 0.25)
    ub, vb = mixed_equilibria(p)
    # r = 1/4 gives sin(2t) = 1/2, i.e. 15 degrees
    assert ub == pytest.approx(0.2588190451, abs=1e-10)
    assert vb == pytest.approx(0.9659258263, abs=1e-10)
    assert ub == pytest.approx(math.sin(math.pi / 12), abs=1e-15)
    ob = bisection_oracle(p)
    assert ub == pytest.approx(ob[0], abs=1e-13)
    assert vb == pytest.approx(ob[1], abs=1e-13)


def test_small_ratio_limit():
    ub, vb = mixed_equilibria_from_ratio(1e-9)
    assert ub == pytest.approx(1e-9, rel=1e-9)
    assert vb == pytest.approx(1.0, abs=1e-15)


@given(r=st.floats(0.001, 0.499))
def test_mixed_identities(r):
    ub, vb = mixed_equilibria_from_ratio(r)
    assert 0 < ub < vb < 1
    assert abs(ub * vb - r) < 1e-12
    assert abs(ub * ub + vb * vb - 1) < 1e-12


def test_diagonal_point():
    # lambda = 3, omega = 1 sits at r = 1/2, outside the admissible range, so check the formula directly
    lam, om = 3.0, 1.0
    d = math.sqrt((1 + om) / (1 + lam))
    assert d == pytest.approx(0.7071067812, abs=1e-10)
    res = max(abs(d ** 3 - d + lam * d ** 3 - om * d), 0.0)
    assert res < 1e-12
    p = make_params(3.0, 0.25)
    eq = equilibrium(EquilibriumKind.DIAGONAL, p)
    assert algebraic_residual(eq.point[0], eq.point[2], p) < 1e-12


def test_all_equilibria_kinds_and_residuals():
    p = make_params(101, 0.25)
    eqs = all_equilibria(p)
    assert [e.kind for e in eqs] == list(EquilibriumKind)
    for e in eqs:
        assert algebraic_residual(e.point[0], e.point[2], p) < 1e-12
        pts = {(round(e.point[0], 12), round(e.point[2], 12))}
        assert (1.0, 0.0) not in pts and (0.0, 1.0) not in pts
    low = eqs[2]
    assert low.point[0] == pytest.approx(0.2588190451, abs=1e-10)
    assert low.point[2] == pytest.approx(0.9659258263, abs=1e-10)


def test_unit_axis_points_are_not_equilibria():
    p = make_params(101, 0.25)
    assert algebraic_residual(1.0, 0.0, p) > 1.0
    assert algebraic_residual(0.0, 1.0, p) > 1.0


@settings(max_examples=30, deadline=None)
@given(lam=st.floats(1.01, 1e4), c0=st.floats(0.01, 0.49))
def test_spectrum_structure(lam, c0):
    p = make_params(lam, c0)
    lo = equilibrium(EquilibriumKind.MIXED_LOW, p)
    hi = equilibrium(EquilibriumKind.MIXED_HIGH, p)
    w = np.sort(lo.eigenvalues.real)
    np.testing.assert_allclose(w, -w[::-1], rtol=1e-9, atol=1e-12)
    np.testing.assert_allclose(lo.eigenvalues, hi.eigenvalues, rtol=1e-9, atol=1e-12)
    V = lo.eigenvectors
    np.testing.assert_allclose(np.linalg.norm(V, axis=0), 1.0, atol=1e-12)
    assert np.all(np.real(V[0]) >= 0)


def test_leading_order_rates():
    strong = make_params(1e4, 0.25)
    assert leading_order_rates(strong)[0] == pytest.approx(1.2247448714, abs=1e-10)
    weak = make_params(1.0025, 0.25, regime=Regime.WEAK)
    assert leading_order_rates(weak)[0] == pytest.approx(0.8660254038, abs=1e-10)
    near_half = make_params(1e4, 0.5 - 1e-9)
    assert leading_order_rates(near_half)[0] < 1e-3


def test_numerical_slow_rate_converges_strong():
    lead = math.sqrt(2) * math.sqrt(0.75)
    errs = []
    for eps in (0.1, 0.05, 0.025):
        p = make_params(1 + 1 / eps ** 2, 0.25)
        mu_s, mu_f = slow_eigenvalues(p)
        errs.append(abs(mu_s - lead))
        assert mu_f * eps == pytest.approx(1.0, abs=0.02)
    assert errs[0] / errs[1] >= 1.8 and errs[1] / errs[2] >= 1.8
    p = make_params(1e4, 0.25)
    assert abs(slow_eigenvalues(p)[0] - lead) <= p.eps


def test_numerical_slow_rate_weak_in_slow_variable():
    for lam in (1.04, 1.01, 1.0025):
        p = make_params(lam, 0.25, regime=Regime.WEAK)
        mu_s, mu_f = slow_eigenvalues(p)
        assert mu_s / p.eps == pytest.approx(math.sqrt(0.75), abs=p.eps)
        assert mu_f == pytest.approx(math.sqrt(2), abs=p.eps)


def test_degenerate_spectrum(monkeypatch):
    import rabi_het.equilibria as eqmod
    p = make_params(101, 0.25)
    real = eqmod.equilibrium

    def flat(kind, params):
        e = real(kind, params)
        w = e.eigenvalues.copy()
        w[1] = 1e-12
        return eqmod.Equilibrium(e.point, e.kind, w, e.eigenvectors)

    monkeypatch.setattr(eqmod, "equilibrium", flat)
    with pytest.raises(DegenerateSpectrum):
        eqmod.slow_eigenvalues(p)
