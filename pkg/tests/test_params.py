import math

import pytest
from hypothesis import given, strategies as st

from rabi_het.errors import BadC0, BadLambda, ParamsError, RatioOutOfRange
from rabi_het.params import Regime, make_params, quadratic_omega_tilde


def test_zero_omega_tilde_strong():
    p = make_params(101, 0.25, None, Regime.STRONG)
    assert p.omega == 25.0
    assert p.eps == pytest.approx(0.1, abs=1e-15)
    assert p.ratio == 0.25


def test_quadratic_omega_tilde_shifts_ratio():
    p = make_params(101, 0.25, quadratic_omega_tilde(0.25), "strong")
    assert p.ratio == pytest.approx(0.2525, abs=1e-15)
    # omega = c0 * lambda for this choice
    assert p.omega == pytest.approx(0.25 * 101, rel=1e-14)


@pytest.mark.parametrize("lam, c0, exc", [
    (101, 0.6, BadC0),
    (101, 0.0, BadC0),
    (101, 0.5, BadC0),
    (1.0, 0.25, BadLambda),
    (0.5, 0.25, BadLambda),
])
def test_invalid_inputs(lam, c0, exc):
    with pytest.raises(exc):
        make_params(lam, c0)


def test_ratio_out_of_range():
    with pytest.raises(RatioOutOfRange):
        make_params(5.0, 0.45, lambda s: 0.2 * s, Regime.STRONG)


def test_omega_tilde_must_vanish_at_zero():
    with pytest.raises(ParamsError):
        make_params(5.0, 0.25, lambda s: 0.01 + s)


def test_weak_eps():
    p = make_params(1.0025, 0.25, regime=Regime.WEAK)
    assert p.eps == pytest.approx(0.05, rel=1e-12)
    assert p.ratio == 0.25


@given(lam=st.floats(1.0 + 1e-6, 1e6), c0=st.floats(1e-6, 0.5 - 1e-9, exclude_max=True),
       regime=st.sampled_from(list(Regime)))
def test_valid_params_have_real_equilibria(lam, c0, regime):
    p = make_params(lam, c0, regime=regime)
    assert 0 < p.ratio < 0.5
    assert 4 * p.ratio ** 2 < 1


@given(lam=st.floats(1.001, 1e4), c0=st.floats(0.01, 0.49))
def test_regimes_agree_for_zero_omega_tilde(lam, c0):
    a = make_params(lam, c0, regime=Regime.STRONG)
    b = make_params(lam, c0, regime=Regime.WEAK)
    assert a.omega == b.omega
    assert a.eps * b.eps == pytest.approx(1.0)
    assert math.isclose(a.omega / (lam - 1.0), c0, rel_tol=1e-12)
