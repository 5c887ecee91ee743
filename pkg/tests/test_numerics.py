import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles as O
from deformed_md import _kernels as K
from deformed_md.core import EntropyParams as P, d2log_d, exp_d, log_d
from deformed_md.errors import BracketError, ConvergenceError, ParameterError, QuadratureError
from deformed_md.numerics import (bracket_positive, exp_cc_numeric, exp_kls_lambert,
                                  exp_kls_numeric, finite_diff, invert_monotone,
                                  lambert_tsallis_w, quadrature, series_exp_kappa,
                                  series_exp_kls, series_exp_q, series_log_kappa,
                                  series_log_kls, series_log_q, solve_increasing)


def test_invert_monotone_examples():
    res = invert_monotone(lambda t: t, 3.0)
    assert res.converged and res.root == pytest.approx(3.0)
    assert invert_monotone(np.log, 1.0, fprime=lambda t: 1 / t).root == pytest.approx(math.e, rel=1e-12)
    f = lambda t: K.log_kls(0.5, 0.2, t)
    y = log_d(P.kls(0.5, 0.2), 2.0)
    assert invert_monotone(f, y).root == pytest.approx(2.0, rel=1e-12)


def test_invert_monotone_vectorized_without_derivative():
    y = np.linspace(-3, 3, 13)
    res = invert_monotone(np.log, y, seed=np.exp(y) * 3)
    assert np.all(res.converged)
    np.testing.assert_allclose(res.root, np.exp(y), rtol=1e-12)


def test_bracket_failure():
    # tanh-like bounded function: targets above its supremum cannot be bracketed
    f = lambda t: 1.0 - 1.0 / (1.0 + t)
    with pytest.raises(BracketError):
        bracket_positive(f, np.array([2.0]), np.array([1.0]))
    lo, hi, below, above = bracket_positive(f, np.array([2.0, 0.5]), np.array([1.0, 1.0]), strict=False)
    assert above.tolist() == [True, False]
    assert f(lo[1]) <= 0.5 <= f(hi[1])


def test_solve_increasing_reports_nonconvergence():
    x, res, iters, conv = solve_increasing(np.log, np.array([1.0]), np.array([1.0]),
                                           np.array([1e6]), maxiter=2)
    assert not conv[0]


def test_lambert_examples():
    assert lambert_tsallis_w(1.0, math.e).root == pytest.approx(1.0, rel=1e-12)
    assert lambert_tsallis_w(1.0, 0.0).root == pytest.approx(0.0, abs=1e-15)
    res = lambert_tsallis_w(0.5, 2.0)
    v, _ = K.exp_tsallis(0.5, res.root)
    assert res.root * v == pytest.approx(2.0, rel=1e-12)
    # classical branch against mpmath
    for z in (-0.3, 0.5, 10.0):
        assert lambert_tsallis_w(1.0, z).root == pytest.approx(float(mp.lambertw(z)), rel=1e-11)
    with pytest.raises(ParameterError):
        lambert_tsallis_w(2.5, 1.0)
    with pytest.raises(BracketError):
        lambert_tsallis_w(1.0, -1.0)


@given(st.floats(-0.9, 1.9), st.floats(0.0, 50.0))
def test_lambert_residual_property(q, z):
    res = lambert_tsallis_w(q, z)
    v, _ = K.exp_tsallis(q, np.float64(res.root), allow_inf=True)
    assert abs(res.root * v - z) <= 1e-10 * max(1.0, z)


def test_exp_kls_numeric_examples():
    assert exp_kls_numeric(0.5, 0.2, 0.0) == pytest.approx(1.0)
    for x in (-1.5, 0.3, 2.0):
        assert exp_kls_numeric(0.4, 0.0, x) == pytest.approx(exp_d(P.kaniadakis(0.4), x), rel=1e-12)
        assert exp_kls_numeric(0.25, 0.25, x) == pytest.approx(exp_d(P.tsallis(0.5), x), rel=1e-12)


@pytest.mark.parametrize("kappa, r", [(0.5, 0.2), (0.5, -0.3), (0.3, 0.1), (0.8, 0.6)])
def test_exp_kls_lambert_matches_root_finder(kappa, r):
    for x in (-2.0, -0.4, 0.3, 1.0, 5.0):
        assert exp_kls_lambert(kappa, r, x) == pytest.approx(exp_kls_numeric(kappa, r, x), rel=1e-8)


def test_exp_cc_numeric_examples():
    assert exp_cc_numeric(1.2, 0.8, 0.9, 0.0) == pytest.approx(1.0)
    for y in (-0.8, 0.2, 1.1):
        assert exp_cc_numeric(0.7, 1.3, 1.0, y) == pytest.approx(
            float(K.exp_st(0.7, 1.3, np.float64(y))[0]), rel=1e-8)
    x = np.array([0.2, 1.0, 3.0])
    np.testing.assert_allclose(exp_cc_numeric(1.2, 0.8, 0.9, K.log_cc(1.2, 0.8, 0.9, x)), x, rtol=1e-10)


def test_exp_cc_numeric_out_of_range():
    # (1.2, 0.8, 0.9): inner ST log is bounded above, so huge targets fail to bracket
    with pytest.raises((BracketError, ConvergenceError)):
        exp_cc_numeric(1.2, 0.8, 0.9, 1e9)


def test_series_examples():
    assert series_exp_kls(0.5, 0.2, 0.0) == 1.0
    x = np.linspace(-0.5, 0.5, 5)
    np.testing.assert_allclose(series_exp_q(1.0, x), 1 + x + x**2 / 2 + x**3 / 6)
    # log series in ln x: the remainder shrinks like ln(x)^4 or faster
    for x in (1.1, 1.05):
        err = abs(series_log_kappa(0.5, x) - log_d(P.kaniadakis(0.5), x))
        assert err <= 1e-3 * math.log(x) ** 4


@pytest.mark.parametrize("fn, exact, order", [
    (lambda x: series_log_q(0.5, x), lambda x: log_d(P.tsallis(0.5), x), 4),
    (lambda x: series_log_q(1.6, x), lambda x: log_d(P.tsallis(1.6), x), 4),
    (lambda x: series_log_kls(0.5, 0.2, x), lambda x: log_d(P.kls(0.5, 0.2), x), 4),
])
def test_log_series_order(fn, exact, order):
    # halving ln x shrinks the error by about 2^order
    e1 = abs(fn(math.exp(0.02)) - exact(math.exp(0.02)))
    e2 = abs(fn(math.exp(0.01)) - exact(math.exp(0.01)))
    assert e1 / e2 == pytest.approx(2 ** order, rel=0.1)


@pytest.mark.parametrize("fn, exact", [
    (lambda x: series_exp_q(0.7, x), lambda x: exp_d(P.tsallis(0.7), x)),
    (lambda x: series_exp_q(1.4, x), lambda x: exp_d(P.tsallis(1.4), x)),
    (lambda x: series_exp_kappa(0.5, x), lambda x: exp_d(P.kaniadakis(0.5), x)),
    (lambda x: series_exp_kls(0.5, 0.2, x), lambda x: exp_d(P.kls(0.5, 0.2), x)),
])
def test_exp_series_order(fn, exact):
    e1 = abs(fn(0.02) - exact(0.02))
    e2 = abs(fn(0.01) - exact(0.01))
    assert e1 / e2 > 2 ** 3.8


def test_kappa_exp_series_against_mpmath_taylor():
    k = mp.mpf("0.5")
    coeffs = mp.taylor(lambda y: O.exp_kaniadakis(k, y), 0, 4)
    ours = [1.0, 1.0, 0.5, (1 - 0.25) / 6, (1 - 4 * 0.25) / 24]
    np.testing.assert_allclose([float(c) for c in coeffs], ours, atol=1e-15)


def test_finite_diff_examples():
    assert finite_diff(lambda x: x * x, 3.0) == pytest.approx(6.0, abs=1e-5)
    assert finite_diff(math.log, 2.0) == pytest.approx(0.5, abs=1e-6)
    p = P.tsallis(0.5)
    assert finite_diff(lambda x: log_d(p, x), 2.0, order=2) == pytest.approx(d2log_d(p, 2.0), rel=1e-4)
    with pytest.raises(ValueError):
        finite_diff(math.log, 1.0, order=3)


def test_quadrature_examples():
    assert quadrature(lambda x: x, 0.0, 1.0) == pytest.approx(0.5, abs=1e-12)
    assert quadrature(math.log, 1.0, 2.0) == pytest.approx(2 * math.log(2) - 1, abs=1e-12)
    assert quadrature(math.log, 2.0, 2.0) == 0.0
    with pytest.raises(QuadratureError):
        quadrature(lambda x: 1.0 / x if x != 0 else math.inf, 0.0, 1.0)
