import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from deformed_md.core import EntropyParams as P, log_d
from deformed_md.errors import DomainError
from deformed_md.mirror import (EuclideanMap, MirrorMap, beta_divergence, bregman,
                                bregman_definitional, link, link_derivative_reciprocal,
                                link_inverse, mirror_value)
from deformed_md.numerics import finite_diff
from deformed_md.grids import all_params


def test_link_examples():
    for p in all_params():
        np.testing.assert_array_equal(link(MirrorMap(p), np.ones(3)), np.zeros(3))
    assert link(MirrorMap(P.tsallis(0.5)), np.array([2.0]))[0] == pytest.approx(0.8284271247461903)
    w = np.array([0.3, -1.0])
    np.testing.assert_array_equal(link(EuclideanMap(), w), w)


def test_link_inverse_examples():
    assert link_inverse(MirrorMap(P.kls(0.5, 0.2)), np.array([0.0]))[0] == pytest.approx(1.0)
    assert link_inverse(MirrorMap(P.shannon()), np.array([1.0]))[0] == pytest.approx(math.e)
    for p in all_params():
        w = np.array([0.2, 1.0, 3.5])
        np.testing.assert_allclose(link_inverse(MirrorMap(p), link(MirrorMap(p), w)), w, rtol=1e-10)


def test_link_derivative_reciprocal_examples():
    w = np.array([0.5, 2.0, 4.0])
    np.testing.assert_allclose(link_derivative_reciprocal(MirrorMap(P.tsallis(0.7)), w), w ** 0.7)
    assert link_derivative_reciprocal(MirrorMap(P.shannon()), np.array([2.0]))[0] == pytest.approx(2.0)
    assert link_derivative_reciprocal(MirrorMap(P.kls(0.5, 0.0)), np.array([1.0]))[0] == pytest.approx(1.0)
    for p in all_params():
        assert np.all(link_derivative_reciprocal(MirrorMap(p), np.logspace(-3, 3, 31)) > 0)


def test_mirror_value_examples():
    assert mirror_value(EuclideanMap(), np.array([3.0, 4.0])) == 12.5
    assert mirror_value(MirrorMap(P.shannon()), np.array([1.0])) == -1.0
    # the closed-form kappa potential at w = 1: (1/1.5 - 1/0.5) / (2 * 0.5)
    assert mirror_value(MirrorMap(P.kaniadakis(0.5)), np.array([1.0])) == pytest.approx(-4 / 3)


@pytest.mark.parametrize("params", [P.tsallis(0.5), P.tsallis(1.5), P.tsallis(2.0),
                                    P.kaniadakis(0.5), P.shannon()], ids=str)
def test_closed_form_potential_has_the_link_as_gradient(params):
    mm = MirrorMap(params)
    for w in (0.3, 1.0, 2.7):
        fd = finite_diff(lambda t: mirror_value(mm, np.array([t])), w)
        assert fd == pytest.approx(log_d(params, w), abs=1e-8)


@pytest.mark.parametrize("params", [P.kls(0.5, 0.2), P.euler(-0.3, 0.5),
                                    P.schwammle_tsallis(0.8, 1.2)], ids=str)
def test_quadrature_potential_has_the_link_as_gradient(params):
    mm = MirrorMap(params)
    for w in (0.4, 2.0):
        fd = finite_diff(lambda t: mirror_value(mm, np.array([t])), w)
        assert fd == pytest.approx(log_d(params, w), abs=1e-7)


def test_quadrature_potential_matches_tsallis_at_reduction_point():
    # KLS (0.25, 0.25) is Tsallis q = 0.5; compare the integral with the closed form
    w = np.array([0.3, 2.5])
    kls_val = mirror_value(MirrorMap(P.kls(0.25, 0.25 - 1e-9)), w)
    ts = MirrorMap(P.tsallis(0.5))
    assert kls_val == pytest.approx(mirror_value(ts, w) - mirror_value(ts, np.ones(2)), abs=1e-7)


def test_bregman_examples():
    w = np.array([0.4, 1.3])
    for mm in [EuclideanMap()] + [MirrorMap(p) for p in all_params()]:
        assert bregman(mm, w, w) == pytest.approx(0.0, abs=1e-12)
    assert bregman(EuclideanMap(), np.array([1.0, 2.0]), np.array([0.5, 1.0])) == 0.625
    assert bregman(MirrorMap(P.shannon()), np.array([1.0]), np.array([2.0])) == pytest.approx(1 - math.log(2))


def test_bregman_rejects_bad_input():
    with pytest.raises(ValueError):
        bregman(MirrorMap(P.shannon()), np.ones(2), np.ones(3))
    with pytest.raises(DomainError):
        bregman(MirrorMap(P.shannon()), np.array([0.0]), np.array([1.0]))


positive = arrays(np.float64, 3, elements=st.floats(0.05, 5.0))


@given(positive, positive)
def test_beta_divergence_matches_definition(w, v):
    for q in (0.5, 1.5):
        assert beta_divergence(q, w, v) == pytest.approx(
            bregman_definitional(MirrorMap(P.tsallis(q)), w, v), rel=1e-9, abs=1e-11)


@given(positive, positive)
def test_bregman_nonnegative(w, v):
    for p in (P.tsallis(0.5), P.kaniadakis(0.4), P.kls(0.5, 0.2), P.corcino(0.8, 1.2, 1.1)):
        assert bregman(MirrorMap(p), w, v) >= -1e-12


def test_quadrature_bregman_matches_definitional():
    w = np.array([0.4, 2.2])
    v = np.array([1.3, 0.7])
    for p in (P.kls(0.5, 0.2), P.euler(-0.5, 0.25)):
        mm = MirrorMap(p)
        assert bregman(mm, w, v) == pytest.approx(bregman_definitional(mm, w, v), rel=1e-9)
