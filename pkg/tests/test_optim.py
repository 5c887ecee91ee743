import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from deformed_md.core import EntropyParams as P, exp_d
from deformed_md.errors import (ConstraintError, DegenerateError, ParameterError, RangeError,
                                StepError)
from deformed_md.mirror import EuclideanMap, MirrorMap
from deformed_md.optim import (Domain, OptimizerConfig, Projection, Rule, UpdateRule,
                               check_weights, geg_step_product, geg_step_simplified_q,
                               md_step_explicit, mmd_step, normalized_gradient,
                               normalized_step, recover_classical, run, step)
from deformed_md.problems import cross_entropy, quadratic
from deformed_md.grids import all_params


def test_md_step_examples():
    w = np.array([0.7, 1.4])
    for p in all_params():
        np.testing.assert_allclose(md_step_explicit(MirrorMap(p), w, np.zeros(2), 0.3), w, rtol=1e-12)
    assert md_step_explicit(MirrorMap(P.shannon()), np.array([1.0]), np.array([1.0]), 1.0)[0] == \
        pytest.approx(math.exp(-1))
    assert md_step_explicit(EuclideanMap(), np.array([2.0]), np.array([1.0]), 0.5)[0] == 1.5


def test_md_step_range_error_names_components():
    # Tsallis q = 1.5: the link is bounded above by 2, so a large negative gradient leaves the range
    with pytest.raises(RangeError) as exc:
        md_step_explicit(MirrorMap(P.tsallis(1.5)), np.array([1.0, 1.0]), np.array([0.0, -10.0]), 1.0)
    assert list(exc.value.indices) == [1]


def test_geg_step_examples():
    w = np.array([0.5, 2.0])
    g = np.array([0.3, -0.2])
    for p in all_params():
        np.testing.assert_allclose(geg_step_product(p, w, np.zeros(2), 0.1), w, rtol=1e-12)
    np.testing.assert_allclose(geg_step_product(P.tsallis(1.0), w, g, 0.1), w * np.exp(-0.1 * g))
    mine = geg_step_product(P.tsallis(0.5), np.array([2.0]), np.array([0.1]), 1.0)
    ref = md_step_explicit(MirrorMap(P.tsallis(0.5)), np.array([2.0]), np.array([0.1]), 1.0)
    assert mine[0] == pytest.approx(ref[0], rel=1e-12)


def test_geg_product_clips_to_zero():
    # exp_{0.5}(-3) clips, so the component is zeroed rather than raising
    out = geg_step_product(P.tsallis(0.5), np.array([1.0, 1.0]), np.array([3.0, 0.0]), 1.0)
    assert out.tolist() == [0.0, 1.0]


def test_simplified_q_examples():
    w = np.array([0.5, 3.0])
    g = np.array([0.2, -0.4])
    np.testing.assert_allclose(geg_step_simplified_q(1.0, w, g, 0.1), w * np.exp(-0.1 * g))
    np.testing.assert_array_equal(geg_step_simplified_q(0.7, w, np.zeros(2), 0.1), w)
    got = geg_step_simplified_q(0.5, np.array([4.0]), np.array([0.2]), 1.0)[0]
    assert got == pytest.approx(4 * exp_d(P.tsallis(0.5), -0.1))
    assert got == pytest.approx(geg_step_product(P.tsallis(0.5), np.array([4.0]), np.array([0.2]), 1.0)[0])
    with pytest.raises(ParameterError):
        geg_step_simplified_q(0.0, w, g, 0.1)


def test_mmd_examples():
    w = np.array([2.0, 0.5])
    g = np.array([0.3, -1.0])
    np.testing.assert_allclose(mmd_step(EuclideanMap(), w, g, 0.1), w - 0.1 * g)
    assert mmd_step(MirrorMap(P.shannon()), np.array([2.0]), np.array([1.0]), 0.5)[0] == 1.0
    for p in all_params():
        np.testing.assert_array_equal(mmd_step(MirrorMap(p), w, np.zeros(2), 0.1), w)
    # the clip is [.]_+ and the optional floor applies after it
    assert mmd_step(EuclideanMap(), np.array([1.0]), np.array([5.0]), 1.0)[0] == 0.0
    assert mmd_step(EuclideanMap(), np.array([1.0]), np.array([5.0]), 1.0, floor=1e-12)[0] == 1e-12
    with pytest.raises(ParameterError):
        mmd_step(MirrorMap(P.kls(0.5, 0.9)), w, g, 0.1)


def test_st_mmd_diagonal_equals_reciprocal_derivative():
    from deformed_md.mirror import link_derivative_reciprocal
    w = np.logspace(-2, 2, 9)
    for q, qp in ((0.8, 1.2), (1.5, 1.2)):
        mm = MirrorMap(P.schwammle_tsallis(q, qp))
        g = np.ones_like(w)
        np.testing.assert_allclose(w - mmd_step(mm, w, g, 1e-3),
                                   1e-3 * link_derivative_reciprocal(mm, w), rtol=1e-9)


def test_normalized_gradient_examples():
    w = np.full(4, 0.25)
    np.testing.assert_allclose(normalized_gradient(w, np.full(4, 3.0)), np.zeros(4), atol=1e-15)
    np.testing.assert_array_equal(normalized_gradient(np.array([0.5, 0.5]), np.array([1.0, -1.0])), [1.0, -1.0])
    np.testing.assert_array_equal(normalized_gradient(np.array([1.0, 0.0]), np.array([2.0, 0.0])), [0.0, -2.0])
    with pytest.raises(ConstraintError):
        normalized_gradient(np.array([0.5, 0.6]), np.array([1.0, 0.0]))


@given(arrays(np.float64, 5, elements=st.floats(0.01, 1.0)), arrays(np.float64, 5, elements=st.floats(-5, 5)))
def test_normalized_gradient_is_w_orthogonal(w, g):
    w = w / w.sum()
    assert abs(w @ normalized_gradient(w, g)) <= 1e-12 * max(1.0, np.abs(g).max())


def test_normalized_step_examples():
    rule = UpdateRule(Rule.GEG_PRODUCT, Projection.SIMPLEX)
    w = np.array([0.2, 0.3, 0.5])
    np.testing.assert_allclose(normalized_step(P.tsallis(0.5), w, np.full(3, 2.0), 0.1, rule), w, rtol=1e-14)
    got = normalized_step(P.shannon(), np.array([0.5, 0.5]), np.array([1.0, 0.0]), 1.0, rule)
    e = np.exp(-1.0)
    np.testing.assert_allclose(got, [e / (1 + e), 1 / (1 + e)])
    assert got[1] > got[0]
    for p in all_params():
        assert normalized_step(p, np.array([1.0]), np.array([7.0]), 0.5, rule).tolist() == [1.0]


def test_normalized_step_degenerate():
    # every component clips to zero under a huge GD step
    rule = UpdateRule(Rule.GD, Projection.SIMPLEX)
    with pytest.raises(DegenerateError):
        normalized_step(P.shannon(), np.array([0.5, 0.5]), np.array([1.0, -1.0]) * 0, 1.0,
                        UpdateRule(Rule.GD, Projection.SIMPLEX), floor=1.0)
    w = normalized_step(P.shannon(), np.array([0.5, 0.5]), np.array([10.0, 0.0]), 1.0, rule)
    assert w[0] == pytest.approx(1e-12) and w.sum() == pytest.approx(1.0, abs=1e-15)


@given(st.integers(0, 2**31), st.sampled_from([Rule.EGU, Rule.GEG_PRODUCT, Rule.MMD_DIAGONAL, Rule.GD]))
def test_simplex_preserved(seed, kind):
    rng = np.random.default_rng(seed)
    w = rng.dirichlet(np.ones(5))
    rule = UpdateRule(kind, Projection.SIMPLEX)
    for _ in range(20):
        w = normalized_step(P.kaniadakis(0.3), w, rng.standard_normal(5), 0.2, rule)
        assert abs(w.sum() - 1.0) <= 1e-12 and w.min() >= 0


@given(arrays(np.float64, 4, elements=st.floats(0.05, 5.0)), arrays(np.float64, 4, elements=st.floats(-2, 2)))
def test_multiplicative_steps_stay_positive(w, g):
    for p in (P.kaniadakis(0.4), P.tsallis(1.5), P.kls(0.5, 0.2)):
        assert np.all(geg_step_product(p, w, g, 0.05) > 0)
    assert np.all(mmd_step(MirrorMap(P.tsallis(0.5)), w, g, 5.0, floor=1e-12) > 0)


def test_step_projection_semantics():
    w = np.array([0.1, 1.0])
    g = np.array([1.0, 0.0])
    with pytest.raises(ConstraintError):
        step(P.shannon(), UpdateRule(Rule.GD), w, g, 1.0)
    out, clips = step(P.shannon(), UpdateRule(Rule.GD, Projection.CLIP_NONNEG), w, g, 1.0)
    assert out.tolist() == [1e-12, 1.0] and clips == 1


def test_recover_classical():
    egu = UpdateRule(Rule.EGU)
    geg = UpdateRule(Rule.GEG_PRODUCT)
    assert recover_classical(P.tsallis(1.0), geg) == (P.shannon(), egu)
    assert recover_classical(P.kaniadakis(0.0), geg) == (P.shannon(), egu)
    assert recover_classical(P.kls(0.4, 0.0), geg) == (P.kaniadakis(0.4), geg)
    assert recover_classical(P.kls(0.25, 0.25), geg) == (P.tsallis(0.5), geg)
    assert recover_classical(P.schwammle_tsallis(0.6, 1.0), geg) == (P.tsallis(0.6), geg)
    assert recover_classical(P.kls(0.4, 0.1), geg) == (P.kls(0.4, 0.1), geg)
    simp = UpdateRule(Rule.GEG_SIMPLIFIED_Q)
    assert recover_classical(P.tsallis(1.0), simp) == (P.shannon(), egu)


def test_optimizer_config_validation():
    with pytest.raises(ParameterError):
        OptimizerConfig(eta=0.0)
    with pytest.raises(ParameterError):
        OptimizerConfig(eta=0.1, weight_floor=1e-3)
    with pytest.raises(ParameterError):
        OptimizerConfig(eta=0.1, schedule="cosine")
    assert OptimizerConfig(eta=0.4, schedule="inverse_sqrt").learning_rate(3) == pytest.approx(0.2)


def test_run_zero_iterations():
    trace = run(quadratic(3), P.shannon(), UpdateRule(Rule.GD), OptimizerConfig(eta=0.1, max_iters=0))
    assert len(trace.records) == 1 and trace.termination == "max_iters"


def test_run_gd_geometric_decay():
    prob = quadratic(4, condition=1.0, seed=3)    # A = I
    eta = 0.3
    trace = run(prob, P.shannon(), UpdateRule(Rule.GD), OptimizerConfig(eta=eta, max_iters=20))
    ratios = np.array(trace.losses[1:]) / np.array(trace.losses[:-1])
    np.testing.assert_allclose(ratios, (1 - eta) ** 2, rtol=1e-9)


def test_run_converges_at_optimum_immediately():
    prob = quadratic(4, seed=1)
    trace = run(prob, P.shannon(), UpdateRule(Rule.GD), OptimizerConfig(eta=0.1), w0=prob.optimum)
    assert trace.iterations == 0 and trace.termination == "converged"


def test_run_egu_cross_entropy_monotone():
    prob = cross_entropy(5, seed=2)
    for eta in (0.1, 0.5):
        trace = run(prob, P.shannon(), UpdateRule(Rule.EGU, Projection.SIMPLEX),
                    OptimizerConfig(eta=eta, max_iters=300))
        losses = np.array(trace.losses)
        # near the optimum the loss only moves by round-off
        assert np.all(np.diff(losses) <= 1e-14 * np.abs(losses[1:]))


def test_run_egu_reaches_optimum():
    prob = cross_entropy(5, seed=0)
    trace = run(prob, P.shannon(), UpdateRule(Rule.EGU, Projection.SIMPLEX),
                OptimizerConfig(eta=0.1, max_iters=5000))
    assert trace.losses[-1] - prob.optimal_value <= 1e-6
    # pinned from a reference run
    assert trace.iterations <= 400


def test_run_rejects_mismatched_domain_and_rules():
    with pytest.raises(ConstraintError):
        run(cross_entropy(3), P.shannon(), UpdateRule(Rule.EGU), OptimizerConfig(eta=0.1))
    with pytest.raises(ParameterError):
        run(quadratic(3), P.kaniadakis(0.3), UpdateRule(Rule.GEG_SIMPLIFIED_Q), OptimizerConfig(eta=0.1))
    with pytest.raises(ConstraintError):
        run(quadratic(3), P.shannon(), UpdateRule(Rule.GD), OptimizerConfig(eta=0.1), w0=[1.0, 0.0, 1.0])


def test_run_attaches_iteration_to_step_errors():
    prob = quadratic(3, seed=0)
    with pytest.raises(StepError) as exc:
        run(prob, P.shannon(), UpdateRule(Rule.GD), OptimizerConfig(eta=50.0, max_iters=5))
    assert exc.value.iteration == 0


def test_run_records_are_feasible():
    prob = cross_entropy(4, seed=5)
    trace = run(prob, P.kls(0.5, 0.25), UpdateRule(Rule.MMD_DIAGONAL, Projection.SIMPLEX),
                OptimizerConfig(eta=0.05, max_iters=50))
    assert all(r.w_min >= 0 for r in trace.records)
    assert abs(trace.weights.sum() - 1) <= 1e-12
    check_weights(trace.weights, Domain.UNIT_SIMPLEX)
