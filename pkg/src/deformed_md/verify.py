"""Invariant suites behind ``deformed-md verify``.

Each suite yields :class:`Check` records; a check carries the measured
error, the tolerance it was held to, and a pass flag.
"""

from dataclasses import dataclass
import math

import numpy as np

from . import _kernels as K
from .algebra import d_prod_clip, kappa_sum, q_sum
from .core import (EntropyParams, Family, d2log_d, dlog_d, duality_conjugate, exp_d,
                   exp_d_clip, log_d, validate)
from .errors import DeformedError
from .grids import DESCENT_GRID, all_params
from .mirror import EuclideanMap, MirrorMap, beta_divergence, bregman_definitional
from .numerics import (exp_kls_numeric, finite_diff, lambert_tsallis_w, series_exp_kls)
from .optim import (OptimizerConfig, Projection, Rule, UpdateRule, geg_step_product,
                    geg_step_simplified_q, md_step_explicit, normalized_step, run)
from .problems import cross_entropy, quadratic

NUMERIC_FAMILIES = (Family.CORCINO, Family.KLS, Family.EULER)
# |exp_kls_numeric - series| <= C x^4 on |x| <= 0.1 over the KLS descent grid
KLS_SERIES_C = 1e-2


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    passed: bool
    error: float = 0.0
    tol: float = 0.0
    detail: str = ""

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        out = (f"check suite={self.suite} name={self.name} status={status} "
               f"error={self.error!r} tol={self.tol!r}")
        if self.detail:
            out += f" detail={self.detail.replace(' ', '_')}"
        return out


def _rel(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300))) if a.size else 0.0


def _check(suite, name, error, tol, detail=""):
    ok = math.isfinite(error) and error <= tol
    return Check(suite, name, ok, float(error), float(tol), detail)


def _guarded(suite, name, fn):
    try:
        return list(fn())
    except DeformedError as exc:
        return [Check(suite, name, False, math.inf, 0.0, f"{type(exc).__name__}: {exc}")]


def _validation(suite, params_list):
    """Fail early on parameters outside the monotone/concave ranges."""
    good, checks = [], []
    for p in params_list:
        rep = validate(p)
        if rep.ok:
            good.append(p)
        else:
            checks.append(Check(suite, f"validate:{p}", False, math.inf, 0.0,
                                "; ".join(rep.messages)))
    return good, checks


def _is_numeric(p):
    return p.family in NUMERIC_FAMILIES and not (
        p.family is Family.KLS and (p.r == 0.0 or abs(p.r) == abs(p.kappa)))


# --- roundtrip ---------------------------------------------------------------

def suite_roundtrip(params_list):
    good, checks = _validation("roundtrip", params_list)
    x = np.logspace(-3, 3, 50)
    for p in good:
        def body(p=p):
            z = exp_d(p, log_d(p, x))
            tol = 1e-8 if _is_numeric(p) else 1e-10
            yield _check("roundtrip", f"exp_log:{p}", _rel(z, x), tol)
        checks += _guarded("roundtrip", f"exp_log:{p}", body)
    checks += _guarded("roundtrip", "lambert_tsallis", _lambert_checks)
    checks += _guarded("roundtrip", "kls_series", _kls_series_checks)
    return checks


def _lambert_checks():
    worst = 0.0
    for q in (-0.5, 0.0, 0.5, 1.0, 1.5, 1.9):
        for z in (-0.2, 0.0, 0.3, 1.0, 5.0, 100.0):
            w0 = -1.0 / (2.0 - q)
            zmin = w0 * K.exp_tsallis(q, np.float64(w0))[0]
            if z < zmin:
                continue
            res = lambert_tsallis_w(q, z)
            v, _ = K.exp_tsallis(q, np.float64(res.root), allow_inf=True)
            worst = max(worst, abs(res.root * v - z) / max(1.0, abs(z)))
    yield _check("roundtrip", "lambert_tsallis_residual", worst, 1e-10)


def _kls_series_checks():
    x = np.linspace(-0.1, 0.1, 41)
    x = x[x != 0.0]
    for p in (q for q in DESCENT_GRID if q.family is Family.KLS):
        res = np.max(np.abs(log_d(p, exp_kls_numeric(p.kappa, p.r, x)) - x))
        yield _check("roundtrip", f"kls_residual:{p}", float(res), 1e-10)
        ratio = np.abs(exp_kls_numeric(p.kappa, p.r, x) - series_exp_kls(p.kappa, p.r, x)) / x ** 4
        yield _check("roundtrip", f"kls_series:{p}", float(np.max(ratio)), KLS_SERIES_C)


# --- derivatives -------------------------------------------------------------

def suite_derivatives(params_list, seed=0):
    good, checks = _validation("derivatives", params_list)
    rng = np.random.default_rng(seed)
    grid = np.logspace(-3, 3, 61)
    for p in good:
        def body(p=p):
            yield Check("derivatives", f"log_one:{p}", log_d(p, 1.0) == 0.0, abs(log_d(p, 1.0)), 0.0)
            yield _check("derivatives", f"dlog_one:{p}", abs(dlog_d(p, 1.0) - 1.0), 1e-12)
            d1 = np.asarray(dlog_d(p, grid))
            d2 = np.asarray(d2log_d(p, grid))
            yield Check("derivatives", f"monotone:{p}", bool(np.all(d1 > 0)), float(-d1.min()), 0.0)
            yield Check("derivatives", f"concave:{p}", bool(np.all(d2 < 0)), float(d2.max()), 0.0)
            if p.family not in (Family.CORCINO, Family.EULER):
                dual = duality_conjugate(p)
                err = float(np.max(np.abs(np.asarray(log_d(p, 1.0 / grid[20:41]))
                                          + log_d(dual, grid[20:41]))))
                yield _check("derivatives", f"duality:{p}", err, 1e-12)
            xs = np.exp(rng.uniform(math.log(0.2), math.log(5.0), 20))
            f = lambda t: log_d(p, t)
            e1 = max(abs(finite_diff(f, t) - dlog_d(p, t)) / abs(dlog_d(p, t)) for t in xs)
            e2 = max(abs(finite_diff(f, t, 2) - d2log_d(p, t)) / abs(d2log_d(p, t)) for t in xs)
            yield _check("derivatives", f"fd_dlog:{p}", e1, 1e-6)
            yield _check("derivatives", f"fd_d2log:{p}", e2, 1e-4)
        checks += _guarded("derivatives", str(p), body)
    return checks


# --- algebra -----------------------------------------------------------------

def suite_algebra(params_list):
    good, checks = _validation("algebra", params_list)
    a = np.linspace(-2.0, 2.0, 9)
    A, B = [m.ravel() for m in np.meshgrid(a, a)]
    for p in good:
        def body(p=p):
            ea, ca = _safe_exp(p, A)
            eb, cb = _safe_exp(p, B)
            es, cs = _safe_exp(p, A + B)
            ok = ~(ca | cb | cs)
            prod, cp = d_prod_clip(p, ea[ok], eb[ok])
            ok2 = ~np.asarray(cp)
            err = _rel(np.asarray(prod)[ok2], es[ok][ok2])
            tol = 1e-7 if _is_numeric(p) else 1e-9
            yield _check("algebra", f"homomorphism:{p}", err, tol, f"cells={int(ok2.sum())}")
        checks += _guarded("algebra", str(p), body)
    checks += _guarded("algebra", "identities", _identity_checks)
    return checks


def _safe_exp(p, y):
    """exp_d with overflowing cells marked as clipped instead of raising."""
    out = np.zeros(y.shape)
    bad = np.zeros(y.shape, dtype=bool)
    for i, t in enumerate(y):
        try:
            out[i], bad[i] = exp_d_clip(p, float(t))
        except (DeformedError, ArithmeticError):
            bad[i] = True
    return out, bad


def _identity_checks():
    x = np.logspace(-1.5, 1.5, 30)
    lx = np.log(x)
    worst = 0.0
    for q in (0.5, 1.5):
        xy = x * x[::-1]
        lhs = K.log_tsallis(q, xy)
        rhs = q_sum(q, K.log_tsallis(q, x), K.log_tsallis(q, x[::-1]))
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    yield _check("algebra", "q_sum_log", worst, 1e-12)
    worst = 0.0
    for k in (0.3, 0.6):
        xy = x * x[::-1]
        lhs = K.log_kls(k, 0.0, xy)
        rhs = kappa_sum(k, K.log_kls(k, 0.0, x), K.log_kls(k, 0.0, x[::-1]))
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    yield _check("algebra", "kappa_sum_log", worst, 1e-12)
    # kappa-log as the average of the Tsallis logs at q = 1 -+ kappa
    worst = 0.0
    for k in (0.1, 0.3, 0.6, 0.9):
        avg = 0.5 * (K.log_tsallis(1.0 - k, x) + K.log_tsallis(1.0 + k, x))
        worst = max(worst, float(np.max(np.abs(np.sinh(k * lx) / k - avg))))
    yield _check("algebra", "kappa_average_of_tsallis", worst, 1e-12)
    # Euler log from its defining power difference vs the KLS evaluation
    worst = 0.0
    for a, b in ((-0.3, 0.5), (-0.5, 0.25), (0.6, -0.2), (0.9, -0.7)):
        direct = (x ** a - x ** b) / (a - b)
        worst = max(worst, float(np.max(np.abs(log_d(EntropyParams.euler(a, b), x) - direct))))
        worst = max(worst, float(np.max(np.abs(K.log_kls((a - b) / 2, (a + b) / 2, x) - direct))))
    yield _check("algebra", "euler_kls_equivalence", worst, 1e-12)
    # KLS reduction points, evaluated on the general kernel
    worst = 0.0
    for k in (0.2, 0.45):
        pairs = ((K.log_kls(k, 0.0, x), np.sinh(k * lx) / k),
                 (K.log_kls(k, k, x), K.log_tsallis(1.0 - 2 * k, x)),
                 (K.log_kls(k, -k, x), K.log_tsallis(1.0 + 2 * k, x)))
        for lhs, rhs in pairs:
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    worst = max(worst, float(np.max(np.abs(K.log_kls(1e-300, 0.0, x) - lx))))
    yield _check("algebra", "kls_reductions", worst, 1e-12)


# --- equivalence -------------------------------------------------------------

def suite_equivalence(params_list, seed=0, instances=100, n=8):
    good, checks = _validation("equivalence", params_list)
    rng = np.random.default_rng(seed)
    cases = [(rng.uniform(0.5, 2.0, n), rng.uniform(-1.0, 1.0, n), rng.uniform(0.01, 0.2))
             for _ in range(instances)]
    for p in good:
        def body(p=p):
            mm = MirrorMap(p)
            err = 0.0
            for w, g, eta in cases:
                err = max(err, _rel(geg_step_product(p, w, g, eta), md_step_explicit(mm, w, g, eta)))
            yield _check("equivalence", f"geg_vs_md:{p}", err, 1e-10)
            if p.family is Family.TSALLIS:
                err = max(_rel(geg_step_simplified_q(p.q, w, g, eta), geg_step_product(p, w, g, eta))
                          for w, g, eta in cases)
                yield _check("equivalence", f"simplified_vs_product:{p}", err, 1e-10)
        checks += _guarded("equivalence", str(p), body)
    checks += _guarded("equivalence", "classical", lambda: _classical_checks(cases))
    checks += _guarded("equivalence", "beta_divergence", lambda: _beta_checks(seed))
    return checks


def _classical_checks(cases):
    P = EntropyParams
    err = 0.0
    for p in (P.tsallis(1.0), P.kaniadakis(0.0)):
        for w, g, eta in cases:
            err = max(err, _rel(geg_step_product(p, w, g, eta), w * np.exp(-eta * g)))
    yield _check("equivalence", "geg_classical_is_egu", err, 1e-14)
    exact = all(np.array_equal(md_step_explicit(EuclideanMap(), w, g, eta), w - eta * g)
                for w, g, eta in cases)
    yield Check("equivalence", "euclidean_md_is_gd", exact, 0.0 if exact else math.inf, 0.0)
    err = 0.0
    for k in (0.3, 0.6):
        for w, g, eta in cases:
            err = max(err, _rel(geg_step_product(P.kls(k, 0.0), w, g, eta),
                                geg_step_product(P.kaniadakis(k), w, g, eta)))
    yield _check("equivalence", "kls_r0_is_kaniadakis", err, 1e-9)


def _beta_checks(seed):
    rng = np.random.default_rng(seed + 1)
    for q in (0.5, 1.5):
        mm = MirrorMap(EntropyParams.tsallis(q))
        err = 0.0
        for _ in range(20):
            w = rng.uniform(0.1, 3.0, 4)
            v = rng.uniform(0.1, 3.0, 4)
            closed = beta_divergence(q, w, v)
            err = max(err, abs(closed - bregman_definitional(mm, w, v)) / max(1.0, abs(closed)))
        yield _check("equivalence", f"beta_divergence:q={q!r}", err, 1e-9)


# --- simplex -----------------------------------------------------------------

SIMPLEX_RULES = (Rule.GEG_PRODUCT, Rule.MMD_DIAGONAL)


def suite_simplex(params_list, seed=0, steps=1000, n=6):
    good, checks = _validation("simplex", params_list)
    for p in good:
        rules = SIMPLEX_RULES + ((Rule.GEG_SIMPLIFIED_Q,) if p.family is Family.TSALLIS else ())
        if p.family is Family.SHANNON:
            # EGU ignores the family, so run it once
            rules = (Rule.EGU,) + rules
        for kind in rules:
            def body(p=p, kind=kind):
                rng = np.random.default_rng(seed)
                rule = UpdateRule(kind, Projection.SIMPLEX)
                w = np.full(n, 1.0 / n)
                worst_sum, worst_min = 0.0, math.inf
                for _ in range(steps):
                    w = normalized_step(p, w, rng.standard_normal(n), 0.05, rule)
                    worst_sum = max(worst_sum, abs(w.sum() - 1.0))
                    worst_min = min(worst_min, float(w.min()))
                name = f"{kind.value}:{p}"
                yield _check("simplex", f"sum:{name}", worst_sum, 1e-12)
                yield Check("simplex", f"nonneg:{name}", worst_min >= 0.0, max(0.0, -worst_min), 0.0)
            checks += _guarded("simplex", f"{kind.value}:{p}", body)
    return checks


# --- descent -----------------------------------------------------------------

DESCENT_RULES = (Rule.GD, Rule.EGU, Rule.GEG_PRODUCT, Rule.GEG_SIMPLIFIED_Q, Rule.MMD_DIAGONAL)


def descent_cells(params_list):
    """(problem, params, rule) cells of the desk-scale descent experiment."""
    problems = (quadratic(5, condition=10.0, seed=0), cross_entropy(5, seed=0))
    for prob in problems:
        proj = Projection.SIMPLEX if prob.domain.value == "unit_simplex" else Projection.NONE
        for p in params_list:
            for kind in DESCENT_RULES:
                if kind is Rule.GEG_SIMPLIFIED_Q and p.family is not Family.TSALLIS:
                    continue
                yield prob, p, UpdateRule(kind, proj)


def suite_descent(params_list, eta=0.01, iters=200):
    good, checks = _validation("descent", params_list)
    config = OptimizerConfig(eta=eta, max_iters=iters, grad_tol=1e-300)
    for prob, p, rule in descent_cells(good):
        name = f"{prob.name}:{rule.kind.value}:{p}"

        def body(prob=prob, p=p, rule=rule, name=name):
            trace = run(prob, p, rule, config)
            losses = np.array(trace.losses)
            rise = float(np.max(np.diff(losses))) if losses.size > 1 else 0.0
            yield Check("descent", f"monotone:{name}", rise <= 0.0, max(rise, 0.0), 0.0)
            gap0 = losses[0] - prob.optimal_value
            ratio = (losses[-1] - prob.optimal_value) / gap0 if gap0 > 0 else 0.0
            yield _check("descent", f"gap_ratio:{name}", float(ratio), 0.5)
        checks += _guarded("descent", name, body)
    return checks


SUITES = {
    "roundtrip": suite_roundtrip,
    "derivatives": suite_derivatives,
    "algebra": suite_algebra,
    "equivalence": suite_equivalence,
    "simplex": suite_simplex,
    "descent": suite_descent,
}


def run_suite(name, params_list=None):
    """Run one suite (or ``"all"``) on ``params_list`` (default grids when None)."""
    names = list(SUITES) if name == "all" else [name]
    out = []
    for n in names:
        if n not in SUITES:
            raise KeyError(f"unknown suite {n!r}; choose from {sorted(SUITES)} or 'all'")
        if params_list is not None:
            plist = params_list
        elif n == "descent":
            plist = DESCENT_GRID
        else:
            plist = all_params()
        out += SUITES[n](plist)
    return out
