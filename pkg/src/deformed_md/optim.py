"""Mirror descent, generalized exponentiated gradient and MMD update rules,
the simplex-normalized scheme and the iteration driver.
"""

from dataclasses import dataclass, field
from enum import Enum
import math
import time

import numpy as np

from . import _kernels as K
from .algebra import d_prod_clip
from .core import Family, exp_d_clip, reduce_params, require_monotone
from .errors import (ConstraintError, DegenerateError, DeformedError, ExpOverflowError,
                     ParameterError, RangeError, StepError)
from .mirror import EuclideanMap, MirrorMap, link, link_derivative_reciprocal

SIMPLEX_TOL = 1e-9


class Rule(str, Enum):
    GD = "gd"
    EGU = "egu"
    GEG_PRODUCT = "geg_product"
    GEG_SIMPLIFIED_Q = "geg_simplified_q"
    MMD_DIAGONAL = "mmd_diagonal"


class Projection(str, Enum):
    NONE = "none"
    CLIP_NONNEG = "clip_nonneg"
    SIMPLEX = "simplex"


class Domain(str, Enum):
    POSITIVE_ORTHANT = "positive_orthant"
    UNIT_SIMPLEX = "unit_simplex"


@dataclass(frozen=True)
class UpdateRule:
    kind: Rule
    projection: Projection = Projection.NONE

    def __post_init__(self):
        object.__setattr__(self, "kind", Rule(self.kind))
        object.__setattr__(self, "projection", Projection(self.projection))


@dataclass(frozen=True)
class OptimizerConfig:
    eta: float
    max_iters: int = 1000
    grad_tol: float = 1e-10
    weight_floor: float = 1e-12
    schedule: str = "constant"

    def __post_init__(self):
        if not self.eta > 0:
            raise ParameterError(f"learning rate must be positive, got {self.eta}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 0:
            raise ParameterError(f"max_iters must be a nonnegative integer, got {self.max_iters}")
        if not self.grad_tol > 0:
            raise ParameterError("grad_tol must be positive")
        if not 0 < self.weight_floor <= 1e-6:
            raise ParameterError("weight_floor must lie in (0, 1e-6]")
        if self.schedule not in ("constant", "inverse_sqrt"):
            raise ParameterError(f"unknown schedule {self.schedule!r}")

    def learning_rate(self, t):
        if self.schedule == "inverse_sqrt":
            return self.eta / math.sqrt(t + 1.0)
        return self.eta


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    loss: float
    grad_norm: float
    w_min: float
    w_max: float
    clips: int
    step_time: float


@dataclass
class RunTrace:
    records: list = field(default_factory=list)
    termination: str = ""
    weights: np.ndarray | None = None

    @property
    def losses(self):
        return [rec.loss for rec in self.records]

    @property
    def iterations(self):
        return len(self.records) - 1


def check_weights(w, domain, floor=0.0):
    w = np.asarray(w, dtype=float)
    if not np.all(np.isfinite(w)):
        raise ConstraintError("weights must be finite")
    if np.any(w < floor):
        raise ConstraintError(f"weights below the floor {floor}")
    if Domain(domain) is Domain.UNIT_SIMPLEX and abs(w.sum() - 1.0) > SIMPLEX_TOL:
        raise ConstraintError(f"weights sum to {w.sum()!r}, not 1")
    return w


def _overflow_indices(params, theta):
    bad = []
    for i, t in enumerate(np.ravel(theta)):
        try:
            exp_d_clip(params, float(t))
        except (ExpOverflowError, ArithmeticError):
            bad.append(i)
    return bad


def md_step_explicit(mmap, w, grad, eta):
    """link_inverse(link(w) - eta * grad)."""
    w = np.asarray(w, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if isinstance(mmap, EuclideanMap):
        return w - eta * grad
    theta = link(mmap, w) - eta * grad
    try:
        v, _ = exp_d_clip(mmap.params, theta)
    except ExpOverflowError as exc:
        idx = _overflow_indices(mmap.params, theta)
        raise RangeError(f"dual point outside the link range ({exc})", idx) from exc
    return np.asarray(v)


def geg_step_product(params, w, grad, eta):
    """w (x)_D exp_d(-eta * grad), componentwise."""
    w = np.asarray(w, dtype=float)
    step = -eta * np.asarray(grad, dtype=float)
    try:
        e, _ = exp_d_clip(params, step)
        e = np.asarray(e)
        out = np.zeros(w.shape)
        live = e > 0
        if live.any():
            v, _ = d_prod_clip(params, w[live], e[live])
            out[live] = v
    except ExpOverflowError as exc:
        raise RangeError(f"GEG step outside the exponential range ({exc})",
                         _overflow_indices(params, step)) from exc
    return out


def geg_step_simplified_q(q, w, grad, eta):
    """w * exp_q(-eta * w^(q-1) * grad) with per-component rates eta * w^(q-1)."""
    w = np.asarray(w, dtype=float)
    if not q > 0:
        raise ParameterError(f"simplified q-GEG needs q > 0, got {q}")
    rates = eta * w ** (q - 1.0)
    arg = -rates * np.asarray(grad, dtype=float)
    try:
        v, _ = K.exp_tsallis(q, arg)
    except ExpOverflowError as exc:
        raise RangeError(f"simplified q-GEG past the exponential pole ({exc})",
                         np.flatnonzero(1.0 + (1.0 - q) * arg <= 0).tolist()) from exc
    return w * v


def _st_diagonal(q, qp, w):
    # w^q exp(((1-q')/(1-q)) (1 - w^(1-q)))
    return w ** q * np.exp((1.0 - qp) * -K.log_tsallis(q, w))


def mmd_step(mmap, w, grad, eta, floor=None):
    """[w - eta * diag(1/f'(w)) grad]_+, optionally floored."""
    w = np.asarray(w, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if isinstance(mmap, EuclideanMap):
        diag = np.ones(w.shape)
    else:
        p = reduce_params(require_monotone(mmap.params))
        if p.family is Family.SCHWAMMLE_TSALLIS:
            diag = _st_diagonal(p.q, p.q_prime, w)
        else:
            diag = link_derivative_reciprocal(mmap, w)
    out = np.maximum(w - eta * diag * grad, 0.0)
    if floor is not None:
        out = np.maximum(out, floor)
    return out


def normalized_gradient(w, grad):
    """grad - (w . grad) 1 for w on the unit simplex."""
    w = np.asarray(w, dtype=float)
    if np.any(w < 0) or abs(w.sum() - 1.0) > SIMPLEX_TOL:
        raise ConstraintError("normalized_gradient needs a point of the unit simplex")
    grad = np.asarray(grad, dtype=float)
    return grad - float(w @ grad)


def _raw_step(params, kind, w, grad, eta):
    if kind is Rule.GD:
        return md_step_explicit(EuclideanMap(), w, grad, eta)
    if kind is Rule.EGU:
        return w * np.exp(-eta * np.asarray(grad))
    if kind is Rule.GEG_PRODUCT:
        return geg_step_product(params, w, grad, eta)
    if kind is Rule.GEG_SIMPLIFIED_Q:
        if params.family is not Family.TSALLIS:
            raise ParameterError("the simplified q-GEG rule requires Tsallis parameters")
        return geg_step_simplified_q(params.q, w, grad, eta)
    if kind is Rule.MMD_DIAGONAL:
        return mmd_step(MirrorMap(params), w, grad, eta)
    raise ParameterError(f"unknown rule {kind}")  # pragma: no cover


def normalized_step(params, w, grad, eta, rule, floor=1e-12):
    """Apply ``rule`` to the normalized gradient, floor, then renormalize onto the simplex."""
    return _normalized_step(params, w, grad, eta, rule, floor)[0]


def _normalized_step(params, w, grad, eta, rule, floor):
    w = np.asarray(w, dtype=float)
    g = normalized_gradient(w, grad)
    raw = np.maximum(_raw_step(params, rule.kind, w, g, eta), 0.0)
    if not np.all(np.isfinite(raw)):
        raise RangeError("non-finite component before simplex renormalization",
                         np.flatnonzero(~np.isfinite(raw)).tolist())
    mass = raw.sum()
    if mass < floor * raw.size:
        raise DegenerateError(f"1-norm {mass!r} too small to renormalize")
    floored = raw < floor
    raw = np.where(floored, floor, raw)
    return raw / raw.sum(), int(np.count_nonzero(floored))


def step(params, rule, w, grad, eta, floor=1e-12):
    """One driver step; returns ``(w_next, clipped_count)``."""
    w = np.asarray(w, dtype=float)
    if rule.projection is Projection.SIMPLEX:
        return _normalized_step(params, w, grad, eta, rule, floor)
    raw = _raw_step(params, rule.kind, w, grad, eta)
    if not np.all(np.isfinite(raw)):
        raise RangeError("non-finite component after the update",
                         np.flatnonzero(~np.isfinite(raw)).tolist())
    if rule.projection is Projection.CLIP_NONNEG:
        raw = np.maximum(raw, 0.0)
    elif np.any(raw < 0):
        raise ConstraintError(
            f"iterate left the positive orthant at {np.flatnonzero(raw < 0).tolist()}; "
            "use projection clip_nonneg")
    floored = raw < floor
    return np.where(floored, floor, raw), int(np.count_nonzero(floored))


def recover_classical(params, rule):
    """Exact classical specialization of ``(params, rule)``.

    Returns the reduced parameters and the rule to use with them; GEG
    rules on Shannon parameters become EGU.
    """
    reduced = reduce_params(params)
    if reduced.family is Family.SHANNON and rule.kind in (Rule.GEG_PRODUCT, Rule.GEG_SIMPLIFIED_Q):
        return reduced, UpdateRule(Rule.EGU, rule.projection)
    if rule.kind is Rule.GEG_SIMPLIFIED_Q and reduced.family is not Family.TSALLIS:
        return reduced, UpdateRule(Rule.GEG_PRODUCT, rule.projection)
    return reduced, rule


def run(problem, params, rule, config, w0=None):
    """Iterate ``rule`` on ``problem`` from ``w0`` and record a RunTrace."""
    domain = Domain(problem.domain)
    simplex = domain is Domain.UNIT_SIMPLEX
    if simplex != (rule.projection is Projection.SIMPLEX):
        raise ConstraintError(
            f"problem domain {domain.value} needs projection "
            f"{'simplex' if simplex else 'none or clip_nonneg'}")
    if rule.kind is Rule.GEG_SIMPLIFIED_Q and params.family is not Family.TSALLIS:
        raise ParameterError("the simplified q-GEG rule requires Tsallis parameters")
    require_monotone(params)
    if w0 is None:
        w0 = problem.initial_point()
    w = check_weights(np.array(w0, dtype=float), domain, config.weight_floor if not simplex else 0.0)
    trace = RunTrace()
    clips = 0
    elapsed = 0.0
    t = 0
    while True:
        loss = float(problem.loss(w))
        g = np.asarray(problem.gradient(w), dtype=float)
        eff = g - float(w @ g) if simplex else g
        gnorm = float(np.max(np.abs(eff))) if eff.size else 0.0
        trace.records.append(IterationRecord(t, loss, gnorm, float(w.min()), float(w.max()), clips, elapsed))
        if not math.isfinite(loss) or not math.isfinite(gnorm):
            trace.termination = "diverged"
            break
        if gnorm <= config.grad_tol:
            trace.termination = "converged"
            break
        if t >= config.max_iters:
            trace.termination = "max_iters"
            break
        start = time.perf_counter()
        try:
            w, clips = step(params, rule, w, g, config.learning_rate(t), config.weight_floor)
        except DeformedError as exc:
            raise StepError(t, exc) from exc
        elapsed = time.perf_counter() - start
        t += 1
    trace.weights = w
    return trace
