"""Mirror maps, link functions and Bregman divergences.

For every entropy family the link is the componentwise deformed logarithm.
The mirror value F has a closed form for Shannon, Tsallis and Kaniadakis;
for the other families F(w) = sum_i int_1^{w_i} log_d(t) dt by quadrature.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .core import EntropyParams, Family, dlog_d, exp_d_clip, log_d, reduce_params, require_monotone
from .errors import DomainError
from .numerics import quadrature


@dataclass(frozen=True)
class MirrorMap:
    params: EntropyParams
    reference_point: float = 1.0

    def __post_init__(self):
        if not self.reference_point > 0:
            raise DomainError("reference_point must be positive")


@dataclass(frozen=True)
class EuclideanMap:
    """F(w) = ||w||^2 / 2 with identity link."""


def _positive_vector(w):
    w = np.asarray(w, dtype=float)
    if not np.all(w > 0):
        raise DomainError("mirror map arguments must be componentwise positive")
    return w


def link(mmap, w):
    if isinstance(mmap, EuclideanMap):
        return np.array(w, dtype=float)
    return np.asarray(log_d(mmap.params, _positive_vector(w)))


def link_inverse(mmap, theta):
    theta = np.asarray(theta, dtype=float)
    if isinstance(mmap, EuclideanMap):
        return theta.copy()
    v, _ = exp_d_clip(mmap.params, theta)
    return np.asarray(v)


def link_derivative_reciprocal(mmap, w):
    """Diagonal of the inverse Hessian of a separable F: 1/f'(w_i)."""
    if isinstance(mmap, EuclideanMap):
        return np.ones(np.shape(w))
    return 1.0 / np.asarray(dlog_d(mmap.params, _positive_vector(w)))


def _tsallis_value(q, w):
    # w log_q(w) - log_{q-1}(w); its derivative is log_q(w)
    return w * K.log_tsallis(q, w) - K.log_tsallis(q - 1.0, w)


def _integral_of_log(params, a, b):
    return quadrature(lambda t: log_d(params, t), a, b)


def mirror_value(mmap, w):
    """F(w) for the map; quadrature families integrate the link from the reference point."""
    if isinstance(mmap, EuclideanMap):
        w = np.asarray(w, dtype=float)
        return 0.5 * float(w @ w)
    w = _positive_vector(w)
    p = reduce_params(require_monotone(mmap.params))
    if p.family is Family.SHANNON:
        return float(np.sum(w * np.log(w) - w))
    if p.family is Family.TSALLIS:
        return float(np.sum(_tsallis_value(p.q, w)))
    if p.family is Family.KANIADAKIS:
        k = p.kappa
        return float(np.sum((w ** (1 + k) / (1 + k) - w ** (1 - k) / (1 - k)) / (2 * k)))
    ref = mmap.reference_point
    return float(sum(_integral_of_log(mmap.params, ref, wi) for wi in w))


def _check_pair(w, w_ref):
    w = np.asarray(w, dtype=float)
    w_ref = np.asarray(w_ref, dtype=float)
    if w.shape != w_ref.shape:
        raise ValueError(f"dimension mismatch: {w.shape} vs {w_ref.shape}")
    return w, w_ref


def beta_divergence(q, w, w_ref):
    """Closed-form Bregman divergence of the Tsallis map (beta = 1 - q, q not in {1, 2})."""
    w, v = _check_pair(w, w_ref)
    a = 1.0 - q
    return float(np.sum(w * (w ** a - v ** a) / a - (w ** (a + 1) - v ** (a + 1)) / (a + 1)))


def bregman_definitional(mmap, w, w_ref):
    """F(w) - F(w_ref) - (w - w_ref) . link(w_ref)."""
    w, v = _check_pair(w, w_ref)
    return mirror_value(mmap, w) - mirror_value(mmap, v) - float((w - v) @ link(mmap, v))


def bregman(mmap, w, w_ref):
    """Bregman divergence D_F(w || w_ref) >= 0."""
    w, v = _check_pair(w, w_ref)
    if isinstance(mmap, EuclideanMap):
        d = w - v
        return 0.5 * float(d @ d)
    _positive_vector(w)
    _positive_vector(v)
    p = reduce_params(require_monotone(mmap.params))
    if p.family is Family.SHANNON:
        return float(np.sum(w * np.log(w / v) - w + v))
    if p.family is Family.TSALLIS and abs(p.q - 2.0) > K.GUARD:
        return beta_divergence(p.q, w, v)
    if p.family in (Family.TSALLIS, Family.KANIADAKIS):
        return bregman_definitional(mmap, w, v)
    # integrate log_d(t) - log_d(v_i) over [v_i, w_i]; nonnegative by monotonicity
    total = 0.0
    lv = np.atleast_1d(log_d(mmap.params, v))
    for wi, vi, li in zip(w, v, lv):
        total += quadrature(lambda t, li=li: log_d(mmap.params, t) - li, vi, wi)
    return total
