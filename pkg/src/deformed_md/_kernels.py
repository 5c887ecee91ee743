"""Closed-form array kernels for every deformed logarithm family.

Kernels take float ndarrays, perform no parameter validation and no
classical-point dispatch beyond avoiding 0/0. Callers in ``core`` and
``numerics`` own validation and reductions.
"""

import numpy as np

from .errors import ExpOverflowError

GUARD = 1e-12


def _check_finite(values, what):
    bad = ~np.isfinite(values)
    if np.any(bad):
        idx = np.flatnonzero(bad)
        raise ExpOverflowError(f"{what} overflowed at flat indices {idx.tolist()}")
    return values


# Shannon

def log_shannon(x):
    return np.log(x)


def exp_shannon(y):
    with np.errstate(over="ignore"):
        v = np.exp(y)
    return _check_finite(v, "exp"), np.zeros(np.shape(y), dtype=bool)


def dlog_shannon(x):
    return 1.0 / x


def d2log_shannon(x):
    return -1.0 / (x * x)


# Tsallis

def log_tsallis(q, x):
    a = 1.0 - q
    lx = np.log(x)
    if abs(a) < GUARD:
        return lx
    with np.errstate(over="ignore"):
        return np.expm1(a * lx) / a


def exp_tsallis(q, y, *, allow_inf=False):
    """Tsallis exponential with the [.]_+ clip.

    Returns ``(value, clipped)``. A non-positive bracket with positive
    exponent clips to 0; with negative exponent it is a pole and raises
    unless ``allow_inf``.
    """
    y = np.asarray(y, dtype=float)
    a = 1.0 - q
    if abs(a) < GUARD:
        return exp_shannon(y)
    base = 1.0 + a * y
    nonpos = base <= 0.0
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        v = np.exp(np.log1p(a * y) / a)
    if a > 0:
        v = np.where(nonpos, 0.0, v)
        clipped = nonpos.copy()
    else:
        v = np.where(nonpos, np.inf, v)
        clipped = np.zeros(y.shape, dtype=bool)
    # exp(-inf) from y = -inf is a clip too
    clipped |= (v == 0.0)
    if not allow_inf:
        _check_finite(v, "Tsallis exp")
    return v, clipped


def dlog_tsallis(q, x):
    return x ** (-q)


def d2log_tsallis(q, x):
    return -q * x ** (-q - 1.0)


# Kaniadakis-Lissia-Scarfone (Kaniadakis is r = 0, Euler via a = r+k, b = r-k)

def _sinhc(kappa, lx):
    """sinh(kappa*lx)/kappa, continuous at kappa = 0."""
    if abs(kappa) < GUARD:
        return lx
    return np.sinh(kappa * lx) / kappa


def log_kls(kappa, r, x):
    lx = np.log(x)
    with np.errstate(over="ignore", invalid="ignore"):
        return np.exp(r * lx) * _sinhc(kappa, lx)


def dlog_kls(kappa, r, x):
    lx = np.log(x)
    with np.errstate(over="ignore", invalid="ignore"):
        return np.exp((r - 1.0) * lx) * (r * _sinhc(kappa, lx) + np.cosh(kappa * lx))


def d2log_kls(kappa, r, x):
    lx = np.log(x)
    with np.errstate(over="ignore", invalid="ignore"):
        bracket = (r * (r - 1.0) * _sinhc(kappa, lx) + kappa * np.sinh(kappa * lx)
                   + (2.0 * r - 1.0) * np.cosh(kappa * lx))
        return np.exp((r - 2.0) * lx) * bracket


def exp_kaniadakis(kappa, y):
    y = np.asarray(y, dtype=float)
    if abs(kappa) < GUARD:
        return exp_shannon(y)
    with np.errstate(over="ignore"):
        v = np.exp(np.arcsinh(kappa * y) / kappa)
    return _check_finite(v, "Kaniadakis exp"), np.zeros(y.shape, dtype=bool)


# Schwammle-Tsallis: log^T_{q'}(exp(log^T_q(x)))

def log_st(q, qp, x):
    return log_tsallis_of_exp(qp, log_tsallis(q, x))


def log_tsallis_of_exp(q, z):
    """log^T_q(exp(z)) = expm1((1-q) z)/(1-q)."""
    a = 1.0 - q
    if abs(a) < GUARD:
        return np.asarray(z, dtype=float) * 1.0
    with np.errstate(over="ignore"):
        return np.expm1(a * z) / a


def ln_exp_tsallis(q, y):
    """ln(exp^T_q(y)) = log1p((1-q) y)/(1-q); -inf where the clip is active."""
    y = np.asarray(y, dtype=float)
    a = 1.0 - q
    if abs(a) < GUARD:
        return y * 1.0
    base = 1.0 + a * y
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.log1p(a * y) / a
    if a > 0:
        z = np.where(base <= 0.0, -np.inf, z)
    else:
        z = np.where(base <= 0.0, np.inf, z)
    return z


def dlog_st(q, qp, x):
    with np.errstate(over="ignore"):
        return x ** (-q) * np.exp((1.0 - qp) * log_tsallis(q, x))


def d2log_st(q, qp, x):
    with np.errstate(over="ignore", invalid="ignore"):
        e = np.exp((1.0 - qp) * log_tsallis(q, x))
        return x ** (-q - 1.0) * e * (-q + (1.0 - qp) * x ** (1.0 - q))


def exp_st(q, qp, y, *, allow_inf=False):
    """Closed ST exponential exp^T_q(ln(exp^T_{q'}(y)))."""
    z = ln_exp_tsallis(qp, y)
    if not allow_inf and np.any(z == np.inf):
        raise ExpOverflowError("ST exp: inner Tsallis exponential past its pole")
    inner_clip = z == -np.inf
    v, clipped = exp_tsallis(q, z, allow_inf=allow_inf)
    return v, clipped | inner_clip


# Corcino three-parameter: log^T_r(exp(log^ST_{q,q'}(x)))

def log_cc(q, qp, r, x):
    return log_tsallis_of_exp(r, log_st(q, qp, x))


def dlog_cc(q, qp, r, x):
    L = log_st(q, qp, x)
    with np.errstate(over="ignore"):
        return np.exp((1.0 - r) * L) * dlog_st(q, qp, x)


def d2log_cc(q, qp, r, x):
    L = log_st(q, qp, x)
    d1 = dlog_st(q, qp, x)
    with np.errstate(over="ignore", invalid="ignore"):
        return np.exp((1.0 - r) * L) * ((1.0 - r) * d1 * d1 + d2log_st(q, qp, x))
