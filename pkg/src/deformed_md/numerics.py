"""Root finding, series expansions, Lambert-Tsallis W_q, quadrature and
finite-difference oracles.

The root finders work on whole arrays at once: every component runs its
own safeguarded Newton/bisection iteration, which keeps the optimizer
path vectorized even for families without a closed-form exponential.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy import integrate

from . import _kernels as K
from .errors import BracketError, ConvergenceError, ParameterError, QuadratureError

RTOL_ROOT = 1e-12
MAX_DOUBLINGS = 200
MAX_ITER = 200


@dataclass(frozen=True)
class RootFindResult:
    root: float
    residual: float
    iterations: int
    converged: bool


def _tolerance(y):
    return RTOL_ROOT * np.maximum(1.0, np.abs(y))


def bracket_positive(f, y, seed, factor=2.0, max_expansions=MAX_DOUBLINGS, strict=True):
    """Grow ``[lo, hi]`` geometrically from ``seed`` until f(lo) <= y <= f(hi).

    ``f`` must be increasing on (0, inf). With ``strict`` a BracketError
    lists the components whose target could not be reached; otherwise the
    masks ``(below, above)`` of unreachable targets are returned as well.
    """
    y = np.asarray(y, dtype=float)
    lo = np.broadcast_to(np.asarray(seed, dtype=float), y.shape).copy()
    hi = lo.copy()
    with np.errstate(all="ignore"):
        fs = f(lo)
    up = fs < y
    down = fs > y
    for _ in range(max_expansions):
        if not up.any():
            break
        idx = np.flatnonzero(up)
        lo.flat[idx] = hi.flat[idx]
        hi.flat[idx] *= factor
        with np.errstate(all="ignore"):
            fh = f(hi.flat[idx])
        up.flat[idx] = ~(fh >= y.flat[idx])
    for _ in range(max_expansions):
        if not down.any():
            break
        idx = np.flatnonzero(down)
        hi.flat[idx] = lo.flat[idx]
        lo.flat[idx] /= factor
        with np.errstate(all="ignore"):
            fl = f(lo.flat[idx])
        down.flat[idx] = ~(fl <= y.flat[idx])
    if not strict:
        return lo, hi, down, up
    failed = up | down
    if failed.any():
        raise BracketError(
            f"target outside the reachable range at flat indices {np.flatnonzero(failed).tolist()}"
        )
    return lo, hi


def solve_increasing(f, y, lo, hi, fprime=None, x0=None, maxiter=MAX_ITER):
    """Safeguarded Newton/bisection for f(x) = y on brackets [lo, hi].

    Newton uses ``fprime`` when given, otherwise a secant through the
    previous iterate. A step leaving the current bracket is replaced by
    bisection (geometric when the bracket is positive and wide).
    Returns ``(x, residual, iterations, converged)`` arrays.
    """
    y = np.asarray(y, dtype=float)
    lo = np.array(lo, dtype=float, copy=True)
    hi = np.array(hi, dtype=float, copy=True)
    tol = _tolerance(y)
    if x0 is None:
        x = 0.5 * (lo + hi)
    else:
        x = np.clip(np.broadcast_to(x0, y.shape), lo, hi).astype(float)
    iters = np.zeros(y.shape, dtype=int)
    with np.errstate(all="ignore"):
        res = f(x) - y
    active = ~(np.abs(res) <= tol)
    x_prev = None
    res_prev = None
    for _ in range(maxiter):
        if not active.any():
            break
        below = active & (res < 0)
        above = active & (res > 0)
        lo = np.where(below, x, lo)
        hi = np.where(above, x, hi)
        with np.errstate(all="ignore"):
            if fprime is not None:
                slope = fprime(x)
            elif x_prev is not None:
                slope = (res - res_prev) / (x - x_prev)
            else:
                slope = np.full(y.shape, np.nan)
            x_newton = x - res / slope
            wide = (lo > 0) & (hi > 4.0 * lo)
            x_bisect = np.where(wide, np.sqrt(lo * hi), 0.5 * (lo + hi))
        ok = np.isfinite(x_newton) & (x_newton > lo) & (x_newton < hi)
        x_new = np.where(ok, x_newton, x_bisect)
        x_prev, res_prev = x, res
        x = np.where(active, x_new, x)
        iters = iters + active
        with np.errstate(all="ignore"):
            res = np.where(active, f(x) - y, res)
        done = np.abs(res) <= tol
        collapsed = (hi - lo) <= 4.0 * np.spacing(np.maximum(np.abs(lo), np.abs(hi)))
        active = active & ~done & ~collapsed
    converged = np.abs(res) <= tol
    return x, res, iters, converged


def invert_monotone(f, y, seed=1.0, fprime=None):
    """Solve f(x) = y for strictly increasing f on (0, inf).

    Works elementwise on array ``y``; a scalar ``y`` yields a
    RootFindResult, an array ``y`` a RootFindResult of arrays.
    """
    scalar = np.ndim(y) == 0
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    seed_arr = np.broadcast_to(np.asarray(seed, dtype=float), y_arr.shape)
    lo, hi = bracket_positive(f, y_arr, seed_arr)
    x, res, iters, conv = solve_increasing(f, y_arr, lo, hi, fprime=fprime, x0=seed_arr)
    if scalar:
        return RootFindResult(float(x[0]), float(res[0]), int(iters[0]), bool(conv[0]))
    return RootFindResult(x, res, iters, conv)


def _require_converged(result, what):
    if not np.all(result.converged):
        bad = np.flatnonzero(~np.atleast_1d(result.converged)).tolist()
        raise ConvergenceError(f"{what}: no convergence at flat indices {bad}")
    return result.root


def _seed_for(y):
    return np.exp(np.clip(y, -60.0, 60.0))


def exp_kls_numeric(kappa, r, x):
    """Inverse of the (kappa, r)-logarithm by root finding."""
    x = np.asarray(x, dtype=float)
    f = lambda t: K.log_kls(kappa, r, t)
    fp = lambda t: K.dlog_kls(kappa, r, t)
    res = invert_monotone(f, x, seed=_seed_for(x), fprime=fp)
    return _require_converged(res, "exp_kls_numeric")


def exp_cc_numeric(q, qp, r, x):
    """Inverse of the three-parameter (q, q', r) logarithm by root finding."""
    x = np.asarray(x, dtype=float)
    f = lambda t: K.log_cc(q, qp, r, t)
    fp = lambda t: K.dlog_cc(q, qp, r, t)
    res = invert_monotone(f, x, seed=_seed_for(x), fprime=fp)
    return _require_converged(res, "exp_cc_numeric")


def lambert_tsallis_w(q, z):
    """Principal branch of W * exp_q(W) = z.

    The product W * exp_q(W) has derivative exp_q(W)^q (1 + (2 - q) W), so
    the principal branch starts at W = -1/(2 - q). Only q < 2 is supported.
    """
    if not q < 2.0:
        raise ParameterError("lambert_tsallis_w supports q < 2 only")
    z = float(z)
    w_min = -1.0 / (2.0 - q)

    def h(w):
        v, _ = K.exp_tsallis(q, w, allow_inf=True)
        return w * v

    def hp(w):
        v, _ = K.exp_tsallis(q, w, allow_inf=True)
        return v ** q * (1.0 + (2.0 - q) * w)

    z_min = float(h(np.float64(w_min)))
    if z < z_min - 1e-15 * max(1.0, abs(z_min)):
        raise BracketError(f"z={z} below the branch minimum {z_min} for q={q}")
    if z <= z_min:
        return RootFindResult(w_min, z - z_min, 0, True)
    lo = np.array([w_min])
    # upper end: the pole 1/(q-1) for 1 < q < 2, otherwise grow geometrically
    pole = 1.0 / (q - 1.0) if q > 1.0 + K.GUARD else math.inf
    hi = max(1.0, abs(z))
    for _ in range(MAX_DOUBLINGS):
        if hi >= pole:
            hi = float(np.nextafter(pole, 0.0))
            break
        if h(np.float64(hi)) >= z:
            break
        hi *= 2.0
    hi_arr = np.array([hi])
    x, res, iters, conv = solve_increasing(
        lambda w: h(w), np.array([z]), lo, hi_arr, fprime=lambda w: hp(w),
    )
    residual = float(res[0])
    return RootFindResult(float(x[0]), residual, int(iters[0]), abs(residual) <= 1e-10 * max(1.0, abs(z)))


def exp_kls_lambert(kappa, r, x):
    """Lambert-Tsallis form of exp_{kappa,r} for kappa > 0 and |r| < kappa.

    With u = X**(-2 kappa) the equation log_{kappa,r}(X) = x becomes
    lam * u * (1 - u)**(-lam) = lam * (2 kappa x)**(-lam), i.e.
    W_Q(lam * (2 kappa x)**(-lam)) = lam * u with Q = (lam + 1)/lam.
    Negative x goes through exp_{kappa,r}(x) = 1/exp_{kappa,-r}(-x).
    Independent cross-check of the root finder, not used on the optimizer path.
    """
    kappa = abs(kappa)
    if not abs(r) < kappa:
        raise ParameterError("exp_kls_lambert needs |r| < |kappa|")
    x = float(x)
    if x == 0.0:
        return 1.0
    if x < 0.0:
        return 1.0 / exp_kls_lambert(kappa, -r, -x)
    lam = 2.0 * kappa / (r + kappa)
    qw = (lam + 1.0) / lam
    w = lambert_tsallis_w(qw, lam * (2.0 * kappa * x) ** (-lam))
    return (w.root / lam) ** (-1.0 / (2.0 * kappa))


# Truncated series (cross-checks only, never on the optimizer path)

def series_log_q(q, x):
    L = np.log(x)
    a = 1.0 - q
    return L + 0.5 * a * L**2 + a * a * L**3 / 6.0


def series_exp_q(q, x):
    return 1.0 + x + 0.5 * q * x**2 + (2.0 * q * q - q) * x**3 / 6.0


def series_log_kappa(kappa, x):
    L = np.log(x)
    k2 = kappa * kappa
    return L + k2 * L**3 / 6.0 + k2**2 * L**5 / 120.0 + k2**3 * L**7 / 5040.0


def series_exp_kappa(kappa, x):
    k2 = kappa * kappa
    return 1.0 + x + x**2 / 2.0 + (1.0 - k2) * x**3 / 6.0 + (1.0 - 4.0 * k2) * x**4 / 24.0


def series_log_kls(kappa, r, x):
    L = np.log(x)
    return L + r * L**2 + (kappa * kappa + 3.0 * r * r) * L**3 / 6.0


def series_exp_kls(kappa, r, x):
    return (1.0 + x + 0.5 * (1.0 - 2.0 * r) * x**2
            + (1.0 / 6.0 - r + 1.5 * r * r - kappa * kappa / 6.0) * x**3)


def finite_diff(f, x, order=1):
    """Central difference of a scalar function."""
    if order == 1:
        h = 1e-6 * max(1.0, abs(x))
        return (f(x + h) - f(x - h)) / (2.0 * h)
    if order == 2:
        h = 1e-4 * max(1.0, abs(x))
        return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
    raise ValueError(f"order must be 1 or 2, got {order}")


def quadrature(f, a, b, epsabs=1e-10):
    """Adaptive Gauss-Kronrod integral of ``f`` over [a, b]."""
    if a == b:
        return 0.0
    value, err, info = integrate.quad(f, a, b, epsabs=epsabs * 1e-3, epsrel=1e-13,
                                      limit=200, full_output=True)[:3]
    if not math.isfinite(value) or err > epsabs:
        raise QuadratureError(f"quadrature on [{a}, {b}] did not converge (error {err:g})")
    return value
