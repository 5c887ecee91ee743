"""q-algebra, kappa-algebra and the generic D-product.

The products turn deformed exponentials of sums into products, e.g.
``exp_q(a + b) == q_prod(q, exp_q(a), exp_q(b))``.
"""

import numpy as np

from . import _kernels as K
from .core import Family, exp_d_clip, log_d, reduce_params
from .errors import ExpOverflowError, SingularityError


def _out(v, *args):
    return float(v) if all(np.ndim(a) == 0 for a in args) else v


def q_sum(q, x, y):
    return _out(np.add(x, y) + (1.0 - q) * np.multiply(x, y), x, y)


def q_sub(q, x, y):
    den = 1.0 + (1.0 - q) * np.asarray(y, dtype=float)
    if np.any(den == 0.0):
        raise SingularityError(f"q-subtraction undefined at y = -1/(1-q) (q={q})")
    return _out((np.subtract(x, y)) / den, x, y)


def q_prod_clip(q, x, y):
    """q-product and its clip mask."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    a = 1.0 - q
    if abs(a) < K.GUARD:
        v = x * y
        return v, np.zeros(v.shape, dtype=bool)
    with np.errstate(divide="ignore", over="ignore"):
        base = x ** a + y ** a - 1.0
        clipped = base <= 0.0
        v = np.where(clipped, 0.0, np.abs(base) ** (1.0 / a))
    if a < 0:
        # negative exponent: a non-positive bracket is a pole, not a clip
        v = np.where(clipped, np.inf, v)
        clipped = np.zeros(v.shape, dtype=bool)
    return v, clipped


def q_prod(q, x, y):
    """[x^(1-q) + y^(1-q) - 1]_+^(1/(1-q)) for x, y > 0."""
    v, _ = q_prod_clip(q, x, y)
    return _out(v, x, y)


def q_div(q, x, y):
    """[x^(1-q) - y^(1-q) + 1]_+^(1/(1-q))."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    a = 1.0 - q
    if abs(a) < K.GUARD:
        return _out(x / y, x, y)
    with np.errstate(divide="ignore", over="ignore"):
        base = x ** a - y ** a + 1.0
        v = np.where(base <= 0.0, 0.0 if a > 0 else np.inf, np.abs(base) ** (1.0 / a))
    return _out(v, x, y)


def kappa_sum(kappa, x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    k2 = kappa * kappa
    return _out(x * np.sqrt(1.0 + k2 * y * y) + y * np.sqrt(1.0 + k2 * x * x), x, y)


def kappa_sub(kappa, x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    k2 = kappa * kappa
    return _out(x * np.sqrt(1.0 + k2 * y * y) - y * np.sqrt(1.0 + k2 * x * x), x, y)


def kappa_prod(kappa, x, y):
    """exp_kappa(log_kappa(x) + log_kappa(y))."""
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if abs(kappa) < K.GUARD:
        return _out(xa * ya, x, y)
    s = K.log_kls(kappa, 0.0, xa) + K.log_kls(kappa, 0.0, ya)
    v, _ = K.exp_kaniadakis(kappa, s)
    return _out(v, x, y)


def kappa_prod_closed(kappa, x, y):
    """Closed form exp((1/kappa) arsinh((x^k - x^-k + y^k - y^-k)/2))."""
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if abs(kappa) < K.GUARD:
        return _out(xa * ya, x, y)
    s = (xa ** kappa - xa ** -kappa + ya ** kappa - ya ** -kappa) / 2.0
    return _out(np.exp(np.arcsinh(s) / kappa), x, y)


def kappa_div(kappa, x, y):
    """x kappa-times 1/y."""
    return kappa_prod(kappa, x, 1.0 / np.asarray(y, dtype=float))


def d_prod_clip(params, x, y):
    """Generic product exp_d(log_d(x) + log_d(y)) with its clip mask."""
    p = reduce_params(params)
    if p.family is Family.SHANNON:
        v = np.asarray(x, dtype=float) * np.asarray(y, dtype=float)
        return v, np.zeros(np.shape(v), dtype=bool)
    if p.family is Family.TSALLIS:
        v, c = q_prod_clip(p.q, x, y)
        if np.any(np.isinf(v)):
            raise ExpOverflowError("q-product past its pole")
        return v, c
    if p.family is Family.KANIADAKIS:
        v = np.asarray(kappa_prod(p.kappa, x, y))
        return v, np.zeros(v.shape, dtype=bool)
    s = np.asarray(log_d(params, x)) + np.asarray(log_d(params, y))
    return exp_d_clip(params, s)


def d_prod(params, x, y):
    v, _ = d_prod_clip(params, x, y)
    return _out(v, x, y)
