"""Deformed logarithms, their inverse exponentials and derivatives.

Every public function accepts a scalar or an array argument and returns
the same kind. Parameters are carried by an immutable :class:`EntropyParams`.
"""

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
import math

import numpy as np

from . import _kernels as K
from . import numerics
from .errors import (ConvergenceError, DomainError, ExpOverflowError, ParameterError,
                     UnsupportedFamilyError)

GUARD = K.GUARD


class Family(str, Enum):
    SHANNON = "shannon"
    TSALLIS = "tsallis"
    KANIADAKIS = "kaniadakis"
    SCHWAMMLE_TSALLIS = "schwammle_tsallis"
    CORCINO = "corcino"
    KLS = "kls"
    EULER = "euler"


HYPERPARAMETERS = {
    Family.SHANNON: (),
    Family.TSALLIS: ("q",),
    Family.KANIADAKIS: ("kappa",),
    Family.SCHWAMMLE_TSALLIS: ("q", "q_prime"),
    Family.CORCINO: ("q", "q_prime", "r"),
    Family.KLS: ("kappa", "r"),
    Family.EULER: ("a", "b"),
}

_ALL_FIELDS = ("q", "kappa", "q_prime", "r", "a", "b")


@dataclass(frozen=True)
class EntropyParams:
    """A deformed-logarithm family together with its hyperparameters."""

    family: Family
    q: float | None = None
    kappa: float | None = None
    q_prime: float | None = None
    r: float | None = None
    a: float | None = None
    b: float | None = None

    def __post_init__(self):
        try:
            fam = Family(self.family)
        except ValueError:
            raise ParameterError(f"unknown family {self.family!r}") from None
        object.__setattr__(self, "family", fam)
        needed = HYPERPARAMETERS[fam]
        for name in _ALL_FIELDS:
            value = getattr(self, name)
            if name in needed:
                if value is None:
                    raise ParameterError(f"{fam.value} requires hyperparameter {name!r}")
                value = float(value)
                if not math.isfinite(value):
                    raise ParameterError(f"{name} must be finite, got {value}")
                object.__setattr__(self, name, value)
            elif value is not None:
                raise ParameterError(f"{fam.value} takes no hyperparameter {name!r}")

    @classmethod
    def shannon(cls):
        return cls(Family.SHANNON)

    @classmethod
    def tsallis(cls, q):
        return cls(Family.TSALLIS, q=q)

    @classmethod
    def kaniadakis(cls, kappa):
        return cls(Family.KANIADAKIS, kappa=kappa)

    @classmethod
    def schwammle_tsallis(cls, q, q_prime):
        return cls(Family.SCHWAMMLE_TSALLIS, q=q, q_prime=q_prime)

    @classmethod
    def corcino(cls, q, q_prime, r):
        return cls(Family.CORCINO, q=q, q_prime=q_prime, r=r)

    @classmethod
    def kls(cls, kappa, r):
        return cls(Family.KLS, kappa=kappa, r=r)

    @classmethod
    def kls_omega(cls, kappa, omega):
        """KLS parameters from the ratio omega = r/kappa; stored as (kappa, r)."""
        return cls(Family.KLS, kappa=kappa, r=omega * kappa)

    @classmethod
    def euler(cls, a, b):
        return cls(Family.EULER, a=a, b=b)

    @classmethod
    def from_mapping(cls, family, values):
        fam = Family(family)
        extra = set(values) - set(HYPERPARAMETERS[fam])
        if extra:
            raise ParameterError(f"{fam.value} takes no hyperparameter(s) {sorted(extra)}")
        return cls(fam, **dict(values))

    def hyperparameters(self):
        return {name: getattr(self, name) for name in HYPERPARAMETERS[self.family]}

    def __str__(self):
        inner = ",".join(f"{k}={v!r}" for k, v in self.hyperparameters().items())
        return f"{self.family.value}({inner})"


@dataclass(frozen=True)
class ValidationReport:
    monotone_ok: bool
    concave_ok: bool
    messages: list = field(default_factory=list)

    @property
    def ok(self):
        return self.monotone_ok and self.concave_ok


def _near(a, b):
    return abs(a - b) < GUARD


def _st_concave(q, qp):
    # d2 log = x^{-q-1} E (-q + (1-q') x^{1-q}); x^{1-q} sweeps (0, inf) unless q = 1
    if _near(q, 1.0):
        return qp > 0.0
    if _near(qp, 1.0):
        return q > 0.0
    return qp > 1.0 and q >= 0.0


def _corcino_concave(q, qp, r):
    if _near(r, 1.0):
        return _st_concave(q, qp)
    if _near(qp, 1.0):
        return _st_concave(q, r)
    if _near(q, 1.0):
        return _st_concave(qp, r)
    # sign of d2 log is the sign of g(u) = (1-r) u E(u) + (1-q') u - q, u = x^{1-q} > 0,
    # E(u) = exp(c (u - 1)), c = (1-q')/(1-q)
    if q <= 0.0:
        return False
    c = (1.0 - qp) / (1.0 - q)
    if c > 0.0 and r < 1.0:
        return False
    if c < 0.0 and qp < 1.0:
        return False
    u = np.logspace(-12, 12, 4801)
    with np.errstate(over="ignore", invalid="ignore"):
        g = (1.0 - r) * u * np.exp(c * (u - 1.0)) + (1.0 - qp) * u - q
    g = g[np.isfinite(g)]
    return bool(np.all(g < 0.0))


def _kls_ranges(kappa, r):
    k = abs(kappa)
    monotone = k < 1.0 and -k <= r <= k and not (k == 0.0 and r != 0.0)
    upper = 0.5 - abs(0.5 - k)
    # at r = kappa = 1/2 the log degenerates to x - 1 (zero curvature)
    concave = monotone and -k <= r <= upper and not (_near(k, 0.5) and _near(r, 0.5))
    return monotone, concave


@lru_cache(maxsize=512)
def validate(params):
    """Report whether ``params`` lie in the monotonicity and strict-concavity ranges."""
    fam = params.family
    msgs = []
    if fam is Family.SHANNON:
        mono, conc = True, True
    elif fam is Family.TSALLIS:
        mono = True
        conc = params.q > 0.0
        if not conc:
            msgs.append(f"Tsallis q={params.q}: strict concavity requires q > 0")
    elif fam is Family.KANIADAKIS:
        mono = conc = -1.0 < params.kappa < 1.0
        if not mono:
            msgs.append(f"Kaniadakis kappa={params.kappa}: requires -1 < kappa < 1")
    elif fam is Family.SCHWAMMLE_TSALLIS:
        mono = True
        conc = _st_concave(params.q, params.q_prime)
        if not conc:
            msgs.append(f"ST (q, q')=({params.q}, {params.q_prime}): not concave on all of (0, inf)")
    elif fam is Family.CORCINO:
        mono = True
        conc = _corcino_concave(params.q, params.q_prime, params.r)
        if not conc:
            msgs.append(f"Corcino {params}: not concave on all of (0, inf)")
    elif fam is Family.KLS:
        mono, conc = _kls_ranges(params.kappa, params.r)
        k, r = abs(params.kappa), params.r
        if not k < 1.0:
            msgs.append(f"KLS kappa={params.kappa}: requires |kappa| < 1")
        if not mono and k < 1.0:
            msgs.append(f"KLS r={r}: monotonicity requires -|kappa| <= r <= |kappa|")
        if mono and not conc:
            msgs.append(f"KLS r={r}: concavity requires -|kappa| <= r <= 1/2 - |1/2 - |kappa||")
    elif fam is Family.EULER:
        a, b = params.a, params.b
        hi, lo = max(a, b), min(a, b)
        if a == b:
            mono = conc = False
            msgs.append("Euler logarithm requires a != b")
        else:
            # d log ~ hi x^{hi-lo} - lo, d2 log ~ hi(hi-1) x^{hi-lo} - lo(lo-1)
            mono = hi >= 0.0 >= lo
            conc = mono and 0.0 <= hi <= 1.0 and not (hi == 1.0 and lo == 0.0)
            if not mono:
                msgs.append(f"Euler (a, b)=({a}, {b}): monotonicity requires a*b <= 0")
            elif not conc:
                msgs.append(f"Euler (a, b)=({a}, {b}): concavity requires the positive exponent <= 1")
    else:  # pragma: no cover
        raise UnsupportedFamilyError(fam)
    return ValidationReport(bool(mono), bool(conc), msgs)


def require_monotone(params):
    report = validate(params)
    if not report.monotone_ok:
        raise ParameterError("; ".join(report.messages) or f"{params} outside the monotone range")
    return params


@lru_cache(maxsize=512)
def reduce_params(params):
    """Map classical parameter points (within the guard band) to the simplest family."""
    fam = params.family
    P = EntropyParams
    if fam is Family.TSALLIS and _near(params.q, 1.0):
        return P.shannon()
    if fam is Family.KANIADAKIS and _near(params.kappa, 0.0):
        return P.shannon()
    if fam is Family.SCHWAMMLE_TSALLIS:
        if _near(params.q_prime, 1.0):
            return reduce_params(P.tsallis(params.q))
        if _near(params.q, 1.0):
            return reduce_params(P.tsallis(params.q_prime))
    if fam is Family.CORCINO:
        q, qp, r = params.q, params.q_prime, params.r
        if _near(r, 1.0):
            return reduce_params(P.schwammle_tsallis(q, qp))
        if _near(qp, 1.0):
            return reduce_params(P.schwammle_tsallis(q, r))
        if _near(q, 1.0):
            return reduce_params(P.schwammle_tsallis(qp, r))
    if fam is Family.KLS:
        k, r = params.kappa, params.r
        if _near(k, 0.0):
            return P.shannon() if _near(r, 0.0) else params
        if _near(r, 0.0):
            return reduce_params(P.kaniadakis(k))
        if _near(r, abs(k)):
            return reduce_params(P.tsallis(1.0 - 2.0 * abs(k)))
        if _near(r, -abs(k)):
            return reduce_params(P.tsallis(1.0 + 2.0 * abs(k)))
    if fam is Family.EULER:
        kls = P.kls((params.a - params.b) / 2.0, (params.a + params.b) / 2.0)
        reduced = reduce_params(kls)
        return reduced
    return params


def _prepare(x):
    scalar = np.ndim(x) == 0
    arr = np.asarray(x, dtype=float)
    return arr, scalar


def _finish(v, scalar):
    return float(v) if scalar else v


def _positive_argument(x):
    arr, scalar = _prepare(x)
    bad = ~(arr > 0.0)
    if np.any(bad):
        raise DomainError(f"deformed logarithm needs x > 0; got {arr[bad].ravel()[:5].tolist()}")
    return arr, scalar


def _dispatch(params, table, x):
    p = reduce_params(params)
    fam = p.family
    if fam is Family.SHANNON:
        return table["shannon"](x)
    if fam is Family.TSALLIS:
        return table["tsallis"](p.q, x)
    if fam is Family.KANIADAKIS:
        return table["kls"](p.kappa, 0.0, x)
    if fam is Family.SCHWAMMLE_TSALLIS:
        return table["st"](p.q, p.q_prime, x)
    if fam is Family.CORCINO:
        return table["cc"](p.q, p.q_prime, p.r, x)
    if fam is Family.KLS:
        return table["kls"](p.kappa, p.r, x)
    raise UnsupportedFamilyError(fam)  # pragma: no cover


_LOG = {"shannon": K.log_shannon, "tsallis": K.log_tsallis, "kls": K.log_kls,
        "st": K.log_st, "cc": K.log_cc}
_DLOG = {"shannon": K.dlog_shannon, "tsallis": K.dlog_tsallis, "kls": K.dlog_kls,
         "st": K.dlog_st, "cc": K.dlog_cc}
_D2LOG = {"shannon": K.d2log_shannon, "tsallis": K.d2log_tsallis, "kls": K.d2log_kls,
          "st": K.d2log_st, "cc": K.d2log_cc}


def log_d(params, x):
    """Deformed logarithm of ``x`` (> 0) for the family in ``params``."""
    require_monotone(params)
    arr, scalar = _positive_argument(x)
    return _finish(_dispatch(params, _LOG, arr), scalar)


def dlog_d(params, x):
    """First derivative of :func:`log_d`."""
    require_monotone(params)
    arr, scalar = _positive_argument(x)
    return _finish(_dispatch(params, _DLOG, arr), scalar)


def d2log_d(params, x):
    """Second derivative of :func:`log_d`."""
    require_monotone(params)
    arr, scalar = _positive_argument(x)
    return _finish(_dispatch(params, _D2LOG, arr), scalar)


def _invert_numeric(f, fp, y):
    """Root-find the inverse of an increasing log; clip to 0 below its range."""
    y = np.atleast_1d(y)
    finite = np.isfinite(y)
    if np.any(y[~finite] > 0):
        raise ExpOverflowError("deformed exp of +inf")
    out = np.zeros(y.shape)
    clipped = ~finite
    if finite.any():
        yf = y[finite]
        seed = numerics._seed_for(yf)
        lo, hi, below, above = numerics.bracket_positive(f, yf, seed, strict=False)
        if above.any():
            raise ExpOverflowError(
                f"deformed exp beyond the representable range at {yf[above][:5].tolist()}")
        ok = ~below
        roots = np.zeros(yf.shape)
        if ok.any():
            x, res, _, conv = numerics.solve_increasing(
                f, yf[ok], lo[ok], hi[ok], fprime=fp, x0=seed[ok])
            if not conv.all():
                raise ConvergenceError(f"numeric inversion failed for y={yf[ok][~conv][:5].tolist()}")
            roots[ok] = x
        out[finite] = roots
        sub = clipped[finite]
        sub |= below
        clipped[finite] = sub
    return out, clipped


def exp_d_clip(params, y):
    """Deformed exponential plus a mask of components where the [.]_+ clip is active."""
    require_monotone(params)
    arr, scalar = _prepare(y)
    p = reduce_params(params)
    fam = p.family
    if fam is Family.SHANNON:
        v, c = K.exp_shannon(arr)
    elif fam is Family.TSALLIS:
        v, c = K.exp_tsallis(p.q, arr)
    elif fam is Family.KANIADAKIS:
        v, c = K.exp_kaniadakis(p.kappa, arr)
    elif fam is Family.SCHWAMMLE_TSALLIS:
        v, c = K.exp_st(p.q, p.q_prime, arr)
    elif fam is Family.CORCINO:
        q, qp, r = p.q, p.q_prime, p.r
        v, c = _invert_numeric(lambda t: K.log_cc(q, qp, r, t),
                               lambda t: K.dlog_cc(q, qp, r, t), arr.ravel())
        v, c = v.reshape(arr.shape), c.reshape(arr.shape)
    elif fam is Family.KLS:
        k, r = p.kappa, p.r
        v, c = _invert_numeric(lambda t: K.log_kls(k, r, t),
                               lambda t: K.dlog_kls(k, r, t), arr.ravel())
        v, c = v.reshape(arr.shape), c.reshape(arr.shape)
    else:  # pragma: no cover
        raise UnsupportedFamilyError(fam)
    if scalar:
        return float(v), bool(c)
    return v, c


def exp_d(params, y):
    """Deformed exponential, the inverse of :func:`log_d` on its range."""
    v, _ = exp_d_clip(params, y)
    return v


def duality_conjugate(params):
    """Parameters of the dual logarithm: log_d(p, 1/x) = -log_d(dual, x)."""
    fam = params.family
    if fam is Family.SHANNON or fam is Family.KANIADAKIS:
        return params
    if fam is Family.TSALLIS:
        return EntropyParams.tsallis(2.0 - params.q)
    if fam is Family.KLS:
        return EntropyParams.kls(params.kappa, -params.r)
    if fam is Family.SCHWAMMLE_TSALLIS:
        return EntropyParams.schwammle_tsallis(2.0 - params.q, 2.0 - params.q_prime)
    raise UnsupportedFamilyError(f"no dual logarithm is defined for the {fam.value} family")
