"""Built-in benchmark problems with analytic gradients."""

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import nnls as _nnls

from .errors import ParameterError
from .numerics import finite_diff
from .optim import Domain


@dataclass(frozen=True)
class Problem:
    name: str
    dimension: int
    loss: Callable
    gradient: Callable
    domain: Domain
    optimum: np.ndarray | None = None
    optimal_value: float | None = None

    def initial_point(self):
        n = self.dimension
        if self.domain is Domain.UNIT_SIMPLEX:
            return np.full(n, 1.0 / n)
        return np.ones(n)

    def distance_to_optimum(self, w):
        if self.optimum is None:
            return None
        return float(np.linalg.norm(np.asarray(w) - self.optimum))


def check_gradient(problem, rng, points=3, rtol=1e-5):
    """Compare the analytic gradient with central differences at random feasible points."""
    n = problem.dimension
    for _ in range(points):
        w = rng.uniform(0.2, 1.5, n)
        if problem.domain is Domain.UNIT_SIMPLEX:
            w = w / w.sum()
        g = problem.gradient(w)
        for i in range(n):
            def f(t, i=i):
                v = w.copy()
                v[i] = t
                return problem.loss(v)
            fd = finite_diff(f, w[i])
            if abs(fd - g[i]) > rtol * max(1.0, abs(g[i])):
                raise ParameterError(
                    f"{problem.name}: gradient mismatch at component {i} ({g[i]!r} vs {fd!r})")
    return problem


def quadratic(n=5, condition=10.0, seed=0):
    """1/2 (w - w*)^T A (w - w*) with SPD A of the given condition number."""
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    eig = np.linspace(1.0, condition, n) if n > 1 else np.array([1.0])
    A = (q * eig) @ q.T
    A = 0.5 * (A + A.T)
    w_star = rng.uniform(0.5, 1.5, n)

    def loss(w):
        d = w - w_star
        return 0.5 * float(d @ A @ d)

    def gradient(w):
        return A @ (w - w_star)

    return Problem("quadratic", n, loss, gradient, Domain.POSITIVE_ORTHANT, w_star, 0.0)


def cross_entropy(n=5, seed=0):
    """-sum p_i ln w_i on the unit simplex; minimized at w = p."""
    rng = np.random.default_rng(seed)
    p = rng.uniform(0.5, 2.0, n)
    p = p / p.sum()

    def loss(w):
        with np.errstate(divide="ignore"):
            return float(-(p @ np.log(w)))

    def gradient(w):
        return -p / w

    return Problem("cross_entropy", n, loss, gradient, Domain.UNIT_SIMPLEX, p,
                   float(-(p @ np.log(p))))


def nonnegative_least_squares(n=5, m=8, seed=0):
    """1/2 ||A w - y||^2 on the positive orthant; optimum from an active-set NNLS solve."""
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, n))
    y = A @ rng.uniform(0.0, 1.0, n) + 0.1 * rng.standard_normal(m)
    w_opt, rnorm = _nnls(A, y)

    def loss(w):
        r = A @ w - y
        return 0.5 * float(r @ r)

    def gradient(w):
        return A.T @ (A @ w - y)

    return Problem("nnls", n, loss, gradient, Domain.POSITIVE_ORTHANT, w_opt, 0.5 * rnorm * rnorm)


BUILTIN = {
    "quadratic": quadratic,
    "cross_entropy": cross_entropy,
    "nnls": nonnegative_least_squares,
}


def make_problem(name, dimension=5, seed=0, self_check=True):
    try:
        factory = BUILTIN[name]
    except KeyError:
        raise ParameterError(f"unknown problem {name!r}; choose from {sorted(BUILTIN)}") from None
    problem = factory(n=dimension, seed=seed)
    if self_check:
        check_gradient(problem, np.random.default_rng(seed + 1))
    return problem
