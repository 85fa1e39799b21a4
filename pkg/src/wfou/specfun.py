"""Log-gamma, beta and Gauss-Jacobi rules on [0, 1]."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from .errors import ConvergenceError, DomainError

DEFAULT_ORDER = 64


def ln_gamma(x: float) -> float:
    """Natural log of the gamma function for ``x > 0``.

    Backed by the C library ``lgamma`` through :func:`math.lgamma`, which
    is accurate to a few ulp on the positive axis.
    """
    x = float(x)
    if not x > 0.0 or math.isinf(x):
        raise DomainError(f"ln_gamma requires a finite x > 0, got {x!r}")
    return math.lgamma(x)


def gamma_fn(x: float) -> float:
    return math.exp(ln_gamma(x))


def beta_fn(c: float, d: float) -> float:
    """Euler beta function B(c, d) = Gamma(c) Gamma(d) / Gamma(c + d)."""
    c = float(c)
    d = float(d)
    if not (c > 0.0 and d > 0.0):
        raise DomainError(f"beta_fn requires c > 0 and d > 0, got c={c!r}, d={d!r}")
    # ordered sum keeps beta_fn(c, d) == beta_fn(d, c) bit for bit
    lo, hi = min(c, d), max(c, d)
    return math.exp(ln_gamma(lo) + ln_gamma(hi) - ln_gamma(lo + hi))


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Gauss rule for the weight ``(1 - x)**alpha_exp * x**beta_exp`` on [0, 1].

    ``integrate(f)`` approximates the weighted integral of ``f``.
    """

    nodes: np.ndarray
    weights: np.ndarray
    alpha_exp: float
    beta_exp: float
    order: int

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, f(self.nodes)))

    @property
    def mass(self) -> float:
        return beta_fn(self.beta_exp + 1.0, self.alpha_exp + 1.0)


def gauss_jacobi(order: int, alpha_exp: float = 0.0, beta_exp: float = 0.0) -> QuadratureRule:
    """Gauss-Jacobi rule of ``order`` nodes on [0, 1].

    Exact for polynomials of degree ``2 * order - 1`` against the weight
    ``(1 - x)**alpha_exp * x**beta_exp``.  Rules are cached, so repeated
    calls with the same arguments return the same immutable object.
    """
    if int(order) != order or order < 1:
        raise DomainError(f"quadrature order must be a positive integer, got {order!r}")
    if not (alpha_exp > -1.0 and beta_exp > -1.0):
        raise DomainError(
            f"Jacobi exponents must exceed -1, got alpha_exp={alpha_exp!r}, beta_exp={beta_exp!r}"
        )
    return _gauss_jacobi(int(order), float(alpha_exp), float(beta_exp))


@lru_cache(maxsize=256)
def _gauss_jacobi(order: int, alpha_exp: float, beta_exp: float) -> QuadratureRule:
    # scipy's weight on [-1, 1] is (1 - y)**alpha * (1 + y)**beta; x = (1 + y) / 2
    y, w = roots_jacobi(order, alpha_exp, beta_exp)
    nodes = 0.5 * (1.0 + y)
    weights = w / 2.0 ** (alpha_exp + beta_exp + 1.0)

    ok = (
        np.all(np.isfinite(nodes))
        and np.all(np.isfinite(weights))
        and np.all(weights > 0.0)
        and np.all(np.diff(nodes) > 0.0)
        and nodes[0] > 0.0
        and nodes[-1] < 1.0
    )
    if not ok:
        raise ConvergenceError(
            f"Gauss-Jacobi node computation failed for order={order}, "
            f"alpha_exp={alpha_exp}, beta_exp={beta_exp}"
        )
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(nodes, weights, alpha_exp, beta_exp, order)
