"""Numerical checks of the large-time behaviour of the wfOU least-squares estimator.

Quantities computed here, for exponents (a, b) and drift ``theta > 0``:

``I_t = t^-a e^{-theta t} int_0^t e^{theta s} m(t, s) ds``
    tends to ``Gamma(b+1) / theta^(b+2)``.
``J_t = t^-a e^{-2 theta t} int_0^t int_0^t e^{theta (s+r)} m(s, r) dr ds``
    tends to ``Gamma(b+1) / theta^(b+3)``.
``V_t = t^-a Delta_g(t) + 2 theta I_t - theta^2 J_t``
    is the variance of ``t^(-a/2) e^{-theta t} int_0^t e^{theta s} dB_s`` and
    tends to ``Gamma(b+1) / theta^(b+1)``.

The normalized error ``t^(-a/2) e^{theta t} (theta_tilde - theta)`` is
compared with a centred Cauchy law by a Kolmogorov-Smirnov test.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Literal

import numpy as np
from scipy import integrate, special, stats

from . import rng
from .errors import ConvergenceError, DomainError, NumericError
from .estimators import normalize_quadrature
from .ou import OuModel, ou_matrix
from .specfun import DEFAULT_ORDER, ln_gamma
from .wfbm import TimeGrid, WfbmParams, build_sampler, covariance, covariance_matrix, sample_matrix

QUAD_EPSREL = 1e-11
QUAD_LIMIT = 400


def _check_quad(value, abserr, what, rtol=1e-7):
    if not math.isfinite(value) or abserr > rtol * max(abs(value), 1e-300) + 1e-14:
        raise ConvergenceError(f"{what}: quadrature did not converge (value={value}, abserr={abserr})")
    return value


def _jacobi_quad(f, lo_exp, hi_exp, split=0.5, what="integral"):
    """``int_0^1 f(y) y^lo_exp (1-y)^hi_exp dy`` by adaptive algebraic-weight rules.

    The interval is cut at ``split`` so each endpoint singularity is handled
    by its own weighted rule.
    """
    v1, e1 = integrate.quad(
        lambda y: f(y) * (1.0 - y) ** hi_exp, 0.0, split,
        weight="alg", wvar=(lo_exp, 0.0), epsabs=0.0, epsrel=QUAD_EPSREL, limit=QUAD_LIMIT,
    )
    v2, e2 = integrate.quad(
        lambda y: f(y) * y ** lo_exp, split, 1.0,
        weight="alg", wvar=(0.0, hi_exp), epsabs=0.0, epsrel=QUAD_EPSREL, limit=QUAD_LIMIT,
    )
    return _check_quad(v1 + v2, e1 + e2, what)


def _require_positive(theta, t=None):
    if not theta > 0:
        raise DomainError(f"theta must be > 0, got {theta!r}")
    if t is not None and not t > 0:
        raise DomainError(f"t must be > 0, got {t!r}")


def compute_I(params: WfbmParams, theta: float, t: float) -> float:
    """``I_t`` via the single-integral form.

    Swapping the order of integration gives
    ``I_t = (t^(b+1)/theta) int_0^1 (1-y)^a y^b (e^{-theta t y} - e^{-theta t}) dy``,
    whose integrand is nonnegative and free of cancellation once written as
    ``e^{-theta t y} * -expm1(-theta t (1 - y))``.
    """
    _require_positive(theta, t)
    a, b = params.a, params.b
    k = theta * t

    def f(y):
        return math.exp(-k * y) * -math.expm1(-k * (1.0 - y))

    # the exponential lives on a 1/(theta t) scale near y = 0
    split = min(0.5, 20.0 / k)
    val = _jacobi_quad(f, b, a, split, what=f"I_t at t={t}")
    return t ** (b + 1.0) / theta * val


def compute_J(params: WfbmParams, theta: float, t: float) -> float:
    """``J_t`` as twice the integral over the triangle ``r < s``.

    The inner integral over ``r`` is ``s^a e^{theta s} I_s``, leaving
    ``J_t = 2 t^-a int_0^t e^{-2 theta (t - s)} s^a I_s ds``.
    """
    _require_positive(theta, t)
    a = params.a

    def f(s):
        if s <= 0.0:
            return 0.0
        return math.exp(-2.0 * theta * (t - s)) * s ** a * compute_I(params, theta, s)

    pts = sorted({max(0.0, t - x / theta) for x in (1.0, 5.0, 20.0)} - {0.0})
    val, err = integrate.quad(f, 0.0, t, points=pts or None, epsabs=0.0,
                              epsrel=1e-10, limit=QUAD_LIMIT)
    _check_quad(val, err, f"J_t at t={t}")
    return 2.0 * t ** (-a) * val


def delta_g_term(params: WfbmParams, theta: float, t: float) -> float:
    """``t^-a Delta_g(t)`` for ``g(s, r) = beta(a+1, b+1) (s^c + r^c)``.

    Equal to ``2 beta c t^-a e^{-theta t} int_0^t s^(c-1) e^{-theta (t-s)} ds``.
    """
    _require_positive(theta, t)
    c = params.exponent
    val, err = integrate.quad(
        lambda s: math.exp(-theta * (t - s)), 0.0, t,
        weight="alg", wvar=(c - 1.0, 0.0), epsabs=0.0, epsrel=QUAD_EPSREL, limit=QUAD_LIMIT,
    )
    _check_quad(val, err, f"Delta_g at t={t}")
    return 2.0 * params.beta * c * t ** (-params.a) * math.exp(-theta * t) * val


def variance_functional(params: WfbmParams, theta: float, t: float) -> float:
    i_t = compute_I(params, theta, t)
    j_t = compute_J(params, theta, t)
    return delta_g_term(params, theta, t) + 2.0 * theta * i_t - theta ** 2 * j_t


def limiting_sigma(params: WfbmParams, theta: float) -> float:
    """``Gamma(b+1) / theta^(b+1)``, the limit of :func:`variance_functional`."""
    _require_positive(theta)
    return math.exp(ln_gamma(params.b + 1.0)) / theta ** (params.b + 1.0)


def limit_I(params, theta):
    return math.exp(ln_gamma(params.b + 1.0)) / theta ** (params.b + 2.0)


def limit_J(params, theta):
    return math.exp(ln_gamma(params.b + 1.0)) / theta ** (params.b + 3.0)


@dataclass
class LimitCheckResult:
    name: str
    t_values: list
    observed: list
    limit: float
    relative_errors: list

    @property
    def monotone(self) -> bool:
        return all(x > y for x, y in zip(self.relative_errors, self.relative_errors[1:]))

    def to_dict(self):
        d = asdict(self)
        d["monotone"] = self.monotone
        return d


_LIMIT_QUANTITIES = {
    "I": (compute_I, limit_I),
    "J": (compute_J, limit_J),
    "variance": (variance_functional, limiting_sigma),
}


def limit_check(name: str, params: WfbmParams, theta: float,
                t_values=(25.0, 50.0, 100.0)) -> LimitCheckResult:
    try:
        fn, lim_fn = _LIMIT_QUANTITIES[name]
    except KeyError:
        raise DomainError(f"unknown limit quantity {name!r}") from None
    limit = lim_fn(params, theta)
    observed = [fn(params, theta, float(t)) for t in t_values]
    rel = [abs(v - limit) / abs(limit) for v in observed]
    return LimitCheckResult(name, [float(t) for t in t_values], observed, limit, rel)


@dataclass(frozen=True)
class ZMoment:
    value: float
    method: str
    error_estimate: float


def _z_tail_bound(params, theta, s_max):
    # |R(s, r)| <= 2 beta (s r)^(c/2); bound the integral outside [0, s_max]^2
    k = params.exponent / 2.0 + 1.0
    full = math.exp(ln_gamma(k)) / theta ** k
    head = full * special.gammainc(k, theta * s_max)
    return 2.0 * params.beta * (full ** 2 - head ** 2)


def z_infinity_second_moment(
    params: WfbmParams, theta: float, method: Literal["transformed", "truncated"] = "transformed",
    s_max: float | None = None, order: int = DEFAULT_ORDER,
) -> ZMoment:
    """``E Z^2`` for ``Z = int_0^inf e^{-theta s} B_s ds``.

    ``E Z^2 = 2 int_0^inf e^{-theta s} int_0^s e^{-theta r} R(s, r) dr ds``.
    ``transformed`` maps ``[0, inf)`` onto ``(0, 1]`` with ``s = -log(u)/theta``
    and reports the quadrature error estimate; ``truncated`` integrates over
    ``[0, s_max]`` and reports a Cauchy-Schwarz bound on the neglected tail.
    """
    _require_positive(theta)

    def inner(s):
        if s <= 0.0:
            return 0.0, 0.0
        return integrate.quad(
            lambda r: math.exp(-theta * r) * covariance(params, s, r, order),
            0.0, s, epsabs=0.0, epsrel=1e-10, limit=QUAD_LIMIT,
        )

    errs = []

    def outer_s(s):
        v, e = inner(s)
        errs.append(e * math.exp(-theta * s))
        return math.exp(-theta * s) * v

    if method == "transformed":
        def g(u):
            if u <= 0.0:
                return 0.0
            s = -math.log(u) / theta
            v, e = inner(s)
            errs.append(e / theta)
            return v / theta

        val, err = integrate.quad(g, 0.0, 1.0, epsabs=0.0, epsrel=1e-9, limit=QUAD_LIMIT)
        value = 2.0 * val
        bound = 2.0 * (err + max(errs, default=0.0))
    elif method == "truncated":
        if s_max is None:
            s_max = 60.0 / theta
        val, err = integrate.quad(outer_s, 0.0, s_max, epsabs=0.0, epsrel=1e-9,
                                  limit=QUAD_LIMIT)
        value = 2.0 * val
        bound = _z_tail_bound(params, theta, s_max) + 2.0 * err
    else:
        raise DomainError(f"unknown method {method!r}")
    if not (math.isfinite(value) and value > 0.0):
        raise NumericError(f"E Z^2 evaluation failed: {value}")
    if bound > 0.01 * value:
        raise ConvergenceError(
            f"E Z^2 error bound {bound:.3g} exceeds 1% of the value {value:.6g} ({method})"
        )
    return ZMoment(value, method, bound)


def cauchy_scales(params: WfbmParams, theta: float, ez2: float | None = None) -> tuple[float, float]:
    """``(2 s / sqrt(E Z^2), 2 sqrt(s) / sqrt(E Z^2))`` with ``s = limiting_sigma``.

    The first is the literal constant attached to the Cauchy limit; the
    second treats ``limiting_sigma`` as a variance and takes its root.
    """
    if ez2 is None:
        ez2 = z_infinity_second_moment(params, theta).value
    sig = limiting_sigma(params, theta)
    root = math.sqrt(ez2)
    return 2.0 * sig / root, 2.0 * math.sqrt(sig) / root


def ks_cauchy(samples, scale: float) -> tuple[float, float]:
    """KS statistic and asymptotic p-value against Cauchy(0, scale)."""
    res = stats.kstest(np.asarray(samples), stats.cauchy(loc=0.0, scale=scale).cdf,
                       method="asymp")
    return float(res.statistic), float(res.pvalue)


def median_band(scale: float, count: int, z: float = 2.5758293035489004) -> tuple[float, float]:
    """Approximate 99% band for the sample median of ``count`` Cauchy(0, scale) draws.

    The median sits near the quantile ``1/2 +- z / (2 sqrt(count))``.
    """
    p = z * 0.5 / math.sqrt(count)
    half = scale * math.tan(math.pi * p)
    return -half, half


@dataclass
class CauchyTestResult:
    samples: list
    scale: float
    ks_statistic: float
    p_value: float
    t: float
    replications: int
    alt_scale: float = math.nan
    alt_ks_statistic: float = math.nan
    alt_p_value: float = math.nan
    n_excluded: int = 0
    median: float = math.nan
    median_band: tuple = (math.nan, math.nan)
    ez2: float = math.nan
    n: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def median_ok(self) -> bool:
        return self.median_band[0] <= self.median <= self.median_band[1]

    def to_dict(self, with_samples=True):
        d = asdict(self)
        d["median_band"] = list(self.median_band)
        d["median_ok"] = self.median_ok
        if not with_samples:
            d.pop("samples")
        return d

    def to_json(self, with_samples=True):
        return json.dumps(self.to_dict(with_samples), sort_keys=True, indent=2)


def normalized_errors(model: OuModel, t: float, replications: int, seed: int, n: int,
                      scheme="exact_recursion", quadrature="trapezoid", order=DEFAULT_ORDER,
                      workers=None):
    """``t^(-a/2) e^{theta t} (theta_tilde - theta)`` for each replication.

    Returns the finite values and the count of paths whose time integral of
    ``X^2`` vanished.
    """
    quadrature = normalize_quadrature(quadrature)
    grid = TimeGrid.uniform(n, t)
    sampler = build_sampler(covariance_matrix(model.wfbm, grid, order))
    driver = sample_matrix(sampler, replications, seed, workers)
    x = ou_matrix(model, driver, grid, scheme)
    h = grid.uniform_step
    x2 = x ** 2
    if quadrature == "trapezoid":
        q = h * (0.5 * x2[:, 0] + x2[:, 1:-1].sum(axis=1) + 0.5 * x2[:, -1])
    else:
        q = h * x2[:, :-1].sum(axis=1)
    ok = q > 0.0
    tilde = x2[ok, -1] / (2.0 * q[ok])
    norm = t ** (-model.wfbm.a / 2.0) * math.exp(model.theta * t)
    return norm * (tilde - model.theta), int(np.count_nonzero(~ok))


def cauchy_limit_mc(model: OuModel, t: float, replications: int, seed: int,
                    n: int | None = None, scheme="exact_recursion", quadrature="trapezoid",
                    order=DEFAULT_ORDER, workers=None) -> CauchyTestResult:
    """Monte Carlo check of the Cauchy limit of the normalized continuous LSE error."""
    if replications < 100:
        raise DomainError("cauchy_limit_mc needs at least 100 replications")
    if math.exp(model.theta * t) < 1e3:
        raise DomainError(f"t={t} too small: need exp(theta t) >= 1e3")
    if n is None:
        n = int(round(100 * t))
    samples, excluded = normalized_errors(model, t, replications, seed, n, scheme,
                                          quadrature, order, workers)
    if excluded > 0.01 * replications:
        raise NumericError(f"{excluded} of {replications} paths had a zero denominator")
    ez2 = z_infinity_second_moment(model.wfbm, model.theta).value
    scale, alt = cauchy_scales(model.wfbm, model.theta, ez2)
    ks, p = ks_cauchy(samples, scale)
    aks, ap = ks_cauchy(samples, alt)
    return CauchyTestResult(
        samples=[float(v) for v in samples], scale=scale, ks_statistic=ks, p_value=p,
        t=float(t), replications=int(replications), alt_scale=alt,
        alt_ks_statistic=aks, alt_p_value=ap, n_excluded=excluded,
        median=float(np.median(samples)), median_band=median_band(scale, samples.size),
        ez2=ez2, n=int(n),
        meta={"seed": int(seed), "scheme": scheme, "quadrature": quadrature,
              "a": model.wfbm.a, "b": model.wfbm.b, "theta": model.theta,
              "subseed_method": rng.SUBSEED_METHOD, "normal_method": rng.NORMAL_METHOD},
    )


# Test functions g(s, r) for the covariance identities: value, d/ds g(s, 0), mixed partial.
TEST_FUNCTIONS = {
    "squares": (lambda s, r: s * s + r * r, lambda s: 2.0 * s, lambda s, r: 0.0),
    "product": (lambda s, r: s * r, lambda s: 0.0, lambda s, r: 1.0),
}


def _test_function(g_id):
    try:
        return TEST_FUNCTIONS[g_id]
    except KeyError:
        raise DomainError(f"unknown test function {g_id!r}; use 'squares' or 'product'") from None


def _q1(f, lo, hi):
    if hi <= lo:
        return 0.0
    v, _ = integrate.quad(f, lo, hi, epsabs=1e-14, epsrel=1e-13, limit=QUAD_LIMIT)
    return v


def _q2(f, lo, hi, inner_hi=None):
    """``int_lo^hi int_lo^{inner_hi(x)} f(x, y) dy dx`` (square if inner_hi is None)."""
    if hi <= lo:
        return 0.0
    top = (lambda x: hi) if inner_hi is None else inner_hi
    return _q1(lambda x: _q1(lambda y: f(x, y), lo, top(x)), lo, hi)


def delta_g_identity_check(theta: float, t: float, g_id: str) -> tuple[float, float]:
    """Both sides of the Delta_g identity for a test function with ``g(0, 0) = 0``.

    lhs = g(t,t) - 2 theta e^{-theta t} int_0^t g(s,t) e^{theta s} ds
          + theta^2 e^{-2 theta t} int_0^t int_0^t g(s,r) e^{theta (s+r)} dr ds
    rhs = 2 e^{-2 theta t} int_0^t e^{theta s} dg/ds(s,0) ds
          + 2 e^{-2 theta t} int_0^t e^{theta s} int_0^s d2g/dsdr(s,r) e^{theta r} dr ds
    """
    _require_positive(theta)
    g, dg0, d2g = _test_function(g_id)
    e = math.exp
    lhs = (
        g(t, t)
        - 2.0 * theta * e(-theta * t) * _q1(lambda s: g(s, t) * e(theta * s), 0.0, t)
        + theta ** 2 * _q2(lambda s, r: g(s, r) * e(theta * (s + r - 2.0 * t)), 0.0, t)
    )
    rhs = (
        2.0 * _q1(lambda s: e(theta * (s - 2.0 * t)) * dg0(s), 0.0, t)
        + 2.0 * _q2(lambda s, r: e(theta * (s + r - 2.0 * t)) * d2g(s, r), 0.0, t,
                    inner_hi=lambda s: s)
    )
    return lhs, rhs


def lambda_g_identity_check(theta: float, s: float, t: float, g_id: str) -> tuple[float, float]:
    """Both sides of the lambda_g identity on ``[s, t]``.

    lhs = E-style quadratic form of ``e^{-theta t} G_t - e^{-theta s} G_s
          + theta int_s^t e^{-theta r} G_r dr`` with covariance ``g``;
    rhs = int_s^t int_s^t e^{-theta (r+u)} d2g/drdu(r,u) dr du.
    The cross term uses ``e^{-theta (s+t)}``.
    """
    _require_positive(theta)
    if not 0.0 <= s <= t:
        raise DomainError(f"need 0 <= s <= t, got s={s!r}, t={t!r}")
    g, _, d2g = _test_function(g_id)
    e = math.exp
    lhs = (
        g(t, t) * e(-2.0 * theta * t)
        + g(s, s) * e(-2.0 * theta * s)
        - 2.0 * g(s, t) * e(-theta * (s + t))
        + 2.0 * theta * e(-theta * t) * _q1(lambda r: g(r, t) * e(-theta * r), s, t)
        - 2.0 * theta * e(-theta * s) * _q1(lambda r: g(r, s) * e(-theta * r), s, t)
        + theta ** 2 * _q2(lambda r, u: g(r, u) * e(-theta * (r + u)), s, t)
    )
    rhs = _q2(lambda r, u: e(-theta * (r + u)) * d2g(r, u), s, t)
    return lhs, rhs
