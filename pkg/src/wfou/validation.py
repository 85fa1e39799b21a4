"""Invariant suite behind ``wfou validate``.

Each check returns a plain dict with ``name``, ``passed``, ``worst`` and
``tol`` so the report serializes directly to JSON.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from .asymptotics import (
    delta_g_identity_check, lambda_g_identity_check, limit_check,
)
from .wfbm import TimeGrid, WfbmParams, build_sampler, covariance, covariance_matrix, sample_matrix

DECOMP_PARAMS = ((0.5, 0.9), (0.1, 0.4), (-0.3, 0.2), (0.0, 0.5))
FBM_BS = (-0.4, 0.2, 0.5, 0.9)
PROBE_TIMES = ((0.4, 0.4), (1.0, 0.52), (2.0, 2.0), (2.0, 0.04), (1.2, 1.6))
IDENTITY_THETAS = (0.5, 1.0, 2.0)
IDENTITY_TS = (0.5, 1.0, 2.0)


def grid_20():
    return np.linspace(0.25, 5.0, 20)


def direct_covariance(params: WfbmParams, t: float, s: float) -> float:
    """``int_0^min u^a [(t-u)^b + (s-u)^b] du`` by adaptive algebraic-weight quadrature."""
    a, b = params.a, params.b
    lo, hi = min(t, s), max(t, s)
    if lo == 0.0:
        return 0.0
    kw = dict(epsabs=1e-15, epsrel=1e-13, limit=400)
    own, _ = integrate.quad(lambda u: 1.0, 0.0, lo, weight="alg", wvar=(a, b), **kw)
    if hi == lo:
        return 2.0 * own
    other, _ = integrate.quad(lambda u: (hi - u) ** b, 0.0, lo, weight="alg", wvar=(a, 0.0), **kw)
    return own + other


def fbm_covariance(b: float, t: float, s: float) -> float:
    return (t ** (b + 1) + s ** (b + 1) - abs(t - s) ** (b + 1)) / (b + 1)


def check_decomposition(param_sets=DECOMP_PARAMS, tol=1e-8) -> dict:
    g = grid_20()
    worst = 0.0
    for a, b in param_sets:
        p = WfbmParams(a, b)
        tt, ss = np.meshgrid(g, g, indexing="ij")
        fast = covariance(p, tt, ss)
        for i, t in enumerate(g):
            for j, s in enumerate(g):
                err = abs(fast[i, j] - direct_covariance(p, t, s)) / (1.0 + abs(fast[i, j]))
                worst = max(worst, err)
    return {"name": "covariance decomposition vs direct quadrature", "worst": worst,
            "tol": tol, "passed": worst <= tol}


def check_fbm_reduction(bs=FBM_BS, tol=1e-10) -> dict:
    g = grid_20()
    tt, ss = np.meshgrid(g, g, indexing="ij")
    worst = 0.0
    for b in bs:
        r = covariance(WfbmParams(0.0, b), tt, ss)
        ref = fbm_covariance(b, tt, ss)
        worst = max(worst, float(np.max(np.abs(r - ref) / np.abs(ref))))
    return {"name": "fBm reduction at a=0", "worst": worst, "tol": tol, "passed": worst <= tol}


def check_sampler(a=0.5, b=0.9, n=50, horizon=2.0, n_paths=5000, seed=7,
                  probes=PROBE_TIMES, n_se=3.0) -> dict:
    """Empirical covariance at probe pairs versus the exact covariance."""
    p = WfbmParams(a, b)
    grid = TimeGrid.uniform(n, horizon)
    cov = covariance_matrix(p, grid)
    sampler = build_sampler(cov)
    paths = sample_matrix(sampler, n_paths, seed)
    rows = []
    worst = 0.0
    for t, s in probes:
        i = int(np.argmin(np.abs(grid.points - t)))
        j = int(np.argmin(np.abs(grid.points - s)))
        prod = paths[:, i] * paths[:, j]
        est = float(prod.mean())
        se = float(prod.std(ddof=1) / math.sqrt(n_paths))
        exact = covariance(p, grid.points[i], grid.points[j])
        z = abs(est - exact) / se
        worst = max(worst, z)
        rows.append({"t": float(grid.points[i]), "s": float(grid.points[j]),
                     "empirical": est, "exact": exact, "se": se, "z": z})
    return {"name": "sampler covariance (standard errors)", "worst": worst, "tol": n_se,
            "passed": worst <= n_se, "probes": rows, "jitter_used": sampler.jitter_used,
            "reconstruction_error": sampler.reconstruction_error(cov)}


def check_identities(tol=1e-8) -> dict:
    rows = []
    worst = 0.0
    for theta in IDENTITY_THETAS:
        for t in IDENTITY_TS:
            for g_id in ("product", "squares"):
                lhs, rhs = delta_g_identity_check(theta, t, g_id)
                lhs2, rhs2 = lambda_g_identity_check(theta, t / 2.0, t, g_id)
                d1, d2 = abs(lhs - rhs), abs(lhs2 - rhs2)
                worst = max(worst, d1, d2)
                rows.append({"theta": theta, "t": t, "g": g_id, "delta_g_gap": d1,
                             "lambda_g_gap": d2})
    return {"name": "Delta_g / lambda_g identities", "worst": worst, "tol": tol,
            "passed": worst <= tol, "cases": rows}


def check_limits(param_sets=((0.5, 0.9, 1.0), (0.1, 0.4, 0.7)), tol=0.05) -> dict:
    rows = []
    ok = True
    worst = 0.0
    for a, b, theta in param_sets:
        p = WfbmParams(a, b)
        for name in ("I", "J", "variance"):
            res = limit_check(name, p, theta)
            last = res.relative_errors[-1]
            worst = max(worst, last)
            good = last < tol and (name == "variance" or res.monotone)
            ok &= good
            rows.append(dict(res.to_dict(), a=a, b=b, theta=theta, passed=good))
    return {"name": "I_t, J_t, variance functional limits", "worst": worst, "tol": tol,
            "passed": ok, "cases": rows}


def run_validation(seed: int = 7) -> dict:
    checks = [
        check_decomposition(),
        check_fbm_reduction(),
        check_sampler(seed=seed),
        check_identities(),
        check_limits(),
    ]
    return {"passed": all(c["passed"] for c in checks), "checks": checks}
