"""Weighted fractional Brownian motion.

The covariance of the weighted fBm with exponents (a, b) is

    R(t, s) = int_0^{min(t,s)} u^a [(t - u)^b + (s - u)^b] du,

which splits as ``beta(a+1, b+1) * (t^c + s^c) - m(t, s)`` with
``c = a + b + 1`` and

    m(t, s) = int_{min}^{max} u^a (max - u)^b du.

Paths are sampled exactly on a finite grid from the Cholesky factor of the
covariance matrix over the non-zero grid points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from . import rng
from ._parallel import map_ordered
from .errors import DomainError, FactorizationFailed, ParameterError
from .specfun import DEFAULT_ORDER, beta_fn, gauss_jacobi

JITTER_LADDER = (1e-12, 1e-10, 1e-8)
PATH_CHUNK = 16

PathKind = Literal["wfbm", "wfou"]


@dataclass(frozen=True)
class WfbmParams:
    a: float
    b: float

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if not (math.isfinite(a) and math.isfinite(b)):
            raise ParameterError("a and b must be finite", a, b)
        if not a > -1.0:
            raise ParameterError("a <= -1", a, b)
        if not abs(b) < 1.0:
            raise ParameterError("|b| >= 1", a, b)
        if not abs(b) < a + 1.0:
            raise ParameterError("|b| >= a+1", a, b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def exponent(self) -> float:
        """Self-similarity exponent of the variance, ``a + b + 1``."""
        return self.a + self.b + 1.0

    @property
    def beta(self) -> float:
        return beta_fn(self.a + 1.0, self.b + 1.0)


def validate_params(a: float, b: float) -> WfbmParams:
    """Return validated parameters or raise :class:`ParameterError`.

    The error's ``constraint`` attribute is one of ``"a <= -1"``,
    ``"|b| >= 1"`` or ``"|b| >= a+1"``.
    """
    return WfbmParams(a, b)


@dataclass(frozen=True, eq=False)
class TimeGrid:
    points: np.ndarray
    uniform_step: float | None = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 2:
            raise DomainError("a time grid needs at least two points")
        if pts[0] != 0.0:
            raise DomainError(f"a time grid must start at 0, got {pts[0]!r}")
        if not np.all(np.isfinite(pts)) or not np.all(np.diff(pts) > 0.0):
            raise DomainError("time grid points must be finite and strictly increasing")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        horizon = float(pts[-1])
        n = pts.size - 1
        step = self.uniform_step
        if step is None:
            cand = horizon / n
            if np.max(np.abs(pts - cand * np.arange(n + 1))) <= 1e-12 * horizon:
                step = cand
        else:
            step = float(step)
            if not step > 0 or np.max(np.abs(pts - step * np.arange(n + 1))) > 1e-12 * horizon:
                raise DomainError("declared uniform_step does not match the grid points")
        object.__setattr__(self, "uniform_step", step)

    @classmethod
    def uniform(cls, n: int, horizon: float) -> "TimeGrid":
        if int(n) != n or n < 1:
            raise DomainError(f"number of intervals must be a positive integer, got {n!r}")
        if not horizon > 0:
            raise DomainError(f"horizon must be positive, got {horizon!r}")
        n = int(n)
        return cls(np.linspace(0.0, float(horizon), n + 1), float(horizon) / n)

    @property
    def horizon(self) -> float:
        return float(self.points[-1])

    @property
    def n(self) -> int:
        """Number of intervals."""
        return self.points.size - 1

    @property
    def is_uniform(self) -> bool:
        return self.uniform_step is not None

    def __eq__(self, other):
        if not isinstance(other, TimeGrid):
            return NotImplemented
        return np.array_equal(self.points, other.points)

    __hash__ = None


def _as_nonneg(x, name):
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr >= 0.0)):
        raise DomainError(f"{name} must be >= 0")
    return arr


def _split_sorted(params: WfbmParams, hi: np.ndarray, lo: np.ndarray, order: int):
    """Shared work for the m-integral and the covariance (``hi >= lo >= 0``).

    Returns ``(m, far, tail)`` where ``far`` marks pairs evaluated through
    ``tail = lo^(a+1) int_0^1 y^a (hi - lo y)^b dy``, so that for them
    ``m = hi^c beta - tail`` and ``R = lo^c beta + tail``.
    """
    a, b = params.a, params.b
    m = np.zeros(hi.shape)
    tail = np.zeros(hi.shape)
    span = hi - lo
    live = (span > 0.0)
    ratio = np.zeros(hi.shape)
    np.divide(lo, hi, out=ratio, where=live)

    # Near the diagonal, substitute x = (hi - u) / span and absorb x^b in the
    # weight; (hi - span x)^a stays at least hi/2 away from its branch point.
    near = live & (ratio > 0.5)
    if np.any(near):
        rule = gauss_jacobi(order, 0.0, b)
        h, d = hi[near], span[near]
        vals = (h[:, None] - d[:, None] * rule.nodes[None, :]) ** a @ rule.weights
        m[near] = d ** (b + 1.0) * vals

    # Otherwise integrate int_0^lo u^a (hi - u)^b du with weight y^a after
    # u = lo * y; the branch point of (hi - lo y)^b is then far from [0, 1].
    far = live & ~near
    if np.any(far):
        rule = gauss_jacobi(order, 0.0, a)
        h, l = hi[far], lo[far]
        vals = (h[:, None] - l[:, None] * rule.nodes[None, :]) ** b @ rule.weights
        tail[far] = l ** (a + 1.0) * vals
        m[far] = h ** params.exponent * params.beta - tail[far]
    return m, far, tail


def _m_sorted(params: WfbmParams, hi: np.ndarray, lo: np.ndarray, order: int) -> np.ndarray:
    """m-integral for arrays with ``hi >= lo >= 0`` elementwise."""
    return _split_sorted(params, hi, lo, order)[0]


def _cov_sorted(params: WfbmParams, hi: np.ndarray, lo: np.ndarray, order: int) -> np.ndarray:
    """Covariance for ``hi >= lo >= 0``; avoids cancellation when ``lo << hi``."""
    hi, lo = np.broadcast_arrays(hi, lo)
    m, far, tail = _split_sorted(params, hi, lo, order)
    c = params.exponent
    return np.where(far, params.beta * lo ** c + tail, params.beta * (hi ** c + lo ** c) - m)


def m_integral(params: WfbmParams, t, s, order: int = DEFAULT_ORDER):
    """The m-function ``int_{min(t,s)}^{max(t,s)} u^a (max(t,s) - u)^b du``.

    Accepts scalars or broadcastable arrays.  Symmetric in ``(t, s)`` by
    construction, and zero on the diagonal.
    """
    t_arr = _as_nonneg(t, "t")
    s_arr = _as_nonneg(s, "s")
    hi = np.maximum(t_arr, s_arr)
    lo = np.minimum(t_arr, s_arr)
    out = _m_sorted(params, hi, lo, order)
    return float(out) if out.ndim == 0 else out


def covariance(params: WfbmParams, t, s, order: int = DEFAULT_ORDER):
    """``R(t, s) = beta(a+1, b+1) (t^c + s^c) - m(t, s)``, vectorized."""
    t_arr = _as_nonneg(t, "t")
    s_arr = _as_nonneg(s, "s")
    hi = np.maximum(t_arr, s_arr)
    lo = np.minimum(t_arr, s_arr)
    out = _cov_sorted(params, hi, lo, order)
    return float(out) if out.ndim == 0 else out


def variance(params: WfbmParams, t):
    """``E B_t^2 = 2 beta(a+1, b+1) t^(a+b+1)``."""
    t_arr = _as_nonneg(t, "t")
    out = 2.0 * params.beta * t_arr ** params.exponent
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class CovMatrix:
    entries: np.ndarray
    grid: TimeGrid
    params: WfbmParams
    order: int = DEFAULT_ORDER

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def times(self) -> np.ndarray:
        return self.grid.points[1:]


def covariance_matrix(
    params: WfbmParams, grid: TimeGrid, order: int = DEFAULT_ORDER, chunk: int = 65536
) -> CovMatrix:
    """Covariance matrix over ``grid.points[1:]``; B_0 = 0 is left out."""
    times = grid.points[1:]
    dim = times.size
    rows, cols = np.tril_indices(dim)
    entries = np.empty((dim, dim))
    for start in range(0, rows.size, chunk):
        r = rows[start:start + chunk]
        c = cols[start:start + chunk]
        # grid is increasing, so times[r] >= times[c] on the lower triangle
        hi, lo = times[r], times[c]
        vals = _cov_sorted(params, hi, lo, order)
        entries[r, c] = vals
        entries[c, r] = vals
    entries.setflags(write=False)
    return CovMatrix(entries, grid, params, order)


def cauchy_schwarz_violations(cov: CovMatrix, rtol: float = 1e-12) -> int:
    """Count entries with ``|C_ij| > sqrt(C_ii C_jj)`` beyond ``rtol``."""
    d = np.sqrt(np.diag(cov.entries))
    bound = np.outer(d, d)
    return int(np.count_nonzero(np.abs(cov.entries) > bound * (1.0 + rtol)))


@dataclass(frozen=True, eq=False)
class GaussianSampler:
    factor: np.ndarray
    jitter_used: float
    params: WfbmParams
    grid: TimeGrid
    order: int = DEFAULT_ORDER

    def reconstruction_error(self, cov: CovMatrix) -> float:
        """``max|L L^T - C|`` relative to the largest diagonal entry of C."""
        diff = self.factor @ self.factor.T - cov.entries
        return float(np.max(np.abs(diff)) / np.max(np.diag(cov.entries)))


def build_sampler(cov: CovMatrix) -> GaussianSampler:
    """Cholesky factor of ``cov``, retrying with diagonal jitter if needed."""
    c = np.array(cov.entries)
    scale = float(np.max(np.diag(c)))
    for jitter in (0.0,) + JITTER_LADDER:
        trial = c if jitter == 0.0 else c + np.eye(c.shape[0]) * (jitter * scale)
        try:
            factor = np.linalg.cholesky(trial)
        except np.linalg.LinAlgError:
            continue
        if np.all(np.isfinite(factor)):
            factor.setflags(write=False)
            return GaussianSampler(factor, jitter * scale, cov.params, cov.grid, cov.order)
    raise FactorizationFailed(
        f"Cholesky factorization failed for a={cov.params.a}, b={cov.params.b}, "
        f"dim={c.shape[0]} after jitter {JITTER_LADDER[-1]} x max diagonal"
    )


@dataclass(frozen=True, eq=False)
class PathSample:
    grid: TimeGrid
    values: np.ndarray
    seed: int = 0
    kind: PathKind = "wfbm"
    index: int = 0
    sub_seed: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != self.grid.points.shape:
            raise DomainError(
                f"path has {vals.size} values but the grid has {self.grid.points.size} points"
            )
        if vals[0] != 0.0:
            raise DomainError("paths must start at exactly 0")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if self.kind not in ("wfbm", "wfou"):
            raise DomainError(f"unknown path kind {self.kind!r}")

    def scaled(self, alpha: float) -> "PathSample":
        return PathSample(self.grid, alpha * self.values, self.seed, self.kind,
                          self.index, self.sub_seed, dict(self.meta))


def sample_matrix(
    sampler: GaussianSampler, n_paths: int, seed: int, workers: int | None = None
) -> np.ndarray:
    """Array of shape ``(n_paths, n + 1)``; row k is path k, column 0 is zero.

    Paths are produced in fixed blocks of ``PATH_CHUNK`` so the floating
    point work for each block is the same whatever ``workers`` is.
    """
    if int(n_paths) != n_paths or n_paths < 1:
        raise DomainError(f"n_paths must be a positive integer, got {n_paths!r}")
    seed = rng.check_seed(seed)
    n_paths = int(n_paths)
    factor = sampler.factor
    dim = factor.shape[0]

    def block(start):
        idx = range(start, min(start + PATH_CHUNK, n_paths))
        z = np.column_stack([rng.standard_normals(seed, k, dim) for k in idx])
        return (factor @ z).T

    blocks = map_ordered(block, range(0, n_paths, PATH_CHUNK), workers)
    out = np.zeros((n_paths, dim + 1))
    out[:, 1:] = np.vstack(blocks)
    return out


def sample_paths(
    sampler: GaussianSampler, n_paths: int, seed: int, workers: int | None = None
) -> list[PathSample]:
    values = sample_matrix(sampler, n_paths, seed, workers)
    meta = {
        "a": sampler.params.a,
        "b": sampler.params.b,
        "quadrature_order": sampler.order,
        "jitter_used": sampler.jitter_used,
    }
    return [
        PathSample(sampler.grid, values[k], seed, "wfbm", k, rng.sub_seed(seed, k), dict(meta))
        for k in range(values.shape[0])
    ]


def simulate(
    params: WfbmParams, grid: TimeGrid, n_paths: int, seed: int,
    order: int = DEFAULT_ORDER, workers: int | None = None,
) -> list[PathSample]:
    """Covariance, factorization and sampling in one call."""
    sampler = build_sampler(covariance_matrix(params, grid, order))
    return sample_paths(sampler, n_paths, seed, workers)
