"""Least-squares type drift estimators for the non-ergodic wfOU process.

For a path ``X`` observed at ``t_0 = 0 < t_1 < ... < t_n = T``:

* ``theta_tilde = X_T^2 / (2 int_0^T X_s^2 ds)`` (continuous observation;
  the time integral is replaced by a trapezoid or left Riemann sum)
* ``theta_hat = sum X_{i-1} (X_i - X_{i-1}) / (Delta sum X_{i-1}^2)``
* ``theta_check = X_T^2 / (2 Delta sum X_{i-1}^2)``

The two discrete estimators need a uniform grid with step ``Delta``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Literal

import numpy as np

from .errors import DegenerateDenominator, DomainError
from .wfbm import PathSample

Quadrature = Literal["trapezoid", "left_riemann"]
QUADRATURE_ALIASES = {
    "trapezoid": "trapezoid", "trap": "trapezoid",
    "left": "left_riemann", "left_riemann": "left_riemann",
}


def normalize_quadrature(name: str) -> str:
    try:
        return QUADRATURE_ALIASES[name]
    except KeyError:
        raise DomainError(
            f"unknown quadrature {name!r}; expected 'trapezoid' or 'left_riemann'"
        ) from None


def integral_of_square(path: PathSample, quadrature: str = "trapezoid") -> float:
    x2 = path.values ** 2
    h = np.diff(path.grid.points)
    if normalize_quadrature(quadrature) == "trapezoid":
        return float(np.sum(0.5 * h * (x2[1:] + x2[:-1])))
    return float(np.sum(h * x2[:-1]))


def _uniform_step(path: PathSample) -> float:
    step = path.grid.uniform_step
    if step is None:
        raise DomainError("discrete estimators need a uniform grid")
    return step


def discrete_denominator(path: PathSample) -> float:
    """``Delta * sum_{i=1}^n X_{t_{i-1}}^2``."""
    return _uniform_step(path) * float(np.sum(path.values[:-1] ** 2))


def lse_continuous(path: PathSample, quadrature: str = "trapezoid") -> float:
    q = integral_of_square(path, quadrature)
    if q == 0.0:
        raise DegenerateDenominator("integral of X^2 is zero (all-zero path)")
    return float(path.values[-1] ** 2 / (2.0 * q))


def lse_discrete_hat(path: PathSample) -> float:
    denom = discrete_denominator(path)
    if denom == 0.0:
        raise DegenerateDenominator("sum of X_{t_{i-1}}^2 is zero")
    x = path.values
    return float(np.sum(x[:-1] * np.diff(x)) / denom)


def lse_discrete_check(path: PathSample) -> float:
    denom = discrete_denominator(path)
    if denom == 0.0:
        raise DegenerateDenominator("sum of X_{t_{i-1}}^2 is zero")
    return float(path.values[-1] ** 2 / (2.0 * denom))


@dataclass(frozen=True)
class EstimateReport:
    theta_tilde: float | None
    theta_hat: float | None
    theta_check: float | None
    denom_tilde: float
    denom_discrete: float
    n: int
    delta_n: float | None
    horizon: float
    quadrature: str = "trapezoid"
    path_index: int = 0

    @property
    def degenerate_flags(self) -> str:
        """Letters of the undefined estimators (``t``, ``h``, ``c``), or ``""``."""
        return "".join(
            flag for flag, v in (("t", self.theta_tilde), ("h", self.theta_hat),
                                 ("c", self.theta_check)) if v is None
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["degenerate_flags"] = self.degenerate_flags
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def estimate(path: PathSample, quadrature: str = "trapezoid") -> EstimateReport:
    """All three estimators for one path; undefined ones are ``None``.

    The discrete estimators are only computed on uniform grids.
    """
    quadrature = normalize_quadrature(quadrature)
    q = integral_of_square(path, quadrature)
    x = path.values
    tilde = float(x[-1] ** 2 / (2.0 * q)) if q > 0.0 else None

    step = path.grid.uniform_step
    if step is not None:
        denom = step * float(np.sum(x[:-1] ** 2))
        hat = float(np.sum(x[:-1] * np.diff(x)) / denom) if denom > 0.0 else None
        check = float(x[-1] ** 2 / (2.0 * denom)) if denom > 0.0 else None
    else:
        denom, hat, check = 0.0, None, None
    return EstimateReport(
        theta_tilde=tilde, theta_hat=hat, theta_check=check,
        denom_tilde=2.0 * q, denom_discrete=denom,
        n=path.grid.n, delta_n=step, horizon=path.grid.horizon,
        quadrature=quadrature, path_index=path.index,
    )
