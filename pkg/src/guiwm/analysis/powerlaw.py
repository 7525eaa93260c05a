"""Power-law fits y = a * x^b.

Fitted by ordinary least squares on (ln x, ln y), which is exact for noise-
free power-law data and the standard reading of a straight line on log-log
axes.  Both inputs must be strictly positive (NonPositivePoint otherwise)
and x must take at least two distinct values (DegenerateX).  R^2 is
reported in log space, where the fit is linear, with the linear-space value
alongside for readers who want it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["NonPositivePoint", "DegenerateX", "PowerLawFit", "fit_power_law"]


class NonPositivePoint(ValueError):
    pass


class DegenerateX(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class PowerLawFit:
    a: float
    b: float
    r2_log: float
    r2_linear: float
    n: int

    def predict(self, x: float) -> float:
        return self.a * x**self.b

    def to_record(self) -> dict:
        return {"a": self.a, "b": self.b, "r2_log": self.r2_log, "r2_linear": self.r2_linear, "n": self.n}


def _r2(y: np.ndarray, y_hat: np.ndarray) -> float:
    ss_res = float(np.sum((y - y_hat) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        # All targets identical: the fit is perfect or meaningless, nothing between.
        return 1.0 if ss_res == 0.0 else 0.0
    return 1.0 - ss_res / ss_tot


def fit_power_law(x, y) -> PowerLawFit:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-D arrays of equal length")
    if x.size < 2:
        raise ValueError("need at least two points")
    if np.any(x <= 0) or np.any(y <= 0):
        bad = int(np.argmax((x <= 0) | (y <= 0)))
        raise NonPositivePoint(f"point {bad} is not strictly positive: ({x[bad]}, {y[bad]})")
    lx, ly = np.log(x), np.log(y)
    if float(np.ptp(lx)) == 0.0:
        raise DegenerateX("all x values are identical; slope is undefined")
    b, ln_a = np.polyfit(lx, ly, 1)
    a = math.exp(ln_a)
    fit = PowerLawFit(
        a=float(a),
        b=float(b),
        r2_log=_r2(ly, b * lx + ln_a),
        r2_linear=_r2(y, a * x**b),
        n=int(x.size),
    )
    return fit
