"""Small least-squares helpers shared by scans and reports."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
        }


def linear_fit(x, y) -> FitResult:
    """Ordinary least squares y = a*x + b with coefficient of determination."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two points to fit a line")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return FitResult(float(slope), float(intercept), float(r2))


def log_linear_fit(x, y) -> FitResult:
    """Fit ln(y) = slope*x + intercept; y must be positive."""
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise ValueError("log-linear fit needs positive values")
    return linear_fit(x, np.log(y))
