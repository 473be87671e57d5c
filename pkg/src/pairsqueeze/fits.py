"""Small regression helpers shared by the scaling analyses and figure scripts."""

from __future__ import annotations

import numpy as np

__all__ = ["fit_power_law", "fit_exponential_rate"]


def _r_squared(y: np.ndarray, y_model: np.ndarray) -> float:
    resid = y - y_model
    total = y - np.mean(y)
    denom = float(np.dot(total, total))
    if denom == 0.0:
        return 1.0
    return 1.0 - float(np.dot(resid, resid)) / denom


def fit_power_law(x, y, fixed_exponent: float | None = None) -> dict[str, float]:
    """Fit y = prefactor * x**exponent by least squares in log-log space.

    With ``fixed_exponent`` the slope is pinned and only the prefactor is
    fitted; the returned r2 always refers to the model actually fitted.
    """
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    if lx.size < 2:
        raise ValueError("power-law fit needs at least two points")
    if fixed_exponent is None:
        slope, intercept = np.polyfit(lx, ly, 1)
    else:
        slope = float(fixed_exponent)
        intercept = float(np.mean(ly - slope * lx))
    model = slope * lx + intercept
    return {
        "prefactor": float(np.exp(intercept)),
        "exponent": float(slope),
        "r2": _r_squared(ly, model),
    }


def fit_exponential_rate(x, y) -> dict[str, float]:
    """Fit y = amplitude * exp(rate * x) by least squares on log y."""
    x = np.asarray(x, dtype=float)
    ly = np.log(np.asarray(y, dtype=float))
    if x.size < 2:
        raise ValueError("exponential fit needs at least two points")
    rate, intercept = np.polyfit(x, ly, 1)
    model = rate * x + intercept
    return {
        "rate": float(rate),
        "amplitude": float(np.exp(intercept)),
        "r2": _r_squared(ly, model),
    }
