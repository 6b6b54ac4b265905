"""Log-log scaling exponents over geometric radius grids."""

import math
from dataclasses import dataclass

import numpy as np


class InsufficientDataError(ValueError):
    """Too few usable radii for a slope; ``partial`` carries what was computed."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


def geometric_grid(r_max, ratio=0.5, count=9):
    """Strictly decreasing radii r_max * ratio**k, k = 0..count-1."""
    if not (r_max > 0 and 0 < ratio < 1 and count >= 1):
        raise ValueError("need r_max > 0, 0 < ratio < 1, count >= 1")
    return r_max * ratio ** np.arange(count, dtype=np.float64)


def check_grid(r_grid):
    r = np.asarray(r_grid, dtype=np.float64)
    if r.ndim != 1 or r.size == 0 or np.any(r <= 0) or np.any(np.diff(r) >= 0):
        raise ValueError("radius grid must be positive and strictly decreasing")
    return r


@dataclass
class ScalingFit:
    slope: float
    slope_lower: float
    slope_upper: float
    intercept: float
    residual_rms: float
    fit_index: np.ndarray
    ratios: np.ndarray


def fit_exponent(r, values, usable, sign):
    """Exponent of ``values ~ r**(sign * d)``.

    ``slope`` is least squares of log(values) on sign*log(r) over the finest
    half (at least 3) of the usable radii; ``slope_lower``/``slope_upper`` are
    the min/max of the pointwise ratios log(value) / (sign * log r).
    Returns None when fewer than 3 radii are usable.
    """
    r = np.asarray(r, dtype=np.float64)
    idx = np.flatnonzero(usable)
    ratios = np.full(r.size, np.nan)
    if idx.size < 3:
        return None
    logv = np.log(np.asarray(values, dtype=np.float64)[idx])
    logr = sign * np.log(r[idx])
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios[idx] = np.where(r[idx] < 1.0, logv / logr, np.nan)
    keep = max(3, math.ceil(idx.size / 2))
    order = idx[np.argsort(-r[idx], kind="stable")][-keep:]
    x = sign * np.log(r[order])
    y = np.log(np.asarray(values, dtype=np.float64)[order])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    finite = ratios[np.isfinite(ratios)]
    lo = float(finite.min()) if finite.size else float("nan")
    hi = float(finite.max()) if finite.size else float("nan")
    return ScalingFit(float(slope), lo, hi, float(intercept), float(np.sqrt(np.mean(resid**2))), order, ratios)
