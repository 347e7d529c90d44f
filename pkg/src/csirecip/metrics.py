"""Scalar reciprocity metrics and time-shift estimation.

All functions are pure and operate on plain 1-D float arrays (or anything
np.asarray accepts).  Gap markers must be removed or filled before calling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ConstantPooledRangeError,
    DegenerateSeriesError,
    LengthMismatchError,
    SeriesTooShortError,
)


@dataclass(frozen=True)
class DivergenceConfig:
    """Histogram discretization for Jeffrey's divergence.

    Defaults keep D_J(P, P) = 0 numerically and guarantee empty bins never
    produce infinities.
    """

    bins: int = 32
    epsilon: float = 1e-9

    def __post_init__(self):
        if self.bins < 2:
            raise ValueError("bins must be >= 2")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")


@dataclass(frozen=True)
class LagEstimate:
    """Result of a time-lagged cross-correlation scan.

    ``lag`` is the sample offset at the correlation peak; positive means
    the second series lags the first.  ``curve`` holds one correlation per
    candidate lag, ordered from -max_lag to +max_lag.
    """

    lag: int
    peak_corr: float
    lags: np.ndarray
    curve: np.ndarray

    @property
    def max_lag(self) -> int:
        return int(self.lags[-1])


def _as_series(x, name: str = "series") -> np.ndarray:
    a = np.asarray(x, dtype=np.float64).ravel()
    if np.isnan(a).any():
        raise ValueError(f"{name} contains gap markers (NaN)")
    return a


def pearson(x, y) -> float:
    """Sample Pearson correlation coefficient of two equal-length series."""
    x = _as_series(x, "x")
    y = _as_series(y, "y")
    if len(x) != len(y):
        raise LengthMismatchError(f"lengths differ: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise LengthMismatchError("need at least 2 samples")
    xd = x - x.mean()
    yd = y - y.mean()
    sx = float(xd @ xd)
    sy = float(yd @ yd)
    if sx == 0.0 or sy == 0.0:
        raise DegenerateSeriesError("zero variance")
    return float((xd @ yd) / np.sqrt(sx * sy))


def jeffrey_divergence(x, y, cfg: DivergenceConfig = DivergenceConfig()) -> float:
    """Symmetrized KL divergence between the empirical distributions.

    Both samples are histogrammed on shared bin edges spanning the pooled
    range, smoothed with ``cfg.epsilon`` additive mass per bin, and
    renormalized.  Natural logarithm.
    """
    x = _as_series(x, "x")
    y = _as_series(y, "y")
    if len(x) < cfg.bins or len(y) < cfg.bins:
        raise LengthMismatchError(f"need at least {cfg.bins} samples per series")
    pooled_lo = min(x.min(), y.min())
    pooled_hi = max(x.max(), y.max())
    if pooled_lo == pooled_hi:
        raise ConstantPooledRangeError("all pooled values identical")
    edges = np.linspace(pooled_lo, pooled_hi, cfg.bins + 1)
    p, _ = np.histogram(x, bins=edges)
    q, _ = np.histogram(y, bins=edges)
    p = (p + cfg.epsilon) / (p.sum() + cfg.bins * cfg.epsilon)
    q = (q + cfg.epsilon) / (q.sum() + cfg.bins * cfg.epsilon)
    kl_pq = float(np.sum(p * np.log(p / q)))
    kl_qp = float(np.sum(q * np.log(q / p)))
    return 0.5 * (kl_pq + kl_qp)


def wasserstein_1d(x, y) -> float:
    """Order-1 Wasserstein distance between two empirical distributions.

    Computed by integrating |F_x^{-1}(u) - F_y^{-1}(u)| du over the merged
    quantile grid; reduces to mean |sorted(x) - sorted(y)| for equal lengths.
    """
    x = np.sort(_as_series(x, "x"))
    y = np.sort(_as_series(y, "y"))
    if len(x) == 0 or len(y) == 0:
        raise LengthMismatchError("empty input")
    if len(x) == len(y):
        return float(np.mean(np.abs(x - y)))
    # piecewise-constant quantile functions on the union of jump points
    u = np.union1d(np.arange(1, len(x)) / len(x), np.arange(1, len(y)) / len(y))
    u = np.concatenate([[0.0], u, [1.0]])
    du = np.diff(u)
    mid = (u[:-1] + u[1:]) / 2
    qx = x[np.minimum((mid * len(x)).astype(int), len(x) - 1)]
    qy = y[np.minimum((mid * len(y)).astype(int), len(y) - 1)]
    return float(np.sum(np.abs(qx - qy) * du))


def xcorr_lag(x, y, max_lag: int) -> LagEstimate:
    """Time-lagged cross-correlation scan over lags in [-max_lag, max_lag].

    Each lag's correlation is the Pearson coefficient of the overlapping
    windows (per-lag normalization, so shorter overlaps are not penalized).
    Ties break toward the smallest |lag|, then toward negative lag.  A lag
    whose overlap has zero variance contributes correlation 0.
    """
    x = _as_series(x, "x")
    y = _as_series(y, "y")
    if len(x) != len(y):
        raise LengthMismatchError(f"lengths differ: {len(x)} vs {len(y)}")
    n = len(x)
    if max_lag < 0:
        raise ValueError("max_lag must be non-negative")
    if n <= 2 * max_lag:
        raise SeriesTooShortError(f"need length > {2 * max_lag}, got {n}")

    lags = np.arange(-max_lag, max_lag + 1)
    curve = np.empty(len(lags))
    degenerate = 0
    for i, ell in enumerate(lags):
        if ell >= 0:
            xs, ys = x[: n - ell], y[ell:]
        else:
            xs, ys = x[-ell:], y[: n + ell]
        xd = xs - xs.mean()
        yd = ys - ys.mean()
        denom = np.sqrt(float(xd @ xd) * float(yd @ yd))
        if denom == 0.0:
            curve[i] = 0.0
            degenerate += 1
        else:
            curve[i] = float(xd @ yd) / denom
    if degenerate == len(lags):
        raise DegenerateSeriesError("zero variance at every candidate lag")

    peak = curve.max()
    cand = lags[curve == peak]
    order = np.lexsort((cand, np.abs(cand)))  # smallest |lag|, then negative
    best = int(cand[order[0]])
    return LagEstimate(lag=best, peak_corr=float(peak), lags=lags, curve=curve)


def ber(bits_a, bits_b) -> float:
    """Fraction of mismatched bits between two equal-length bit sequences."""
    a = np.asarray(bits_a).ravel()
    b = np.asarray(bits_b).ravel()
    if len(a) != len(b):
        raise LengthMismatchError(f"lengths differ: {len(a)} vs {len(b)}")
    if len(a) == 0:
        raise LengthMismatchError("empty bit sequences")
    return float(np.mean(a.astype(np.uint8) != b.astype(np.uint8)))
