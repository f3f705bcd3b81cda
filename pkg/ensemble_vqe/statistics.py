"""
Paired non-parametric statistics over trials: exact Wilcoxon signed-rank,
Benjamini-Hochberg adjustment, percentile bootstrap bands, plus the curve
utilities (Gaussian smoothing for plot exports, trapezoidal AUC).
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.integrate
import scipy.ndimage
import scipy.stats

from .config import settings
from .exceptions import SizeLimitError, UndefinedTestError, ValidationError
from .models.results import BootstrapBandModel, PointTest, StatReport

logger = logging.getLogger(__name__)


def _signed_rank_null(doubled_ranks: np.ndarray) -> np.ndarray:
    """Counts of each doubled positive-rank sum over all 2^n sign assignments"""
    counts = np.zeros(int(doubled_ranks.sum()) + 1, dtype=np.int64)
    counts[0] = 1
    for r in doubled_ranks:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: counts.size - r]
        counts += shifted
    return counts


def wilcoxon_signed_rank(differences: Sequence[float]) -> Tuple[float, float]:
    """
    Exact two-sided Wilcoxon signed-rank test

    Zero differences are dropped. The null distribution of T+ over all 2^n
    sign assignments is built by convolution over the ranks; tied values get
    average ranks, so sums are tracked in half-rank units.

    Returns:
        (min(T+, T-), two-sided p-value)
    """
    d = np.asarray(differences, dtype=float).reshape(-1)
    d = d[d != 0.0]
    n = d.size
    if n == 0:
        raise UndefinedTestError("Wilcoxon signed-rank test", "all differences are zero")
    if n > settings.MAX_EXACT_WILCOXON:
        raise SizeLimitError("Exact Wilcoxon sample size", n, settings.MAX_EXACT_WILCOXON)

    doubled = np.rint(2.0 * scipy.stats.rankdata(np.abs(d))).astype(np.int64)
    observed = int(doubled[d > 0].sum())
    counts = _signed_rank_null(doubled)
    total = float(2 ** n)
    lower = counts[: observed + 1].sum() / total
    upper = counts[observed:].sum() / total
    p = min(1.0, 2.0 * min(lower, upper))

    t_plus = observed / 2.0
    t_minus = n * (n + 1) / 2.0 - t_plus
    return min(t_plus, t_minus), float(p)


def benjamini_hochberg(p_values: Sequence[float], q: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Step-up adjusted p-values and the flags adjusted <= q"""
    q = settings.FDR_LEVEL if q is None else q
    p = np.asarray(p_values, dtype=float).reshape(-1)
    if p.size == 0:
        raise ValidationError("Benjamini-Hochberg needs at least one p-value")
    if np.any((p < 0) | (p > 1)) or not np.all(np.isfinite(p)):
        raise ValidationError("p-values must lie in [0, 1]")
    adjusted = scipy.stats.false_discovery_control(p, method="bh")
    return adjusted, adjusted <= q


@dataclass(frozen=True)
class BootstrapBand:
    mean: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    confidence: float
    resamples: int


def bootstrap_band(
    curves: np.ndarray,
    confidence: Optional[float] = None,
    resamples: Optional[int] = None,
    seed: Optional[int] = None,
) -> BootstrapBand:
    """
    Percentile band of the mean curve over trials resampled with replacement

    Args:
        curves: (trials, points) per-trial difference curves
    """
    confidence = settings.BOOTSTRAP_CONFIDENCE if confidence is None else confidence
    resamples = settings.BOOTSTRAP_RESAMPLES if resamples is None else resamples
    data = np.asarray(curves, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    if data.shape[0] < 2:
        raise ValidationError("A bootstrap band needs at least two trials")

    mean = data.mean(axis=0)
    lower, upper = mean.copy(), mean.copy()
    spread = np.ptp(data, axis=0) > 0
    if np.any(spread):
        result = scipy.stats.bootstrap(
            (data[:, spread],),
            np.mean,
            axis=0,
            vectorized=True,
            method="percentile",
            n_resamples=resamples,
            confidence_level=confidence,
            random_state=np.random.default_rng(seed),
        )
        lower[spread] = result.confidence_interval.low
        upper[spread] = result.confidence_interval.high
    return BootstrapBand(mean, lower, upper, confidence, resamples)


def gaussian_smooth(curve: Sequence[float], sigma: float) -> np.ndarray:
    """Gaussian filter with reflecting boundaries; sigma = 0 returns a copy"""
    if sigma < 0:
        raise ValidationError("Smoothing width must be non-negative")
    values = np.asarray(curve, dtype=float)
    if sigma == 0 or values.size == 0:
        return values.copy()
    return scipy.ndimage.gaussian_filter1d(values, sigma, mode="reflect")


def area_under_curve(values: Sequence[float], scan_values: Sequence[float]) -> float:
    """Trapezoidal area; a single point has zero area"""
    y = np.asarray(values, dtype=float)
    x = np.asarray(scan_values, dtype=float)
    if y.shape != x.shape:
        raise ValidationError(f"{y.size} values for {x.size} scan points")
    if y.size < 2:
        return 0.0
    return float(scipy.integrate.trapezoid(y, x))


def compare_methods(
    errors_a: np.ndarray,
    errors_b: np.ndarray,
    scan_values: Sequence[float],
    method_a: str = "A",
    method_b: str = "B",
    q: Optional[float] = None,
    seed: Optional[int] = None,
) -> StatReport:
    """
    Paired comparison of per-trial error curves, A minus B

    Args:
        errors_a, errors_b: (trials, points) error arrays with matching trials
        scan_values: the scan variable for each point
    """
    a = np.atleast_2d(np.asarray(errors_a, dtype=float))
    b = np.atleast_2d(np.asarray(errors_b, dtype=float))
    x = np.asarray(scan_values, dtype=float)
    if a.shape != b.shape or a.shape[1] != x.size:
        raise ValidationError(f"Mismatched error arrays {a.shape}, {b.shape} for {x.size} scan points")
    q = settings.FDR_LEVEL if q is None else q
    diff = a - b

    auc_statistic = auc_p = None
    auc_diff = [area_under_curve(ra, x) - area_under_curve(rb, x) for ra, rb in zip(a, b)]
    try:
        auc_statistic, auc_p = wilcoxon_signed_rank(auc_diff)
    except UndefinedTestError as e:
        logger.info("AUC-level test skipped: %s", e.detail)

    statistics, raw = [], []
    for column in diff.T:
        try:
            stat, p = wilcoxon_signed_rank(column)
        except UndefinedTestError:
            stat, p = None, 1.0
        statistics.append(stat)
        raw.append(p)
    adjusted, flags = benjamini_hochberg(raw, q)
    tests = [
        PointTest(
            scan_value=float(v), statistic=s, p_value=p,
            adjusted_p_value=float(min(adj, 1.0)), significant=bool(f),
        )
        for v, s, p, adj, f in zip(x, statistics, raw, adjusted, flags)
    ]

    band = None
    if diff.shape[0] >= 2:
        bb = bootstrap_band(diff, seed=seed)
        band = BootstrapBandModel(
            scan_values=x.tolist(), mean=bb.mean.tolist(), lower=bb.lower.tolist(),
            upper=bb.upper.tolist(), confidence=bb.confidence, resamples=bb.resamples,
        )
    return StatReport(
        method_a=method_a, method_b=method_b, trials=diff.shape[0],
        auc_statistic=auc_statistic, auc_p_value=auc_p,
        point_tests=tests, band=band, fdr_level=q,
    )
