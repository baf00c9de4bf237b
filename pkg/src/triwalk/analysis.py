"""Quantitative signatures of a run: power-law exponents, saturation and
the detrapping time of the metastable component."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .observables import TimeSeries


@dataclass
class PowerLawFit:
    """Least-squares power law v ~ amplitude * t**exponent over a window."""

    exponent: float
    amplitude: float
    stderr: float
    window: tuple[int, int]


class SaturationResult(NamedTuple):
    saturated: bool
    level: float


@dataclass
class DetrapResult:
    """Outcome of the detrapping detector.

    ``tau_c`` is the start of the earliest sustained slope excursion, or
    None when the series never detraps.
    """

    tau_c: int | None
    baseline_slope: float
    trigger_slope: float


def fit_power_law(
    series: TimeSeries, t_min: int, t_max: int, bin_ratio: float = 1.2
) -> PowerLawFit:
    """Fit log(v) = exponent*log(t) + const over [t_min, t_max].

    The samples are first averaged over geometric bins whose edges grow
    by ``bin_ratio``; this suppresses step-scale oscillations that would
    otherwise bias the fit.  Ordinary least squares on the bin means
    gives the exponent and its standard error.

    Parameters
    ----------
    series : TimeSeries
        Positive samples indexed by integer time.
    t_min, t_max : int
        Inclusive fit window; t_min must be >= 1.
    bin_ratio : float, optional
        Growth factor of successive bin edges (> 1).

    Raises
    ------
    ValueError
        If the window is invalid, fewer than 5 nonempty bins result, or
        any bin average is <= 0.
    """
    if t_min < 1:
        raise ValueError(f"t_min must be >= 1, got {t_min}")
    if t_max <= t_min:
        raise ValueError(f"t_max must exceed t_min, got [{t_min}, {t_max}]")
    if bin_ratio <= 1.0:
        raise ValueError(f"bin_ratio must be > 1, got {bin_ratio}")
    vals = series.window(t_min, t_max)
    times = np.arange(t_min, t_max + 1, dtype=np.float64)

    edges = [float(t_min)]
    while edges[-1] <= t_max:
        edges.append(edges[-1] * bin_ratio)
    idx = np.searchsorted(edges, times, side="right") - 1
    nb = len(edges) - 1
    counts = np.bincount(idx, minlength=nb)
    sum_t = np.bincount(idx, weights=times, minlength=nb)
    sum_v = np.bincount(idx, weights=vals, minlength=nb)
    keep = counts > 0
    if keep.sum() < 5:
        raise ValueError(
            f"only {int(keep.sum())} bins in [{t_min}, {t_max}] with "
            f"ratio {bin_ratio}; need at least 5"
        )
    mean_t = sum_t[keep] / counts[keep]
    mean_v = sum_v[keep] / counts[keep]
    if np.any(mean_v <= 0):
        bad = mean_t[mean_v <= 0][0]
        raise ValueError(f"bin average <= 0 near t = {bad:.0f}; cannot fit log-log")

    x = np.log(mean_t)
    y = np.log(mean_v)
    n = len(x)
    xm = x.mean()
    ym = y.mean()
    sxx = np.sum((x - xm) ** 2)
    slope = np.sum((x - xm) * (y - ym)) / sxx
    intercept = ym - slope * xm
    resid = y - (slope * x + intercept)
    stderr = float(np.sqrt(np.sum(resid**2) / (n - 2) / sxx))
    return PowerLawFit(
        exponent=float(slope),
        amplitude=float(np.exp(intercept)),
        stderr=stderr,
        window=(t_min, t_max),
    )


def detect_saturation(
    series: TimeSeries,
    w1: tuple[int, int],
    w2: tuple[int, int],
    rel_tol: float,
) -> SaturationResult:
    """Compare the series mean over two windows.

    Saturated means |mean(w2) - mean(w1)| <= rel_tol * mean(w1); the
    reported level is mean(w2).  Windows are inclusive (lo, hi) time
    ranges; w2 must lie entirely after w1.
    """
    for w in (w1, w2):
        if w[1] < w[0]:
            raise ValueError(f"empty window {w}")
    if w2[0] <= w1[1]:
        raise ValueError(f"window {w2} must start after window {w1} ends")
    m1 = float(np.mean(series.window(*w1)))
    m2 = float(np.mean(series.window(*w2)))
    return SaturationResult(abs(m2 - m1) <= rel_tol * m1, m2)


def sliding_slopes(series: TimeSeries, window: int) -> TimeSeries:
    """Least-squares slope of the series over every window of given width.

    Sample k is the slope over [start + k, start + k + window - 1].
    """
    if window < 2:
        raise ValueError(f"window must be >= 2, got {window}")
    if window > len(series):
        raise ValueError(f"window {window} exceeds series length {len(series)}")
    w = window
    # OLS slope against equally spaced abscissae reduces to a correlation
    # with the centered-ramp kernel.
    kernel = (np.arange(w) - (w - 1) / 2.0) / (w * (w * w - 1.0) / 12.0)
    slopes = np.correlate(series.values, kernel, mode="valid")
    return TimeSeries(f"slope({series.name})", slopes, start=series.start)


def detect_detrapping_time(
    pr: TimeSeries,
    window: int = 100,
    slope_threshold: float = 0.05,
    sustain: int = 50,
    baseline_fraction: float = 0.1,
    baseline_factor: float = 5.0,
) -> DetrapResult:
    """Locate the moment the participation-ratio slope suddenly increases.

    A sliding least-squares slope is computed over every window of the
    given width.  The baseline slope is the median over windows starting
    in the first ``baseline_fraction`` of the series (median resists early
    transient spikes).  Detrapping triggers at the earliest window whose
    slope exceeds max(slope_threshold, baseline_factor*|baseline|) and
    stays above it for ``sustain`` consecutive windows; ``tau_c`` is that
    window's start.  When the series has several detrapping transitions,
    only the first is reported; use :func:`sliding_slopes` to inspect the
    full slope series.
    """
    if window < 10:
        raise ValueError(f"window must be >= 10, got {window}")
    if len(pr) < 2 * window:
        raise ValueError(
            f"series too short: {len(pr)} samples, need at least {2 * window}"
        )
    if sustain < 1:
        raise ValueError(f"sustain must be >= 1, got {sustain}")
    slopes = sliding_slopes(pr, window).values
    n_base = max(1, min(len(slopes), int(baseline_fraction * len(pr))))
    baseline = float(np.median(slopes[:n_base]))
    trigger = max(slope_threshold, baseline_factor * abs(baseline))

    above = slopes > trigger
    if sustain > len(above):
        tau_c = None
    else:
        runs = np.convolve(above.astype(np.float64), np.ones(sustain), mode="valid")
        hits = np.nonzero(runs == sustain)[0]
        tau_c = int(pr.start + hits[0]) if len(hits) else None
    return DetrapResult(tau_c=tau_c, baseline_slope=baseline, trigger_slope=trigger)
