"""Causal transforms: log10, training-window linear detrend, splitting.

The trend is fit by least squares on the training indices only and
extrapolated over the rest, so nothing downstream of the split can leak
into the fitted parameters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import TimeSeries
from .errors import DegenerateTrend, EmptySplit, NonPositiveValue

TRANSFORM_STEPS = ("log10", "detrend")


def parse_steps(steps) -> tuple[str, ...]:
    """Normalize a step list; 'none' and empty mean no transform."""
    if steps is None:
        return ()
    if isinstance(steps, str):
        steps = [s for s in steps.replace(",", " ").split() if s]
    out = []
    for s in steps:
        s = s.strip().lower()
        if s in ("", "none"):
            continue
        if s in ("linear-detrend", "linear_detrend"):
            s = "detrend"
        if s not in TRANSFORM_STEPS:
            raise ValueError(f"unknown transform step {s!r}")
        out.append(s)
    return tuple(out)


@dataclass(frozen=True)
class TransformPipeline:
    """Fitted forward/inverse transform; indices are global series positions."""

    steps: tuple[str, ...]
    train_len: int
    trend_slope: float = 0.0
    trend_intercept: float = 0.0

    def trend_at(self, t_index) -> np.ndarray:
        return self.trend_slope * np.asarray(t_index, dtype=float) + self.trend_intercept

    def forward_at(self, value, t_index):
        """Apply the fitted steps to original-scale values at given indices."""
        x = np.asarray(value, dtype=float)
        for step in self.steps:
            if step == "log10":
                if np.any(x <= 0):
                    raise NonPositiveValue("log10 transform needs positive values")
                x = np.log10(x)
            else:
                x = x - self.trend_at(t_index)
        return float(x) if np.isscalar(value) else x

    def inverse_at(self, value, t_index):
        """Undo the fitted steps in reverse order."""
        x = np.asarray(value, dtype=float)
        for step in reversed(self.steps):
            if step == "detrend":
                x = x + self.trend_at(t_index)
            else:
                x = np.power(10.0, x)
        return float(x) if np.isscalar(value) else x


def fit_transform(series: TimeSeries, steps, train_len: int | None = None
                  ) -> tuple[TimeSeries, TransformPipeline]:
    """Fit the transform on the first train_len points and apply it everywhere.

    train_len defaults to the whole series (e.g. when forecasting past the
    end rather than scoring a held-out tail).
    """
    steps = parse_steps(steps)
    n = len(series)
    if train_len is None:
        train_len = n
    values = series.values.copy()
    t = series.origin_index + np.arange(n)
    slope = intercept = 0.0
    for step in steps:
        if step == "log10":
            if np.any(values <= 0):
                raise NonPositiveValue("log10 transform needs positive values")
            values = np.log10(values)
        else:
            if train_len < 2:
                raise DegenerateTrend("linear detrend needs at least 2 training points")
            tt = t[:train_len]
            yy = values[:train_len]
            slope, intercept = np.polyfit(tt, yy, 1)
            slope, intercept = float(slope), float(intercept)
            values = values - (slope * t + intercept)
    pipeline = TransformPipeline(steps, train_len, slope, intercept)
    return TimeSeries(values, series.origin_index), pipeline


def invert_forecast(value: float, t_index: int, pipeline: TransformPipeline) -> float:
    """Map a transformed-scale forecast at index t_index back to the original scale."""
    return float(pipeline.inverse_at(value, t_index))


def split(series: TimeSeries, train_len: int | None = None, *,
          train_fraction: float | None = None,
          test_len: int | None = None) -> tuple[TimeSeries, TimeSeries]:
    """Contiguous prefix/suffix split.

    test_len, when given, takes the last test_len points even if that leaves
    a gap after the training prefix (one benchmark dataset states split
    sizes that do not add up to its length; both stated sizes are honored
    and the middle is simply not scored).
    """
    n = len(series)
    if train_len is None:
        if train_fraction is None:
            raise ValueError("give train_len or train_fraction")
        if not 0.0 < train_fraction < 1.0:
            raise ValueError("train_fraction must be in (0, 1)")
        train_len = int(np.floor(train_fraction * n))
    if train_len < 1 or train_len >= n:
        raise EmptySplit(f"train_len={train_len} leaves an empty side of {n} points")
    if test_len is None:
        test_len = n - train_len
    if test_len < 1 or train_len + test_len > n:
        raise EmptySplit(f"test_len={test_len} incompatible with train_len={train_len}, n={n}")
    start = n - test_len
    train = TimeSeries(series.values[:train_len], series.origin_index)
    test = TimeSeries(series.values[start:], series.origin_index + start)
    return train, test
