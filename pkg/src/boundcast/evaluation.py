"""Error metrics, leave-one-out grid tuning, and the benchmark runner."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .core import (
    DesignSet,
    Embedding,
    HyperParams,
    RegressorSpec,
    TimeSeries,
    build_design,
    build_embeddings,
)
from .errors import NumericError, ZeroActual, ZeroDenominator
from .predictors import (
    KernelKind,
    MODEL_IDS,
    MODEL_KERNELS,
    _design_spec_for,
    cp_forecast_path,
    kernel_weight,
    predict_cp,
    predict_ll,
    predict_nw,
)
from .preprocess import TransformPipeline, fit_transform, split
from . import datasets
from .ingest import ingest_csv

log = logging.getLogger("boundcast")

DEFAULT_GAMMA_GRID = tuple(round(0.01 * i, 2) for i in range(101)) + (1.5, 2.0, 5.0, 10.0)
DEFAULT_LOO_CAP = 50


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MetricPair:
    mape: float
    smape: float


def _metric_args(actual, predicted):
    a = np.asarray(actual, dtype=float)
    p = np.asarray(predicted, dtype=float)
    if a.shape != p.shape or a.ndim != 1 or a.size == 0:
        raise ValueError("actual and predicted must be equal-length non-empty vectors")
    return a, p


def mape(actual, predicted) -> float:
    """Mean absolute percentage error, in percent."""
    a, p = _metric_args(actual, predicted)
    if np.any(a == 0.0):
        raise ZeroActual("MAPE undefined when an actual value is zero")
    return float(100.0 * np.mean(np.abs((a - p) / a)))


def smape(actual, predicted) -> float:
    """Symmetric MAPE, in percent; bounded by 200."""
    a, p = _metric_args(actual, predicted)
    denom = (np.abs(a) + np.abs(p)) / 2.0
    if np.any(denom == 0.0):
        raise ZeroDenominator("SMAPE undefined when actual and predicted are both zero")
    return float(100.0 * np.mean(np.abs(p - a) / denom))


# ---------------------------------------------------------------------------
# leave-one-out cross validation over a hyperparameter grid
# ---------------------------------------------------------------------------

def loo_fold_rows(v: int, cap: int = DEFAULT_LOO_CAP) -> np.ndarray:
    """Rows held out during tuning: the most recent min(cap, v) targets."""
    cap = v if cap is None or cap <= 0 else min(cap, v)
    return np.arange(v - cap, v)


def default_bandwidth_grid(design: DesignSet, num: int = 50) -> np.ndarray:
    """0.1x to 10x the median pairwise embedding distance, log-spaced."""
    Z = design.Z
    sq = np.sum(Z ** 2, axis=1)
    d2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * (Z @ Z.T), 0.0)
    dist = np.sqrt(d2[np.triu_indices(Z.shape[0], k=1)])
    med = float(np.median(dist)) if dist.size else 1.0
    if med <= 0:
        med = 1.0
    return np.logspace(np.log10(0.1 * med), np.log10(10.0 * med), num)


def _invert_many(pipeline: TransformPipeline | None, values, t_index):
    if pipeline is None:
        return np.asarray(values, dtype=float)
    return np.asarray(pipeline.inverse_at(values, t_index), dtype=float)


def cv_forecasts(design: DesignSet, model: str, hp: HyperParams, grid,
                 pipeline: TransformPipeline | None = None,
                 loo_cap: int = DEFAULT_LOO_CAP):
    """Original-scale leave-one-out predictions for every grid value.

    Each held-out design row is predicted from all remaining rows. Returns
    (preds[n_grid, n_folds], actual[n_folds]); a failed fold leaves NaN in
    its column for the affected grid values.
    """
    grid = np.asarray(list(grid), dtype=float)
    rows = loo_fold_rows(design.v, loo_cap)
    t_targets = design.anchors[rows] + design.horizon
    actual = _invert_many(pipeline, design.b_y[rows], t_targets)
    preds = np.full((grid.size, rows.size), np.nan)

    if model == "CP":
        for c, j in enumerate(rows):
            sub = design.drop_row(j)
            z = design.embedding(j)
            try:
                fcs = cp_forecast_path(sub, z, hp, grid)
            except NumericError as exc:
                log.warning("CV fold %d failed for CP: %s", j, exc)
                continue
            vals = np.array([fc.value for fc in fcs])
            preds[:, c] = _invert_many(pipeline, vals, np.full(vals.size, t_targets[c]))
        return preds, actual

    kind = MODEL_KERNELS[model]
    Z, b_y = design.Z, design.b_y
    sq = np.sum(Z ** 2, axis=1)
    D = np.sqrt(np.maximum(sq[:, None] + sq[None, :] - 2.0 * (Z @ Z.T), 0.0))
    for c, j in enumerate(rows):
        keep = np.arange(design.v) != j
        dist = D[j, keep]
        y = b_y[keep]
        if model.startswith("LL"):
            X = np.hstack([Z[keep], np.ones((design.v - 1, 1))])
            xk = np.concatenate([Z[j], [1.0]])
        for g, bw in enumerate(grid):
            K = kernel_weight(dist / bw, kind)
            tot = float(K.sum())
            if model.startswith("NW"):
                if tot <= 0.0:
                    val = float(y[np.argmin(dist)])
                else:
                    val = float((K @ y) / tot)
            else:
                if tot <= 0.0:
                    val = float(y[np.argmin(dist)])
                else:
                    G = X.T @ (K[:, None] * X)
                    try:
                        u = np.linalg.solve(G, xk)
                        if not np.all(np.isfinite(u)) or \
                                np.max(np.abs(G @ u - xk)) > 1e-6 * (1.0 + np.max(np.abs(xk))):
                            raise np.linalg.LinAlgError
                    except np.linalg.LinAlgError:
                        u = np.linalg.solve(G + 1e-8 * np.eye(G.shape[0]), xk)
                    val = float((K * (X @ u)) @ y)
            preds[g, c] = _invert_many(pipeline, val, t_targets[c])
    return preds, actual


def criterion_curves(preds: np.ndarray, actual: np.ndarray):
    """Per-grid-value MAPE and SMAPE; grid values with any failed fold get inf."""
    n_grid = preds.shape[0]
    mape_curve = np.full(n_grid, np.inf)
    smape_curve = np.full(n_grid, np.inf)
    for g in range(n_grid):
        row = preds[g]
        if np.all(np.isfinite(row)):
            mape_curve[g] = mape(actual, row)
            smape_curve[g] = smape(actual, row)
    return mape_curve, smape_curve


def select_min(grid, curve) -> tuple[float, float]:
    """Grid value with the smallest error; ties go to the smaller value."""
    grid = np.asarray(list(grid), dtype=float)
    curve = np.asarray(curve, dtype=float)
    order = np.argsort(grid, kind="stable")
    g_sorted, c_sorted = grid[order], curve[order]
    idx = int(np.argmin(c_sorted))
    if not np.isfinite(c_sorted[idx]):
        raise NumericError("every grid value failed during cross validation")
    return float(g_sorted[idx]), float(c_sorted[idx])


def tune_gamma(train: TimeSeries, hp: HyperParams, grid, criterion: str = "mape",
               model: str = "CP", h: int = 1,
               pipeline: TransformPipeline | None = None,
               loo_cap: int = DEFAULT_LOO_CAP) -> float:
    """Pick the grid value minimizing leave-one-out error on the training series."""
    spec = _design_spec_for(model, hp)
    design = build_design(build_embeddings(train, hp.order_p, h), spec, horizon=h)
    preds, actual = cv_forecasts(design, model, hp, grid, pipeline, loo_cap)
    mape_curve, smape_curve = criterion_curves(preds, actual)
    curve = mape_curve if criterion == "mape" else smape_curve
    return select_min(grid, curve)[0]


# ---------------------------------------------------------------------------
# frozen-design test evaluation
# ---------------------------------------------------------------------------

def evaluate_test(original: TimeSeries, pipeline: TransformPipeline | None,
                  design: DesignSet, model: str, hp: HyperParams,
                  test_targets, kernel: KernelKind | None = None):
    """Forecast each test target from the observations preceding it.

    The design and trend stay frozen at the split; only the query embedding
    sees post-split observations. Returns (t, actual, predicted) on the
    original scale.
    """
    t_targets = np.asarray(list(test_targets), dtype=int)
    p, h = hp.order_p, design.horizon
    t_all = original.origin_index + np.arange(len(original))
    transformed = pipeline.forward_at(original.values, t_all) if pipeline else original.values
    actual = original.values[t_targets - original.origin_index]
    predicted = np.empty(t_targets.size)
    for i, t in enumerate(t_targets):
        anchor = t - h - original.origin_index
        window = transformed[anchor - p + 1:anchor + 1][::-1]
        z = Embedding(window, t - h)
        if model == "CP":
            fc = predict_cp(design, z, hp)
        elif model.startswith("NW"):
            fc = predict_nw(design, z, KernelKind(MODEL_KERNELS[model], kernel.bandwidth))
        else:
            fc = predict_ll(design, z, KernelKind(MODEL_KERNELS[model], kernel.bandwidth))
        predicted[i] = _invert_many(pipeline, fc.value, t)
    return t_targets, actual, predicted


# ---------------------------------------------------------------------------
# benchmark runner
# ---------------------------------------------------------------------------

@dataclass
class RunConfig:
    """Everything a run needs; CLI flags and config files map 1:1 onto fields."""

    data: str | None = None
    column: str | int | None = None
    dataset: str | None = None
    datasets: tuple[str, ...] = ()
    data_dir: str = "data"
    transform: tuple[str, ...] | None = None
    train_len: int | None = None
    train_frac: float | None = None
    test_len: int | None = None
    order: int = 12
    regressor: str = "autoregressive"
    sigma: float = 0.0
    l_const: float = 1.0
    gamma: float | None = None
    gamma_grid: tuple[float, ...] = DEFAULT_GAMMA_GRID
    kernels: tuple[str, ...] = ("epanechnikov", "gaussian", "tricube")
    bandwidth_grid: tuple[float, ...] | None = None
    horizons: tuple[int, ...] = (1, 2, 3)
    criteria: tuple[str, ...] = ("mape", "smape")
    models: tuple[str, ...] = MODEL_IDS
    out: str = "out"
    loo_cap: int = DEFAULT_LOO_CAP
    seed: int = 0

    def hyper_params(self, h: int) -> HyperParams:
        spec = RegressorSpec(self.regressor, self.order)
        return HyperParams(self.sigma, self.l_const, 0.0, self.order, spec, h)

    def cp_grid(self) -> tuple[float, ...]:
        return (self.gamma,) if self.gamma is not None else tuple(self.gamma_grid)


@dataclass
class ReportRow:
    model: str
    ahead: int
    gamma_mape: float = np.nan
    tr_mape: float = np.nan
    te_mape: float = np.nan
    gamma_smape: float = np.nan
    tr_smape: float = np.nan
    te_smape: float = np.nan
    error: str = ""


REPORT_COLUMNS = ("model", "ahead", "gamma_mape", "tr_MAPE", "te_MAPE",
                  "gamma_smape", "tr_SMAPE", "te_SMAPE")


@dataclass
class EvalReport:
    """One dataset's results in the benchmark table layout."""

    dataset: str
    rows: list[ReportRow] = field(default_factory=list)
    trajectories: dict = field(default_factory=dict)  # (model, h, criterion) -> (t, actual, pred)
    notes: list[str] = field(default_factory=list)

    def to_csv(self) -> str:
        lines = [",".join(REPORT_COLUMNS)]
        for r in self.rows:
            lines.append(",".join([
                r.model, str(r.ahead),
                _fmt(r.gamma_mape, "%.6g"), _fmt(r.tr_mape), _fmt(r.te_mape),
                _fmt(r.gamma_smape, "%.6g"), _fmt(r.tr_smape), _fmt(r.te_smape),
            ]))
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        widths = (6, 6, 11, 9, 9, 12, 10, 10)
        header = "".join(c.ljust(w) for c, w in zip(REPORT_COLUMNS, widths))
        lines = [f"dataset: {self.dataset}", header, "-" * len(header)]
        for r in self.rows:
            cells = (r.model, str(r.ahead),
                     _fmt(r.gamma_mape, "%.4g"), _fmt(r.tr_mape), _fmt(r.te_mape),
                     _fmt(r.gamma_smape, "%.4g"), _fmt(r.tr_smape), _fmt(r.te_smape))
            lines.append("".join(c.ljust(w) for c, w in zip(cells, widths)))
            if r.error:
                lines.append(f"    failed: {r.error}")
        for note in self.notes:
            lines.append(f"note: {note}")
        return "\n".join(lines) + "\n"


def _fmt(x: float, fmt: str = "%.4f") -> str:
    return "nan" if not np.isfinite(x) else fmt % x


@dataclass(frozen=True)
class DatasetTask:
    """A resolved dataset: the series plus its protocol parameters."""

    name: str
    series: TimeSeries
    column: str | int | None
    train_len: int
    test_len: int
    transform: tuple[str, ...]
    note: str = ""


def resolve_tasks(config: RunConfig) -> list[DatasetTask]:
    """Turn the config into concrete per-dataset tasks, reading CSVs."""
    tasks = []
    if config.data:
        series = ingest_csv(config.data, config.column)
        n = len(series)
        train_len = config.train_len
        if train_len is None:
            frac = config.train_frac if config.train_frac is not None else 0.8
            train_len = int(np.floor(frac * n))
        test_len = config.test_len if config.test_len is not None else n - train_len
        name = config.dataset or "custom"
        steps = config.transform if config.transform is not None else ()
        tasks.append(DatasetTask(name, series, config.column, train_len, test_len, steps))
        return tasks
    names = config.datasets or ((config.dataset,) if config.dataset else ())
    if not names:
        raise ValueError("no dataset given: set data= or datasets=")
    for name in names:
        preset = datasets.PRESETS[name]
        path = datasets.ensure_csv(name, config.data_dir)
        series = ingest_csv(path, preset["column"])
        steps = config.transform if config.transform is not None else preset["transform"]
        note = "" if name in datasets.EMBEDDED else \
            "synthetic stand-in series; supply the real CSV to reproduce published numbers"
        tasks.append(DatasetTask(
            name, series, preset["column"],
            config.train_len or preset["train_len"],
            config.test_len or preset["test_len"],
            tuple(steps), note))
    return tasks


def benchmark_dataset(task: DatasetTask, config: RunConfig) -> EvalReport:
    """Tune, test and tabulate every (model, horizon) cell for one dataset."""
    report = EvalReport(task.name)
    if task.note:
        report.notes.append(task.note)
    n = len(task.series)
    if task.train_len + task.test_len < n:
        report.notes.append(
            f"{n - task.train_len - task.test_len} observations between the stated "
            "train and test windows are not scored")
    transformed, pipeline = fit_transform(task.series, task.transform, task.train_len)
    train_t = TimeSeries(transformed.values[:task.train_len], transformed.origin_index)
    test_targets = np.arange(n - task.test_len, n)

    for h in config.horizons:
        hp = config.hyper_params(h)
        designs = {}
        for model in config.models:
            spec = _design_spec_for(model, hp)
            key = (spec.kind, spec.order)
            if key not in designs:
                designs[key] = build_design(
                    build_embeddings(train_t, hp.order_p, h), spec, horizon=h)
            design = designs[key]
            row = ReportRow(model=model, ahead=h)
            t0 = time.perf_counter()
            try:
                if model == "CP":
                    grid = np.asarray(config.cp_grid())
                else:
                    grid = (np.asarray(config.bandwidth_grid)
                            if config.bandwidth_grid is not None
                            else default_bandwidth_grid(design))
                preds, actual = cv_forecasts(design, model, hp, grid, pipeline,
                                             config.loo_cap)
                mape_curve, smape_curve = criterion_curves(preds, actual)
                row.gamma_mape, row.tr_mape = select_min(grid, mape_curve)
                row.gamma_smape, row.tr_smape = select_min(grid, smape_curve)
                for criterion, selected in (("mape", row.gamma_mape),
                                            ("smape", row.gamma_smape)):
                    if criterion not in config.criteria:
                        continue
                    if model == "CP":
                        hp_sel = HyperParams(hp.sigma, hp.l_const, selected,
                                             hp.order_p, hp.regressor, h)
                        kernel = None
                    else:
                        hp_sel = hp
                        kernel = KernelKind(MODEL_KERNELS[model], selected)
                    t_idx, act, pred = evaluate_test(
                        task.series, pipeline, design, model, hp_sel,
                        test_targets, kernel)
                    if criterion == "mape":
                        row.te_mape = mape(act, pred)
                    else:
                        row.te_smape = smape(act, pred)
                    report.trajectories[(model, h, criterion)] = (t_idx, act, pred)
            except Exception as exc:  # keep the run alive; the row records the failure
                row.error = str(exc)
                log.warning("%s %s h=%d failed: %s", task.name, model, h, exc)
            log.info("%s %s h=%d done in %.2fs", task.name, model, h,
                     time.perf_counter() - t0)
            report.rows.append(row)
    return report


def run_benchmark(config: RunConfig) -> dict[str, EvalReport]:
    """Benchmark every configured dataset; per-cell failures do not abort."""
    return {task.name: benchmark_dataset(task, config)
            for task in resolve_tasks(config)}
