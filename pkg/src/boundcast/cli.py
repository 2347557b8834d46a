"""Command line interface: predict, tune, benchmark, report, prepare-data."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import fields, replace
from pathlib import Path

import numpy as np

from . import datasets
from .core import HyperParams, TimeSeries
from .errors import ConfigError, DataError, NumericError
from .evaluation import (
    EvalReport,
    ReportRow,
    REPORT_COLUMNS,
    RunConfig,
    criterion_curves,
    cv_forecasts,
    default_bandwidth_grid,
    run_benchmark,
    select_min,
)
from .ingest import ingest_csv, read_config_file
from .predictors import KernelKind, MODEL_IDS, _design_spec_for, predict_horizon
from .preprocess import fit_transform, parse_steps
from .core import build_design, build_embeddings

log = logging.getLogger("boundcast")


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # map usage errors onto exit code 1
        raise ConfigError(message)


def _floats(text: str) -> tuple[float, ...]:
    """Comma list of floats; a:b:step expands to an inclusive range."""
    out: list[float] = []
    for piece in text.split(","):
        piece = piece.strip()
        if not piece:
            continue
        if ":" in piece:
            lo, hi, step = (float(x) for x in piece.split(":"))
            n = int(round((hi - lo) / step))
            out.extend(round(lo + i * step, 10) for i in range(n + 1))
        else:
            out.append(float(piece))
    if not out:
        raise ConfigError(f"empty number list: {text!r}")
    return tuple(out)


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x.strip())


def _names(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


_CONVERTERS = {
    "column": str,
    "transform": parse_steps,
    "train_len": int, "test_len": int, "order": int, "loo_cap": int, "seed": int,
    "train_frac": float, "sigma": float, "l_const": float, "gamma": float,
    "gamma_grid": _floats, "bandwidth_grid": _floats,
    "horizons": _ints,
    "datasets": _names, "criteria": _names, "models": _names, "kernels": _names,
}


def _build_config(args) -> RunConfig:
    config = RunConfig()
    file_values = read_config_file(args.config) if getattr(args, "config", None) else {}
    known = {f.name for f in fields(RunConfig)}
    for key, raw in file_values.items():
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        config = replace(config, **{key: _CONVERTERS.get(key, str)(raw)})
    for f in fields(RunConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            config = replace(config, **{f.name: value})
    return config


def _add_common(sub: argparse.ArgumentParser):
    sub.add_argument("--config", help="flat key = value config file; flags win")
    sub.add_argument("--data", help="CSV file with the series")
    sub.add_argument("--column", help="value column name or 0-based index")
    sub.add_argument("--dataset", choices=datasets.DATASET_NAMES,
                     help="built-in dataset preset")
    sub.add_argument("--data-dir", dest="data_dir", help="directory for preset CSVs")
    sub.add_argument("--transform", type=parse_steps,
                     help="comma list of steps: log10,detrend or none")
    sub.add_argument("--train-len", dest="train_len", type=int)
    sub.add_argument("--train-frac", dest="train_frac", type=float)
    sub.add_argument("--test-len", dest="test_len", type=int)
    sub.add_argument("--order", type=int, help="embedding order p")
    sub.add_argument("--regressor",
                     choices=("constant", "autoregressive", "affine"))
    sub.add_argument("--sigma", type=float)
    sub.add_argument("--l-const", dest="l_const", type=float)
    sub.add_argument("--gamma", type=float, help="fixed balance radius")
    sub.add_argument("--gamma-grid", dest="gamma_grid", type=_floats,
                     help="comma list, a:b:step ranges allowed")
    sub.add_argument("--kernel", dest="kernels", type=_names,
                     help="kernel kinds for the baselines")
    sub.add_argument("--bandwidth-grid", dest="bandwidth_grid", type=_floats)
    sub.add_argument("--horizons", type=_ints, help="comma list, e.g. 1,2,3")
    sub.add_argument("--criterion", dest="criteria", type=_names,
                     help="mape, smape or both")
    sub.add_argument("--models", type=_names, help=f"subset of {','.join(MODEL_IDS)}")
    sub.add_argument("--out", help="output directory")
    sub.add_argument("--loo-cap", dest="loo_cap", type=int)
    sub.add_argument("--seed", type=int)


def build_parser() -> _Parser:
    parser = _Parser(prog="boundcast",
                     description="bounded-error time-series forecasting")
    parser.add_argument("-v", "--verbose", action="store_true")
    subs = parser.add_subparsers(dest="command", required=True)
    for name, desc in (
        ("predict", "forecast past the end of a series"),
        ("tune", "grid-search a hyperparameter by leave-one-out error"),
        ("benchmark", "tune and score every model on the test window"),
    ):
        sub = subs.add_parser(name, description=desc)
        _add_common(sub)
        if name in ("predict", "tune"):
            sub.add_argument("--model", default="CP", choices=MODEL_IDS)
            sub.add_argument("--bandwidth", type=float,
                             help="fixed kernel bandwidth (predict with NW/LL)")
    rep = subs.add_parser("report", description="render a saved report CSV")
    rep.add_argument("path", help="report CSV produced by benchmark")
    prep = subs.add_parser("prepare-data", description="write the benchmark CSVs")
    prep.add_argument("--out", help="target directory (default: data)")
    prep.add_argument("--datasets", type=_names)
    return parser


def _load_series(config: RunConfig) -> tuple[str, TimeSeries, tuple[str, ...]]:
    if config.data:
        series = ingest_csv(config.data, config.column)
        steps = config.transform if config.transform is not None else ()
        return config.dataset or "custom", series, tuple(steps)
    if config.dataset:
        preset = datasets.PRESETS[config.dataset]
        path = datasets.ensure_csv(config.dataset, config.data_dir)
        series = ingest_csv(path, preset["column"])
        steps = config.transform if config.transform is not None else preset["transform"]
        return config.dataset, series, tuple(steps)
    raise ConfigError("give --data or --dataset")


def _out_dir(config: RunConfig) -> Path:
    out = Path(config.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise DataError(f"output directory not writable: {out}: {exc}") from exc
    return out


def cmd_predict(args) -> int:
    config = _build_config(args)
    name, series, steps = _load_series(config)
    transformed, pipeline = fit_transform(series, steps)  # everything is past data
    out = _out_dir(config)
    rows = []
    for h in config.horizons:
        base = config.hyper_params(h)
        hp = HyperParams(base.sigma, base.l_const, config.gamma or 0.0,
                         base.order_p, base.regressor, h)
        kernel = None
        if args.model != "CP":
            if args.bandwidth is None:
                raise ConfigError(f"--bandwidth is required for model {args.model}")
            kernel = KernelKind("gaussian", args.bandwidth)  # kind comes from the model id
        fc = predict_horizon(transformed, hp, args.model, kernel)
        t_future = series.origin_index + len(series) - 1 + h
        value = pipeline.inverse_at(fc.value, t_future)
        bound = ""
        if fc.error_bound is not None:
            bound = f" bound(transformed)={fc.error_bound:.6g}"
        print(f"h={h} forecast={value:.6g}{bound}")
        rows.append((h, value, fc.error_bound))
    path = out / f"{name}_forecasts.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["horizon", "forecast", "error_bound_transformed"])
        for h, value, bound in rows:
            writer.writerow([h, f"{value:.10g}", "" if bound is None else f"{bound:.10g}"])
    log.info("wrote %s", path)
    return 0


def cmd_tune(args) -> int:
    config = _build_config(args)
    name, series, steps = _load_series(config)
    n = len(series)
    train_len = config.train_len
    if train_len is None:
        preset = datasets.PRESETS.get(name)
        if preset:
            train_len = preset["train_len"]
        else:
            train_len = int(np.floor((config.train_frac or 0.8) * n))
    transformed, pipeline = fit_transform(series, steps, train_len)
    train_t = TimeSeries(transformed.values[:train_len], transformed.origin_index)
    out = _out_dir(config)
    lines = [("model", "ahead", "criterion", "selected", "cv_error")]
    for h in config.horizons:
        hp = config.hyper_params(h)
        spec = _design_spec_for(args.model, hp)
        design = build_design(build_embeddings(train_t, hp.order_p, h), spec, horizon=h)
        if args.model == "CP":
            grid = np.asarray(config.cp_grid())
        elif config.bandwidth_grid is not None:
            grid = np.asarray(config.bandwidth_grid)
        else:
            grid = default_bandwidth_grid(design)
        preds, actual = cv_forecasts(design, args.model, hp, grid, pipeline, config.loo_cap)
        curves = dict(zip(("mape", "smape"), criterion_curves(preds, actual)))
        for criterion in config.criteria:
            selected, err = select_min(grid, curves[criterion])
            print(f"{args.model} h={h} {criterion}: selected={selected:.6g} cv={err:.4f}")
            lines.append((args.model, h, criterion, f"{selected:.10g}", f"{err:.6f}"))
    path = out / f"{name}_tune.csv"
    with open(path, "w", newline="") as fh:
        csv.writer(fh).writerows(lines)
    log.info("wrote %s", path)
    return 0


def cmd_benchmark(args) -> int:
    config = _build_config(args)
    if not config.data and not config.datasets and not config.dataset:
        config = replace(config, datasets=datasets.DATASET_NAMES)
    out = _out_dir(config)
    reports = run_benchmark(config)
    any_ok = False
    for name, report in reports.items():
        (out / f"{name}_report.csv").write_text(report.to_csv())
        (out / f"{name}_report.txt").write_text(report.to_text())
        for (model, h, criterion), (t_idx, act, pred) in report.trajectories.items():
            tpath = out / f"{name}_{model}_h{h}_{criterion}_trajectory.csv"
            with open(tpath, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["t", "actual", "predicted"])
                for t, a, p in zip(t_idx, act, pred):
                    writer.writerow([t, f"{a:.10g}", f"{p:.10g}"])
        any_ok = any_ok or any(not r.error for r in report.rows)
        sys.stdout.write(report.to_text() + "\n")
    log.info("reports written to %s", out)
    if not any_ok and any(r.rows for r in reports.values()):
        raise NumericError("every benchmark cell failed")
    return 0


def cmd_report(args) -> int:
    path = Path(args.path)
    if not path.exists():
        raise DataError(f"no such report: {path}")
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != list(REPORT_COLUMNS):
        raise DataError(f"{path} is not a benchmark report")
    report = EvalReport(dataset=path.stem.replace("_report", ""))
    for row in rows[1:]:
        report.rows.append(ReportRow(
            model=row[0], ahead=int(row[1]),
            gamma_mape=float(row[2]), tr_mape=float(row[3]), te_mape=float(row[4]),
            gamma_smape=float(row[5]), tr_smape=float(row[6]), te_smape=float(row[7])))
    sys.stdout.write(report.to_text())
    return 0


def cmd_prepare(args) -> int:
    target = args.out or "data"
    names = args.datasets or datasets.DATASET_NAMES
    for path in datasets.prepare(target, names):
        tag = "" if path.stem in datasets.EMBEDDED else "  (synthetic stand-in)"
        print(f"{path}{tag}")
    return 0


_COMMANDS = {
    "predict": cmd_predict,
    "tune": cmd_tune,
    "benchmark": cmd_benchmark,
    "report": cmd_report,
    "prepare-data": cmd_prepare,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    try:
        args = build_parser().parse_args(argv)
        if args.verbose:
            logging.getLogger("boundcast").setLevel(logging.DEBUG)
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (DataError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
