"""Command-line entry point.

Subcommands: train, eval, oracle-check, gradcheck, pathcheck, bounds,
gen-data.  Every command takes --seed and is fully reproducible: repeating
an invocation rewrites byte-identical CSV artifacts.  Exit codes: 0 on
success, 2 on usage or input errors, 3 when training diverges, 4 when a
verification command falls below its threshold.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import bounds as bounds_mod
from . import data as data_mod
from . import report
from .errors import DivergenceError, ParameterError, ParseError, ShapeError
from .network import (
    ImplicitEnsembleNet,
    ReluNet,
    SemiRandomNet,
    load_model,
    parse_arch,
    save_model,
)
from .oracle import GdConfig
from .training import TrainConfig, evaluate, train
from .verification import gradient_check_sweep, landscape_sweep, path_check_sweep

UNITS = ("lsr", "ssr", "relu", "rf", "lsr-ie")

# Built-in defaults by task; flags and config-file entries override these.
TASK_DEFAULTS = {
    "sine": dict(arch="1-50-50-1", epochs=100, learning_rate=5e-4, momentum=0.9,
                 batch_size=500, lr_decay=1.0, init_scale=0.1, loss="squared",
                 normalize="none", m=5000),
    "libsvm": dict(arch=None, epochs=100, learning_rate=0.1, momentum=0.9,
                   batch_size=128, lr_decay=0.95, init_scale=None, loss="squared",
                   normalize="standardize", m=5000),
    "csv": dict(arch=None, epochs=100, learning_rate=0.1, momentum=0.9,
                batch_size=128, lr_decay=0.95, init_scale=None, loss="squared",
                normalize="standardize", m=5000),
}
SHARED_DEFAULTS = dict(unit="lsr", k=2, seed=0)

CONFIG_TYPES = dict(
    arch=str, epochs=int, learning_rate=float, momentum=float, batch_size=int,
    lr_decay=float, init_scale=float, loss=str, normalize=str, m=int,
    unit=str, k=int, seed=int, timing=bool, no_figures=bool,
)


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def read_config_file(path) -> dict:
    """Flat ``key=value`` text; blank lines and # comments ignored."""
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParseError(f"{path}:{lineno}: expected key=value")
            key, _, value = line.partition("=")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _coerce(text: str, kind):
    if kind is bool:
        return text.lower() in ("1", "true", "yes", "on")
    try:
        return kind(text)
    except ValueError as exc:
        raise ParseError(f"bad config value {text!r}") from exc


def apply_config(args, schema: dict) -> None:
    """Merge precedence: explicit flags > config file > built-in defaults.

    ``schema`` maps attribute names to their built-in defaults.  A parsed
    value of None (or an untouched False for switches) means "not given on
    the command line" and may be filled from the config file, then from the
    defaults.
    """
    config = read_config_file(args.config) if getattr(args, "config", None) else {}
    for key, default in schema.items():
        current = getattr(args, key, None)
        untouched = current is None or (isinstance(default, bool) and current is False)
        if untouched and key in config:
            setattr(args, key, _coerce(config[key], CONFIG_TYPES.get(key, str)))
        elif current is None:
            setattr(args, key, default)


def _write_csv(path, header: str, rows) -> None:
    lines = [header]
    lines.extend(",".join(str(cell) for cell in row) for row in rows)
    Path(path).write_text("\n".join(lines) + "\n")


def fmt(x: float) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# dataset / model assembly
# ---------------------------------------------------------------------------

def _load_datasets(args):
    if args.task == "sine":
        m = args.m if getattr(args, "m", None) else data_mod.SINE_DEFAULT_POINTS
        train_ds = data_mod.gen_sine(m, seed=args.seed, split="train")
        test_ds = data_mod.gen_sine(m, seed=args.seed, split="test")
    elif args.task == "libsvm":
        if not args.data:
            raise ParameterError("--data is required for --task libsvm")
        train_ds = data_mod.load_libsvm(args.data, split="train")
        if args.test_data:
            test_ds = data_mod.load_libsvm(args.test_data, n_features=train_ds.d,
                                           label_values=train_ds.label_values,
                                           split="test")
        else:
            train_ds, test_ds = data_mod.split_dataset(train_ds, args.train_fraction,
                                                       seed=args.seed)
    else:  # csv
        if not args.data:
            raise ParameterError("--data is required for --task csv")
        target = args.target_column if args.target_column is not None else "y"
        train_ds = data_mod.load_csv(args.data, target, classification=args.classify,
                                     split="train")
        if args.test_data:
            test_ds = data_mod.load_csv(args.test_data, target,
                                        classification=args.classify,
                                        label_values=train_ds.label_values,
                                        split="test")
        else:
            train_ds, test_ds = data_mod.split_dataset(train_ds, args.train_fraction,
                                                       seed=args.seed)
    return train_ds, test_ds


def _resolve_arch(args, train_ds):
    if args.arch:
        d, widths, c = parse_arch(args.arch)
        if d != train_ds.d or c != train_ds.c:
            raise ParameterError(
                f"architecture {args.arch} expects d={d}, c={c}; "
                f"dataset has d={train_ds.d}, c={train_ds.c}")
        return d, widths, c
    # One hidden layer of 4*d units when the caller does not specify.
    return train_ds.d, [4 * train_ds.d], train_ds.c


def _build_model(args, d, widths, c, radius):
    if args.unit == "relu":
        return ReluNet.create(d, widths, c, seed=args.seed, init_scale=args.init_scale)
    if args.unit == "lsr-ie":
        return ImplicitEnsembleNet.create(d, widths, c, order=0, num_banks=args.k,
                                          seed=args.seed, radius=radius,
                                          init_scale=args.init_scale)
    order = 1 if args.unit == "ssr" else 0
    return SemiRandomNet.create(d, widths, c, order=order, seed=args.seed,
                                radius=radius, init_scale=args.init_scale,
                                train_last_only=(args.unit == "rf"))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_train(args) -> int:
    apply_config(args, {**TASK_DEFAULTS[args.task], **SHARED_DEFAULTS})
    if args.unit not in UNITS:
        raise ParameterError(f"unit must be one of {UNITS}, got {args.unit!r}")
    if args.normalize not in ("none", "standardize"):
        raise ParameterError(f"unknown normalization {args.normalize!r}")
    train_ds, test_ds = _load_datasets(args)
    stats = None
    if args.normalize != "none":
        train_ds, stats = data_mod.normalize(train_ds, args.normalize)
        test_ds = data_mod.apply_normalization(test_ds, stats)
    d, widths, c = _resolve_arch(args, train_ds)
    radius = max(train_ds.radius_estimate, 1e-6)
    model = _build_model(args, d, widths, c, radius)
    config = TrainConfig(learning_rate=args.learning_rate, momentum=args.momentum,
                         batch_size=args.batch_size, epochs=args.epochs,
                         lr_decay_per_epoch=args.lr_decay, seed=args.seed,
                         loss=args.loss)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    print(f"task={args.task} unit={args.unit} arch={d}-{'-'.join(map(str, widths))}-{c} "
          f"seed={args.seed} params={model.param_count()}")
    tic = time.perf_counter()
    history = train(model, train_ds, config, test_ds)
    elapsed = time.perf_counter() - tic
    history_path = out_dir / "history.csv"
    history.to_csv(history_path, include_timing=args.timing)
    if stats is not None and model.meta is not None:
        model.meta["norm_mean"] = [float(v) for v in stats.mean]
        model.meta["norm_scale"] = [float(v) for v in stats.scale]
    model_path = out_dir / "model.npz"
    save_model(model_path, model)
    written = [str(history_path), str(model_path)]
    if not args.no_figures and history.records:
        figure_path = out_dir / "history.png"
        report.save_history_figure(history, figure_path,
                                   title=f"{args.unit} on {args.task}")
        written.append(str(figure_path))
    if history.records:
        last = history.final()
        line = f"epoch {last.epoch}: train_loss={last.train_loss:.6g}"
        if np.isfinite(last.test_loss):
            line += f" test_loss={last.test_loss:.6g}"
        if np.isfinite(last.test_error):
            line += f" test_error={last.test_error:.4f}"
        print(line)
    print(f"wrote {', '.join(written)}")
    print(f"training time: {elapsed:.2f} s")
    return 0


def cmd_eval(args) -> int:
    model = load_model(args.model)
    train_ds, test_ds = _load_datasets(args)
    meta = model.meta or {}
    if "norm_mean" in meta:
        stats = data_mod.NormStats(mean=np.asarray(meta["norm_mean"]),
                                   scale=np.asarray(meta["norm_scale"]))
        train_ds = data_mod.apply_normalization(train_ds, stats)
        test_ds = data_mod.apply_normalization(test_ds, stats)
    for name, ds in (("train", train_ds), ("test", test_ds)):
        loss, error = evaluate(model, ds, args.loss)
        line = f"{name}: loss={loss:.6g}"
        if np.isfinite(error):
            line += f" error={error:.4f}"
        print(line)
    return 0


def cmd_oracle_check(args) -> int:
    gd = GdConfig(max_iterations=args.max_iterations, seed=args.seed)
    rows = landscape_sweep(args.instances, seed=args.seed, gd_config=gd)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "oracle_check.csv"
    _write_csv(csv_path,
               "instance_id,m,d,n,s,global_min_loss,gd_final_loss,rel_gap,converged",
               [(r.instance_id, r.m, r.d, r.n, r.order,
                 fmt(r.report.global_min_loss), fmt(r.report.final_loss),
                 fmt(r.report.rel_gap), int(r.report.converged)) for r in rows])
    written = [str(csv_path)]
    if not args.no_figures and rows:
        figure_path = out_dir / "oracle_check.png"
        report.save_oracle_figure([r.report for r in rows], figure_path)
        written.append(str(figure_path))
    converged = sum(r.report.converged for r in rows)
    rate = converged / len(rows) if rows else 1.0
    print(f"converged {converged}/{len(rows)} (rate {rate:.3f}, threshold {args.threshold})")
    print(f"wrote {', '.join(written)}")
    return 0 if rate >= args.threshold else 4


def cmd_gradcheck(args) -> int:
    result = gradient_check_sweep(args.models, tol=args.tol, seed=args.seed,
                                  include_relu=args.include_relu)
    print(f"gradcheck: {result.count - result.failures}/{result.count} within "
          f"{result.tolerance:g} (worst relative error {result.worst:.3g})")
    return 0 if result.passed else 4


def cmd_pathcheck(args) -> int:
    result = path_check_sweep(args.models, tol=args.tol, seed=args.seed)
    print(f"pathcheck: {result.count - result.failures}/{result.count} within "
          f"{result.tolerance:g} (worst relative error {result.worst:.3g})")
    return 0 if result.passed else 4


def cmd_bounds(args) -> int:
    widths = tuple(int(w) for w in args.widths.split(","))
    inputs = bounds_mod.BoundInputs(
        target_bound=args.target_bound, weight_norm=args.weight_norm,
        feature_norm=args.feature_norm, samples=args.samples, delta=args.delta,
        smoothness=args.smoothness, dim=args.dim, widths=widths)
    q0, q1 = bounds_mod.importance_constants(args.dim, args.weight_norm)
    values = {
        "generalization_bound": bounds_mod.generalization_bound(inputs),
        "prediction_bound": inputs.prediction_bound,
        "approx_lower_bound": bounds_mod.approx_lower_bound(args.smoothness, args.dim, widths),
        "random_feature_lower_bound": bounds_mod.random_feature_lower_bound(
            args.smoothness, args.dim, widths[-1]),
        "q0": q0,
        "q1": q1,
        "kappa": bounds_mod.KAPPA,
    }
    sweep_rows = []
    if args.sweep:
        depth = len(widths)
        for n in (int(w) for w in args.sweep.split(",")):
            sweep_rows.append((n,
                               bounds_mod.approx_lower_bound(args.smoothness, args.dim,
                                                             (n,) * depth),
                               bounds_mod.random_feature_lower_bound(args.smoothness,
                                                                     args.dim, n)))
    if args.json:
        payload = {"inputs": {"target_bound": args.target_bound,
                              "weight_norm": args.weight_norm,
                              "feature_norm": args.feature_norm,
                              "samples": args.samples, "delta": args.delta,
                              "smoothness": args.smoothness, "dim": args.dim,
                              "widths": list(widths)},
                   "values": values}
        if sweep_rows:
            payload["sweep"] = [{"width": n, "adaptive": a, "frozen": f}
                                for n, a, f in sweep_rows]
        print(json.dumps(payload, indent=2))
    else:
        label_width = max(len(k) for k in values)
        for key, value in values.items():
            print(f"{key:<{label_width}}  {value:.12g}")
        for n, adaptive, frozen in sweep_rows:
            print(f"width {n:>6}  adaptive {adaptive:.6g}  frozen {frozen:.6g}")
    if sweep_rows and args.out_dir:
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        figure_path = out_dir / "bounds_sweep.png"
        report.save_bound_sweep_figure([r[0] for r in sweep_rows],
                                       [r[1] for r in sweep_rows],
                                       [r[2] for r in sweep_rows], figure_path)
        print(f"wrote {figure_path}")
    return 0


def cmd_gen_data(args) -> int:
    if args.task != "sine":
        raise ParameterError("gen-data currently generates the sine task only")
    ds = data_mod.gen_sine(args.m, seed=args.seed, split=args.split)
    data_mod.save_csv(ds, args.out)
    print(f"wrote {args.out} ({ds.m} rows, d={ds.d})")
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_dataset_flags(p):
    p.add_argument("--task", choices=("sine", "csv", "libsvm"), default="sine")
    p.add_argument("--data", help="input file for csv/libsvm tasks")
    p.add_argument("--test-data", help="held-out file; otherwise --train-fraction splits")
    p.add_argument("--target-column", help="csv target column name (default y)")
    p.add_argument("--classify", action="store_true",
                   help="treat the csv target as class labels")
    p.add_argument("--train-fraction", type=float, default=0.75)
    p.add_argument("--m", type=int, help="points per split for the sine task")


def _seed_arg(p, default=0):
    p.add_argument("--seed", type=_nonneg_int, default=default)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semirandom",
                                     description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model and write history + weights")
    _add_dataset_flags(p)
    _seed_arg(p, default=None)
    p.add_argument("--arch", help="architecture string d-n1-...-nH-c")
    p.add_argument("--unit", choices=UNITS)
    p.add_argument("--k", type=int, help="gate banks for lsr-ie (default 2)")
    p.add_argument("--epochs", type=int)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--momentum", type=float)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--lr-decay", type=float, help="staircase factor per epoch")
    p.add_argument("--init-scale", type=float)
    p.add_argument("--loss", choices=("squared", "softmax"))
    p.add_argument("--normalize", choices=("none", "standardize"))
    p.add_argument("--out-dir", default="runs")
    p.add_argument("--config", help="key=value file; flags override it")
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--timing", action="store_true",
                   help="write measured wall seconds into history.csv "
                        "(breaks byte-reproducibility)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a saved model on a dataset")
    _add_dataset_flags(p)
    _seed_arg(p)
    p.add_argument("--model", required=True)
    p.add_argument("--loss", choices=("squared", "softmax"), default="squared")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("oracle-check",
                       help="compare gradient descent against closed-form optima")
    _seed_arg(p)
    p.add_argument("--instances", type=int, default=50)
    p.add_argument("--threshold", type=float, default=0.9)
    p.add_argument("--max-iterations", type=int, default=100_000)
    p.add_argument("--out-dir", default="runs")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("gradcheck", help="analytic vs finite-difference gradients")
    _seed_arg(p)
    p.add_argument("--models", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--include-relu", action="store_true")
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("pathcheck", help="path expansion vs forward pass")
    _seed_arg(p)
    p.add_argument("--models", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_pathcheck)

    p = sub.add_parser("bounds", help="print the bound calculators' values")
    _seed_arg(p)
    p.add_argument("--target-bound", type=float, default=1.0)
    p.add_argument("--weight-norm", type=float, default=1.0)
    p.add_argument("--feature-norm", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--smoothness", type=float, default=1.0)
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--widths", default="1", help="comma list, e.g. 50,50")
    p.add_argument("--sweep", help="comma list of widths for a comparison sweep")
    p.add_argument("--out-dir", help="directory for the sweep figure")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("gen-data", help="generate a benchmark dataset as CSV")
    _seed_arg(p)
    p.add_argument("--task", choices=("sine",), default="sine")
    p.add_argument("--m", type=int, default=data_mod.SINE_DEFAULT_POINTS)
    p.add_argument("--split", default="train")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_data)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ParameterError, ParseError, ShapeError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
