"""Command-line interface: ``python -m bigtax <command> ...``.

Settings resolve as command-line flags, then a ``--config`` file of
``key=value`` lines, then built-in defaults; the seed finally falls back to
the ``BIGTAX_SEED`` environment variable.  Exit status is 0 on success,
1 on a runtime failure and 2 on a usage error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

from . import __version__
from .dataset import (
    TransformParams, apply_transform, fit_transform, impute, load_csv, missing_summary, write_csv,
)
from .ensemble import LearnerSpec, fit_from_spec
from .errors import BigtaxError
from .evaluation import BENCH_DEFAULTS, DEFAULT_METHODS, benchmark, epe, loocv, parse_methods, select_k
from .report import render_report
from .serialize import dumps, loads
from .taxonomy import classify_dims, is_heterogeneous, recommend

DEFAULTS = {
    "label": "class",
    "impute": "none",
    "transform": "standardize",
    "scale_mode": "sd",
    "replications": 100,
    "test_fraction": 1 / 3,
    "seed": 42,
    "methods": ",".join(DEFAULT_METHODS),
    "method": "lda",
    "formats": "csv,md,json,svg",
    "out": "results",
    "jobs": 1,
}
INT_KEYS = {"replications", "seed", "jobs", "n", "p"}
FLOAT_KEYS = {"test_fraction"}


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def read_config(path) -> dict:
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (t.strip() for t in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _coerce(key, value):
    if key in INT_KEYS:
        return int(value)
    if key in FLOAT_KEYS:
        if isinstance(value, str) and "/" in value:
            a, b = value.split("/")
            return float(a) / float(b)
        return float(value)
    return value


def resolve(args, keys, **defaults) -> dict:
    """flags > config file > defaults (> BIGTAX_SEED for the seed).

    Keyword arguments override the global defaults for one command.
    """
    defaults = {**DEFAULTS, **defaults}
    cfg = read_config(args.config) if args.config else {}
    unknown = set(cfg) - set(keys)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    out = {}
    for key in keys:
        flag = getattr(args, key, None)
        if flag is not None and flag != []:
            value = flag
        elif key in cfg:
            value = cfg[key]
        elif key == "seed" and os.environ.get("BIGTAX_SEED"):
            value = os.environ["BIGTAX_SEED"]
        else:
            value = defaults.get(key)
        try:
            out[key] = None if value is None else _coerce(key, value)
        except ValueError as exc:
            raise UsageError(f"bad value for {key}: {value!r}") from exc
    out["config"] = args.config
    return out


def provenance(command, cfg) -> dict:
    return {"tool": "bigtax", "version": __version__, "command": command, "config": cfg}


def write_atomic(path, data: bytes):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load(cfg, path=None, label=None):
    ds = load_csv(path or cfg["data"], label or cfg["label"], schema=cfg.get("schema"))
    if cfg.get("impute", "none") != "none":
        ds = impute(ds, cfg["impute"])
    return ds


def _params(pairs) -> dict:
    out = {}
    for item in pairs or []:
        if "=" not in item:
            raise UsageError(f"--param expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        for cast in (int, float):
            try:
                v = cast(v)
                break
            except ValueError:
                continue
        out[k] = v
    return out


def _spec(cfg, params) -> LearnerSpec:
    name = cfg["method"]
    base = BENCH_DEFAULTS.get(name)
    if base is None:
        raise UsageError(f"unknown method {name!r}; choose from {', '.join(sorted(BENCH_DEFAULTS))}")
    return LearnerSpec(base.method, {**base.params, **params}, base.label)


# --- commands --------------------------------------------------------------

def cmd_taxonomy(args, out):
    cfg = resolve(args, ["n", "p", "data", "label", "schema"])
    hetero = missing = False
    if cfg["data"]:
        ds = load_csv(cfg["data"], cfg["label"], schema=cfg["schema"])
        n, p = ds.n, ds.p
        hetero = is_heterogeneous(ds.schema)
        missing = missing_summary(ds).total > 0
    elif cfg["n"] is not None and cfg["p"] is not None:
        n, p = cfg["n"], cfg["p"]
    else:
        raise UsageError("taxonomy needs --n and --p, or --data")
    if n < 1 or p < 1:
        raise UsageError("n and p must be positive")
    rep = classify_dims(n, p)
    rec = recommend(rep, hetero, missing)
    if args.json:
        out.write(json.dumps({"report": json.loads(rep.to_json()), "recommendation":
                              json.loads(rec.to_json())}, sort_keys=True) + "\n")
    else:
        out.write(f"{rep}\n")
        for tag in rec.tags:
            out.write(f"  - {tag}: {rec.rationale[tag]}\n")
        for note in rec.notes:
            out.write(f"  note: {note}\n")
    return 0


def cmd_preprocess(args, out):
    keys = ["data", "label", "schema", "impute", "transform", "scale_mode", "out", "params_out"]
    cfg = resolve(args, keys, out="preprocessed.csv")
    ds = _load(cfg)
    stamp = provenance("preprocess", cfg)
    if cfg["transform"] != "none":
        ds, params = fit_transform(ds, cfg["transform"], scale_mode=cfg["scale_mode"])
        if cfg["params_out"]:
            doc = {"params": params.to_dict(), "provenance": stamp}
            write_atomic(cfg["params_out"], (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode())
    dest = Path(cfg["out"])
    dest.parent.mkdir(parents=True, exist_ok=True)
    write_csv(ds, dest, cfg["label"], comment="config: " + json.dumps(stamp, sort_keys=True))
    out.write(f"wrote {dest} ({ds.n} rows, {ds.p} columns)\n")
    return 0


def cmd_fit(args, out):
    keys = ["data", "label", "schema", "impute", "transform", "scale_mode", "method", "seed", "out"]
    cfg = resolve(args, keys, out="model.json")
    params = _params(args.param)
    cfg["params"] = params
    ds = _load(cfg)
    transform = None
    if cfg["transform"] != "none":
        ds, tp = fit_transform(ds, cfg["transform"], scale_mode=cfg["scale_mode"])
        transform = tp.to_dict()
    model = fit_from_spec(_spec(cfg, params), ds, seed=cfg["seed"])
    dest = cfg["out"]
    extra = dict(provenance("fit", cfg), transform=transform, label_names=list(ds.label_names))
    write_atomic(dest, (dumps(model, extra) + "\n").encode())
    out.write(f"wrote {dest}\n")
    return 0


def cmd_evaluate(args, out):
    cfg = resolve(args, ["model", "data", "label", "schema", "impute", "out"], out=None)
    if not cfg["model"]:
        raise UsageError("evaluate needs --model")
    text = Path(cfg["model"]).read_text()
    model = loads(text)
    doc = json.loads(text)
    ds = _load(cfg)
    tp = doc.get("provenance", {}).get("transform")
    if tp:
        ds = apply_transform(TransformParams.from_dict(tp), ds)
    err = epe(model, ds)
    result = {"epe": err, "n": ds.n, "provenance": provenance("evaluate", cfg)}
    if cfg["out"]:
        write_atomic(cfg["out"], (json.dumps(result, indent=2, sort_keys=True) + "\n").encode())
    out.write(f"EPE = {err:.6f} on {ds.n} rows\n")
    return 0


def cmd_cv(args, out):
    keys = ["data", "label", "schema", "impute", "transform", "scale_mode", "method", "ks"]
    cfg = resolve(args, keys)
    params = _params(args.param)
    ds = _load(cfg)
    if cfg["transform"] != "none":
        ds = fit_transform(ds, cfg["transform"], scale_mode=cfg["scale_mode"])[0]
    spec = _spec(cfg, params)
    if spec.method == "knn" and cfg["ks"]:
        ks = [int(k) for k in cfg["ks"].split(",")]
        k_hat, table = select_k(ds, ks, spec.get("distance", "euclidean"))
        for k in sorted(table):
            out.write(f"k={k}\tLOOCV={table[k]:.6f}\n")
        out.write(f"selected k={k_hat}\n")
        return 0
    out.write(f"LOOCV = {loocv(spec, ds):.6f} ({spec.name}, n={ds.n})\n")
    return 0


def cmd_bench(args, out):
    keys = ["data", "label", "schema", "impute", "transform", "scale_mode", "methods",
            "replications", "test_fraction", "seed", "out", "formats", "jobs"]
    cfg = resolve(args, keys)
    paths = cfg["data"] if isinstance(cfg["data"], list) else [p for p in (cfg["data"] or "").split(",") if p]
    if not paths:
        raise UsageError("bench needs at least one --data file")
    labels = cfg["label"] if isinstance(cfg["label"], list) else cfg["label"].split(",")
    if len(labels) == 1:
        labels = labels * len(paths)
    if len(labels) != len(paths):
        raise UsageError("give one --label, or one per --data file")
    cfg["data"], cfg["label"] = list(paths), list(labels)
    datasets = {Path(p).stem: _load(cfg, p, lab) for p, lab in zip(paths, labels)}
    specs = parse_methods(cfg["methods"])
    R = cfg["replications"]
    if R < 1:
        raise UsageError("--replications must be at least 1")
    formats = [f for f in cfg["formats"].split(",") if f]
    bad = set(formats) - {"csv", "md", "json", "svg"}
    if bad:
        raise UsageError(f"unknown formats: {', '.join(sorted(bad))}")

    def progress(e):
        s = e.stats
        msg = e.skipped or f"mean {s['mean']:.4f} sd {s['sd']:.4f}"
        out.write(f"{e.dataset:>12} {e.method:<15} {msg}\n")
        out.flush()

    report = benchmark(datasets, specs, R, cfg["test_fraction"], cfg["seed"],
                       cfg["transform"], cfg["scale_mode"], n_jobs=cfg["jobs"], progress=progress)
    stamp = provenance("bench", cfg)
    outdir = Path(cfg["out"])
    files = []
    if "csv" in formats:
        files += [("errors_long.csv", "long"), ("summary.csv", "csv")]
    files += [(f"summary.{f}", f) for f in ("md", "json", "svg") if f in formats]
    for name, fmt in files:
        write_atomic(outdir / name, render_report(report, fmt, stamp))
        out.write(f"wrote {outdir / name}\n")
    return 0


# --- parser ----------------------------------------------------------------

def build_parser() -> Parser:
    parser = Parser(prog="bigtax", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"bigtax {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=Parser)

    def common(p, data=True):
        p.add_argument("--config", help="key=value settings file")
        if data:
            p.add_argument("--data", help="input CSV")
            p.add_argument("--label", help="label column (default: class)")
            p.add_argument("--schema", help="JSON schema sidecar")
            p.add_argument("--impute", choices=["none", "delete", "central"])

    def transform(p):
        p.add_argument("--transform", choices=["none", "standardize", "unitize"])
        p.add_argument("--scale-mode", dest="scale_mode", choices=["norm", "sd"],
                       help="standardize by column norm or by sample sd (default sd)")

    p = sub.add_parser("taxonomy", help="classify dataset dimensions")
    common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_taxonomy)

    p = sub.add_parser("preprocess", help="impute and rescale a CSV")
    common(p)
    transform(p)
    p.add_argument("--out", help="output CSV")
    p.add_argument("--params-out", dest="params_out", help="transform parameters JSON")
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("fit", help="fit one model and save it as JSON")
    common(p)
    transform(p)
    p.add_argument("--method", help=f"one of {', '.join(sorted(BENCH_DEFAULTS))}")
    p.add_argument("--param", action="append", help="hyperparameter key=value (repeatable)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="model JSON path")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("evaluate", help="test error of a saved model")
    common(p)
    p.add_argument("--model", help="model JSON from fit")
    p.add_argument("--out", help="result JSON path")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("cv", help="leave-one-out error, or k selection for knn")
    common(p)
    transform(p)
    p.add_argument("--method")
    p.add_argument("--param", action="append")
    p.add_argument("--ks", help="comma-separated candidate k values (knn)")
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("bench", help="replicated train/test benchmark")
    p.add_argument("--config", help="key=value settings file")
    p.add_argument("--data", action="append", help="input CSV (repeatable)")
    p.add_argument("--label", action="append", help="label column, once or per --data")
    p.add_argument("--schema")
    p.add_argument("--impute", choices=["none", "delete", "central"])
    transform(p)
    p.add_argument("--methods", help="comma-separated method names")
    p.add_argument("--replications", type=int)
    p.add_argument("--test-fraction", dest="test_fraction", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--formats", help="subset of csv,md,json,svg")
    p.add_argument("--jobs", type=int)
    p.set_defaults(func=cmd_bench)
    return parser


def execute(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            raise UsageError(parser.format_usage() + "bigtax: error: a command is required")
        return args.func(args, out)
    except UsageError as exc:
        err.write(f"{exc}\n")
        return 2
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except OSError as exc:
        err.write(f"error: {exc.strerror or exc}: {exc.filename or ''}\n")
        return 1
    except (BigtaxError, ValueError, KeyError) as exc:
        err.write(f"error: {exc}\n")
        return 1


def main():
    sys.exit(execute())
