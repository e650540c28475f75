"""Command-line front end.

Subcommands: validate (consistency-check a dataset), evaluate (one
protocol run), sweep (the block-combination ladder), synth (generate a
synthetic dataset with recorded ground truth) and extract-check (verify
feature files produced by the extractor component).

Option precedence is flags > --config JSON file > built-in defaults; the
fully resolved configuration is echoed into the output directory so any
run can be reproduced from its artifacts. Diagnostics go to stderr and the
exit code is 0 only when everything checked out.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

from . import fvec
from .errors import FaceAesError
from .ga import GaConfig
from .harness import ProtocolConfig, run_protocol, sweep_combinations
from .linear import TrainConfig
from .report import (
    render_eval_summary,
    render_sweep_table,
    save_rounds_figure,
    save_sweep_figure,
    save_trace_figure,
    write_sweep_csv,
)
from .store import (
    CANONICAL_DIMS,
    CANONICAL_ORDER,
    canonical_block_order,
    concat_blocks,
    load_blocks,
    load_manifest,
)
from .synth import write_synth_dataset

THREADS_ENV = "FACEAES_THREADS"


def _default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="faceaes",
                                description="linear and GA predictors over feature blocks")
    sub = p.add_subparsers(dest="subcommand", required=True)

    v = sub.add_parser("validate", help="check manifest/feature-file consistency")
    v.add_argument("--manifest", required=True)

    def eval_like(sp):
        sp.add_argument("--manifest")
        sp.add_argument("--config", help="JSON file with defaults for the flags below")
        sp.add_argument("--blocks", help="comma-separated block names (default: all)")
        sp.add_argument("--task", choices=["classification", "regression"])
        sp.add_argument("--seed", type=int)
        sp.add_argument("--rounds", type=int)
        sp.add_argument("--folds", type=int)
        sp.add_argument("--threads", type=int)
        sp.add_argument("--out", help="output directory (default: .)")
        sp.add_argument("--no-figures", action="store_true", default=None,
                        help="skip figure rendering")
        sp.add_argument("--stratified", action="store_true", default=None,
                        help="class-balanced folds (classification only)")
        sp.add_argument("--svm-c", type=float, dest="svm_c")
        sp.add_argument("--epochs", type=int)
        sp.add_argument("--eta0", type=float)
        sp.add_argument("--svr-epsilon", type=float, dest="svr_epsilon")
        sp.add_argument("--ga-pop", type=int, dest="ga_pop")
        sp.add_argument("--ga-gens", type=int, dest="ga_gens")
        sp.add_argument("--ga-crossover", type=float, dest="ga_crossover")
        sp.add_argument("--ga-elitism", type=float, dest="ga_elitism")
        sp.add_argument("--ga-bit-prob", type=float, dest="ga_bit_prob")
        sp.add_argument("--ga-sigma", type=float, dest="ga_sigma")

    e = sub.add_parser("evaluate", help="run the repeated-CV protocol once")
    eval_like(e)
    e.add_argument("--method", choices=["svm", "svr", "ga"])

    s = sub.add_parser("sweep", help="evaluate the block-combination ladder")
    eval_like(s)
    s.add_argument("--no-ga", action="store_true", default=None,
                   help="skip the GA row")

    g = sub.add_parser("synth", help="generate a synthetic dataset with known truth")
    g.add_argument("--out", required=True)
    g.add_argument("--task", choices=["classification", "regression"],
                   default="classification")
    g.add_argument("--n", type=int, default=200)
    g.add_argument("--blocks", default="S0=64",
                   help="NAME=DIM[,NAME=DIM...] or bare dims 30,30,20")
    g.add_argument("--informative", type=int, default=None)
    g.add_argument("--noise", type=float, default=0.0)
    g.add_argument("--margin", type=float, default=1.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--name", default="synthetic")

    x = sub.add_parser("extract-check", help="verify extractor output files")
    x.add_argument("--manifest", required=True)

    return p


_EVAL_DEFAULTS = {
    "manifest": None, "blocks": None, "task": None, "method": None,
    "seed": 0, "rounds": 10, "folds": 10, "threads": None, "out": ".",
    "no_figures": False, "no_ga": False, "stratified": False,
    "svm_c": None, "epochs": None, "eta0": None, "svr_epsilon": None,
    "ga_pop": None, "ga_gens": None, "ga_crossover": None, "ga_elitism": None,
    "ga_bit_prob": None, "ga_sigma": None,
}


def _resolve_options(args: argparse.Namespace) -> dict:
    """Merge defaults <- config file <- explicit flags."""
    merged = dict(_EVAL_DEFAULTS)
    cfg_path = getattr(args, "config", None)
    if cfg_path:
        with open(cfg_path, "r", encoding="utf-8") as fh:
            file_cfg = json.load(fh)
        unknown = set(file_cfg) - set(merged)
        if unknown:
            raise FaceAesError(f"{cfg_path}: unknown config keys {sorted(unknown)}")
        merged.update(file_cfg)
    for key in merged:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    if merged["threads"] is None:
        merged["threads"] = _default_threads()
    return merged


def _train_config(opts: dict) -> TrainConfig:
    tc = TrainConfig()
    updates = {}
    if opts["svm_c"] is not None:
        updates["regularization_c"] = opts["svm_c"]
    if opts["epochs"] is not None:
        updates["epochs"] = opts["epochs"]
    if opts["eta0"] is not None:
        updates["eta0"] = opts["eta0"]
    if opts["svr_epsilon"] is not None:
        updates["svr_epsilon"] = opts["svr_epsilon"]
    return replace(tc, **updates) if updates else tc


def _ga_config(opts: dict, task: str) -> GaConfig | None:
    overrides = {}
    if opts["ga_pop"] is not None:
        overrides["population_size"] = opts["ga_pop"]
    if opts["ga_gens"] is not None:
        overrides["generations"] = opts["ga_gens"]
    if opts["ga_crossover"] is not None:
        overrides["crossover_prob"] = opts["ga_crossover"]
    if opts["ga_elitism"] is not None:
        overrides["elitism_fraction"] = opts["ga_elitism"]
    if opts["ga_bit_prob"] is not None:
        overrides["bit_mutation_prob"] = opts["ga_bit_prob"]
    if opts["ga_sigma"] is not None:
        overrides["weight_mutation_sigma"] = opts["ga_sigma"]
    ctor = GaConfig.classification if task == "classification" else GaConfig.regression
    return ctor(**overrides)


def _load_dataset(opts: dict):
    if not opts["manifest"]:
        raise FaceAesError("--manifest is required")
    manifest = load_manifest(opts["manifest"])
    base = os.path.dirname(os.path.abspath(opts["manifest"]))
    names = None
    if opts["blocks"]:
        names = [n.strip() for n in str(opts["blocks"]).split(",") if n.strip()]
    blocks = load_blocks(manifest, base, names)
    return manifest, blocks


def _echo_config(opts: dict, out_dir, extra: dict | None = None) -> None:
    doc = {k: v for k, v in sorted(opts.items())}
    if extra:
        doc.update(extra)
    path = os.path.join(out_dir, "resolved_config.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"seed: {opts['seed']}")
    print(f"resolved config: {path}")


def cmd_validate(args) -> int:
    manifest = load_manifest(args.manifest)
    base = os.path.dirname(os.path.abspath(args.manifest))
    print(f"dataset: {manifest.dataset_name}")
    print(f"samples: {manifest.n_samples}")
    failures = 0
    for name in canonical_block_order(manifest.block_refs):
        path = os.path.join(base, manifest.block_refs[name])
        try:
            block = load_blocks(manifest, base, [name])[name]
        except (FaceAesError, FileNotFoundError, OSError) as exc:
            print(f"block {name}: FAIL ({exc})", file=sys.stderr)
            failures += 1
            continue
        print(f"block {name}: {block.n_samples} x {block.dim} ok ({path})")
    if failures:
        print(f"validate: {failures} block(s) failed", file=sys.stderr)
        return 1
    print("validate: ok")
    return 0


def _task_for(opts: dict) -> str:
    method = opts["method"]
    task = opts["task"]
    if method == "svm":
        task = task or "classification"
        if task != "classification":
            raise FaceAesError("--method svm implies --task classification")
    elif method == "svr":
        task = task or "regression"
        if task != "regression":
            raise FaceAesError("--method svr implies --task regression")
    elif task is None:
        raise FaceAesError("--task is required with --method ga")
    return task


def cmd_evaluate(args) -> int:
    opts = _resolve_options(args)
    if opts["method"] is None:
        raise FaceAesError("--method is required (svm, svr or ga)")
    task = _task_for(opts)
    predictor = "ga" if opts["method"] == "ga" else "linear"
    manifest, blocks = _load_dataset(opts)
    names = canonical_block_order(blocks)
    merged = concat_blocks([blocks[n] for n in names])
    config = ProtocolConfig(
        task=task,
        predictor=predictor,
        rounds=opts["rounds"],
        n_folds=opts["folds"],
        master_seed=opts["seed"],
        train=_train_config(opts),
        ga=_ga_config(opts, task) if predictor == "ga" else None,
        threads=opts["threads"],
        stratified=opts["stratified"],
    )
    out_dir = opts["out"]
    os.makedirs(out_dir, exist_ok=True)

    traces = {}

    def keep_first_trace(r, f, trace):
        if not traces:
            traces[(r, f)] = trace

    report = run_protocol(merged, manifest, config,
                          trace_hook=keep_first_trace if predictor == "ga" else None)
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
        fh.write(report.to_json())
        fh.write("\n")
    summary = render_eval_summary(report)
    with open(os.path.join(out_dir, "summary.txt"), "w", encoding="utf-8") as fh:
        fh.write(summary)
    sys.stdout.write(summary)
    if not opts["no_figures"]:
        save_rounds_figure(report, os.path.join(out_dir, "rounds.png"))
    if traces:
        (key, trace), = traces.items()
        trace.to_csv(os.path.join(out_dir, "ga_trace.csv"))
        if not opts["no_figures"]:
            save_trace_figure(trace, os.path.join(out_dir, "ga_trace.png"))
    _echo_config(opts, out_dir, {"blocks_used": names, "dim": merged.dim})
    return 0


def cmd_sweep(args) -> int:
    opts = _resolve_options(args)
    if opts["task"] is None:
        raise FaceAesError("--task is required")
    manifest, blocks = _load_dataset(opts)
    config = ProtocolConfig(
        task=opts["task"],
        predictor="linear",
        rounds=opts["rounds"],
        n_folds=opts["folds"],
        master_seed=opts["seed"],
        train=_train_config(opts),
        ga=_ga_config(opts, opts["task"]),
        threads=opts["threads"],
        stratified=opts["stratified"],
    )
    out_dir = opts["out"]
    os.makedirs(out_dir, exist_ok=True)
    rows = sweep_combinations(blocks, manifest, config, include_ga=not opts["no_ga"])
    table = render_sweep_table(rows)
    sys.stdout.write(table)
    with open(os.path.join(out_dir, "sweep.txt"), "w", encoding="utf-8") as fh:
        fh.write(table)
    write_sweep_csv(rows, os.path.join(out_dir, "sweep.csv"))
    reports = {"+".join(r.blocks) + ("/ga" if r.predictor == "ga" else ""):
               json.loads(r.report.to_json()) for r in rows}
    with open(os.path.join(out_dir, "sweep_reports.json"), "w", encoding="utf-8") as fh:
        json.dump(reports, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if not opts["no_figures"]:
        save_sweep_figure(rows, os.path.join(out_dir, "sweep.png"))
    _echo_config(opts, out_dir)
    return 0


def _parse_block_dims(text: str) -> dict:
    out = {}
    auto = 0
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        if "=" in token:
            name, _, dim = token.partition("=")
            out[name.strip()] = int(dim)
        else:
            out[f"S{auto}"] = int(token)
            auto += 1
    if not out:
        raise FaceAesError(f"could not parse block dims from {text!r}")
    return out


def cmd_synth(args) -> int:
    block_dims = _parse_block_dims(args.blocks)
    path = write_synth_dataset(
        args.out,
        task=args.task,
        n_samples=args.n,
        block_dims=block_dims,
        seed=args.seed,
        informative=args.informative,
        noise=args.noise,
        margin=args.margin,
        dataset_name=args.name,
    )
    print(f"manifest: {path}")
    print(f"truth:    {os.path.join(args.out, 'truth.json')}")
    return 0


def cmd_extract_check(args) -> int:
    manifest = load_manifest(args.manifest)
    base = os.path.dirname(os.path.abspath(args.manifest))
    failures = 0
    missing = [n for n in CANONICAL_ORDER if n not in manifest.block_refs]
    if missing:
        print(f"extract-check: missing canonical block(s) {missing}", file=sys.stderr)
        failures += 1
    for name in CANONICAL_ORDER:
        if name in missing:
            continue
        path = os.path.join(base, manifest.block_refs[name])
        try:
            block = load_blocks(manifest, base, [name])[name]
            crc = fvec.stored_crc(path)
        except (FaceAesError, FileNotFoundError, OSError) as exc:
            print(f"block {name}: FAIL ({exc})", file=sys.stderr)
            failures += 1
            continue
        if block.dim != CANONICAL_DIMS[name]:
            print(f"block {name}: dim {block.dim} != {CANONICAL_DIMS[name]}",
                  file=sys.stderr)
            failures += 1
            continue
        print(f"block {name}: {block.n_samples} x {block.dim} crc32 {crc:#010x}")
    extras = sorted(set(manifest.block_refs) - set(CANONICAL_ORDER))
    if extras:
        print(f"note: non-canonical blocks present: {extras}", file=sys.stderr)
    region = manifest.metadata.get("region_mode")
    if region:
        print(f"region mode: {region}")
    if failures:
        print(f"extract-check: {failures} problem(s)", file=sys.stderr)
        return 1
    print("extract-check: ok")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.subcommand == "validate":
            return cmd_validate(args)
        if args.subcommand == "evaluate":
            return cmd_evaluate(args)
        if args.subcommand == "sweep":
            return cmd_sweep(args)
        if args.subcommand == "synth":
            return cmd_synth(args)
        if args.subcommand == "extract-check":
            return cmd_extract_check(args)
        raise FaceAesError(f"unknown subcommand {args.subcommand!r}")
    except (FaceAesError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
