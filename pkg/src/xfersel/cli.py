"""Batch-oriented command line interface.

Exit codes: 0 success, 2 validation or I/O failure, 3 no compatible source.
Library failures print a single ``ERROR <code>: <detail>`` line on stderr.
All floating-point output uses 6 decimal places with a ``.`` separator.
Every run echoes its effective configuration (a ``# config:`` line in csv
format, a ``config`` object in json format); the echo excludes ``--threads``
so output files are byte-identical at any parallelism.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .bundle import SubsampleSpec, TaskBundle, load_bundle, write_bundle
from .errors import (
    DimensionMismatchError,
    InvalidSpecError,
    IoFailureError,
    MissingFeaturesError,
    UnknownTaskError,
    XferselError,
)
from .fixtures import read_scores_csv
from .hscore import HScoreParams, hscore_segmentation
from .otce import SinkhornParams, otce
from .pipeline import (
    Metric,
    NoMatchPolicy,
    SelectionConfig,
    SelectionPath,
    select,
)
from .ranking import (
    build_ranking,
    footrule_full,
    footrule_topk,
    read_ranking_csv,
    write_ranking_csv,
)
from .roisim import DEFAULT_MAX_PAIRS, PairingMode, SsimParams, roi_sim
from .synth import SynthSpec, generate_tasks, probe_transfer

DEFAULT_SEED = 42


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def _round_floats(obj):
    if isinstance(obj, float):
        return round(obj, 6)
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def _emit(args, config: dict, rows: list[tuple[str, object]]) -> str:
    """Render the command result per --format and honor --output."""
    if args.format == "json":
        doc = {"config": config, "result": _round_floats(dict(rows))}
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    else:
        lines = ["# config: " + json.dumps(config, sort_keys=True)]
        lines += [f"{key},{_fmt(val)}" for key, val in rows]
        text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.output:
        try:
            Path(args.output).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise IoFailureError(str(exc)) from exc
    return text


def _load_source_bundles(sources_dir: str) -> list[TaskBundle]:
    root = Path(sources_dir)
    if not root.is_dir():
        raise IoFailureError(f"not a directory: {sources_dir}")
    bundles = []
    for sub in sorted(p for p in root.iterdir() if p.is_dir()):
        if (sub / "manifest.json").is_file():
            bundles.append(load_bundle(sub))
    if not bundles:
        raise IoFailureError(f"no bundles under {sources_dir}")
    return bundles


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_roi_sim(args) -> int:
    source = load_bundle(args.source)
    target = load_bundle(args.target)
    mode = PairingMode.MEAN if args.mode == "mean" else PairingMode.PAIRED
    report = roi_sim(source.labels, target.labels, SsimParams(), mode,
                     seed=args.seed, max_pairs=args.pairs)
    config = {"command": "roi-sim", "source": str(args.source),
              "target": str(args.target), "mode": mode.value,
              "pairs": args.pairs, "seed": args.seed}
    _emit(args, config, [
        ("roi_sim", report.score),
        ("n_pairs", report.n_pairs),
        ("source", report.source_id),
        ("target", report.target_id),
    ])
    return 0


def cmd_score(args) -> int:
    source = load_bundle(args.source)
    target = load_bundle(args.target)
    sampler = SubsampleSpec(max_pixels=args.max_pixels, seed=args.seed)
    config = {"command": "score", "metric": args.metric,
              "source": str(args.source), "target": str(args.target),
              "max_pixels": args.max_pixels, "seed": args.seed,
              "epsilon": args.epsilon, "ridge": args.ridge}
    if args.metric == "otce":
        if source.features is None or target.features is None:
            raise MissingFeaturesError("otce needs features on both bundles")
        rep = otce(source.features, target.features, sampler,
                   SinkhornParams(epsilon=args.epsilon))
        rows = [("otce", rep.score), ("ot_cost", rep.ot_cost),
                ("sinkhorn_iterations", rep.iterations_used),
                ("sinkhorn_residual", rep.final_marginal_error),
                ("source", rep.source_id), ("target", rep.target_id)]
    else:
        # the target bundle must carry the source model's feature export;
        # the source bundle only cross-checks the channel count
        if target.features is None:
            raise MissingFeaturesError("hscore needs features on the target bundle")
        if source.features is not None and \
                source.features.channels != target.features.channels:
            raise DimensionMismatchError(
                f"channel counts differ: {source.features.channels} vs "
                f"{target.features.channels}")
        rep = hscore_segmentation(target.features, HScoreParams(ridge=args.ridge),
                                  source_id=source.task_id,
                                  target_id=target.task_id)
        rows = [("hscore", rep.score), ("skipped_pixels", rep.skipped_pixels),
                ("source", rep.source_id), ("target", rep.target_id)]
    _emit(args, config, rows)
    return 0


def cmd_select(args) -> int:
    target = load_bundle(args.target)
    pool = _load_source_bundles(args.sources)
    cfg = SelectionConfig(
        path=SelectionPath(args.path),
        metric=Metric(args.metric),
        top_k=args.top_k,
        roi_keep_classes=args.roi_keep,
        no_modality_match_policy=(NoMatchPolicy.FALLBACK_ALL if args.fallback_all
                                  else NoMatchPolicy.ERROR),
        sinkhorn_params=SinkhornParams(epsilon=args.epsilon),
        hscore_params=HScoreParams(ridge=args.ridge),
        sampler=SubsampleSpec(max_pixels=args.max_pixels, seed=args.seed),
        ssim_seed=args.seed,
        threads=args.threads,
    )
    scores = None
    if args.scores_file:
        table = read_scores_csv(args.scores_file)
        column = args.metric
        scores = {}
        for task_id, cols in table.items():
            if column in cols:
                scores[task_id] = cols[column]
        if not scores:
            raise InvalidSpecError(
                f"{args.scores_file} has no {column!r} column values")
    report = select(pool, target, cfg, scores=scores)

    config = {"command": "select", "target": str(args.target),
              "sources": str(args.sources), "seed": args.seed,
              "scores_file": str(args.scores_file) if args.scores_file else None}
    config.update({k: v for k, v in report.config.to_dict().items()
                   if k != "threads"})
    rows = [(str(rank), f"{task_id},{_fmt(score)}")
            for rank, (task_id, score)
            in enumerate(report.final_ranking.entries[:args.top_k], 1)]
    if args.format == "json":
        doc = {"config": config,
               "result": _round_floats({
                   "top_k": [
                       {"rank": r, "task_id": t, "score": s}
                       for r, (t, s) in enumerate(
                           report.final_ranking.entries[:args.top_k], 1)],
                   "subset1": list(report.subset1),
                   "subset2": list(report.subset2),
               })}
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    else:
        lines = ["# config: " + json.dumps(config, sort_keys=True)]
        lines += [f"{r},{payload}" for r, payload in rows]
        text = "\n".join(lines) + "\n"
    sys.stdout.write(text)

    if args.output:
        out = Path(args.output)
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise IoFailureError(str(exc)) from exc
        report_dict = report.to_dict()
        report_dict["config"].pop("threads", None)
        (out / "report.json").write_text(
            json.dumps(report_dict, indent=2, sort_keys=True) + "\n",
            encoding="utf-8")
        write_ranking_csv(report.final_ranking, out / "ranking.csv")
    return 0


def cmd_footrule(args) -> int:
    pred = read_ranking_csv(args.pred)
    truth = read_ranking_csv(args.truth)
    if args.top_k is None:
        report = footrule_full(pred, truth)
    else:
        report = footrule_topk(pred, truth, args.top_k)
    config = {"command": "footrule", "pred": str(args.pred),
              "truth": str(args.truth),
              "top_k": args.top_k if args.top_k is not None else "full"}
    _emit(args, config, [("footrule", report.distance), ("k", report.k)])
    return 0


def cmd_synth(args) -> int:
    spec_dict = {}
    if args.spec:
        try:
            spec_dict = json.loads(Path(args.spec).read_text(encoding="utf-8"))
        except OSError as exc:
            raise IoFailureError(str(exc)) from exc
        except json.JSONDecodeError as exc:
            raise InvalidSpecError(f"{args.spec}: {exc}") from exc
    spec_dict.setdefault("seed", args.seed)
    spec = SynthSpec.from_dict(spec_dict)
    bundles = generate_tasks(spec)
    out = Path(args.out)
    for b in bundles:
        write_bundle(b, out / b.task_id)
    config = {"command": "synth", "out": str(args.out), "spec": spec.to_dict()}
    rows = [("created", len(bundles))]
    rows += [("task", b.task_id) for b in bundles]
    _emit(args, config, rows)
    return 0


def cmd_synth_eval(args) -> int:
    bundles = _load_source_bundles(args.dir)
    by_id = {b.task_id: b for b in bundles}
    if args.target not in by_id:
        raise UnknownTaskError(f"{args.target} not found under {args.dir}")
    target = by_id[args.target]
    sources = [b for b in bundles if b.task_id != args.target]
    sampler = SubsampleSpec(max_pixels=args.max_pixels, seed=args.seed)

    def metric_score(b: TaskBundle) -> float:
        if b.features is None or target.features is None:
            raise MissingFeaturesError(b.task_id)
        if args.metric == "otce":
            return otce(b.features, target.features, sampler,
                        SinkhornParams()).score
        # shared-extractor mode: each source's own export carries its signal
        return hscore_segmentation(b.features).score

    def probe_score(b: TaskBundle) -> float:
        return probe_transfer(b, target, seed=args.seed).accuracy

    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            metric_scores = list(pool.map(metric_score, sources))
            probe_scores = list(pool.map(probe_score, sources))
    else:
        metric_scores = [metric_score(b) for b in sources]
        probe_scores = [probe_score(b) for b in sources]

    metric_rank = build_ranking([(b.task_id, s)
                                 for b, s in zip(sources, metric_scores)])
    probe_rank = build_ranking([(b.task_id, s)
                                for b, s in zip(sources, probe_scores)])

    config = {"command": "synth-eval", "dir": str(args.dir),
              "target": args.target, "metric": args.metric,
              "max_pixels": args.max_pixels, "seed": args.seed}
    rows = []
    for rank, (task_id, score) in enumerate(metric_rank.entries, 1):
        acc = dict(probe_rank.entries)[task_id]
        rows.append((task_id,
                     f"{_fmt(score)},{rank},{_fmt(acc)},"
                     f"{probe_rank.position[task_id]}"))
    rows.append(("footrule_full",
                 footrule_full(metric_rank, probe_rank).distance))
    rows.append(("footrule_top1",
                 footrule_topk(metric_rank, probe_rank, 1).distance))
    if args.format == "json":
        doc = {"config": config, "result": _round_floats({
            "comparison": [
                {"task_id": t, "metric_score": s, "metric_rank": r,
                 "probe_accuracy": dict(probe_rank.entries)[t],
                 "probe_rank": probe_rank.position[t]}
                for r, (t, s) in enumerate(metric_rank.entries, 1)],
            "footrule_full": footrule_full(metric_rank, probe_rank).distance,
            "footrule_top1": footrule_topk(metric_rank, probe_rank, 1).distance,
        })}
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
        sys.stdout.write(text)
        if args.output:
            Path(args.output).write_text(text, encoding="utf-8")
    else:
        lines = ["# config: " + json.dumps(config, sort_keys=True),
                 "task_id,metric_score,metric_rank,probe_accuracy,probe_rank"]
        lines += [f"{key},{val}" for key, val in rows]
        text = "\n".join(lines) + "\n"
        sys.stdout.write(text)
        if args.output:
            Path(args.output).write_text(text, encoding="utf-8")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    env_seed = os.environ.get("XFERSEL_SEED")
    default_seed = int(env_seed) if env_seed else DEFAULT_SEED

    parser = argparse.ArgumentParser(
        prog="xfersel",
        description="Source task selection for segmentation transfer learning")
    parser.add_argument("--seed", type=int, default=default_seed,
                        help="global RNG seed (env XFERSEL_SEED, default 42)")
    parser.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                        help="worker threads for multi-source scoring")
    parser.add_argument("--output", default=None,
                        help="also write the output to this path "
                             "(a directory for select)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("roi-sim", help="RoI shape similarity of two bundles")
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--mode", choices=("paired", "mean"), default="paired")
    p.add_argument("--pairs", type=int, default=DEFAULT_MAX_PAIRS)
    p.set_defaults(func=cmd_roi_sim)

    p = sub.add_parser("score", help="transferability score of a source/target pair")
    p.add_argument("--metric", choices=("hscore", "otce"), required=True)
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--max-pixels", type=int, default=4096)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--ridge", type=float, default=1e-8)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("select", help="rank a pool of sources for a target")
    p.add_argument("--target", required=True)
    p.add_argument("--sources", required=True,
                   help="directory of bundle directories")
    p.add_argument("--path", choices=("guided", "baseline"), default="guided")
    p.add_argument("--metric", choices=("hscore", "otce"), required=True)
    p.add_argument("--top-k", type=int, default=1)
    p.add_argument("--roi-keep", type=int, default=1)
    p.add_argument("--fallback-all", action="store_true",
                   help="fall back to the whole pool when no modality matches")
    p.add_argument("--scores-file", default=None,
                   help="CSV of externally computed scores, bypassing metrics")
    p.add_argument("--max-pixels", type=int, default=4096)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--ridge", type=float, default=1e-8)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("footrule", help="rank distance between two ranking CSVs")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--top-k", type=int, default=None)
    p.set_defaults(func=cmd_footrule)

    p = sub.add_parser("synth", help="generate synthetic task bundles")
    p.add_argument("--spec", default=None, help="SynthSpec JSON file")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("synth-eval",
                       help="compare a metric ranking against the probe oracle")
    p.add_argument("--dir", required=True)
    p.add_argument("--target", required=True, help="target task id")
    p.add_argument("--metric", choices=("hscore", "otce"), required=True)
    p.add_argument("--max-pixels", type=int, default=512)
    p.set_defaults(func=cmd_synth_eval)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except XferselError as exc:
        sys.stderr.write(f"ERROR {exc.code}: {exc.detail}\n")
        return exc.exit_code
    except OSError as exc:
        sys.stderr.write(f"ERROR IoFailure: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
