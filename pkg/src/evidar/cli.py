"""Command-line interface: generate, fit, inject, classify, evaluate.

Every command is deterministic under a fixed seed and fixed inputs, and
every output file embeds the seed, configuration, and tool version.
Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from typing import Optional, Sequence

from . import __version__
from .data import (
    DataError,
    Dataset,
    FEATURES,
    GeneratorConfig,
    canonical_feature,
    generate,
    inject_spoof,
    load_generator_config,
    read_csv,
    write_csv,
)
from .detector import classify_dataset, explain_json, summarize
from .dst import DSTError, Frame
from .features import CompositeMode, FeatureModelError, fit, load_model, save_model

DEFAULT_FRAME = ("s", "m")
DEFAULT_EVAL_FEATURES = ("velocity", "reflection")


def _provenance(command: str, args: argparse.Namespace, keys: Sequence[str]) -> list[str]:
    lines = [f"evidar = {__version__}", f"command = {command}"]
    for key in keys:
        value = getattr(args, key)
        if key in ("input", "model") and value is not None:
            value = os.path.basename(str(value))  # keep reruns from other dirs byte-identical
        lines.append(f"{key.replace('_', '-')} = {value}")
    return lines


def _parse_features(spec: Optional[str]) -> Optional[tuple[str, ...]]:
    if spec is None:
        return None
    feats = tuple(canonical_feature(f.strip()) for f in spec.split(",") if f.strip())
    if not feats:
        raise DataError("--features must name at least one feature")
    return feats


def _sha256(path) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def cmd_generate(args: argparse.Namespace) -> int:
    if args.config:
        config = load_generator_config(args.config)
        if args.seed is not None:
            config = GeneratorConfig(
                counts=config.counts,
                class_params=config.class_params,
                seed=args.seed,
                timestamp_start=config.timestamp_start,
                timestamp_step=config.timestamp_step,
            )
    else:
        counts = {"s": args.count_s, "m": args.count_m}
        if args.count_sm:
            counts["sm"] = args.count_sm
        config = GeneratorConfig(counts=counts, seed=args.seed or 0,
                                 timestamp_step=args.timestamp_step)
    dataset = generate(config)
    provenance = [f"evidar = {__version__}", "command = generate", f"seed = {config.seed}"]
    for cls in config.counts:
        provenance.append(f"count-{cls} = {config.counts[cls]}")
    write_csv(dataset, args.output, provenance=provenance)
    print(f"sha256 {_sha256(args.output)} {args.output}")
    print(f"wrote {len(dataset)} records to {args.output}")
    return 0


def cmd_fit(args: argparse.Namespace) -> int:
    dataset = read_csv(args.input)
    frame = Frame(DEFAULT_FRAME)
    features = _parse_features(args.features) or FEATURES
    model = fit(dataset, features, frame, CompositeMode(args.composite_mode))
    counts: dict[str, int] = {}
    for rec in dataset:
        counts[rec.label] = counts.get(rec.label, 0) + 1
    for label in sorted(counts):
        print(f"class {label}: {counts[label]} records")
    args.features = ",".join(features)
    provenance = _provenance("fit", args, ["input", "features", "composite_mode"])
    save_model(model, args.output, provenance=provenance)
    print(f"wrote model to {args.output}")
    return 0


def cmd_inject(args: argparse.Namespace) -> int:
    dataset = read_csv(args.input)
    spoofed = inject_spoof(dataset, count=args.count, seed=args.seed,
                           from_label=args.from_label)
    provenance = [line for line in dataset.provenance.splitlines() if line]
    provenance += _provenance("inject", args, ["count", "seed", "from_label"])
    write_csv(spoofed, args.output, provenance=provenance)
    print(f"sha256 {_sha256(args.output)} {args.output}")
    print(f"spoofed {args.count} of {len(dataset)} records")
    return 0


def cmd_classify(args: argparse.Namespace) -> int:
    dataset = read_csv(args.input)
    if not len(dataset):
        raise DataError("input dataset is empty")
    model = load_model(args.model)
    features = _parse_features(args.features)
    verdicts = classify_dataset(model, dataset, features, tau=args.tau)
    header = {
        "provenance": {
            "evidar": __version__,
            "command": "classify",
            "input": os.path.basename(str(args.input)),
            "model": os.path.basename(str(args.model)),
            "features": list(features) if features else list(model.features),
            "tau": args.tau,
        }
    }
    with open(args.output, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, separators=(",", ":")) + "\n")
        for verdict in verdicts:
            fh.write(explain_json(verdict) + "\n")
    print(f"classified {len(verdicts)} records -> {args.output}")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    dataset = read_csv(args.input)
    if not len(dataset):
        raise DataError("input dataset is empty")
    model = load_model(args.model)
    features = _parse_features(args.features) or tuple(
        f for f in DEFAULT_EVAL_FEATURES if f in model.features
    ) or model.features
    verdicts = classify_dataset(model, dataset, features, tau=args.tau,
                                parallel=args.parallel)
    report = summarize(verdicts, dataset, features)
    payload = {
        "provenance": {
            "evidar": __version__,
            "command": "evaluate",
            "input": os.path.basename(str(args.input)),
            "model": os.path.basename(str(args.model)),
            "features": list(features),
            "tau": args.tau,
        },
        "report": report.to_dict(),
    }
    with open(args.output, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    if args.plot_data:
        frame = model.frame
        columns = ["index"] + [f"m_{frame.set_name(b)}" for b in frame.focal_sets()]
        columns += ["decided", "claimed", "spoofed"]
        with open(args.plot_data, "w", encoding="utf-8", newline="") as fh:
            fh.write(f"# evidar = {__version__}\n")
            fh.write(f"# command = evaluate --tau {args.tau} --features {','.join(features)}\n")
            fh.write(",".join(columns) + "\n")
            for verdict, rec in zip(verdicts, dataset):
                cells = [str(verdict.record_index)]
                cells += [repr(verdict.combined[b]) for b in frame.focal_sets()]
                cells += [verdict.decided_name, verdict.claimed, "1" if rec.spoofed else "0"]
                fh.write(",".join(cells) + "\n")
    accuracy = "n/a" if report.accuracy is None else f"{report.accuracy:.4f}"
    spoof = (
        "n/a" if report.spoof_detection_rate is None
        else f"{report.spoof_detected}/{report.spoof_total}"
    )
    print(f"accuracy {accuracy}  spoof-detection {spoof}  "
          f"ambiguity-rate {report.ambiguity_rate:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evidar",
        description="Evidential radar obstacle classification and spoof detection.",
    )
    parser.add_argument("--version", action="version", version=f"evidar {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a synthetic radar dataset")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--count-s", type=int, default=100)
    p.add_argument("--count-m", type=int, default=100)
    p.add_argument("--count-sm", type=int, default=0,
                   help="composite-labeled records for fitted-composite training")
    p.add_argument("--timestamp-step", type=float, default=0.1)
    p.add_argument("--config", default=None, help="generator config file (key-value text)")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("fit", help="fit Gaussian feature likelihoods from a dataset")
    p.add_argument("--input", required=True)
    p.add_argument("--features", default=None, help="comma-separated feature subset")
    p.add_argument("--composite-mode", default=CompositeMode.SUM_OF_SINGLETONS.value,
                   choices=[m.value for m in CompositeMode])
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("inject", help="inject label-flip spoofed packets")
    p.add_argument("--input", required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--from-label", default=None,
                   help="only spoof records with this true label")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_inject)

    p = sub.add_parser("classify", help="emit per-record JSONL explanations")
    p.add_argument("--input", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--features", default=None)
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("evaluate", help="evaluate a model on a dataset")
    p.add_argument("--input", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--features", default=None)
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--parallel", action="store_true")
    p.add_argument("--plot-data", default=None, help="per-record mass CSV for plotting")
    p.add_argument("-o", "--output", required=True, help="report JSON path")
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DataError, DSTError, FeatureModelError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
