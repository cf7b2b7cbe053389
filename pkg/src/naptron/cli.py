"""Command-line pipeline: generate -> validate -> build -> eval -> sweep -> compare.

Exit codes: 0 success, 1 validation/config error, 2 data error.  All output
is deterministic for identical inputs and flags.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .dataio import load_dataset, load_store, save_store, validate_dataset
from .errors import ConfigError, DataError, NaptronError
from .pipeline import (
    DEFAULT_IOU_THRESHOLD,
    DEFAULT_NMS_THRESHOLD,
    build_store_from_dataset,
    evaluate_dataset,
    sweep_dataset,
)
from .report import (
    compare_reports,
    read_report,
    render_comparison,
    sweep_csv_text,
    write_report,
)
from .scoring import Method
from .synth import SynthConfig, generate

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; route them through ConfigError
    # so the documented exit-code contract holds.
    def error(self, message):
        raise ConfigError(message)


def _load_store_arg(args) -> tuple:
    method = Method.from_name(args.method)
    store = None
    if method.needs_store:
        if not args.store:
            raise ConfigError(f"method {method.value} requires --store")
        path = Path(args.store)
        if not path.is_file():
            raise ConfigError(f"store file not found: {path}")
        store = load_store(path)
    return method, store


def _cmd_generate(args) -> int:
    config = SynthConfig(
        seed=args.seed,
        class_count=args.classes,
        pattern_length=args.pattern_length,
        train_per_class=args.train_per_class,
        test_id=args.test_id,
        test_ood=args.test_ood,
        fp=args.fp,
        rho_train=args.rho_train,
        rho_id=args.rho_id,
        rho_ood=args.rho_ood,
        image_size=args.image_size,
        boxes_per_image=args.boxes_per_image,
    )
    train_dir, test_dir = generate(config, args.out_dir)
    print(f"train: {train_dir}")
    print(f"test: {test_dir}")
    print(f"train_detections: {config.class_count * config.train_per_class}")
    print(f"test_detections: {config.test_id + config.test_ood + config.fp}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    result = validate_dataset(args.dataset)
    print(result.render())
    return EXIT_OK if result.ok else EXIT_CONFIG


def _cmd_build(args) -> int:
    dataset = load_dataset(args.dataset)
    # default to the deepest exported layer: with the detector's output
    # layer absent from the menu, that is the head's penultimate layer
    layer = args.layer
    if layer is None:
        layer = dataset.manifest.layer_count - 1
    store = build_store_from_dataset(
        dataset,
        layer_index=layer,
        percentile=args.p,
        train_iou=args.train_iou,
        softmax_threshold=args.softmax_s,
    )
    save_store(args.out, store)
    print(f"store: {args.out}")
    print(f"pattern_length: {store.pattern_length}")
    for class_id, count in store.counts().items():
        print(f"class {class_id}: {count} pattern(s)")
    return EXIT_OK


def _cmd_eval(args) -> int:
    method, store = _load_store_arg(args)
    dataset = load_dataset(args.dataset)
    result = evaluate_dataset(
        dataset,
        method,
        store,
        iou_threshold=args.iou_lambda,
        nms_threshold=args.nms_threshold,
    )
    out = write_report(result, args.report)
    print(f"report: {out}")
    print(f"method: {result.method}")
    for key in sorted(result.counts):
        print(f"{key}: {result.counts[key]}")
    macro_auroc = result.macro_auroc
    macro_fpr = result.macro_fpr95
    print(f"macro_auroc: {macro_auroc!r}" if macro_auroc is not None
          else "macro_auroc: undefined")
    print(f"macro_fpr95: {macro_fpr!r}" if macro_fpr is not None
          else "macro_fpr95: undefined")
    print(f"auc_limited: {result.auc_limited!r}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    method, store = _load_store_arg(args)
    dataset = load_dataset(args.dataset)
    rows, failures = sweep_dataset(
        dataset,
        method,
        args.thresholds,
        store,
        iou_threshold=args.iou_lambda,
    )
    text = sweep_csv_text(rows)
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    if failures:
        print(f"scoring_failures: {len(failures)}", file=sys.stderr)
    return EXIT_OK


def _cmd_compare(args) -> int:
    deltas = compare_reports(read_report(args.report_a), read_report(args.report_b))
    sys.stdout.write(render_comparison(deltas))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="naptron",
        description=(
            "Uncertainty scores for object-detector predictions from binary "
            "neuron-activation patterns, plus the OOD evaluation pipeline."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a seeded synthetic train/test dataset pair")
    p.add_argument("out_dir")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--classes", type=int, default=3)
    p.add_argument("--pattern-length", type=int, default=64)
    p.add_argument("--train-per-class", type=int, default=10)
    p.add_argument("--test-id", type=int, default=30)
    p.add_argument("--test-ood", type=int, default=30)
    p.add_argument("--fp", type=int, default=10)
    p.add_argument("--rho-train", type=float, default=0.0)
    p.add_argument("--rho-id", type=float, default=0.0)
    p.add_argument("--rho-ood", type=float, default=0.3)
    p.add_argument("--image-size", type=int, default=640)
    p.add_argument("--boxes-per-image", type=int, default=16)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("validate", help="check a dataset directory and report findings")
    p.add_argument("dataset")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("build", help="harvest training true-positive patterns into a store")
    p.add_argument("dataset")
    p.add_argument("--layer", type=int, default=None,
                   help="activation layer index (default: deepest exported layer)")
    p.add_argument("--p", type=float, default=0.0)
    p.add_argument("--train-iou", type=float, default=0.5)
    p.add_argument("--softmax-s", type=float, default=0.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_build)

    p = sub.add_parser("eval", help="label, score, and report one dataset")
    p.add_argument("dataset")
    p.add_argument("--store")
    p.add_argument("--method", required=True,
                   choices=[m.value for m in Method])
    p.add_argument("--lambda", dest="iou_lambda", type=float,
                   default=DEFAULT_IOU_THRESHOLD)
    p.add_argument("--nms-threshold", type=float, default=DEFAULT_NMS_THRESHOLD)
    p.add_argument("--report", required=True)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("sweep", help="recompute metrics across NMS thresholds (CSV to stdout)")
    p.add_argument("dataset")
    p.add_argument("--store")
    p.add_argument("--method", required=True,
                   choices=[m.value for m in Method])
    p.add_argument("--thresholds", type=float, nargs="+", required=True)
    p.add_argument("--lambda", dest="iou_lambda", type=float,
                   default=DEFAULT_IOU_THRESHOLD)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("compare", help="metric deltas between two report directories")
    p.add_argument("report_a")
    p.add_argument("report_b")
    p.set_defaults(func=_cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NaptronError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
