"""Command line for dumping detector runs as interchange datasets."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .export import (
    export,
    load_ground_truth,
    load_image_dir,
    synthetic_images,
)
from .models import build_model


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="naptron-export",
        description=("Run a torchvision detector over an image set and dump "
                     "detections plus per-detection activations in the "
                     "naptron interchange layout."),
    )
    parser.add_argument("--arch", required=True,
                        choices=["fasterrcnn", "fasterrcnn-resnet50", "retinanet"])
    parser.add_argument("--layer", type=int, default=None,
                        help="activation tap index (default: deepest tap)")
    parser.add_argument("--mode", choices=["vector", "map"], default=None,
                        help="activation layout (default per architecture)")
    parser.add_argument("--out", required=True)
    parser.add_argument("--images", help="directory of image files")
    parser.add_argument("--synthetic", type=int, default=0,
                        help="generate N seeded random images instead")
    parser.add_argument("--image-size", type=int, default=320)
    parser.add_argument("--gt", help="JSON file with ground-truth annotations")
    parser.add_argument("--weights", default="none",
                        help="'none' (seeded random init), 'default' "
                             "(torchvision checkpoint), or a .pth path")
    parser.add_argument("--score-thresh", type=float, default=0.01,
                        help="detector NMS score threshold (kept low so "
                             "evaluation sees every candidate)")
    parser.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        bundle = build_model(args.arch, args.weights,
                             score_thresh=args.score_thresh, seed=args.seed)
        if args.images:
            images = load_image_dir(Path(args.images))
        elif args.synthetic > 0:
            images = synthetic_images(args.synthetic, args.image_size, args.seed)
        else:
            raise ValueError("provide --images DIR or --synthetic N")
        layer = args.layer if args.layer is not None else bundle.layer_count - 1
        mode = args.mode or bundle.mode_default
        ground_truth = load_ground_truth(args.gt) if args.gt else None
        summary = export(bundle, images, layer, mode, args.out, ground_truth)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"out: {summary.out_dir}")
    print(f"mode: {summary.mode}")
    print(f"layer: {summary.layer}")
    print(f"images: {summary.images}")
    print(f"detections: {summary.detections}")
    print(f"annotations: {summary.annotations}")
    print(f"skipped_boxes: {summary.skipped_boxes}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
