"""Write detector outputs in the naptron dataset interchange layout.

The layout is the pipeline's external contract: ``manifest.json``,
``detections.jsonl``, ``annotations.jsonl``, ``activations.bin`` and, in
map mode, ``feature_maps.bin`` with W/H/C-prefixed row-major maps.  This
module produces those files directly; the evaluation pipeline consumes
them through ``naptron validate / build / eval``.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .models import ImageCapture, ModelBundle, capture_fasterrcnn, capture_retinanet

FORMAT_VERSION = 1
MIN_BOX_SIDE = 1e-3


@dataclass
class ExportSummary:
    out_dir: Path
    mode: str
    layer: int
    images: int
    detections: int
    annotations: int
    skipped_boxes: int


def synthetic_images(count: int, size: int, seed: int):
    """Seeded random RGB tensors, stand-ins for a real image folder."""
    gen = torch.Generator().manual_seed(seed)
    return [
        (f"img-{i:04d}", torch.rand(3, size, size, generator=gen))
        for i in range(count)
    ]


def load_image_dir(path: Path):
    from PIL import Image

    images = []
    for file in sorted(Path(path).iterdir()):
        if file.suffix.lower() not in (".png", ".jpg", ".jpeg", ".bmp"):
            continue
        with Image.open(file) as img:
            rgb = img.convert("RGB")
            arr = np.asarray(rgb, dtype=np.float32) / 255.0
        images.append((file.stem, torch.from_numpy(arr).permute(2, 0, 1)))
    if not images:
        raise ValueError(f"no images found under {path}")
    return images


def load_ground_truth(path) -> list[dict]:
    payload = json.loads(Path(path).read_text())
    annotations = payload.get("annotations", payload)
    if not isinstance(annotations, list):
        raise ValueError("ground-truth file must hold a list of annotations")
    return annotations


def _json_line(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def _clean_box(box) -> list[float] | None:
    x1, y1, x2, y2 = (float(v) for v in box)
    x1, y1 = max(x1, 0.0), max(y1, 0.0)
    if not all(np.isfinite(v) for v in (x1, y1, x2, y2)):
        return None
    if x2 - x1 < MIN_BOX_SIDE or y2 - y1 < MIN_BOX_SIDE:
        return None
    return [x1, y1, x2, y2]


def export(bundle: ModelBundle, images, layer: int, mode: str,
           out_dir, ground_truth: list[dict] | None = None) -> ExportSummary:
    """Run inference over ``images`` and write one interchange dataset.

    ``images`` is a sequence of (image_id, CHW float tensor).  Vector mode
    writes one activation row per detection (layer 0 of the FC-head
    architectures shares one channel-mean row per image); map mode writes
    the tapped feature maps and points each detection at the map of the
    pyramid level that produced it.
    """
    if not 0 <= layer < bundle.layer_count:
        raise ValueError(
            f"layer {layer} outside this architecture's {bundle.layer_count} taps")
    if mode not in ("vector", "map"):
        raise ValueError(f"mode must be 'vector' or 'map', got {mode!r}")
    if mode == "map" and bundle.arch.startswith("fasterrcnn") and layer != 0:
        raise ValueError("fully-connected layers have no feature maps; "
                         "map mode supports only layer 0 here")

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    captures: list[ImageCapture] = []
    for image_id, tensor in images:
        if bundle.arch.startswith("fasterrcnn"):
            cap = capture_fasterrcnn(bundle, image_id, tensor, layer,
                                     keep_map=(mode == "map"))
        else:
            cap = capture_retinanet(bundle, image_id, tensor, layer)
        captures.append(cap)

    det_rows: list[dict] = []
    blob_parts: list[np.ndarray] = []
    blob_offset = 0
    map_entries: list[dict] = []
    skipped = 0
    maps_file = out / "feature_maps.bin"
    maps_fh = open(maps_file, "wb") if mode == "map" else None

    try:
        for cap in captures:
            level_offsets: dict[int, tuple[int, tuple[int, int, int]]] = {}
            if mode == "map":
                for level, fmap in enumerate(cap.level_maps or []):
                    arr = np.ascontiguousarray(
                        fmap.permute(1, 2, 0).numpy(), dtype="<f4")  # (H, W, C)
                    h, w, c = arr.shape
                    offset = maps_fh.tell()
                    maps_fh.write(struct.pack("<III", w, h, c))
                    maps_fh.write(arr.tobytes())
                    level_offsets[level] = (offset, (w, h, c))
                    map_entries.append({
                        "image_id": cap.image_id, "layer": layer,
                        "offset": offset, "dims": [w, h, c],
                    })
            shared_offset = None
            if mode == "vector" and cap.image_vector is not None:
                row = np.ascontiguousarray(cap.image_vector.numpy(), dtype="<f4")
                shared_offset = blob_offset
                blob_parts.append(row)
                blob_offset += row.nbytes

            for i in range(len(cap.boxes)):
                bbox = _clean_box(cap.boxes[i])
                if bbox is None:
                    skipped += 1
                    continue
                score = min(max(float(cap.scores[i]), 0.0), 1.0)
                label = int(cap.labels[i])
                if label not in bundle.class_names:
                    skipped += 1
                    continue
                if mode == "map":
                    level = (cap.det_levels or [0])[i]
                    offset, (w, h, c) = level_offsets[level]
                    act_offset, act_count = offset, w * h * c
                elif shared_offset is not None:
                    act_offset = shared_offset
                    act_count = cap.image_vector.numel()
                else:
                    row = np.ascontiguousarray(
                        cap.det_vectors[i].numpy(), dtype="<f4")
                    act_offset = blob_offset
                    act_count = row.size
                    blob_parts.append(row)
                    blob_offset += row.nbytes
                det_rows.append({
                    "image_id": cap.image_id,
                    "det_id": f"{cap.image_id}-det-{i:04d}",
                    "bbox": bbox,
                    "label": label,
                    "score": score,
                    "act_offset": act_offset,
                    "act_count": int(act_count),
                    "layer": layer,
                })
    finally:
        if maps_fh is not None:
            maps_fh.close()

    manifest = {
        "format_version": FORMAT_VERSION,
        "classes": [{"id": c, "name": bundle.class_names[c]}
                    for c in bundle.class_ids],
        "images": [{"id": cap.image_id, "width": cap.width, "height": cap.height}
                   for cap in captures],
        "activations": (
            {"mode": "vector", "layer_count": bundle.layer_count,
             "layer_lengths": bundle.layer_lengths}
            if mode == "vector" else
            {"mode": "map", "layer_count": bundle.layer_count,
             "map_reduce": ("channel_mean"
                            if bundle.arch.startswith("fasterrcnn") else "cell"),
             "maps": map_entries}
        ),
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n")

    with open(out / "detections.jsonl", "w") as fh:
        for row in det_rows:
            fh.write(_json_line(row))

    gt_rows = []
    known_ids = set(bundle.class_ids)
    image_ids = {cap.image_id for cap in captures}
    for i, ann in enumerate(ground_truth or []):
        if ann["image_id"] not in image_ids:
            raise ValueError(f"ground truth references unknown image "
                             f"{ann['image_id']!r}")
        known = bool(ann["known"])
        if known != (int(ann["class_id"]) in known_ids):
            raise ValueError(f"annotation {i}: known={known} conflicts with "
                             f"class_id {ann['class_id']}")
        gt_rows.append({
            "image_id": ann["image_id"],
            "gt_id": f"gt-{i:04d}",
            "bbox": [float(v) for v in ann["bbox"]],
            "class_id": int(ann["class_id"]),
            "known": known,
        })
    with open(out / "annotations.jsonl", "w") as fh:
        for row in gt_rows:
            fh.write(_json_line(row))

    blob = (np.concatenate(blob_parts) if blob_parts
            else np.empty(0, dtype="<f4"))
    (out / "activations.bin").write_bytes(blob.astype("<f4").tobytes())

    return ExportSummary(
        out_dir=out, mode=mode, layer=layer, images=len(captures),
        detections=len(det_rows), annotations=len(gt_rows),
        skipped_boxes=skipped,
    )
