"""Detector construction and per-architecture activation taps.

Two head families are supported:

* ``fasterrcnn`` / ``fasterrcnn-resnet50``: the ROI head is a pair of
  ReLU-activated fully-connected layers, so each final box gets one
  activation row per layer.  Layer 0 is the highest-resolution backbone
  feature map entering the head.
* ``retinanet``: the classification branch is a stack of ReLU-activated
  convolutions applied per feature-pyramid level; a box is served by the
  map of the level that matches its scale.

Models are built with a low score threshold so evaluation sees every
candidate box, and can run from torchvision checkpoints or (for offline
smoke tests) from seeded random initialization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import torch
from torch.nn import functional as F
from torchvision.models import detection as tvdet


@dataclass
class ModelBundle:
    arch: str
    model: torch.nn.Module
    class_ids: list[int]
    class_names: dict[int, str]
    layer_count: int
    layer_lengths: list[int]  # vector widths per layer index
    mode_default: str


def _load_weights(model, weights, arch):
    if weights in (None, "none"):
        return
    if weights == "default":
        raise ValueError(
            "pass --weights <checkpoint.pth> or build with pretrained "
            "weights outside this helper"
        )
    state = torch.load(weights, map_location="cpu")
    if isinstance(state, dict) and "model" in state:
        state = state["model"]
    model.load_state_dict(state)


def build_model(arch: str, weights: str | None = "none", *,
                score_thresh: float = 0.01, seed: int = 0,
                num_classes: int | None = None) -> ModelBundle:
    torch.manual_seed(seed)
    use_pretrained = weights == "default"

    if arch in ("fasterrcnn", "fasterrcnn-resnet50"):
        builder = (tvdet.fasterrcnn_mobilenet_v3_large_fpn
                   if arch == "fasterrcnn"
                   else tvdet.fasterrcnn_resnet50_fpn)
        model = builder(
            weights="DEFAULT" if use_pretrained else None,
            weights_backbone=None if not use_pretrained else "DEFAULT",
            num_classes=num_classes,
            box_score_thresh=score_thresh,
            box_detections_per_img=50,
            min_size=320,
            max_size=640,
        )
        if not use_pretrained:
            _load_weights(model, weights, arch)
        total = model.roi_heads.box_predictor.cls_score.out_features
        class_ids = list(range(1, total))  # 0 is background
        width = model.roi_heads.box_head.fc6.out_features
        channels = model.backbone.out_channels
        bundle = ModelBundle(
            arch=arch,
            model=model.eval(),
            class_ids=class_ids,
            class_names={c: f"class-{c}" for c in class_ids},
            layer_count=3,
            layer_lengths=[channels, width, width],
            mode_default="vector",
        )
        return bundle

    if arch == "retinanet":
        model = tvdet.retinanet_resnet50_fpn(
            weights="DEFAULT" if use_pretrained else None,
            weights_backbone=None if not use_pretrained else "DEFAULT",
            num_classes=num_classes,
            score_thresh=score_thresh,
            detections_per_img=50,
            min_size=320,
            max_size=512,
        )
        if not use_pretrained:
            _load_weights(model, weights, arch)
        total = model.head.classification_head.num_classes
        channels = model.backbone.out_channels
        conv_blocks = len(model.head.classification_head.conv)
        bundle = ModelBundle(
            arch=arch,
            model=model.eval(),
            class_ids=list(range(total)),  # sigmoid head: no background id
            class_names={c: f"class-{c}" for c in range(total)},
            layer_count=1 + conv_blocks,
            layer_lengths=[channels] * (1 + conv_blocks),
            mode_default="map",
        )
        return bundle

    raise ValueError(f"unknown architecture {arch!r}")


@dataclass
class ImageCapture:
    """Everything one image contributes: detections plus tapped activations."""

    image_id: str
    width: int
    height: int
    boxes: torch.Tensor          # (N, 4) original-image coordinates
    scores: torch.Tensor         # (N,)
    labels: torch.Tensor         # (N,)
    det_vectors: torch.Tensor | None = None   # (N, width) vector-mode rows
    image_vector: torch.Tensor | None = None  # shared per-image row (L0 means)
    level_maps: list[torch.Tensor] | None = None  # (C, H, W) per pyramid level
    det_levels: list[int] | None = None       # pyramid level per detection


@torch.no_grad()
def capture_fasterrcnn(bundle: ModelBundle, image_id: str,
                       tensor: torch.Tensor, layer: int,
                       keep_map: bool) -> ImageCapture:
    """One-image inference that keeps the ROI-head activations of the
    final boxes (re-pooled through the FC stack) or the layer-0 map."""
    model = bundle.model
    height, width = tensor.shape[-2:]
    transformed, _ = model.transform([tensor])
    features = model.backbone(transformed.tensors)
    proposals, _ = model.rpn(transformed, features)
    detections, _ = model.roi_heads(features, proposals, transformed.image_sizes)
    resized_boxes = detections[0]["boxes"].clone()
    final = model.transform.postprocess(
        detections, transformed.image_sizes, [(height, width)])[0]

    capture = ImageCapture(
        image_id=image_id, width=width, height=height,
        boxes=final["boxes"], scores=final["scores"], labels=final["labels"],
    )
    if layer == 0:
        fmap = features["0"][0]  # (C, H, W), highest-resolution level
        if keep_map:
            capture.level_maps = [fmap]
            capture.det_levels = [0] * len(final["boxes"])
        else:
            capture.image_vector = fmap.mean(dim=(1, 2))
        return capture

    pooled = model.roi_heads.box_roi_pool(
        features, [resized_boxes], transformed.image_sizes)
    x = pooled.flatten(start_dim=1)
    acts = F.relu(model.roi_heads.box_head.fc6(x))
    if layer == 2:
        acts = F.relu(model.roi_heads.box_head.fc7(acts))
    capture.det_vectors = acts
    return capture


def _assign_level(box, scale: float, n_levels: int) -> int:
    # smallest anchors (size 32) live on the first exported level
    w = float(box[2] - box[0])
    h = float(box[3] - box[1])
    size = math.sqrt(max(w * h, 1e-6)) * scale
    level = round(math.log2(max(size, 1e-6) / 32.0))
    return min(max(level, 0), n_levels - 1)


@torch.no_grad()
def capture_retinanet(bundle: ModelBundle, image_id: str,
                      tensor: torch.Tensor, layer: int) -> ImageCapture:
    """One-image inference keeping the classification-branch maps of the
    requested layer at every pyramid level."""
    model = bundle.model
    height, width = tensor.shape[-2:]
    transformed, _ = model.transform([tensor])
    features = model.backbone(transformed.tensors)
    feature_list = list(features.values())

    level_maps = []
    for fmap in feature_list:
        x = fmap
        taps = [fmap]
        for block in model.head.classification_head.conv:
            x = block(x)
            taps.append(x)
        level_maps.append(taps[layer][0])  # (C, H, W)

    final = model([tensor])[0]  # boxes in original coordinates
    scale = transformed.image_sizes[0][0] / height
    levels = [_assign_level(box, scale, len(feature_list))
              for box in final["boxes"]]
    return ImageCapture(
        image_id=image_id, width=width, height=height,
        boxes=final["boxes"], scores=final["scores"], labels=final["labels"],
        level_maps=level_maps, det_levels=levels,
    )
