"""Assign each detection one of {ID-TP, OOD, FP-background} against ground truth.

A detection is an in-distribution true positive when it overlaps a
known-class ground truth of its own predicted class with IOU strictly above
the threshold; it is an OOD sample when it instead overlaps an unknown-class
ground truth; everything else is a background false positive.  The known
same-class match takes precedence when both overlap, and a detection whose
only match is a known ground truth of a *different* class is background.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .extraction import BoxGeometry


class Label(enum.Enum):
    ID_TP = "id_tp"
    OOD = "ood"
    FP_BACKGROUND = "fp_background"


@dataclass(frozen=True)
class GroundTruthRecord:
    image_id: str
    gt_id: str
    box: BoxGeometry
    class_id: int
    known: bool


@dataclass
class DetectionRecord:
    """One predicted box with its scores and activation locator.

    ``act_offset``/``act_count``/``layer`` locate the detection's activation
    vector (or feature map, in map mode) inside the dataset blob files.
    """

    image_id: str
    det_id: str
    box: BoxGeometry
    label: int
    score: float
    softmax: np.ndarray | None = None
    logits: np.ndarray | None = None
    act_offset: int = 0
    act_count: int = 0
    layer: int = 0


@dataclass(frozen=True)
class SampleLabel:
    kind: Label
    matched_gt_id: str | None = None
    matched_iou: float | None = None


def iou(a: BoxGeometry, b: BoxGeometry) -> float:
    """Intersection-over-union of two boxes, in [0, 1]."""
    ix = min(a.x2, b.x2) - max(a.x1, b.x1)
    iy = min(a.y2, b.y2) - max(a.y1, b.y1)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    return inter / (a.area + b.area - inter)


def label_predictions(
    detections,
    ground_truths,
    iou_threshold: float = 0.5,
) -> list[SampleLabel]:
    """Label every detection; result is aligned with the input order.

    Matching is per-detection best-IOU, so one ground truth may match
    several detections.  ``iou_threshold`` is compared strictly (> lambda).
    """
    if not 0.0 < iou_threshold < 1.0:
        raise ConfigError(
            f"IOU threshold must lie strictly inside (0, 1), got {iou_threshold}"
        )

    by_image: dict[str, list[GroundTruthRecord]] = {}
    for gt in ground_truths:
        by_image.setdefault(gt.image_id, []).append(gt)

    labels = []
    for det in detections:
        best_same: tuple[str | None, float] = (None, 0.0)
        best_unknown: tuple[str | None, float] = (None, 0.0)
        for gt in by_image.get(det.image_id, ()):
            overlap = iou(det.box, gt.box)
            if gt.known:
                if gt.class_id == det.label and overlap > best_same[1]:
                    best_same = (gt.gt_id, overlap)
            elif overlap > best_unknown[1]:
                best_unknown = (gt.gt_id, overlap)
        if best_same[1] > iou_threshold:
            labels.append(SampleLabel(Label.ID_TP, best_same[0], best_same[1]))
        elif best_unknown[1] > iou_threshold:
            labels.append(SampleLabel(Label.OOD, best_unknown[0], best_unknown[1]))
        else:
            labels.append(SampleLabel(Label.FP_BACKGROUND))
    return labels
