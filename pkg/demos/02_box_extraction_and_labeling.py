"""From detector outputs to activation vectors and TP/OOD/FP labels.

Fully-connected heads give one activation row per proposal.  Convolutional
heads give a [W, H, C] map; a box is attributed the C-long vector at the
cell its center falls into.  A whole map can also be flattened to its
per-channel means.  Detections are then labeled against ground truth:
same-class overlap above the IOU threshold is an in-distribution true
positive, unknown-class overlap is an OOD sample, anything else is
background.
"""

import numpy as np

from naptron import (
    BoxGeometry,
    DetectionRecord,
    FeatureMap,
    GroundTruthRecord,
    channel_mean_flatten,
    extract_conv_pattern,
    extract_fc_pattern,
    iou,
    label_predictions,
    map_box_to_cell,
)

rng = np.random.default_rng(1)

# --- fully-connected head: rows per proposal -------------------------------
head_output = rng.normal(size=(4, 8))  # 4 proposals, 8 units
print("proposal 2 activations:", np.round(extract_fc_pattern(head_output, 2), 2))

# --- convolutional head: cell lookup ----------------------------------------
fmap = FeatureMap(values=rng.normal(size=(25, 25, 16)),  # (H, W, C)
                  image_width=800, image_height=800)
box = BoxGeometry(90.0, 240.0, 110.0, 260.0)  # center (100, 250)
cell = map_box_to_cell(box, fmap)
print("box center maps to cell (w, h) =", cell)
print("cell vector length:", extract_conv_pattern(fmap, cell).shape[0])
print("channel-mean vector length:", channel_mean_flatten(fmap).shape[0])

# --- labeling ---------------------------------------------------------------
gts = [
    GroundTruthRecord("img", "gt-car", BoxGeometry(10, 10, 50, 50),
                      class_id=0, known=True),
    GroundTruthRecord("img", "gt-moose", BoxGeometry(100, 100, 160, 160),
                      class_id=42, known=False),  # class outside the known set
]
dets = [
    DetectionRecord("img", "hit", BoxGeometry(12, 12, 52, 52), label=0, score=0.9),
    DetectionRecord("img", "ood", BoxGeometry(102, 98, 158, 162), label=1, score=0.7),
    DetectionRecord("img", "ghost", BoxGeometry(300, 300, 340, 340), label=0, score=0.4),
    DetectionRecord("img", "wrong-class", BoxGeometry(12, 12, 52, 52), label=1, score=0.6),
]
for det, lab in zip(dets, label_predictions(dets, gts, 0.5)):
    overlap = f"IOU {lab.matched_iou:.2f} with {lab.matched_gt_id}" \
        if lab.matched_gt_id else "no match"
    print(f"{det.det_id:>12}: {lab.kind.value:<13} ({overlap})")

print("\nIOU of the two squares:",
      round(iou(BoxGeometry(0, 0, 2, 2), BoxGeometry(1, 0, 3, 2)), 4))
