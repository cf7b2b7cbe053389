"""Full workflow on a synthetic dataset: generate, build, score, evaluate.

The generator draws one prototype activation vector per class and emits
train/test datasets in the interchange format.  Test ID detections are
lightly perturbed copies of their class prototype, OOD detections heavily
perturbed ones, so distance-based uncertainty separates them cleanly and
the whole pipeline can be exercised without a trained detector.
"""

import tempfile
from pathlib import Path

from naptron import (
    Method,
    SynthConfig,
    build_store_from_dataset,
    evaluate_dataset,
    generate,
    load_dataset,
    validate_dataset,
)

workdir = Path(tempfile.mkdtemp(prefix="napdemo-"))
config = SynthConfig(
    seed=2024,
    class_count=5,
    pattern_length=256,
    train_per_class=60,
    test_id=100,
    test_ood=100,
    fp=40,
    rho_train=0.03,   # training patterns jitter around the prototypes
    rho_id=0.03,      # test ID detections look like training ones
    rho_ood=0.25,     # OOD detections sit far away in Hamming space
)
train_dir, test_dir = generate(config, workdir)
print("dataset:", workdir)
print("train validation:", validate_dataset(train_dir).render())
print("test validation:", validate_dataset(test_dir).render())

train = load_dataset(train_dir)
store = build_store_from_dataset(train)  # defaults: IOU > 0.5, s >= 0, p = 0
print("\nstore counts per class:", store.counts())

test = load_dataset(test_dir)
for method in (Method.NAPTRON_MIN, Method.NAPTRON_AVG, Method.MSP, Method.ENERGY):
    result = evaluate_dataset(
        test, method, store if method.needs_store else None, nms_threshold=0.0
    )
    print(f"{method.value:>12}: macro AUROC {result.macro_auroc:.4f}  "
          f"macro FPR@95TPR {result.macro_fpr95:.4f}  "
          f"capped AUC {result.auc_limited:.4f}")

result = evaluate_dataset(test, Method.NAPTRON_MIN, store, nms_threshold=0.0)
print("\nlabel counts:", {k: result.counts[k] for k in ("id_tp", "ood", "fp_background")})
print("first TPR-vs-FP curve points:", result.curve[:5])
print("first scatter rows (softmax, uncertainty, label):")
for row in result.scatter[:3]:
    print("   ", (round(row[0], 3), row[1], row[2]))
