"""End-to-end workflow steps over interchange datasets.

These functions wire the modules together: label a dataset's detections
against its ground truth, build a pattern store from the qualifying
training true positives, score detections with the chosen method, and
assemble the evaluation report.  All steps are deterministic for a given
dataset and parameter set.
"""

from __future__ import annotations

from .dataio import Dataset
from .errors import ConfigError, DataError
from .labeling import Label, label_predictions
from .metrics import (
    ScoredSample,
    SweepRow,
    auc_limited,
    evaluate_classes,
    nms_sweep,
    scatter_rows,
    tpr_fp_curve,
)
from .patterns import PatternStore
from .report import EvalReport
from .scoring import Method, ScoringFailure, build_store, score_detections

DEFAULT_IOU_THRESHOLD = 0.5
DEFAULT_NMS_THRESHOLD = 0.01


def _layer_checked_activation(dataset: Dataset, layer_index: int):
    def get(det):
        if det.layer != layer_index:
            raise DataError(
                f"detection {det.det_id}: activation comes from layer "
                f"{det.layer}, expected layer {layer_index}"
            )
        return dataset.get_activation(det)

    return get


def build_store_from_dataset(
    dataset: Dataset,
    *,
    layer_index: int = 0,
    percentile: float = 0.0,
    train_iou: float = 0.5,
    softmax_threshold: float = 0.0,
    iou_threshold: float = DEFAULT_IOU_THRESHOLD,
) -> PatternStore:
    """Label a training dataset and harvest true-positive patterns."""
    if not 0 <= layer_index < dataset.manifest.layer_count:
        raise ConfigError(
            f"layer {layer_index} outside the manifest's "
            f"{dataset.manifest.layer_count} layer(s)"
        )
    labels = label_predictions(
        dataset.detections, dataset.ground_truths, iou_threshold
    )
    return build_store(
        dataset.detections,
        labels,
        _layer_checked_activation(dataset, layer_index),
        sorted(dataset.manifest.class_ids()),
        layer_index=layer_index,
        percentile=percentile,
        train_iou=train_iou,
        softmax_threshold=softmax_threshold,
    )


def _score_samples(
    dataset: Dataset,
    detections,
    labels,
    method: Method,
    store: PatternStore | None,
    temperature: float,
):
    get_activation = None
    if method.needs_store:
        if store is None:
            raise ConfigError(f"method {method.value} requires a pattern store")
        get_activation = _layer_checked_activation(dataset, store.config.layer_index)
    scores, failures = score_detections(
        detections,
        method,
        store=store,
        get_activation=get_activation,
        temperature=temperature,
    )
    samples = [
        ScoredSample(scores[det.det_id], lab.kind, det.label, det.score)
        for det, lab in zip(detections, labels)
        if lab.kind is not Label.FP_BACKGROUND and det.det_id in scores
    ]
    return scores, failures, samples


def evaluate_dataset(
    dataset: Dataset,
    method: Method,
    store: PatternStore | None = None,
    *,
    iou_threshold: float = DEFAULT_IOU_THRESHOLD,
    nms_threshold: float = DEFAULT_NMS_THRESHOLD,
    temperature: float = 1.0,
    tpr_target: float = 0.95,
    ood_positive: bool = False,
) -> EvalReport:
    """Label, score, and measure one dataset with one method.

    Detections below ``nms_threshold`` are dropped before anything else.
    Per-detection scoring failures (for example a predicted class that was
    never seen at training time) are reported, not silently dropped; the
    macro metrics are left undefined when no class has both sample kinds.
    """
    if not 0.0 <= nms_threshold <= 1.0:
        raise ConfigError(f"NMS threshold must lie in [0, 1], got {nms_threshold}")

    retained = [d for d in dataset.detections if d.score >= nms_threshold]
    labels = label_predictions(retained, dataset.ground_truths, iou_threshold)
    scores, failures, samples = _score_samples(
        dataset, retained, labels, method, store, temperature
    )
    class_report = evaluate_classes(
        samples, tpr_target=tpr_target, ood_positive=ood_positive
    )

    known_gt = sum(1 for gt in dataset.ground_truths if gt.known)
    if known_gt == 0:
        raise DataError("dataset has no known-class ground-truth objects")
    curve = tpr_fp_curve(
        [(det.score, lab.kind) for det, lab in zip(retained, labels)], known_gt
    )
    fp_cap = 2 * known_gt

    kind_counts = {kind: 0 for kind in Label}
    for lab in labels:
        kind_counts[lab.kind] += 1

    params = {
        "iou_threshold": iou_threshold,
        "nms_threshold": nms_threshold,
        "temperature": temperature if method is Method.ENERGY else None,
        "layer_index": store.config.layer_index if store is not None else None,
        "percentile": store.config.percentile if store is not None else None,
        "train_iou": store.config.train_iou if store is not None else None,
        "softmax_threshold": (
            store.config.softmax_threshold if store is not None else None
        ),
    }
    counts = {
        "detections_total": len(dataset.detections),
        "detections_retained": len(retained),
        "id_tp": kind_counts[Label.ID_TP],
        "ood": kind_counts[Label.OOD],
        "fp_background": kind_counts[Label.FP_BACKGROUND],
        "scored": len(scores),
        "scoring_failures": len(failures),
        "known_gt_objects": known_gt,
    }
    return EvalReport(
        method=method.value,
        dataset_fingerprint=dataset.fingerprint(),
        params=params,
        counts=counts,
        class_report=class_report,
        curve=curve,
        fp_cap=fp_cap,
        auc_limited=auc_limited(curve, fp_cap),
        scatter=scatter_rows(retained, labels, scores),
        failures=failures,
    )


def sweep_dataset(
    dataset: Dataset,
    method: Method,
    thresholds,
    store: PatternStore | None = None,
    *,
    iou_threshold: float = DEFAULT_IOU_THRESHOLD,
    temperature: float = 1.0,
    tpr_target: float = 0.95,
    ood_positive: bool = False,
) -> tuple[list[SweepRow], list[ScoringFailure]]:
    """Score everything once, then recompute metrics per NMS threshold."""
    labels = label_predictions(
        dataset.detections, dataset.ground_truths, iou_threshold
    )
    _, failures, samples = _score_samples(
        dataset, dataset.detections, labels, method, store, temperature
    )
    rows = nms_sweep(
        samples, thresholds, tpr_target=tpr_target, ood_positive=ood_positive
    )
    return rows, failures
