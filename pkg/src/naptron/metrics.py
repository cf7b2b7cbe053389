"""OOD separation metrics, detection-quality curves, and threshold sweeps.

AUROC follows the rank-statistic definition (probability that a random OOD
uncertainty exceeds a random ID uncertainty, ties counted half), which
equals the trapezoidal ROC area.  FPR@95TPR treats "ID accepted as ID" as
the true positive by default; the opposite reading is available behind
``ood_positive``.  Per-class metrics are macro-averaged with equal weight,
excluding classes that lack either side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import ConfigError, InputError, UndefinedMetricError
from .labeling import Label


def _scores_array(values, side: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise UndefinedMetricError(f"{side} score list is empty")
    return arr


def auroc(id_scores, ood_scores) -> float:
    """P(random OOD uncertainty > random ID uncertainty), ties count 1/2."""
    id_arr = _scores_array(id_scores, "ID")
    ood_arr = _scores_array(ood_scores, "OOD")
    ranks = rankdata(np.concatenate([id_arr, ood_arr]))
    n_ood = ood_arr.size
    u = ranks[id_arr.size:].sum() - n_ood * (n_ood + 1) / 2.0
    return float(u / (id_arr.size * n_ood))


def fpr_at_tpr(
    id_scores,
    ood_scores,
    tpr_target: float = 0.95,
    *,
    ood_positive: bool = False,
) -> float:
    """Fraction of OOD samples accepted when ID acceptance hits the target.

    Default direction: the threshold tau is the smallest uncertainty with at
    least ``tpr_target`` of ID samples at or below it; the result is the
    fraction of OOD samples at or below tau (wrongly accepted; lower is
    better).  With ``ood_positive`` the roles flip: tau keeps
    ``tpr_target`` of OOD samples at or above it and the result is the
    fraction of ID samples at or above tau.
    """
    if not 0.0 < tpr_target <= 1.0:
        raise ConfigError(f"TPR target must lie in (0, 1], got {tpr_target}")
    id_arr = _scores_array(id_scores, "ID")
    ood_arr = _scores_array(ood_scores, "OOD")
    if ood_positive:
        k = math.ceil(tpr_target * ood_arr.size)
        tau = np.sort(ood_arr)[::-1][k - 1]
        return float(np.mean(id_arr >= tau))
    k = math.ceil(tpr_target * id_arr.size)
    tau = np.sort(id_arr)[k - 1]
    return float(np.mean(ood_arr <= tau))


@dataclass(frozen=True)
class ScoredSample:
    """One metric input: an uncertainty value for an ID_TP or OOD detection."""

    value: float
    label: Label
    predicted_class: int
    softmax_score: float


def per_class_macro(samples, metric) -> tuple[dict[int, float], float, dict[int, str]]:
    """Apply ``metric(id_values, ood_values)`` per predicted class.

    Classes missing either side are excluded from the unweighted macro mean
    and reported with the reason.  Raises UndefinedMetricError when no class
    is includable.
    """
    groups: dict[int, tuple[list[float], list[float]]] = {}
    for s in samples:
        if s.label is Label.FP_BACKGROUND:
            raise InputError("FP_BACKGROUND samples are not valid metric inputs")
        ids, oods = groups.setdefault(s.predicted_class, ([], []))
        (ids if s.label is Label.ID_TP else oods).append(s.value)

    per_class: dict[int, float] = {}
    excluded: dict[int, str] = {}
    for class_id in sorted(groups):
        ids, oods = groups[class_id]
        if not ids:
            excluded[class_id] = "no ID_TP samples"
        elif not oods:
            excluded[class_id] = "no OOD samples"
        else:
            per_class[class_id] = float(metric(ids, oods))
    if not per_class:
        raise UndefinedMetricError("no class has both ID_TP and OOD samples")
    macro = float(np.mean([per_class[c] for c in sorted(per_class)]))
    return per_class, macro, excluded


@dataclass(frozen=True)
class ClassMetrics:
    auroc: float
    fpr95: float
    id_count: int
    ood_count: int


@dataclass(frozen=True)
class PerClassReport:
    per_class: dict[int, ClassMetrics]
    excluded: dict[int, str]
    macro_auroc: float | None
    macro_fpr95: float | None
    id_total: int
    ood_total: int

    @property
    def defined(self) -> bool:
        return self.macro_auroc is not None


def evaluate_classes(
    samples,
    *,
    tpr_target: float = 0.95,
    ood_positive: bool = False,
) -> PerClassReport:
    """Per-class AUROC and FPR@TPR plus their unweighted macro means.

    Unlike :func:`per_class_macro` this never raises when nothing is
    includable: the macros come back as None and the exclusion reasons are
    still reported, so a dataset without OOD samples (for example a
    training split) still yields a usable report.
    """
    groups: dict[int, tuple[list[float], list[float]]] = {}
    counts: dict[int, list[int]] = {}
    for s in samples:
        if s.label is Label.FP_BACKGROUND:
            raise InputError("FP_BACKGROUND samples are not valid metric inputs")
        ids, oods = groups.setdefault(s.predicted_class, ([], []))
        (ids if s.label is Label.ID_TP else oods).append(s.value)
        pair = counts.setdefault(s.predicted_class, [0, 0])
        pair[0 if s.label is Label.ID_TP else 1] += 1

    per_class: dict[int, ClassMetrics] = {}
    excluded: dict[int, str] = {}
    for class_id in sorted(groups):
        ids, oods = groups[class_id]
        if not ids:
            excluded[class_id] = "no ID_TP samples"
        elif not oods:
            excluded[class_id] = "no OOD samples"
        else:
            per_class[class_id] = ClassMetrics(
                auroc=auroc(ids, oods),
                fpr95=fpr_at_tpr(ids, oods, tpr_target, ood_positive=ood_positive),
                id_count=counts[class_id][0],
                ood_count=counts[class_id][1],
            )
    included = sorted(per_class)
    return PerClassReport(
        per_class=per_class,
        excluded=excluded,
        macro_auroc=(float(np.mean([per_class[c].auroc for c in included]))
                     if included else None),
        macro_fpr95=(float(np.mean([per_class[c].fpr95 for c in included]))
                     if included else None),
        id_total=sum(v[0] for v in counts.values()),
        ood_total=sum(v[1] for v in counts.values()),
    )


def tpr_fp_curve(labeled_scores, known_gt_count: int) -> list[tuple[int, float]]:
    """TPR vs false-positive count as the softmax threshold sweeps down.

    ``labeled_scores`` is a sequence of (softmax_score, Label) covering every
    retained detection; OOD and FP_BACKGROUND detections both count as false
    positives for detection quality, and only ID_TP counts toward TPR
    (denominator ``known_gt_count``).  One point is emitted per distinct
    score, starting from (0, 0.0); both coordinates are non-decreasing.
    """
    if known_gt_count <= 0:
        raise InputError("known ground-truth count must be positive")
    items = sorted(labeled_scores, key=lambda t: -t[0])
    points = [(0, 0.0)]
    tp = fp = 0
    i = 0
    while i < len(items):
        score = items[i][0]
        while i < len(items) and items[i][0] == score:
            if items[i][1] is Label.ID_TP:
                tp += 1
            else:
                fp += 1
            i += 1
        points.append((fp, tp / known_gt_count))
    return points


def auc_limited(curve, fp_cap: int) -> float:
    """Trapezoidal area under a TPR-vs-FP curve, x normalized by ``fp_cap``.

    The curve is truncated at the cap (linear interpolation across the
    crossing segment); when it ends before the cap the final TPR extends
    flat, since the detection list is exhausted and no further FPs exist.
    """
    if fp_cap <= 0:
        raise InputError("FP cap must be positive")
    pts = list(curve)
    if not pts:
        raise InputError("curve has no points")
    xs: list[float] = []
    ys: list[float] = []
    for fp, tpr in pts:
        x = fp / fp_cap
        if x >= 1.0 and xs:
            x0, y0 = xs[-1], ys[-1]
            if x > x0:
                y = y0 + (tpr - y0) * (1.0 - x0) / (x - x0)
            else:
                y = tpr
            xs.append(1.0)
            ys.append(y)
            break
        xs.append(min(x, 1.0))
        ys.append(tpr)
    if xs[-1] < 1.0:
        xs.append(1.0)
        ys.append(ys[-1])
    return float(np.trapezoid(ys, xs))


@dataclass(frozen=True)
class SweepRow:
    threshold: float
    retained: int
    id_count: int
    ood_count: int
    report: PerClassReport | None
    undefined_reason: str | None = None


def nms_sweep(
    samples,
    thresholds,
    *,
    tpr_target: float = 0.95,
    ood_positive: bool = False,
) -> list[SweepRow]:
    """Recompute macro metrics after filtering by softmax score.

    Thresholds must be ascending and inside [0, 1].  Labels are taken as
    precomputed; each row only drops samples whose softmax score falls below
    the threshold.  Rows whose metrics are undefined (nothing retained, or
    no class with both sides) are flagged rather than zeroed.
    """
    thresholds = list(thresholds)
    if any(not 0.0 <= t <= 1.0 for t in thresholds):
        raise ConfigError(f"thresholds must lie in [0, 1], got {thresholds}")
    if thresholds != sorted(thresholds):
        raise ConfigError("thresholds must be sorted ascending")

    samples = list(samples)
    rows = []
    for t in thresholds:
        retained = [s for s in samples if s.softmax_score >= t]
        n_id = sum(1 for s in retained if s.label is Label.ID_TP)
        n_ood = len(retained) - n_id
        report = evaluate_classes(
            retained, tpr_target=tpr_target, ood_positive=ood_positive
        )
        if not report.defined:
            reason = ("no samples retained" if not retained
                      else "no class has both ID_TP and OOD samples")
            rows.append(SweepRow(t, len(retained), n_id, n_ood, None, reason))
            continue
        rows.append(SweepRow(t, len(retained), n_id, n_ood, report))
    return rows


def scatter_rows(detections, labels, scores) -> list[tuple[float, float, str]]:
    """(softmax, uncertainty, label) rows for every scored detection."""
    rows = []
    for det, lab in zip(detections, labels):
        if det.det_id in scores:
            rows.append((det.score, scores[det.det_id], lab.kind.value))
    return rows
