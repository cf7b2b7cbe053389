"""Per-detection uncertainty scores.

All scorers share one convention: higher value = more uncertain / more
likely out-of-distribution.  The pattern-distance scorers measure the
Hamming distance from a detection's binary activation pattern to the
per-class store of patterns harvested from true-positive training
predictions; MSP and energy are softmax/logit baselines for comparison.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import BuildError, ConfigError, DataError, EmptyClassError
from .labeling import DetectionRecord, Label
from .patterns import PatternStore, StoreConfig, binarize


class Method(enum.Enum):
    NAPTRON_MIN = "naptron-min"
    NAPTRON_AVG = "naptron-avg"
    MSP = "msp"
    ENERGY = "energy"

    @classmethod
    def from_name(cls, name: str) -> "Method":
        for member in cls:
            if member.value == name:
                return member
        raise ConfigError(f"unknown scoring method: {name!r}")

    @property
    def needs_store(self) -> bool:
        return self in (Method.NAPTRON_MIN, Method.NAPTRON_AVG)

    @property
    def reduction(self) -> str:
        if self is Method.NAPTRON_MIN:
            return "min"
        if self is Method.NAPTRON_AVG:
            return "avg"
        raise ConfigError(f"{self.value} has no distance reduction")


@dataclass(frozen=True)
class ScoringConfig:
    method: Method
    layer_index: int = 0
    percentile: float = 0.0
    temperature: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.percentile <= 1.0:
            raise ConfigError(f"percentile must lie in [0, 1], got {self.percentile}")
        if not self.temperature > 0:
            raise ConfigError(f"temperature must be positive, got {self.temperature}")


@dataclass(frozen=True)
class ScoringFailure:
    """A detection that could not be scored, and why."""

    det_id: str
    reason: str


def build_store(
    detections,
    labels,
    get_activation,
    known_class_ids,
    *,
    layer_index: int = 0,
    percentile: float = 0.0,
    train_iou: float = 0.5,
    softmax_threshold: float = 0.0,
) -> PatternStore:
    """Harvest binary patterns from qualifying training true positives.

    A detection qualifies when it is labeled ID_TP, its matched IOU is
    strictly above ``train_iou``, and its softmax score is at least
    ``softmax_threshold``.  The qualifying pattern is inserted under the
    *predicted* class.  The returned store is frozen and echoes the build
    parameters.
    """
    if not 0.0 <= percentile <= 1.0:
        raise ConfigError(f"percentile must lie in [0, 1], got {percentile}")
    if not 0.0 <= train_iou < 1.0:
        raise ConfigError(f"train IOU threshold must lie in [0, 1), got {train_iou}")
    if not 0.0 <= softmax_threshold <= 1.0:
        raise ConfigError(
            f"softmax threshold must lie in [0, 1], got {softmax_threshold}"
        )

    config = StoreConfig(
        layer_index=layer_index,
        percentile=percentile,
        train_iou=train_iou,
        softmax_threshold=softmax_threshold,
    )
    store = PatternStore(config=config)
    for class_id in known_class_ids:
        store.ensure_class(class_id)

    admitted = 0
    for det, lab in zip(detections, labels):
        if lab.kind is not Label.ID_TP:
            continue
        if not (lab.matched_iou is not None and lab.matched_iou > train_iou):
            continue
        if det.score < softmax_threshold:
            continue
        activation = get_activation(det)
        if activation is None:
            raise DataError(f"detection {det.det_id}: no activation available")
        store.insert(det.label, binarize(activation, percentile))
        admitted += 1

    if admitted == 0:
        raise BuildError(
            "no training detection qualified for any class "
            f"(train_iou={train_iou}, softmax_threshold={softmax_threshold})"
        )
    return store.freeze()


def score_naptron(
    store: PatternStore,
    det: DetectionRecord,
    activation,
    reduction: str = "min",
) -> float:
    """Distance from the detection's pattern to its class's known patterns.

    The activation is binarized with the percentile echoed by the store, so
    train and test always share one binarization rule.  Raises
    EmptyClassError when the predicted class has no stored patterns.
    """
    pattern = binarize(activation, store.config.percentile)
    if reduction == "min":
        return float(store.min_distance(det.label, pattern))
    if reduction == "avg":
        return store.avg_distance(det.label, pattern)
    raise ConfigError(f"unknown distance reduction: {reduction!r}")


def score_msp(det: DetectionRecord) -> float:
    """1 - max softmax probability, so higher means more uncertain."""
    return 1.0 - det.score


def score_energy(det: DetectionRecord, temperature: float = 1.0) -> float:
    """-T * log sum_i exp(logit_i / T); higher means more uncertain."""
    if not temperature > 0:
        raise ConfigError(f"temperature must be positive, got {temperature}")
    if det.logits is None:
        raise DataError(f"detection {det.det_id}: energy scoring needs logits")
    logits = np.asarray(det.logits, dtype=np.float64)
    return float(-temperature * logsumexp(logits / temperature))


def score_detections(
    detections,
    method: Method,
    *,
    store: PatternStore | None = None,
    get_activation=None,
    temperature: float = 1.0,
) -> tuple[dict[str, float], list[ScoringFailure]]:
    """Score a batch, collecting per-detection failures instead of aborting.

    Returns (det_id -> uncertainty, failures).  Detections whose predicted
    class has no stored patterns, or which lack logits under the energy
    method, are reported as failures and omitted from the score map.
    """
    if method.needs_store:
        if store is None:
            raise ConfigError(f"method {method.value} requires a pattern store")
        if get_activation is None:
            raise ConfigError(f"method {method.value} requires activation access")

    scores: dict[str, float] = {}
    failures: list[ScoringFailure] = []
    for det in detections:
        try:
            if method.needs_store:
                value = score_naptron(
                    store, det, get_activation(det), reduction=method.reduction
                )
            elif method is Method.MSP:
                value = score_msp(det)
            else:
                value = score_energy(det, temperature)
        except (EmptyClassError, DataError) as exc:
            failures.append(ScoringFailure(det.det_id, str(exc)))
            continue
        scores[det.det_id] = value
    return scores, failures
