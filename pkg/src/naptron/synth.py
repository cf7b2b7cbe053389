"""Seeded synthetic dataset generator in the interchange format.

Each known class gets a random prototype activation vector; detections
carry the prototype with each value's sign flipped independently at a
configurable rate.  Since bit i of a pattern is just the sign of value i,
the expected Hamming distance between a prototype's pattern and a flipped
copy is exactly rate * length, which makes the generated data a convenient
oracle: higher OOD flip rates mean larger distances and cleaner separation.

Boxes are laid out on a disjoint tile grid so labeling reproduces the
intended assignment exactly: true positives and OOD detections sit on their
own ground-truth box (IOU 1), background false positives sit on an empty
tile (IOU 0 with everything).  Generation is deterministic for a given
seed, byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dataio import (
    ANNOTATIONS_FILE,
    BLOB_FILE,
    DETECTIONS_FILE,
    FORMAT_VERSION,
    write_blob,
    write_jsonl,
    write_manifest,
)
from .errors import ConfigError

_TILE = 20
_BOX_MARGIN = 4
_BOX_SIDE = 12

TRAIN_DIR = "train"
TEST_DIR = "test"


@dataclass
class SynthConfig:
    seed: int = 0
    class_count: int = 3
    pattern_length: int = 64
    train_per_class: int = 10
    test_id: int = 30
    test_ood: int = 30
    fp: int = 10
    rho_train: float = 0.0
    rho_id: float = 0.0
    rho_ood: float = 0.3
    train_score: tuple[float, float] = (0.5, 1.0)
    id_score: tuple[float, float] = (0.5, 1.0)
    ood_score: tuple[float, float] = (0.3, 0.9)
    fp_score: tuple[float, float] = (0.05, 0.5)
    image_size: int = 640
    boxes_per_image: int = 16

    def validate(self) -> None:
        if self.class_count < 1:
            raise ConfigError("class_count must be >= 1")
        if self.pattern_length < 1:
            raise ConfigError("pattern_length must be >= 1")
        if min(self.train_per_class, self.test_id, self.test_ood, self.fp) < 0:
            raise ConfigError("sample counts must be >= 0")
        if self.train_per_class < 1:
            raise ConfigError("train_per_class must be >= 1")
        for name, rate in (("rho_train", self.rho_train),
                           ("rho_id", self.rho_id),
                           ("rho_ood", self.rho_ood)):
            if not 0.0 <= rate <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {rate}")
        for name, rng in (("train_score", self.train_score),
                          ("id_score", self.id_score),
                          ("ood_score", self.ood_score),
                          ("fp_score", self.fp_score)):
            lo, hi = rng
            if not (0.0 <= lo <= hi <= 1.0):
                raise ConfigError(f"{name} must satisfy 0 <= low <= high <= 1")
        grid = self.image_size // _TILE
        if grid < 1 or self.boxes_per_image < 1 or self.boxes_per_image > grid * grid:
            raise ConfigError(
                f"unsatisfiable geometry: {self.boxes_per_image} boxes do not fit "
                f"a {self.image_size}px image ({grid * grid} tile slots)"
            )


def prototype_activations(rng: np.random.Generator, class_count: int,
                          length: int) -> np.ndarray:
    """One random nonzero activation prototype per class, shape (K, L)."""
    magnitudes = rng.uniform(0.25, 1.0, size=(class_count, length))
    signs = np.where(rng.random((class_count, length)) < 0.5, -1.0, 1.0)
    return magnitudes * signs


def flip_signs(values: np.ndarray, rate: float,
               rng: np.random.Generator) -> np.ndarray:
    """Flip each value's sign independently with probability ``rate``."""
    mask = rng.random(values.shape) < rate
    return values * np.where(mask, -1.0, 1.0)


def _tile_box(slot: int, grid: int) -> list[float]:
    row, col = divmod(slot, grid)
    x = col * _TILE + _BOX_MARGIN
    y = row * _TILE + _BOX_MARGIN
    return [float(x), float(y), float(x + _BOX_SIDE), float(y + _BOX_SIDE)]


@dataclass
class _Split:
    """Accumulates one dataset directory's rows before writing."""

    prefix: str
    boxes_per_image: int
    image_size: int
    pattern_length: int
    detections: list[dict] = field(default_factory=list)
    annotations: list[dict] = field(default_factory=list)
    activations: list[np.ndarray] = field(default_factory=list)

    def _place(self) -> tuple[str, list[float]]:
        index = len(self.detections)
        image_index, slot = divmod(index, self.boxes_per_image)
        grid = self.image_size // _TILE
        return f"{self.prefix}-{image_index:04d}", _tile_box(slot, grid)

    def add(self, det_id: str, label: int, score: float, logits,
            activation: np.ndarray, gt_class: int | None, known: bool) -> None:
        image_id, box = self._place()
        offset = 4 * self.pattern_length * len(self.detections)
        self.detections.append({
            "image_id": image_id,
            "det_id": det_id,
            "bbox": box,
            "label": label,
            "score": float(score),
            "logits": [float(v) for v in logits],
            "act_offset": offset,
            "act_count": self.pattern_length,
            "layer": 0,
        })
        self.activations.append(activation)
        if gt_class is not None:
            self.annotations.append({
                "image_id": image_id,
                "gt_id": f"gt-{det_id}",
                "bbox": box,
                "class_id": gt_class,
                "known": known,
            })

    def image_count(self) -> int:
        return max(1, -(-len(self.detections) // self.boxes_per_image))

    def write(self, root: Path, class_count: int) -> Path:
        root.mkdir(parents=True, exist_ok=True)
        manifest = {
            "format_version": FORMAT_VERSION,
            "classes": [
                {"id": c, "name": f"class-{c}"} for c in range(class_count)
            ],
            "images": [
                {"id": f"{self.prefix}-{i:04d}",
                 "width": self.image_size, "height": self.image_size}
                for i in range(self.image_count())
            ],
            "activations": {
                "mode": "vector",
                "layer_count": 1,
                "layer_lengths": [self.pattern_length],
            },
        }
        write_manifest(root, manifest)
        write_jsonl(root / DETECTIONS_FILE, self.detections)
        write_jsonl(root / ANNOTATIONS_FILE, self.annotations)
        if self.activations:
            blob = np.concatenate([a.astype(np.float32) for a in self.activations])
        else:
            blob = np.empty(0, dtype=np.float32)
        write_blob(root / BLOB_FILE, blob)
        return root


def _logits_for(rng: np.random.Generator, label: int, class_count: int) -> np.ndarray:
    logits = rng.normal(0.0, 1.0, size=class_count)
    logits[label] = logits.max() + rng.uniform(0.5, 2.0)
    return logits


def generate(config: SynthConfig, out_dir) -> tuple[Path, Path]:
    """Write ``out_dir/train`` and ``out_dir/test``; returns both paths.

    Detection ids encode the intended label (``tp-``/``id-``/``ood-``/
    ``fp-``), which the tests use to check generator/labeler agreement.
    """
    config.validate()
    rng = np.random.default_rng(config.seed)
    out = Path(out_dir)
    K = config.class_count
    unknown_class = K  # first id outside the known set
    protos = prototype_activations(rng, K, config.pattern_length)

    train = _Split("train", config.boxes_per_image, config.image_size,
                   config.pattern_length)
    for c in range(K):
        for j in range(config.train_per_class):
            train.add(
                det_id=f"tp-{c:02d}-{j:04d}",
                label=c,
                score=rng.uniform(*config.train_score),
                logits=_logits_for(rng, c, K),
                activation=flip_signs(protos[c], config.rho_train, rng),
                gt_class=c,
                known=True,
            )

    test = _Split("test", config.boxes_per_image, config.image_size,
                  config.pattern_length)
    for i in range(config.test_id):
        c = i % K
        test.add(
            det_id=f"id-{i:04d}",
            label=c,
            score=rng.uniform(*config.id_score),
            logits=_logits_for(rng, c, K),
            activation=flip_signs(protos[c], config.rho_id, rng),
            gt_class=c,
            known=True,
        )
    for i in range(config.test_ood):
        c = i % K
        test.add(
            det_id=f"ood-{i:04d}",
            label=c,
            score=rng.uniform(*config.ood_score),
            logits=_logits_for(rng, c, K),
            activation=flip_signs(protos[c], config.rho_ood, rng),
            gt_class=unknown_class,
            known=False,
        )
    for i in range(config.fp):
        c = i % K
        test.add(
            det_id=f"fp-{i:04d}",
            label=c,
            score=rng.uniform(*config.fp_score),
            logits=_logits_for(rng, c, K),
            activation=flip_signs(protos[c], config.rho_ood, rng),
            gt_class=None,
            known=False,
        )

    train_dir = train.write(out / TRAIN_DIR, K)
    test_dir = test.write(out / TEST_DIR, K)
    return train_dir, test_dir
