"""Dataset interchange format: loading, validation, store persistence.

A dataset directory holds human-readable metadata plus raw binary blobs:

* ``manifest.json`` -- known classes, image list, activation layout;
* ``detections.jsonl`` -- one detection per line with an activation locator;
* ``annotations.jsonl`` -- ground-truth boxes with known/unknown class flag;
* ``activations.bin`` -- contiguous little-endian float32 values;
* ``feature_maps.bin`` -- map mode only; each map is prefixed by W, H, C as
  little-endian uint32 and laid out row-major (h, w, c).

``validate_dataset`` reports every structural problem; ``load_dataset``
accepts exactly the datasets that validate cleanly (it runs the same scan
and raises on the first finding).  Activation values are read lazily
through per-record locators.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError, InputError, StateError
from .extraction import (
    BoxGeometry,
    FeatureMap,
    channel_mean_flatten,
    extract_conv_pattern,
    map_box_to_cell,
)
from .labeling import DetectionRecord, GroundTruthRecord
from .patterns import BinaryPattern, PatternStore, StoreConfig, words_for_length

FORMAT_VERSION = 1
MANIFEST_FILE = "manifest.json"
DETECTIONS_FILE = "detections.jsonl"
ANNOTATIONS_FILE = "annotations.jsonl"
BLOB_FILE = "activations.bin"
MAPS_FILE = "feature_maps.bin"
DATASET_FILES = (MANIFEST_FILE, DETECTIONS_FILE, ANNOTATIONS_FILE, BLOB_FILE, MAPS_FILE)

STORE_MAGIC = b"NAPS"
STORE_VERSION = 1


# ---------------------------------------------------------------------------
# findings


@dataclass(frozen=True)
class Finding:
    file: str
    line: int | None
    message: str

    def __str__(self) -> str:
        where = self.file if self.line is None else f"{self.file}:{self.line}"
        return f"{where}: {self.message}"


@dataclass
class ValidationReport:
    findings: list[Finding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.findings

    def render(self) -> str:
        if self.ok:
            return "dataset valid: 0 findings"
        lines = [f"dataset invalid: {len(self.findings)} finding(s)"]
        lines.extend(f"  {f}" for f in self.findings)
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# manifest


@dataclass(frozen=True)
class MapEntry:
    image_id: str
    layer: int
    offset: int
    dims: tuple[int, int, int]  # (W, H, C)

    @property
    def element_count(self) -> int:
        w, h, c = self.dims
        return w * h * c


@dataclass
class DatasetManifest:
    format_version: int
    classes: dict[int, str]
    images: dict[str, tuple[int, int]]  # id -> (width, height)
    mode: str  # "vector" | "map"
    layer_count: int
    layer_lengths: list[int] | None = None
    maps: list[MapEntry] | None = None
    map_reduce: str = "cell"

    def class_ids(self) -> set[int]:
        return set(self.classes)


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and np.isfinite(v)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _parse_box(raw):
    if (not isinstance(raw, list) or len(raw) != 4
            or not all(_is_num(v) for v in raw)):
        return None, "bbox must be a list of 4 finite numbers"
    try:
        return BoxGeometry(*(float(v) for v in raw)), None
    except InputError as exc:
        return None, str(exc)


def _scan_manifest(root: Path, add) -> DatasetManifest | None:
    path = root / MANIFEST_FILE
    if not path.is_file():
        add(MANIFEST_FILE, None, "file is missing")
        return None
    try:
        raw = json.loads(path.read_text())
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        add(MANIFEST_FILE, None, f"not valid JSON: {exc}")
        return None
    if not isinstance(raw, dict):
        add(MANIFEST_FILE, None, "top-level value must be an object")
        return None

    ok = True
    version = raw.get("format_version")
    if version != FORMAT_VERSION:
        add(MANIFEST_FILE, None,
            f"unsupported format_version {version!r}, expected {FORMAT_VERSION}")
        ok = False

    classes: dict[int, str] = {}
    raw_classes = raw.get("classes")
    if not isinstance(raw_classes, list) or not raw_classes:
        add(MANIFEST_FILE, None, "classes must be a nonempty list")
        ok = False
    else:
        for entry in raw_classes:
            if (not isinstance(entry, dict) or not _is_int(entry.get("id"))
                    or entry["id"] < 0 or not isinstance(entry.get("name"), str)):
                add(MANIFEST_FILE, None, f"bad class entry: {entry!r}")
                ok = False
                continue
            if entry["id"] in classes:
                add(MANIFEST_FILE, None, f"duplicate class id {entry['id']}")
                ok = False
                continue
            classes[entry["id"]] = entry["name"]

    images: dict[str, tuple[int, int]] = {}
    raw_images = raw.get("images")
    if not isinstance(raw_images, list) or not raw_images:
        add(MANIFEST_FILE, None, "images must be a nonempty list")
        ok = False
    else:
        for entry in raw_images:
            if (not isinstance(entry, dict) or not isinstance(entry.get("id"), str)
                    or not _is_int(entry.get("width")) or entry["width"] < 1
                    or not _is_int(entry.get("height")) or entry["height"] < 1):
                add(MANIFEST_FILE, None, f"bad image entry: {entry!r}")
                ok = False
                continue
            if entry["id"] in images:
                add(MANIFEST_FILE, None, f"duplicate image id {entry['id']!r}")
                ok = False
                continue
            images[entry["id"]] = (entry["width"], entry["height"])

    act = raw.get("activations")
    if not isinstance(act, dict):
        add(MANIFEST_FILE, None, "activations section missing or not an object")
        return None
    mode = act.get("mode")
    if mode not in ("vector", "map"):
        add(MANIFEST_FILE, None, f"activations.mode must be 'vector' or 'map', got {mode!r}")
        return None
    layer_count = act.get("layer_count")
    if not _is_int(layer_count) or layer_count < 1:
        add(MANIFEST_FILE, None, f"activations.layer_count must be an int >= 1, got {layer_count!r}")
        ok = False
        layer_count = 1

    layer_lengths = None
    maps = None
    map_reduce = "cell"
    if mode == "vector":
        layer_lengths = act.get("layer_lengths")
        if (not isinstance(layer_lengths, list) or len(layer_lengths) != layer_count
                or not all(_is_int(v) and v >= 1 for v in layer_lengths)):
            add(MANIFEST_FILE, None,
                "activations.layer_lengths must list one positive int per layer")
            ok = False
            layer_lengths = None
    else:
        map_reduce = act.get("map_reduce", "cell")
        if map_reduce not in ("cell", "channel_mean"):
            add(MANIFEST_FILE, None,
                f"activations.map_reduce must be 'cell' or 'channel_mean', got {map_reduce!r}")
            ok = False
            map_reduce = "cell"
        raw_maps = act.get("maps")
        if not isinstance(raw_maps, list):
            add(MANIFEST_FILE, None, "activations.maps must be a list in map mode")
            ok = False
        else:
            maps = []
            for entry in raw_maps:
                good = (isinstance(entry, dict)
                        and isinstance(entry.get("image_id"), str)
                        and _is_int(entry.get("layer"))
                        and 0 <= entry["layer"] < layer_count
                        and _is_int(entry.get("offset")) and entry["offset"] >= 0
                        and entry["offset"] % 4 == 0
                        and isinstance(entry.get("dims"), list)
                        and len(entry["dims"]) == 3
                        and all(_is_int(v) and v >= 1 for v in entry["dims"]))
                if not good:
                    add(MANIFEST_FILE, None, f"bad map entry: {entry!r}")
                    ok = False
                    continue
                if entry["image_id"] not in images:
                    add(MANIFEST_FILE, None,
                        f"map entry references unlisted image {entry['image_id']!r}")
                    ok = False
                    continue
                maps.append(MapEntry(entry["image_id"], entry["layer"],
                                     entry["offset"], tuple(entry["dims"])))

    if not ok:
        return None
    return DatasetManifest(
        format_version=FORMAT_VERSION,
        classes=classes,
        images=images,
        mode=mode,
        layer_count=layer_count,
        layer_lengths=layer_lengths,
        maps=maps,
        map_reduce=map_reduce,
    )


def _scan_maps_blob(root: Path, manifest: DatasetManifest, add) -> None:
    path = root / MAPS_FILE
    if not manifest.maps:
        return
    if not path.is_file():
        add(MAPS_FILE, None, "file is missing but the manifest lists feature maps")
        return
    size = path.stat().st_size
    with open(path, "rb") as fh:
        for entry in manifest.maps:
            if entry.offset + 12 > size:
                add(MAPS_FILE, None,
                    f"map header at byte {entry.offset} exceeds file size {size}")
                continue
            fh.seek(entry.offset)
            w, h, c = struct.unpack("<III", fh.read(12))
            if (w, h, c) != entry.dims:
                add(MAPS_FILE, None,
                    f"map header at byte {entry.offset} is {(w, h, c)}, "
                    f"manifest says {entry.dims}")
                continue
            end = entry.offset + 12 + 4 * entry.element_count
            if end > size:
                add(MAPS_FILE, None,
                    f"map data at byte {entry.offset} ends at {end}, "
                    f"past file size {size}")


def _read_lines(path: Path, add) -> list[str] | None:
    try:
        text = path.read_bytes().decode("utf-8")
    except UnicodeDecodeError as exc:
        add(path.name, None, f"not valid UTF-8: {exc}")
        return None
    return text.splitlines()


def _scan_annotations(root: Path, manifest: DatasetManifest, add):
    path = root / ANNOTATIONS_FILE
    records: list[GroundTruthRecord] = []
    if not path.is_file():
        add(ANNOTATIONS_FILE, None, "file is missing")
        return records
    lines = _read_lines(path, add)
    if lines is None:
        return records
    seen: set[str] = set()
    known_ids = manifest.class_ids()
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            add(ANNOTATIONS_FILE, lineno, f"not valid JSON: {exc}")
            continue
        if not isinstance(obj, dict):
            add(ANNOTATIONS_FILE, lineno, "record must be an object")
            continue
        image_id = obj.get("image_id")
        gt_id = obj.get("gt_id")
        class_id = obj.get("class_id")
        known = obj.get("known")
        if not isinstance(image_id, str) or image_id not in manifest.images:
            add(ANNOTATIONS_FILE, lineno, f"unknown or missing image_id {image_id!r}")
            continue
        if not isinstance(gt_id, str):
            add(ANNOTATIONS_FILE, lineno, "gt_id must be a string")
            continue
        if gt_id in seen:
            add(ANNOTATIONS_FILE, lineno, f"duplicate gt_id {gt_id!r}")
            continue
        box, err = _parse_box(obj.get("bbox"))
        if err:
            add(ANNOTATIONS_FILE, lineno, err)
            continue
        if not _is_int(class_id) or not isinstance(known, bool):
            add(ANNOTATIONS_FILE, lineno, "class_id must be an int and known a bool")
            continue
        if known and class_id not in known_ids:
            add(ANNOTATIONS_FILE, lineno,
                f"known ground truth has class {class_id} outside the known set")
            continue
        if not known and class_id in known_ids:
            add(ANNOTATIONS_FILE, lineno,
                f"unknown ground truth has class {class_id} inside the known set")
            continue
        seen.add(gt_id)
        records.append(GroundTruthRecord(image_id, gt_id, box, class_id, known))
    return records


def _scan_detections(root: Path, manifest: DatasetManifest, add):
    path = root / DETECTIONS_FILE
    records: list[DetectionRecord] = []
    if not path.is_file():
        add(DETECTIONS_FILE, None, "file is missing")
        return records

    # a missing blob is reported once by the caller; locator bounds are
    # simply skipped in that case
    blob_path = root / BLOB_FILE
    blob_size = blob_path.stat().st_size if blob_path.is_file() else None
    map_index: dict[tuple[str, int, int], MapEntry] = {}
    if manifest.maps is not None:
        map_index = {(m.image_id, m.layer, m.offset): m for m in manifest.maps}

    lines = _read_lines(path, add)
    if lines is None:
        return records
    n_classes = len(manifest.classes)
    known_ids = manifest.class_ids()
    seen: set[str] = set()
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            add(DETECTIONS_FILE, lineno, f"not valid JSON: {exc}")
            continue
        if not isinstance(obj, dict):
            add(DETECTIONS_FILE, lineno, "record must be an object")
            continue

        det_id = obj.get("det_id")
        if not isinstance(det_id, str):
            add(DETECTIONS_FILE, lineno, "det_id must be a string")
            continue
        if det_id in seen:
            add(DETECTIONS_FILE, lineno, f"duplicate det_id {det_id!r}")
            continue
        image_id = obj.get("image_id")
        if not isinstance(image_id, str) or image_id not in manifest.images:
            add(DETECTIONS_FILE, lineno, f"unknown or missing image_id {image_id!r}")
            continue
        box, err = _parse_box(obj.get("bbox"))
        if err:
            add(DETECTIONS_FILE, lineno, err)
            continue
        label = obj.get("label")
        if not _is_int(label) or label not in known_ids:
            add(DETECTIONS_FILE, lineno,
                f"label {label!r} is not a known class id")
            continue
        score = obj.get("score")
        if not _is_num(score) or not 0.0 <= score <= 1.0:
            add(DETECTIONS_FILE, lineno, f"score must lie in [0, 1], got {score!r}")
            continue

        softmax = obj.get("softmax")
        if softmax is not None:
            if (not isinstance(softmax, list) or len(softmax) != n_classes
                    or not all(_is_num(v) for v in softmax)):
                add(DETECTIONS_FILE, lineno,
                    f"softmax must list one probability per known class ({n_classes})")
                continue
            if abs(max(softmax) - score) > 1e-9:
                add(DETECTIONS_FILE, lineno,
                    "score must equal max(softmax)")
                continue
        logits = obj.get("logits")
        if logits is not None:
            if (not isinstance(logits, list) or len(logits) != n_classes
                    or not all(_is_num(v) for v in logits)):
                add(DETECTIONS_FILE, lineno,
                    f"logits must list one finite value per known class ({n_classes})")
                continue

        offset = obj.get("act_offset")
        count = obj.get("act_count")
        layer = obj.get("layer")
        if not _is_int(offset) or offset < 0 or offset % 4 != 0:
            add(DETECTIONS_FILE, lineno,
                f"act_offset must be a non-negative 4-byte-aligned int, got {offset!r}")
            continue
        if not _is_int(count) or count < 1:
            add(DETECTIONS_FILE, lineno, f"act_count must be an int >= 1, got {count!r}")
            continue
        if not _is_int(layer) or not 0 <= layer < manifest.layer_count:
            add(DETECTIONS_FILE, lineno,
                f"layer {layer!r} outside [0, {manifest.layer_count})")
            continue

        if manifest.mode == "vector":
            expected = (manifest.layer_lengths[layer]
                        if manifest.layer_lengths else None)
            if expected is not None and count != expected:
                add(DETECTIONS_FILE, lineno,
                    f"detection {det_id}: act_count {count} does not match "
                    f"layer {layer} length {expected}")
                continue
            if blob_size is not None and offset + 4 * count > blob_size:
                add(DETECTIONS_FILE, lineno,
                    f"detection {det_id}: activation range "
                    f"[{offset}, {offset + 4 * count}) exceeds blob size {blob_size}")
                continue
        else:
            entry = map_index.get((image_id, layer, offset))
            if entry is None:
                add(DETECTIONS_FILE, lineno,
                    f"detection {det_id}: no manifest feature map for image "
                    f"{image_id!r}, layer {layer}, offset {offset}")
                continue
            if entry.element_count != count:
                add(DETECTIONS_FILE, lineno,
                    f"detection {det_id}: act_count {count} does not match "
                    f"map dims {entry.dims}")
                continue

        seen.add(det_id)
        records.append(DetectionRecord(
            image_id=image_id,
            det_id=det_id,
            box=box,
            label=label,
            score=float(score),
            softmax=None if softmax is None else np.asarray(softmax, dtype=np.float64),
            logits=None if logits is None else np.asarray(logits, dtype=np.float64),
            act_offset=offset,
            act_count=count,
            layer=layer,
        ))
    return records


def _scan(root: Path):
    findings: list[Finding] = []

    def add(file, line, message):
        findings.append(Finding(file, line, message))

    if not root.is_dir():
        add(str(root), None, "dataset directory does not exist")
        return findings, None, [], []

    manifest = _scan_manifest(root, add)
    if manifest is None:
        return findings, None, [], []
    if not (root / BLOB_FILE).is_file():
        add(BLOB_FILE, None, "file is missing")
    if manifest.mode == "map":
        _scan_maps_blob(root, manifest, add)
    ground_truths = _scan_annotations(root, manifest, add)
    detections = _scan_detections(root, manifest, add)
    return findings, manifest, detections, ground_truths


# ---------------------------------------------------------------------------
# loading


class ActivationSource:
    """Lazy per-detection activation access through blob locators."""

    def __init__(self, root: Path, manifest: DatasetManifest):
        self._root = Path(root)
        self._manifest = manifest
        self._vectors: np.memmap | np.ndarray | None = None
        self._map_cache: dict[int, np.ndarray] = {}

    def _vector_blob(self):
        if self._vectors is None:
            path = self._root / BLOB_FILE
            if path.stat().st_size == 0:
                self._vectors = np.empty(0, dtype=np.dtype("<f4"))
            else:
                self._vectors = np.memmap(path, dtype=np.dtype("<f4"), mode="r")
        return self._vectors

    def feature_map_for(self, det: DetectionRecord) -> FeatureMap:
        if self._manifest.mode != "map":
            raise DataError("dataset is not in map mode")
        values = self._map_cache.get(det.act_offset)
        if values is None:
            with open(self._root / MAPS_FILE, "rb") as fh:
                fh.seek(det.act_offset)
                w, h, c = struct.unpack("<III", fh.read(12))
                raw = fh.read(4 * w * h * c)
            values = np.frombuffer(raw, dtype=np.dtype("<f4")).astype(np.float64)
            values = values.reshape(h, w, c)
            self._map_cache[det.act_offset] = values
        img_w, img_h = self._manifest.images[det.image_id]
        return FeatureMap(values=values, image_width=img_w, image_height=img_h)

    def vector_for(self, det: DetectionRecord) -> np.ndarray:
        """The detection's activation vector, per the manifest layout."""
        if self._manifest.mode == "vector":
            blob = self._vector_blob()
            start = det.act_offset // 4
            return np.asarray(blob[start:start + det.act_count], dtype=np.float64)
        fmap = self.feature_map_for(det)
        if self._manifest.map_reduce == "channel_mean":
            return channel_mean_flatten(fmap)
        return extract_conv_pattern(fmap, map_box_to_cell(det.box, fmap))


@dataclass
class Dataset:
    root: Path
    manifest: DatasetManifest
    detections: list[DetectionRecord]
    ground_truths: list[GroundTruthRecord]
    activations: ActivationSource

    def get_activation(self, det: DetectionRecord) -> np.ndarray:
        return self.activations.vector_for(det)

    def fingerprint(self) -> str:
        return dataset_fingerprint(self.root)


def validate_dataset(path) -> ValidationReport:
    """Exhaustively check a dataset directory; problems become findings."""
    findings, *_ = _scan(Path(path))
    return ValidationReport(findings=findings)


def load_dataset(path) -> Dataset:
    """Load and validate a dataset directory.

    Raises DataError (with file/line diagnostics) on the first problem the
    validator would report, so validation and loading accept exactly the
    same inputs.
    """
    root = Path(path)
    findings, manifest, detections, ground_truths = _scan(root)
    if findings:
        raise DataError(str(findings[0]))
    return Dataset(
        root=root,
        manifest=manifest,
        detections=detections,
        ground_truths=ground_truths,
        activations=ActivationSource(root, manifest),
    )


def dataset_fingerprint(path) -> str:
    """SHA-256 over the dataset files, in fixed order."""
    root = Path(path)
    digest = hashlib.sha256()
    for name in DATASET_FILES:
        file = root / name
        if not file.is_file():
            continue
        digest.update(name.encode())
        digest.update(struct.pack("<Q", file.stat().st_size))
        with open(file, "rb") as fh:
            for chunk in iter(lambda: fh.read(1 << 20), b""):
                digest.update(chunk)
    return digest.hexdigest()


# ---------------------------------------------------------------------------
# writers (used by the synthetic generator, tests, and exporters)


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def write_manifest(root, manifest: dict) -> None:
    (Path(root) / MANIFEST_FILE).write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n"
    )


def write_jsonl(path, rows) -> None:
    with open(path, "w") as fh:
        for row in rows:
            fh.write(canonical_json(row) + "\n")


def write_blob(path, values) -> None:
    arr = np.ascontiguousarray(values, dtype=np.dtype("<f4"))
    Path(path).write_bytes(arr.tobytes())


def write_feature_maps(path, maps) -> list[int]:
    """Write (H, W, C) arrays, each prefixed by W, H, C; return byte offsets."""
    offsets = []
    with open(path, "wb") as fh:
        for values in maps:
            arr = np.ascontiguousarray(values, dtype=np.dtype("<f4"))
            h, w, c = arr.shape
            offsets.append(fh.tell())
            fh.write(struct.pack("<III", w, h, c))
            fh.write(arr.tobytes())
    return offsets


# ---------------------------------------------------------------------------
# store persistence


def save_store(path, store: PatternStore) -> None:
    """Write a frozen pattern store; the round-trip is bit-exact."""
    if not store.frozen:
        raise StateError("store must be frozen before saving")
    if store.pattern_length is None:
        raise StateError("store holds no patterns and has no pattern length")
    cfg = store.config
    class_ids = store.class_ids()
    for cid in class_ids:
        if not 0 <= cid < 2 ** 32:
            raise InputError(f"class id {cid} does not fit the store format")

    out = bytearray()
    out += STORE_MAGIC
    out += struct.pack("<III", STORE_VERSION, store.pattern_length, len(class_ids))
    out += struct.pack("<iddd", cfg.layer_index, cfg.percentile,
                       cfg.train_iou, cfg.softmax_threshold)
    for cid in class_ids:
        patterns = store.patterns(cid)
        out += struct.pack("<IQ", cid, len(patterns))
        for pattern in patterns:
            out += pattern.words.astype(np.dtype("<u8")).tobytes()
    Path(path).write_bytes(bytes(out))


def load_store(path) -> PatternStore:
    """Read a pattern store written by :func:`save_store`; returns it frozen."""
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read store file {path}: {exc}") from exc

    pos = 0

    def take(n: int, what: str) -> bytes:
        nonlocal pos
        if pos + n > len(data):
            raise DataError(f"truncated store file: ran out of bytes reading {what}")
        chunk = data[pos:pos + n]
        pos += n
        return chunk

    if take(4, "magic") != STORE_MAGIC:
        raise DataError(f"bad magic in store file {path}")
    version, pattern_length, class_count = struct.unpack("<III", take(12, "header"))
    if version != STORE_VERSION:
        raise DataError(f"unsupported store version {version}")
    if pattern_length < 1:
        raise DataError(f"invalid pattern length {pattern_length}")
    layer_index, percentile, train_iou, softmax_threshold = struct.unpack(
        "<iddd", take(28, "config"))
    config = StoreConfig(layer_index, percentile, train_iou, softmax_threshold)

    store = PatternStore(pattern_length=pattern_length, config=config)
    width = words_for_length(pattern_length)
    for _ in range(class_count):
        class_id, count = struct.unpack("<IQ", take(12, "class header"))
        store.ensure_class(class_id)
        if count:
            raw = take(8 * width * count, f"class {class_id} patterns")
            words = np.frombuffer(raw, dtype=np.dtype("<u8")).reshape(count, width)
            for row in words:
                try:
                    store.insert(class_id, BinaryPattern(row, pattern_length))
                except (InputError,) as exc:
                    raise DataError(f"corrupt pattern data: {exc}") from exc
    if pos != len(data):
        raise DataError(f"trailing bytes in store file {path}")
    return store.freeze()
