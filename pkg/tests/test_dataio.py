import json
import struct

import numpy as np
import pytest

from naptron import (
    BinaryPattern,
    PatternStore,
    StoreConfig,
    dataset_fingerprint,
    load_dataset,
    load_store,
    save_store,
    validate_dataset,
)
from naptron.dataio import (
    ANNOTATIONS_FILE,
    BLOB_FILE,
    DETECTIONS_FILE,
    MANIFEST_FILE,
    MAPS_FILE,
    write_blob,
    write_feature_maps,
    write_jsonl,
    write_manifest,
)
from naptron.errors import DataError, StateError


# ---------------------------------------------------------------------------
# dataset builders


def vector_manifest(n_images=1, length=4, classes=(0, 1)):
    return {
        "format_version": 1,
        "classes": [{"id": c, "name": f"class-{c}"} for c in classes],
        "images": [{"id": f"img-{i}", "width": 100, "height": 100}
                   for i in range(n_images)],
        "activations": {"mode": "vector", "layer_count": 1,
                        "layer_lengths": [length]},
    }


def write_vector_dataset(root, detections=None, annotations=None,
                         blob=None, manifest=None):
    root.mkdir(parents=True, exist_ok=True)
    if manifest is None:
        manifest = vector_manifest()
    if detections is None:
        detections = [{
            "image_id": "img-0", "det_id": "d0", "bbox": [1.0, 1.0, 9.0, 9.0],
            "label": 0, "score": 0.9, "act_offset": 0, "act_count": 4,
            "layer": 0,
        }]
    if annotations is None:
        annotations = [{
            "image_id": "img-0", "gt_id": "g0", "bbox": [1.0, 1.0, 9.0, 9.0],
            "class_id": 0, "known": True,
        }]
    if blob is None:
        blob = np.array([1.0, -2.0, 3.0, 0.5], dtype=np.float32)
    write_manifest(root, manifest)
    write_jsonl(root / DETECTIONS_FILE, detections)
    write_jsonl(root / ANNOTATIONS_FILE, annotations)
    write_blob(root / BLOB_FILE, blob)
    return root


def write_map_dataset(root, map_reduce="cell"):
    """1 image, one 2x2x3 feature map, one detection centered in cell (1, 0)."""
    root.mkdir(parents=True, exist_ok=True)
    values = np.arange(12, dtype=np.float32).reshape(2, 2, 3) - 5.0
    offsets = write_feature_maps(root / MAPS_FILE, [values])
    manifest = {
        "format_version": 1,
        "classes": [{"id": 0, "name": "thing"}],
        "images": [{"id": "img-0", "width": 100, "height": 100}],
        "activations": {
            "mode": "map", "layer_count": 1, "map_reduce": map_reduce,
            "maps": [{"image_id": "img-0", "layer": 0, "offset": offsets[0],
                      "dims": [2, 2, 3]}],
        },
    }
    write_manifest(root, manifest)
    write_jsonl(root / DETECTIONS_FILE, [{
        "image_id": "img-0", "det_id": "d0",
        "bbox": [70.0, 20.0, 90.0, 30.0],  # center (80, 25) -> cell (1, 0)
        "label": 0, "score": 0.8, "act_offset": offsets[0], "act_count": 12,
        "layer": 0,
    }])
    write_jsonl(root / ANNOTATIONS_FILE, [{
        "image_id": "img-0", "gt_id": "g0", "bbox": [70.0, 20.0, 90.0, 30.0],
        "class_id": 0, "known": True,
    }])
    write_blob(root / BLOB_FILE, np.empty(0, dtype=np.float32))
    return root, values


def edit_jsonl_line(path, index, mutate):
    lines = path.read_text().splitlines()
    obj = json.loads(lines[index])
    mutate(obj)
    lines[index] = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    path.write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# loading and validation


def test_minimal_dataset_loads(tmp_path):
    root = write_vector_dataset(tmp_path / "ds")
    assert validate_dataset(root).ok
    ds = load_dataset(root)
    assert len(ds.detections) == 1
    assert len(ds.ground_truths) == 1
    assert ds.manifest.layer_count == 1
    activation = ds.get_activation(ds.detections[0])
    assert activation.tolist() == [1.0, -2.0, 3.0, 0.5]


def test_dangling_locator_names_the_detection(tmp_path):
    root = write_vector_dataset(tmp_path / "ds")
    edit_jsonl_line(root / DETECTIONS_FILE, 0,
                    lambda o: o.update(act_offset=8))
    result = validate_dataset(root)
    assert not result.ok
    assert any("d0" in str(f) and "exceeds blob size" in str(f)
               for f in result.findings)
    with pytest.raises(DataError, match="d0"):
        load_dataset(root)


def test_unknown_class_in_detection(tmp_path):
    root = write_vector_dataset(tmp_path / "ds")
    edit_jsonl_line(root / DETECTIONS_FILE, 0, lambda o: o.update(label=42))
    result = validate_dataset(root)
    assert any("not a known class" in str(f) for f in result.findings)


def test_duplicate_det_id(tmp_path):
    det = {"image_id": "img-0", "det_id": "dup", "bbox": [1.0, 1.0, 9.0, 9.0],
           "label": 0, "score": 0.5, "act_offset": 0, "act_count": 4, "layer": 0}
    root = write_vector_dataset(tmp_path / "ds", detections=[det, det])
    result = validate_dataset(root)
    assert any("duplicate det_id" in str(f) for f in result.findings)


def test_truncated_blob_reports_byte_positions(tmp_path):
    root = write_vector_dataset(tmp_path / "ds")
    (root / BLOB_FILE).write_bytes(b"\x00" * 10)  # needs 16 bytes
    result = validate_dataset(root)
    assert any("[0, 16) exceeds blob size 10" in str(f) for f in result.findings)


def test_missing_files_are_findings(tmp_path):
    root = write_vector_dataset(tmp_path / "ds")
    (root / ANNOTATIONS_FILE).unlink()
    result = validate_dataset(root)
    assert any(f.file == ANNOTATIONS_FILE for f in result.findings)
    with pytest.raises(DataError):
        load_dataset(root)


def test_version_mismatch(tmp_path):
    manifest = vector_manifest()
    manifest["format_version"] = 99
    root = write_vector_dataset(tmp_path / "ds", manifest=manifest)
    result = validate_dataset(root)
    assert any("format_version" in str(f) for f in result.findings)


def test_softmax_consistency_is_checked(tmp_path):
    det = {"image_id": "img-0", "det_id": "d0", "bbox": [1.0, 1.0, 9.0, 9.0],
           "label": 0, "score": 0.9, "softmax": [0.3, 0.7],
           "act_offset": 0, "act_count": 4, "layer": 0}
    root = write_vector_dataset(tmp_path / "ds", detections=[det])
    result = validate_dataset(root)
    assert any("max(softmax)" in str(f) for f in result.findings)
    det["score"] = 0.7
    root2 = write_vector_dataset(tmp_path / "ds2", detections=[det])
    assert validate_dataset(root2).ok
    ds = load_dataset(root2)
    assert ds.detections[0].softmax.tolist() == [0.3, 0.7]


def test_unknown_gt_class_must_be_outside_known_set(tmp_path):
    root = write_vector_dataset(tmp_path / "ds")
    edit_jsonl_line(root / ANNOTATIONS_FILE, 0,
                    lambda o: o.update(known=False))
    result = validate_dataset(root)
    assert any("inside the known set" in str(f) for f in result.findings)


def test_diagnostics_carry_file_and_line(tmp_path):
    root = write_vector_dataset(tmp_path / "ds")
    path = root / DETECTIONS_FILE
    path.write_text(path.read_text() + "{broken json\n")
    result = validate_dataset(root)
    assert any(f.file == DETECTIONS_FILE and f.line == 2 for f in result.findings)


# ---------------------------------------------------------------------------
# map mode


def test_map_dataset_cell_extraction(tmp_path):
    root, values = write_map_dataset(tmp_path / "ds", map_reduce="cell")
    assert validate_dataset(root).ok
    ds = load_dataset(root)
    activation = ds.get_activation(ds.detections[0])
    # cell (w=1, h=0) of the (h, w, c) array
    assert activation.tolist() == values[0, 1, :].astype(float).tolist()


def test_map_dataset_channel_mean(tmp_path):
    root, values = write_map_dataset(tmp_path / "ds", map_reduce="channel_mean")
    ds = load_dataset(root)
    activation = ds.get_activation(ds.detections[0])
    expected = values.reshape(-1, 3).mean(axis=0)
    assert np.allclose(activation, expected, atol=1e-12)


def test_map_header_mismatch_is_a_finding(tmp_path):
    root, _ = write_map_dataset(tmp_path / "ds")
    raw = bytearray((root / MAPS_FILE).read_bytes())
    raw[0:4] = struct.pack("<I", 7)  # corrupt the W header field
    (root / MAPS_FILE).write_bytes(bytes(raw))
    result = validate_dataset(root)
    assert any("manifest says" in str(f) for f in result.findings)


def test_map_detection_must_reference_listed_map(tmp_path):
    root, _ = write_map_dataset(tmp_path / "ds")
    edit_jsonl_line(root / DETECTIONS_FILE, 0,
                    lambda o: o.update(act_offset=400))
    result = validate_dataset(root)
    assert any("no manifest feature map" in str(f) for f in result.findings)


# ---------------------------------------------------------------------------
# accept/load agreement fuzz


def _mutations():
    def set_field(file, index, key, value):
        def apply(root):
            edit_jsonl_line(root / file, index, lambda o: o.update({key: value}))
        return apply

    def truncate(file, size):
        def apply(root):
            data = (root / file).read_bytes()
            (root / file).write_bytes(data[:size])
        return apply

    def manifest_edit(mutate):
        def apply(root):
            raw = json.loads((root / MANIFEST_FILE).read_text())
            mutate(raw)
            (root / MANIFEST_FILE).write_text(json.dumps(raw, sort_keys=True))
        return apply

    return [
        lambda root: None,  # control: stays valid
        set_field(DETECTIONS_FILE, 0, "score", 1.5),
        set_field(DETECTIONS_FILE, 0, "score", 0.25),  # stays valid
        set_field(DETECTIONS_FILE, 0, "act_offset", 4),
        set_field(DETECTIONS_FILE, 0, "act_offset", 3),
        set_field(DETECTIONS_FILE, 0, "act_count", 3),
        set_field(DETECTIONS_FILE, 0, "layer", 1),
        set_field(DETECTIONS_FILE, 0, "bbox", [5.0, 5.0, 5.0, 9.0]),
        set_field(DETECTIONS_FILE, 0, "label", True),
        set_field(ANNOTATIONS_FILE, 0, "known", "yes"),
        set_field(ANNOTATIONS_FILE, 0, "class_id", 7),
        set_field(ANNOTATIONS_FILE, 0, "bbox", [1.0, 1.0, 9.0, 9.0]),  # valid
        truncate(BLOB_FILE, 10),
        truncate(MANIFEST_FILE, 25),
        manifest_edit(lambda m: m.pop("images")),
        manifest_edit(lambda m: m["classes"].append({"id": 0, "name": "dup"})),
        manifest_edit(lambda m: m["activations"].update(mode="tensor")),
        manifest_edit(lambda m: m["activations"].update(layer_lengths=[9])),
        manifest_edit(lambda m: m["images"].append(
            {"id": "img-9", "width": 5, "height": 5})),  # valid
    ]


def _agreement(root):
    valid = validate_dataset(root).ok
    try:
        load_dataset(root)
        loaded = True
    except DataError:
        loaded = False
    return valid, loaded


@pytest.mark.parametrize("index", range(len(_mutations())))
def test_validate_accepts_exactly_what_load_accepts(tmp_path, index):
    root = write_vector_dataset(tmp_path / "ds")
    _mutations()[index](root)
    valid, loaded = _agreement(root)
    assert valid == loaded


def test_validate_load_agreement_under_random_byte_flips(tmp_path, rng):
    targets = [MANIFEST_FILE, DETECTIONS_FILE, ANNOTATIONS_FILE, BLOB_FILE]
    for trial in range(40):
        root = write_vector_dataset(tmp_path / f"ds-{trial}")
        victim = root / targets[trial % len(targets)]
        raw = bytearray(victim.read_bytes())
        pos = int(rng.integers(0, len(raw)))
        raw[pos] = int(rng.integers(0, 256))
        victim.write_bytes(bytes(raw))
        valid, loaded = _agreement(root)
        assert valid == loaded, f"divergence on {victim.name} byte {pos}"


# ---------------------------------------------------------------------------
# fingerprints


def test_fingerprint_tracks_content(tmp_path):
    root_a = write_vector_dataset(tmp_path / "a")
    root_b = write_vector_dataset(tmp_path / "b")
    assert dataset_fingerprint(root_a) == dataset_fingerprint(root_b)
    edit_jsonl_line(root_b / DETECTIONS_FILE, 0, lambda o: o.update(score=0.5))
    assert dataset_fingerprint(root_a) != dataset_fingerprint(root_b)


# ---------------------------------------------------------------------------
# store persistence


def random_store(rng, classes=4, length=150, empty_class=True):
    store = PatternStore(config=StoreConfig(layer_index=2, percentile=0.45,
                                            train_iou=0.7, softmax_threshold=0.3))
    for c in range(classes):
        store.ensure_class(c)
        for _ in range(int(rng.integers(1, 30))):
            bits = rng.integers(0, 2, size=length, dtype=np.uint8)
            store.insert(c, BinaryPattern.from_bits(bits))
    if empty_class:
        store.ensure_class(classes + 3)
    return store.freeze()


def test_store_round_trip_is_bit_exact(tmp_path, rng):
    for i in range(5):
        store = random_store(rng, length=int(rng.integers(1, 300)))
        path = tmp_path / f"store-{i}.naps"
        save_store(path, store)
        loaded = load_store(path)
        assert loaded == store
        assert loaded.config == store.config
        path2 = tmp_path / f"store-{i}-again.naps"
        save_store(path2, loaded)
        assert path.read_bytes() == path2.read_bytes()


def test_store_round_trips_empty_class(tmp_path, rng):
    store = random_store(rng, empty_class=True)
    path = tmp_path / "store.naps"
    save_store(path, store)
    loaded = load_store(path)
    assert loaded.count(7) == 0
    assert 7 in loaded.class_ids()


def test_store_bad_magic(tmp_path, rng):
    path = tmp_path / "store.naps"
    save_store(path, random_store(rng))
    raw = bytearray(path.read_bytes())
    raw[0:4] = b"XXXX"
    path.write_bytes(bytes(raw))
    with pytest.raises(DataError, match="magic"):
        load_store(path)


def test_store_truncation(tmp_path, rng):
    path = tmp_path / "store.naps"
    save_store(path, random_store(rng))
    data = path.read_bytes()
    path.write_bytes(data[: len(data) - 5])
    with pytest.raises(DataError, match="truncated"):
        load_store(path)
    path.write_bytes(data + b"\x00")
    with pytest.raises(DataError, match="trailing"):
        load_store(path)


def test_store_requires_frozen(tmp_path, rng):
    store = PatternStore()
    store.insert(0, BinaryPattern.from_bits([1, 0]))
    with pytest.raises(StateError):
        save_store(tmp_path / "s.naps", store)
