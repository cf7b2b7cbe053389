import numpy as np
import pytest

from naptron import (
    Label,
    Method,
    SynthConfig,
    binarize,
    build_store_from_dataset,
    evaluate_dataset,
    flip_signs,
    generate,
    hamming,
    label_predictions,
    load_dataset,
    prototype_activations,
    validate_dataset,
)
from naptron.errors import ConfigError


def tree_bytes(root):
    return {p.relative_to(root): p.read_bytes()
            for p in sorted(root.rglob("*")) if p.is_file()}


def test_same_seed_gives_byte_identical_datasets(tmp_path):
    config = SynthConfig(seed=11, class_count=2, train_per_class=5,
                         test_id=8, test_ood=8, fp=4)
    generate(config, tmp_path / "a")
    generate(config, tmp_path / "b")
    assert tree_bytes(tmp_path / "a") == tree_bytes(tmp_path / "b")
    generate(SynthConfig(seed=12, class_count=2, train_per_class=5,
                         test_id=8, test_ood=8, fp=4), tmp_path / "c")
    assert tree_bytes(tmp_path / "a") != tree_bytes(tmp_path / "c")


def test_generated_datasets_validate_cleanly(synth_pair):
    _, train_dir, test_dir = synth_pair
    assert validate_dataset(train_dir).ok
    assert validate_dataset(test_dir).ok


def test_labeling_reproduces_generator_intent(synth_pair):
    _, _, test_dir = synth_pair
    ds = load_dataset(test_dir)
    labels = label_predictions(ds.detections, ds.ground_truths, 0.5)
    intent = {"id": Label.ID_TP, "ood": Label.OOD, "fp": Label.FP_BACKGROUND}
    for det, lab in zip(ds.detections, labels):
        prefix = det.det_id.split("-")[0]
        assert lab.kind is intent[prefix], det.det_id


def test_zero_flip_rates_give_zero_min_distance(synth_pair):
    config, train_dir, test_dir = synth_pair  # rho_train = rho_id = 0
    train = load_dataset(train_dir)
    store = build_store_from_dataset(train)
    test = load_dataset(test_dir)
    report = evaluate_dataset(test, Method.NAPTRON_MIN, store, nms_threshold=0.0)
    id_rows = [row for row in report.scatter if row[2] == "id_tp"]
    assert len(id_rows) == config.test_id
    assert all(value == 0.0 for _, value, _ in id_rows)


def test_flip_distance_matches_binomial_mean(rng):
    length, rate, draws = 256, 0.2, 400
    proto = prototype_activations(rng, 1, length)[0]
    base = binarize(proto)
    distances = [
        hamming(base, binarize(flip_signs(proto, rate, rng)))
        for _ in range(draws)
    ]
    sigma_mean = np.sqrt(length * rate * (1 - rate) / draws)
    assert abs(np.mean(distances) - rate * length) <= 3 * sigma_mean


def test_unsatisfiable_geometry_is_config_error(tmp_path):
    config = SynthConfig(boxes_per_image=10_000)
    with pytest.raises(ConfigError, match="unsatisfiable"):
        generate(config, tmp_path / "x")
    with pytest.raises(ConfigError):
        SynthConfig(rho_ood=1.5).validate()
    with pytest.raises(ConfigError):
        SynthConfig(image_size=10).validate()


def test_separation_improves_with_ood_flip_rate(tmp_path):
    # light version of the acceptance sweep: two rates, same seed
    macros = []
    for rate in (0.05, 0.4):
        config = SynthConfig(seed=5, class_count=3, pattern_length=128,
                             train_per_class=20, test_id=45, test_ood=45,
                             fp=0, rho_train=0.02, rho_id=0.02, rho_ood=rate)
        train_dir, test_dir = generate(config, tmp_path / f"rate-{rate}")
        store = build_store_from_dataset(load_dataset(train_dir))
        report = evaluate_dataset(load_dataset(test_dir), Method.NAPTRON_MIN,
                                  store, nms_threshold=0.0)
        macros.append(report.macro_auroc)
    assert macros[0] <= macros[1]
    assert macros[1] > 0.9
