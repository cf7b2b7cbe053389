"""Uncertainty estimation for object-detector predictions from binary
neuron-activation patterns, with an OOD evaluation pipeline.

The core idea: a ReLU layer's activations for one predicted box reduce to a
binary pattern (which units fired); patterns from training true positives
are stored per class, and a test detection's uncertainty is its Hamming
distance to the nearest (or the average over) stored patterns of its
predicted class.  The rest of the package labels detections against ground
truth, computes OOD metrics and detection-quality curves, defines the
dataset interchange format, and generates synthetic datasets for testing.
"""

from .errors import (
    BuildError,
    ConfigError,
    DataError,
    DimensionError,
    EmptyClassError,
    InputError,
    NaptronError,
    StateError,
    UndefinedMetricError,
)
from .extraction import (
    BoxGeometry,
    FeatureMap,
    channel_mean_flatten,
    extract_conv_pattern,
    extract_fc_pattern,
    map_box_to_cell,
)
from .labeling import (
    DetectionRecord,
    GroundTruthRecord,
    Label,
    SampleLabel,
    iou,
    label_predictions,
)
from .metrics import (
    ClassMetrics,
    PerClassReport,
    ScoredSample,
    SweepRow,
    auc_limited,
    auroc,
    evaluate_classes,
    fpr_at_tpr,
    nms_sweep,
    per_class_macro,
    scatter_rows,
    tpr_fp_curve,
)
from .patterns import (
    BinaryPattern,
    PatternStore,
    StoreConfig,
    binarize,
    hamming,
)
from .dataio import (
    Dataset,
    DatasetManifest,
    dataset_fingerprint,
    load_dataset,
    load_store,
    save_store,
    validate_dataset,
)
from .pipeline import (
    build_store_from_dataset,
    evaluate_dataset,
    sweep_dataset,
)
from .report import EvalReport, compare_reports, read_report, write_report
from .scoring import (
    Method,
    ScoringConfig,
    ScoringFailure,
    build_store,
    score_detections,
    score_energy,
    score_msp,
    score_naptron,
)
from .synth import SynthConfig, flip_signs, generate, prototype_activations

__version__ = "0.1.0"
