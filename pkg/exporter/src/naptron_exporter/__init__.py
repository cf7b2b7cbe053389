"""Detector-side exporter for the naptron evaluation pipeline."""

from .export import (
    ExportSummary,
    export,
    load_ground_truth,
    load_image_dir,
    synthetic_images,
)
from .models import ModelBundle, build_model

__version__ = "0.1.0"
