"""Evaluation report assembly and deterministic serialization.

A report directory holds ``report.txt`` (key/value plus tables),
``report.json`` (canonical machine form, consumed by ``compare``), and the
CSV tables ``metrics.csv`` (``threshold,class,auroc,fpr95,id_count,
ood_count``), ``curve.csv`` (``fp_count,tpr``) and ``scatter.csv``
(``softmax,uncertainty,label``).  Nothing written here depends on wall
time, so identical inputs produce byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, DataError
from .metrics import PerClassReport, SweepRow
from .scoring import ScoringFailure

METRICS_CSV_HEADER = "threshold,class,auroc,fpr95,id_count,ood_count"
CURVE_CSV_HEADER = "fp_count,tpr"
SCATTER_CSV_HEADER = "softmax,uncertainty,label"

REPORT_JSON = "report.json"
REPORT_TEXT = "report.txt"
METRICS_CSV = "metrics.csv"
CURVE_CSV = "curve.csv"
SCATTER_CSV = "scatter.csv"


def _fmt(value) -> str:
    """CSV cell: full-precision repr for floats, empty for undefined."""
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass
class EvalReport:
    method: str
    dataset_fingerprint: str
    params: dict
    counts: dict
    class_report: PerClassReport | None
    curve: list[tuple[int, float]]
    fp_cap: int
    auc_limited: float | None
    scatter: list[tuple[float, float, str]] = field(default_factory=list)
    failures: list[ScoringFailure] = field(default_factory=list)

    @property
    def macro_auroc(self) -> float | None:
        return None if self.class_report is None else self.class_report.macro_auroc

    @property
    def macro_fpr95(self) -> float | None:
        return None if self.class_report is None else self.class_report.macro_fpr95

    def to_json_dict(self) -> dict:
        per_class = {}
        excluded = {}
        if self.class_report is not None:
            per_class = {
                str(c): {
                    "auroc": m.auroc,
                    "fpr95": m.fpr95,
                    "id_count": m.id_count,
                    "ood_count": m.ood_count,
                }
                for c, m in self.class_report.per_class.items()
            }
            excluded = {str(c): r for c, r in self.class_report.excluded.items()}
        return {
            "method": self.method,
            "dataset_fingerprint": self.dataset_fingerprint,
            "params": self.params,
            "counts": self.counts,
            "macro": {"auroc": self.macro_auroc, "fpr95": self.macro_fpr95},
            "per_class": per_class,
            "excluded_classes": excluded,
            "curve": [[fp, tpr] for fp, tpr in self.curve],
            "fp_cap": self.fp_cap,
            "auc_limited": self.auc_limited,
            "scoring_failures": [
                {"det_id": f.det_id, "reason": f.reason} for f in self.failures
            ],
        }


def metrics_csv_lines(
    threshold: float,
    report: PerClassReport | None,
    id_count: int,
    ood_count: int,
) -> list[str]:
    """CSV body rows for one threshold: per-class rows then a macro row.

    Undefined metrics are emitted as empty cells, never as zeros.
    """
    lines = []
    if report is None:
        lines.append(f"{_fmt(threshold)},macro,,,{id_count},{ood_count}")
        return lines
    for class_id in sorted(report.per_class):
        m = report.per_class[class_id]
        lines.append(
            f"{_fmt(threshold)},{class_id},{_fmt(m.auroc)},{_fmt(m.fpr95)},"
            f"{m.id_count},{m.ood_count}"
        )
    lines.append(
        f"{_fmt(threshold)},macro,{_fmt(report.macro_auroc)},"
        f"{_fmt(report.macro_fpr95)},{report.id_total},{report.ood_total}"
    )
    return lines


def sweep_csv_text(rows: list[SweepRow]) -> str:
    lines = [METRICS_CSV_HEADER]
    for row in rows:
        lines.extend(
            metrics_csv_lines(row.threshold, row.report, row.id_count, row.ood_count)
        )
    return "\n".join(lines) + "\n"


def render_text(report: EvalReport) -> str:
    lines = [
        f"method: {report.method}",
        f"dataset_fingerprint: {report.dataset_fingerprint}",
    ]
    for key in sorted(report.params):
        if report.params[key] is not None:  # inapplicable knobs stay out
            lines.append(f"{key}: {_fmt(report.params[key])}")
    lines.append("counts:")
    for key in sorted(report.counts):
        lines.append(f"  {key}: {report.counts[key]}")
    lines.append(f"macro_auroc: {_fmt(report.macro_auroc) or 'undefined'}")
    lines.append(f"macro_fpr95: {_fmt(report.macro_fpr95) or 'undefined'}")
    lines.append(f"auc_limited: {_fmt(report.auc_limited) or 'undefined'}")
    lines.append(f"fp_cap: {report.fp_cap}")

    if report.class_report is not None and report.class_report.per_class:
        lines.append("per_class:")
        lines.append("  class  auroc  fpr95  id_count  ood_count")
        for class_id in sorted(report.class_report.per_class):
            m = report.class_report.per_class[class_id]
            lines.append(
                f"  {class_id}  {m.auroc:.6f}  {m.fpr95:.6f}  "
                f"{m.id_count}  {m.ood_count}"
            )
    if report.class_report is not None and report.class_report.excluded:
        lines.append("excluded_classes:")
        for class_id in sorted(report.class_report.excluded):
            lines.append(f"  {class_id}: {report.class_report.excluded[class_id]}")
    lines.append(f"scoring_failures: {len(report.failures)}")
    for failure in report.failures:
        lines.append(f"  {failure.det_id}: {failure.reason}")
    return "\n".join(lines) + "\n"


def write_report(report: EvalReport, out_dir) -> Path:
    """Write the full report file set into ``out_dir`` (created if needed)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    (out / REPORT_JSON).write_text(
        json.dumps(report.to_json_dict(), sort_keys=True, indent=2) + "\n"
    )
    (out / REPORT_TEXT).write_text(render_text(report))

    nms = report.params.get("nms_threshold", 0.0)
    counts = report.counts
    body = metrics_csv_lines(
        nms, report.class_report, counts.get("id_tp", 0), counts.get("ood", 0)
    )
    (out / METRICS_CSV).write_text("\n".join([METRICS_CSV_HEADER] + body) + "\n")

    curve_lines = [CURVE_CSV_HEADER]
    curve_lines.extend(f"{fp},{_fmt(tpr)}" for fp, tpr in report.curve)
    (out / CURVE_CSV).write_text("\n".join(curve_lines) + "\n")

    scatter_lines = [SCATTER_CSV_HEADER]
    scatter_lines.extend(
        f"{_fmt(softmax)},{_fmt(value)},{label}"
        for softmax, value, label in report.scatter
    )
    (out / SCATTER_CSV).write_text("\n".join(scatter_lines) + "\n")
    return out


def read_report(report_dir) -> dict:
    path = Path(report_dir) / REPORT_JSON
    if not path.is_file():
        raise DataError(f"no {REPORT_JSON} in {report_dir}")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"{path} is not valid JSON: {exc}") from exc


def compare_reports(a: dict, b: dict) -> dict:
    """Metric deltas A minus B; refuses reports from different datasets."""
    fp_a = a.get("dataset_fingerprint")
    fp_b = b.get("dataset_fingerprint")
    if fp_a != fp_b:
        raise ConfigError(
            "reports come from different datasets "
            f"(fingerprints {fp_a!r} vs {fp_b!r}); refusing to compare"
        )

    def delta(path_a, path_b):
        if path_a is None or path_b is None:
            return None
        return path_a - path_b

    return {
        "dataset_fingerprint": fp_a,
        "method_a": a.get("method"),
        "method_b": b.get("method"),
        "delta_auc": delta(a.get("auc_limited"), b.get("auc_limited")),
        "delta_macro_auroc": delta(
            a.get("macro", {}).get("auroc"), b.get("macro", {}).get("auroc")
        ),
        "delta_macro_fpr95": delta(
            a.get("macro", {}).get("fpr95"), b.get("macro", {}).get("fpr95")
        ),
    }


def render_comparison(deltas: dict) -> str:
    lines = [
        f"dataset_fingerprint: {deltas['dataset_fingerprint']}",
        f"method_a: {deltas['method_a']}",
        f"method_b: {deltas['method_b']}",
    ]
    for key in ("delta_auc", "delta_macro_auroc", "delta_macro_fpr95"):
        value = deltas[key]
        lines.append(f"{key}: {_fmt(value) if value is not None else 'undefined'}")
    return "\n".join(lines) + "\n"
