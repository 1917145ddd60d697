"""Point-wise and threshold-free evaluation metrics plus aggregation.

The threshold-free metrics are a deterministic, self-contained variant
of volume-under-the-surface scoring: ground-truth spans are widened into
continuous labels with a sqrt-decay buffer, a soft-weighted ROC / PR
area is computed per buffer width, and the volume is the trapezoidal
mean of those areas over the width sweep.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import (
    EmptyInputError,
    LengthMismatchError,
    NoPositiveMassError,
)
from .scoring import ScoreSeries

SCHEMA_VERSION = 1
METRIC_NAMES = ("f1", "precision", "recall", "vus_roc", "vus_pr")


@dataclass(frozen=True)
class GroundTruth:
    """Binary anomaly labels with their generating spans (local indices)."""

    labels: np.ndarray
    spans: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        labels = np.asarray(self.labels, dtype=np.uint8)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_spans(
        cls, spans, length: int, offset: int = 0
    ) -> "GroundTruth":
        """Clip absolute inclusive spans to [offset, offset+length) and localize."""
        labels = np.zeros(length, dtype=np.uint8)
        local = []
        for start, end in spans:
            lo = max(start - offset, 0)
            hi = min(end - offset, length - 1)
            if lo > hi:
                continue
            labels[lo : hi + 1] = 1
            local.append((lo, hi))
        return cls(labels=labels, spans=tuple(local))


def pointwise_prf(
    pred: np.ndarray, truth: np.ndarray
) -> tuple[float, float, float]:
    """Point-wise (precision, recall, F1) from binary vectors.

    Conventions: precision is 0 with no predicted positives, recall is 0
    with no true positives, and F1 is 0 when both are 0.
    """
    pred = np.asarray(pred).astype(bool)
    truth = np.asarray(truth).astype(bool)
    if pred.shape != truth.shape:
        raise LengthMismatchError(
            f"prediction and truth lengths differ: {pred.shape} vs {truth.shape}"
        )
    tp = float(np.sum(pred & truth))
    fp = float(np.sum(pred & ~truth))
    fn = float(np.sum(~pred & truth))
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    f1 = (
        2.0 * precision * recall / (precision + recall)
        if precision + recall > 0
        else 0.0
    )
    return precision, recall, f1


def continuous_labels(truth: GroundTruth, width: int) -> np.ndarray:
    """Soften binary labels with a sqrt-decay buffer of ``width`` steps.

    Inside any span the label is 1; at distance ``d`` beyond the nearest
    span boundary it is ``sqrt(max(0, 1 - d / width))``, taking the max
    over spans.  ``width=0`` reproduces the binary labels.
    """
    if width < 0:
        raise ValueError(f"width must be >= 0, got {width}")
    n = len(truth.labels)
    if not truth.spans:
        return np.zeros(n, dtype=np.float64)
    if width == 0:
        return truth.labels.astype(np.float64)
    t = np.arange(n)
    dist = np.full(n, np.inf)
    for start, end in truth.spans:
        d = np.maximum(np.maximum(start - t, t - end), 0)
        dist = np.minimum(dist, d)
    return np.sqrt(np.clip(1.0 - dist / width, 0.0, None))


def auc_weighted(scores: np.ndarray, soft_labels: np.ndarray, kind: str) -> float:
    """Soft-weighted area under the ROC or PR curve.

    Thresholds sweep the sorted unique score values (plus a +inf
    sentinel); at each threshold the true/false-positive masses are the
    sums of ``soft`` and ``1 - soft`` over points at or above it, and
    the area is a trapezoid over the resulting curve.  Only the ordering
    of the scores matters.  When the labels carry no negative mass both
    areas are 1.0 by convention (no false positive is possible).
    """
    if kind not in ("roc", "pr"):
        raise ValueError(f"kind must be 'roc' or 'pr', got {kind!r}")
    scores = np.asarray(scores, dtype=np.float64)
    soft_labels = np.asarray(soft_labels, dtype=np.float64)
    if scores.shape != soft_labels.shape or scores.ndim != 1:
        raise LengthMismatchError(
            f"scores and labels lengths differ: {scores.shape} vs {soft_labels.shape}"
        )
    pos = float(soft_labels.sum())
    if pos <= 0.0:
        raise NoPositiveMassError("soft labels sum to zero")
    if float(np.sum(1.0 - soft_labels)) <= 0.0:
        return 1.0
    order = np.argsort(-scores, kind="stable")
    roc, pr = _kernels.weighted_areas(scores[order], soft_labels[order])
    return roc if kind == "roc" else pr


def vus(
    scores: ScoreSeries | np.ndarray,
    truth: GroundTruth,
    w_max: int,
    steps: int,
) -> tuple[float, float]:
    """(VUS-ROC, VUS-PR): trapezoidal mean of the areas over buffer widths.

    Buffer widths are ``steps + 1`` evenly spaced values from 0 to
    ``w_max``, rounded to integers and deduplicated; ``w_max=0``
    degenerates to the plain soft-label-free areas.
    """
    if w_max < 0:
        raise ValueError(f"w_max must be >= 0, got {w_max}")
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    values = scores.scores if isinstance(scores, ScoreSeries) else np.asarray(scores)
    widths = np.unique(np.rint(np.linspace(0.0, w_max, steps + 1)).astype(int))
    rocs = np.empty(len(widths))
    prs = np.empty(len(widths))
    for i, w in enumerate(widths):
        soft = continuous_labels(truth, int(w))
        rocs[i] = auc_weighted(values, soft, "roc")
        prs[i] = auc_weighted(values, soft, "pr")
    if len(widths) == 1:
        return float(rocs[0]), float(prs[0])
    span = float(widths[-1] - widths[0])
    return (
        float(np.trapezoid(rocs, widths) / span),
        float(np.trapezoid(prs, widths) / span),
    )


def bootstrap(
    values: np.ndarray, iterations: int, seed: int
) -> tuple[float, float]:
    """Mean and std of resample means (sampling with replacement)."""
    values = np.asarray(values, dtype=np.float64)
    if len(values) == 0:
        raise EmptyInputError("bootstrap needs at least one value")
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, len(values), size=(iterations, len(values)))
    means = values[idx].mean(axis=1)
    return float(means.mean()), float(means.std())


@dataclass
class ScoreDump:
    """Per-series score arrays kept for CSV emission (not serialized)."""

    t_absolute_start: int
    raw: np.ndarray
    smoothed: np.ndarray
    labels: np.ndarray
    threshold: float


@dataclass
class EvalReport:
    """Per-series, per-domain, and global metrics for one run."""

    setting: str
    per_series: dict[str, dict] = field(default_factory=dict)
    per_domain: dict[str, dict] = field(default_factory=dict)
    overall: dict = field(default_factory=dict)
    bootstrap: dict[str, dict] | None = None
    skipped: dict[str, str] = field(default_factory=dict)
    config: dict | None = None
    training: dict | None = None
    score_dumps: dict[str, ScoreDump] = field(default_factory=dict, repr=False)

    def finalize(self, bootstrap_iterations: int = 0, seed: int = 0) -> None:
        """Compute domain/global aggregates (arithmetic means) and bootstrap."""
        self.per_series = dict(sorted(self.per_series.items()))
        self.skipped = dict(sorted(self.skipped.items()))
        by_domain: dict[str, list[dict]] = {}
        for rec in self.per_series.values():
            by_domain.setdefault(rec["domain"], []).append(rec)
        self.per_domain = {
            dom: {
                "n_series": len(recs),
                **{
                    m: float(np.mean([r[m] for r in recs]))
                    for m in METRIC_NAMES
                },
            }
            for dom, recs in sorted(by_domain.items())
        }
        if self.per_series:
            recs = list(self.per_series.values())
            self.overall = {
                "n_series": len(recs),
                **{m: float(np.mean([r[m] for r in recs])) for m in METRIC_NAMES},
            }
        else:
            self.overall = {"n_series": 0}
        if bootstrap_iterations and self.per_series:
            self.bootstrap = {}
            for i, m in enumerate(METRIC_NAMES):
                vals = np.array([r[m] for r in self.per_series.values()])
                mean, std = bootstrap(vals, bootstrap_iterations, seed * 101 + i)
                self.bootstrap[m] = {"mean": mean, "std": std}

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "setting": self.setting,
            "per_series": self.per_series,
            "per_domain": self.per_domain,
            "global": self.overall,
            "bootstrap": self.bootstrap,
            "skipped": self.skipped,
            "training": self.training,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def write_per_series_csv(self, path: str | Path) -> None:
        cols = ["series_id", "domain", *METRIC_NAMES, "threshold", "n_windows"]
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(cols)
            for sid, rec in self.per_series.items():
                writer.writerow(
                    [sid, rec["domain"]]
                    + [repr(float(rec[m])) for m in METRIC_NAMES]
                    + [repr(float(rec["threshold"])), rec["n_windows"]]
                )
