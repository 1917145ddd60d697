"""Experiment orchestration: configs, pipeline runs, sweeps, diagnostics.

A run loads (or generates) a multi-domain dataset, standardizes every
series with its training statistics, builds per-domain retrieval pools,
and evaluates one pipeline setting per series: forecast each test
window, turn deviations into scores, smooth, threshold, and score the
result with point-wise and threshold-free metrics.  Per-series failures
are recorded and skipped so a single bad series cannot kill a benchmark.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .dataset import LabeledSeries, Window, load_dataset, make_windows, standardize
from .errors import ConfigError, EmptyTrainingSetError, InvalidFractionError, RatfmError
from .forecast import (
    Budget,
    ExampleCopyForecaster,
    Forecaster,
    LinearForecaster,
    SeasonalNaiveForecaster,
    assemble_context,
    forecast,
    train_linear,
    zero_shot_context,
)
from .metrics import EvalReport, GroundTruth, ScoreDump, pointwise_prf, vus
from .retrieval import CandidatePool, ncc_max, retrieve_best, subsample_pool
from .scoring import (
    ScoreSeries,
    anomaly_scores,
    dump_scores_csv,
    estimate_period,
    sma_smooth,
    threshold_labels,
)
from .synth import SynthSpec, generate_synthetic

logger = logging.getLogger(__name__)

SETTINGS = ("zero_shot_naive", "ratfm_copy", "ratfm_linear")
DEFAULT_BUDGET = Budget(512, 96, 512)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run needs; serializable to/from JSON.

    Exactly one of ``dataset_root`` and ``synth`` must be set.
    ``out_dir`` is only an emission target and is excluded from the
    config snapshot embedded in reports, so identical experiments yield
    byte-identical reports regardless of where they are written.
    """

    dataset_root: str | None = None
    synth: SynthSpec | None = None
    budget: Budget = DEFAULT_BUDGET
    ridge_reg: float = 1e-3
    fractions: tuple[float, ...] = (1.0, 0.75, 0.5, 0.25)
    sma: bool = True
    vus_w_max: int | None = None
    vus_steps_cap: int = 20
    bootstrap_iterations: int = 1000
    seed: int = 0
    eval_stride: int | None = None
    pool_stride: int | None = None
    pool_fraction: float = 1.0
    retrieval_region: str = "train"
    period_source: str = "train"
    workers: int = 1
    out_dir: str = "ratfm_out"

    def __post_init__(self) -> None:
        if not isinstance(self.budget, Budget):
            object.__setattr__(self, "budget", Budget(*self.budget))

    def validate(self) -> None:
        if (self.dataset_root is None) == (self.synth is None):
            raise ConfigError("set exactly one of dataset_root and synth")
        te, h, tt = self.budget
        if te < 1 or tt < 1 or h < 2:
            raise ConfigError(f"bad budget {tuple(self.budget)}")
        if self.ridge_reg < 0:
            raise ConfigError("ridge_reg must be >= 0")
        for f in self.fractions:
            if not 0.0 < f <= 1.0:
                raise ConfigError(f"fractions must lie in (0, 1], got {f}")
        if not 0.0 < self.pool_fraction <= 1.0:
            raise ConfigError(f"pool_fraction must lie in (0, 1], got {self.pool_fraction}")
        stride = self.eval_stride if self.eval_stride is not None else h
        if not 1 <= stride <= h:
            raise ConfigError(
                f"eval_stride must lie in [1, horizon], got {stride}"
            )
        if self.pool_stride is not None and self.pool_stride < 1:
            raise ConfigError("pool_stride must be >= 1")
        if self.vus_w_max is not None and self.vus_w_max < 0:
            raise ConfigError("vus_w_max must be >= 0")
        if self.vus_steps_cap < 1:
            raise ConfigError("vus_steps_cap must be >= 1")
        if self.bootstrap_iterations < 0:
            raise ConfigError("bootstrap_iterations must be >= 0")
        if self.retrieval_region not in ("train", "full"):
            raise ConfigError("retrieval_region must be 'train' or 'full'")
        if self.period_source not in ("train", "test"):
            raise ConfigError("period_source must be 'train' or 'test'")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.synth is not None:
            self.synth.validate()

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out.pop("out_dir")
        out["budget"] = list(self.budget)
        return out

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        raw = dict(raw)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if raw.get("budget") is not None:
            raw["budget"] = Budget(*(int(v) for v in raw["budget"]))
        if raw.get("synth") is not None:
            raw["synth"] = _synth_from_dict(raw["synth"])
        for key in ("fractions",):
            if raw.get(key) is not None:
                raw[key] = tuple(raw[key])
        return cls(**raw)

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(raw)


def _synth_from_dict(raw: dict) -> SynthSpec:
    from .synth import DomainTemplate

    raw = dict(raw)
    known = {f.name for f in dataclasses.fields(SynthSpec)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown synth keys: {sorted(unknown)}")
    if raw.get("templates") is not None:
        raw["templates"] = tuple(
            DomainTemplate(
                periods=tuple(t["periods"]),
                amplitudes=tuple(t["amplitudes"]),
                phases=tuple(t["phases"]),
                level=t.get("level", 0.0),
                mod_depth=t.get("mod_depth", 0.0),
                mod_period=t.get("mod_period"),
            )
            for t in raw["templates"]
        )
    for key in ("anomaly_kinds", "anomaly_len"):
        if raw.get(key) is not None:
            raw[key] = tuple(raw[key])
    return SynthSpec(**raw)


@dataclass
class PreparedRun:
    """Standardized series, per-series periods, and per-domain pools."""

    series: list[LabeledSeries]
    periods: dict[str, int]
    pools: dict[str, CandidatePool]


def _load_series(config: ExperimentConfig) -> list[LabeledSeries]:
    if config.synth is not None:
        return generate_synthetic(config.synth)
    series = load_dataset(config.dataset_root)
    if not series:
        warnings.warn(f"no series found under {config.dataset_root}", stacklevel=2)
    return series


def prepare_run(config: ExperimentConfig) -> PreparedRun:
    """Standardize, estimate periods, and build retrieval pools."""
    config.validate()
    te, h, tt = config.budget
    # dense pools by default: retrieval quality hinges on phase coverage
    pool_stride = (
        config.pool_stride if config.pool_stride is not None else max(1, h // 12)
    )
    series = []
    periods = {}
    by_domain: dict[str, list[Window]] = {}
    for raw in _load_series(config):
        std, _ = standardize(raw)
        series.append(std)
        source = std.train_values if config.period_source == "train" else std.test_values
        periods[std.id] = estimate_period(source).period
        regions = ["train"] if config.retrieval_region == "train" else ["train", "test"]
        for region in regions:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                wins = make_windows(std, region, te, h, pool_stride)
            by_domain.setdefault(std.domain, []).extend(wins)
    pools = {}
    for domain, wins in sorted(by_domain.items()):
        pool = CandidatePool(domain=domain, entries=wins, seed=config.seed)
        if config.pool_fraction < 1.0:
            pool = subsample_pool(pool, config.pool_fraction, config.seed)
        pools[domain] = pool
    return PreparedRun(series=series, periods=periods, pools=pools)


def _retrieval_query(window: Window, example_len: int) -> Window:
    inp = window.input
    return Window(
        series_id=window.series_id,
        start=window.start + len(inp) - example_len,
        input=inp[len(inp) - example_len :],
        future=window.future,
    )


def _train_forecaster(
    config: ExperimentConfig, data: PreparedRun
) -> tuple[LinearForecaster, dict]:
    """Fit the linear forecaster on retrieval-augmented training contexts."""
    budget = config.budget
    te, h, tt = budget
    stride = config.eval_stride if config.eval_stride is not None else h
    total = budget.total
    contexts = []
    for series in data.series:
        pool = data.pools.get(series.domain)
        if pool is None:
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            wins = make_windows(series, "train", total, h, stride)
        for w in wins:
            try:
                example, _ = retrieve_best(_retrieval_query(w, te), pool)
            except RatfmError:
                continue
            contexts.append(assemble_context(w, example, budget))
    try:
        forecaster, report = train_linear(contexts, config.ridge_reg)
    except EmptyTrainingSetError as exc:
        raise ConfigError(
            "no training contexts available; train regions are too short "
            "for the configured budget"
        ) from exc
    info = {
        "n_contexts": len(contexts),
        "final_mse": report.final_mse,
        "ridge_reg": config.ridge_reg,
    }
    return forecaster, info


def _eval_series(
    series: LabeledSeries,
    config: ExperimentConfig,
    setting: str,
    period: int,
    pool: CandidatePool | None,
    trained: Forecaster | None,
) -> tuple[dict, ScoreDump]:
    budget = config.budget
    te, h, tt = budget
    total = budget.total
    stride = config.eval_stride if config.eval_stride is not None else h
    windows = make_windows(series, "test", total, h, stride)
    if not windows:
        raise RatfmError("test region too short for the configured budget")

    if setting == "zero_shot_naive":
        forecaster: Forecaster = SeasonalNaiveForecaster(period)
    elif setting == "ratfm_copy":
        forecaster = ExampleCopyForecaster()
    else:
        assert trained is not None
        forecaster = trained

    test_len = len(series.values) - series.train_end
    acc = np.zeros(test_len)
    cnt = np.zeros(test_len, dtype=np.int64)
    for w in windows:
        if setting == "zero_shot_naive":
            ctx = zero_shot_context(w, budget)
        else:
            if pool is None:
                raise RatfmError(f"no retrieval pool for domain {series.domain!r}")
            example, _ = retrieve_best(_retrieval_query(w, te), pool)
            ctx = assemble_context(w, example, budget)
        predicted = forecast(forecaster, ctx)
        window_scores = anomaly_scores(predicted, w.future).scores
        local = w.start + total - series.train_end
        acc[local : local + h] += window_scores
        cnt[local : local + h] += 1

    scored = cnt > 0
    offset = int(np.argmax(scored))
    n_scored = int(scored.sum())
    raw = ScoreSeries(
        series_id=series.id,
        offset=offset,
        scores=acc[offset : offset + n_scored] / cnt[offset : offset + n_scored],
    )
    final = sma_smooth(raw, period) if config.sma else raw
    labels, threshold = threshold_labels(final)

    local_spans = [
        (s - series.train_end, e - series.train_end) for s, e in series.anomaly_spans
    ]
    truth = GroundTruth.from_spans(local_spans, length=len(final), offset=offset)
    precision, recall, f1 = pointwise_prf(labels, truth.labels)
    w_max = config.vus_w_max if config.vus_w_max is not None else period
    steps = max(1, min(w_max, config.vus_steps_cap))
    vus_roc, vus_pr = vus(final, truth, w_max, steps)

    record = {
        "domain": series.domain,
        "f1": f1,
        "precision": precision,
        "recall": recall,
        "vus_roc": vus_roc,
        "vus_pr": vus_pr,
        "threshold": threshold,
        "period": period,
        "n_windows": len(windows),
        "offset": offset,
    }
    dump = ScoreDump(
        t_absolute_start=series.train_end + offset,
        raw=raw.scores,
        smoothed=final.scores,
        labels=labels,
        threshold=threshold,
    )
    return record, dump


def run_setting(
    config: ExperimentConfig,
    setting: str,
    *,
    data: PreparedRun | None = None,
    trained: Forecaster | None = None,
) -> EvalReport:
    """Evaluate one pipeline setting over the whole dataset.

    ``data`` and ``trained`` allow sweeps to reuse prepared pools and an
    already-fitted forecaster.
    """
    if setting not in SETTINGS:
        raise ConfigError(f"unknown setting {setting!r}; pick one of {SETTINGS}")
    config.validate()
    if data is None:
        data = prepare_run(config)
    report = EvalReport(setting=setting, config=config.to_dict())
    if setting == "ratfm_linear" and trained is None:
        trained, report.training = _train_forecaster(config, data)

    def eval_one(series: LabeledSeries):
        pool = data.pools.get(series.domain)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                rec, dump = _eval_series(
                    series, config, setting, data.periods[series.id], pool, trained
                )
            return series.id, rec, dump, None
        except RatfmError as exc:
            return series.id, None, None, str(exc)

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool_exec:
            results = list(pool_exec.map(eval_one, data.series))
    else:
        results = [eval_one(s) for s in data.series]

    for sid, rec, dump, err in results:
        if err is not None:
            logger.warning("skipping %s: %s", sid, err)
            report.skipped[sid] = err
            continue
        report.per_series[sid] = rec
        report.score_dumps[sid] = dump
    if not report.per_series:
        warnings.warn("run evaluated zero series", stacklevel=2)
    report.finalize(
        bootstrap_iterations=config.bootstrap_iterations, seed=config.seed
    )
    return report


@dataclass
class SweepResult:
    """Per-fraction, per-domain VUS-ROC table plus the full reports."""

    setting: str
    rows: list[tuple[float, str, float, int]]
    reports: dict[float, EvalReport] = field(repr=False, default_factory=dict)

    def write_csv(self, path: str | Path) -> None:
        lines = ["fraction,domain,vus_roc,n_series"]
        for fraction, domain, vus_roc, n_series in self.rows:
            lines.append(f"{fraction},{domain},{vus_roc!r},{n_series}")
        Path(path).write_text("\n".join(lines) + "\n")


def sweep_pool_fraction(
    config: ExperimentConfig,
    fractions: list[float] | None = None,
    setting: str = "ratfm_copy",
) -> SweepResult:
    """Re-run retrieval with subsampled candidate pools.

    The forecaster (for the linear setting) is trained once on the full
    pools and reused; only retrieval changes between fractions.
    """
    config.validate()
    fractions = list(fractions if fractions is not None else config.fractions)
    for f in fractions:
        if not 0.0 < f <= 1.0:
            raise InvalidFractionError(f"fractions must lie in (0, 1], got {f}")
    data = prepare_run(config)
    trained = None
    if setting == "ratfm_linear":
        trained, _ = _train_forecaster(config, data)
    result = SweepResult(setting=setting, rows=[])
    for fraction in fractions:
        pools = {
            dom: subsample_pool(pool, fraction, config.seed)
            for dom, pool in data.pools.items()
        }
        data_f = PreparedRun(series=data.series, periods=data.periods, pools=pools)
        report = run_setting(config, setting, data=data_f, trained=trained)
        result.reports[fraction] = report
        for domain, rec in report.per_domain.items():
            result.rows.append((fraction, domain, rec["vus_roc"], rec["n_series"]))
    return result


@dataclass
class SimilarityDiagnostics:
    """Per-domain mean lag-0 similarities against the true target future.

    ``example_future``: the retrieved example's future; ``aligned_segment``:
    the input segment sitting where the example future would sit;
    ``best_segment``: the best-matching segment anywhere in the portion of
    the input corresponding to the whole example.
    """

    per_domain: dict[str, dict[str, float]]
    overall: dict[str, float]

    def to_dict(self) -> dict:
        return {"per_domain": self.per_domain, "overall": self.overall}

    def write_csv(self, path: str | Path) -> None:
        lines = ["domain,example_future,aligned_segment,best_segment,n_windows"]
        for dom, rec in sorted(self.per_domain.items()):
            lines.append(
                f"{dom},{rec['example_future']!r},{rec['aligned_segment']!r},"
                f"{rec['best_segment']!r},{rec['n_windows']}"
            )
        Path(path).write_text("\n".join(lines) + "\n")


def similarity_diagnostics(
    config: ExperimentConfig, *, data: PreparedRun | None = None
) -> SimilarityDiagnostics:
    """Compare three candidate reference segments against each true future.

    For every test window: (a) the retrieved example's future, (b) the
    input segment aligned with the example-future position, and (c) the
    best lag-0 match among all horizon-length segments of the input's
    leading example-shaped portion.  All similarities are lag-0
    normalized correlations; (c) >= (b) by construction.
    """
    config.validate()
    if data is None:
        data = prepare_run(config)
    te, h, tt = config.budget
    total = config.budget.total
    stride = config.eval_stride if config.eval_stride is not None else h
    sums: dict[str, np.ndarray] = {}
    counts: dict[str, int] = {}
    for series in data.series:
        pool = data.pools.get(series.domain)
        if pool is None:
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            windows = make_windows(series, "test", total, h, stride)
        for w in windows:
            try:
                example, _ = retrieve_best(_retrieval_query(w, te), pool)
                a = ncc_max(example.future, w.future, lag_zero_only=True).score
                b = ncc_max(w.input[te : te + h], w.future, lag_zero_only=True).score
                c, _off = _kernels.lag0_scan(w.input[: te + h], w.future)
            except RatfmError:
                continue
            if c < -1.0:
                continue
            dom = series.domain
            sums.setdefault(dom, np.zeros(3))
            sums[dom] += (a, b, c)
            counts[dom] = counts.get(dom, 0) + 1

    per_domain = {}
    total_sum = np.zeros(3)
    total_count = 0
    for dom in sorted(sums):
        n = counts[dom]
        mean = sums[dom] / n
        per_domain[dom] = {
            "example_future": float(mean[0]),
            "aligned_segment": float(mean[1]),
            "best_segment": float(mean[2]),
            "n_windows": n,
        }
        total_sum += sums[dom]
        total_count += n
    overall = {
        "example_future": float(total_sum[0] / total_count) if total_count else 0.0,
        "aligned_segment": float(total_sum[1] / total_count) if total_count else 0.0,
        "best_segment": float(total_sum[2] / total_count) if total_count else 0.0,
        "n_windows": total_count,
    }
    return SimilarityDiagnostics(per_domain=per_domain, overall=overall)


def emit_reports(report: EvalReport, out_dir: str | Path) -> dict[str, Path]:
    """Write report.json, per_series.csv, scores/*.csv, and config.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"report": out / "report.json", "per_series": out / "per_series.csv"}
    paths["report"].write_text(report.to_json())
    report.write_per_series_csv(paths["per_series"])
    scores_dir = out / "scores"
    scores_dir.mkdir(exist_ok=True)
    for sid, dump in sorted(report.score_dumps.items()):
        dump_scores_csv(
            scores_dir / f"{sid}.csv",
            sid,
            dump.t_absolute_start,
            dump.raw,
            dump.smoothed,
            dump.labels,
            dump.threshold,
        )
    if report.config is not None:
        paths["config"] = out / "config.json"
        paths["config"].write_text(
            json.dumps(report.config, indent=2, sort_keys=True) + "\n"
        )
    return paths
