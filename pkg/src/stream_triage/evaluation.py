"""Prequential (test-then-train) replay of an issue stream through one model configuration."""

from __future__ import annotations

import csv
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Iterable, Sequence

from .activity import ActivityIndex
from .corpus import EmptyStreamError, IssueStream
from .drift import Adwin, DriftEvent
from .ensemble import OnlineBoost
from .featurize import STOP_WORDS, FeatureVector, Vectorizer, scale_for
from .learner import ColdStartError, MultinomialNB, argmax

logger = logging.getLogger(__name__)

CONFIG_NAMES = ("nb", "nb_adwin", "adaboost", "adaboost_adwin_activity")


@dataclass(frozen=True)
class ModelConfig:
    name: str = "adaboost_adwin_activity"
    ensemble_size: int = 10
    replace_k: int = 5
    delta: float = 0.002
    history: int = 100
    alpha: float = 1.0
    seed: int = 42
    adwin_max_buckets: int = 5
    adwin_min_sub_window: int = 5
    adwin_variance: bool = False
    acc_decay: float = 0.99

    def __post_init__(self):
        if self.name not in CONFIG_NAMES:
            raise ValueError(f"unknown model config {self.name!r}; choose from {CONFIG_NAMES}")
        if not 0 <= self.replace_k <= self.ensemble_size:
            raise ValueError("replace_k must lie in [0, ensemble_size]")

    @property
    def uses_ensemble(self) -> bool:
        return self.name.startswith("adaboost")

    @property
    def uses_adwin(self) -> bool:
        return "adwin" in self.name

    @property
    def uses_activity(self) -> bool:
        return self.name == "adaboost_adwin_activity"

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class StepRecord:
    index: int
    predicted: str | None
    actual: str
    correct: int
    moving_accuracy: float
    drift: bool = False
    fallback: bool = False


@dataclass
class RunResult:
    config: ModelConfig
    project: str
    steps: list[StepRecord]
    drift_events: list[DriftEvent] = field(default_factory=list)
    fallback_indices: list[int] = field(default_factory=list)
    warnings: list[tuple[str, str]] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def final_accuracy(self) -> float:
        return self.steps[-1].moving_accuracy

    @property
    def drift_indices(self) -> list[int]:
        return [e.instance_index for e in self.drift_events]

    @property
    def curve(self) -> list[float]:
        return [s.moving_accuracy for s in self.steps]


class OnlineModel:
    """Classifier, optional drift detector and optional activity mask wired per config."""

    def __init__(self, config: ModelConfig):
        self.config = config
        if config.uses_ensemble:
            self.classifier = OnlineBoost(config.ensemble_size, config.alpha, config.seed, config.acc_decay)
        else:
            self.classifier = MultinomialNB(config.alpha)
        self.adwin = (
            Adwin(config.delta, config.adwin_max_buckets, config.adwin_min_sub_window, config.adwin_variance)
            if config.uses_adwin
            else None
        )
        self.activity = ActivityIndex(config.history) if config.uses_activity else None

    def predict_proba(self, x: FeatureVector) -> tuple[dict[str, float], bool]:
        proba = self.classifier.predict_proba(x)
        if self.activity is None:
            return proba, False
        return self.activity.apply_mask(proba)

    def monitor(self, correct: int) -> DriftEvent | None:
        if self.adwin is None or not self.adwin.update(correct):
            return None
        if self.config.uses_ensemble:
            self.classifier.replace_weakest(self.config.replace_k)
        else:
            self.classifier = MultinomialNB(self.config.alpha)
        return self.adwin.last_event

    def learn(self, x: FeatureVector, y: str) -> None:
        self.classifier.learn(x, y)

    def record_resolution(self, y: str) -> None:
        if self.activity is not None:
            self.activity.record(y)


def build_model(config: ModelConfig) -> OnlineModel:
    return OnlineModel(config)


def run_pipeline(
    stream: IssueStream,
    config: ModelConfig,
    priority_scale: dict[str, int] | None = None,
    stop_words: frozenset[str] = STOP_WORDS,
) -> RunResult:
    """Replay ``stream`` prequentially: featurize, predict, score, monitor, then learn."""
    if not stream.issues:
        raise EmptyStreamError(f"project {stream.project_key} has no issues")
    started = time.perf_counter()
    vectorizer = Vectorizer(priority_scale or scale_for(None, stream.project_key), stop_words)
    model = build_model(config)
    result = RunResult(config, stream.project_key, [])
    known_labels: set[str] = set()
    n_correct = 0
    for i, issue in enumerate(stream.issues, start=1):
        x = vectorizer.observe_vectorize(issue, result.warnings)
        try:
            proba, fallback = model.predict_proba(x)
            predicted = argmax(proba)
        except ColdStartError:
            fallback = False
            # after a full reset fall back to the first known developer; before any label, a placeholder
            predicted = min(known_labels) if known_labels else None
        if fallback:
            result.fallback_indices.append(i)
            logger.debug("%s/%s step %d: activity mask fallback", stream.project_key, config.name, i)

        actual = issue.assignee
        correct = int(predicted is not None and predicted == actual)
        n_correct += correct

        event = model.monitor(correct)
        if event is not None:
            event = replace(event, instance_index=i)
            result.drift_events.append(event)
            logger.info("%s/%s drift at %d (|W| %d -> %d)", stream.project_key, config.name, i,
                        event.pre_window_len, event.post_window_len)

        model.learn(x, actual)
        known_labels.add(actual)
        model.record_resolution(actual)
        result.steps.append(StepRecord(i, predicted, actual, correct, n_correct / i, event is not None, fallback))
    result.wall_time = time.perf_counter() - started
    return result


@dataclass
class ComparisonRow:
    project: str
    config: ModelConfig
    result: RunResult | None = None
    error: str | None = None

    @property
    def final_accuracy(self) -> float | None:
        return None if self.result is None else self.result.final_accuracy


def _run_row(args) -> ComparisonRow:
    stream, config, priority_scale, stop_words = args
    try:
        return ComparisonRow(stream.project_key, config, run_pipeline(stream, config, priority_scale, stop_words))
    except Exception as exc:  # one failing row must not sink the table
        logger.error("%s/%s failed: %s", stream.project_key, config.name, exc)
        return ComparisonRow(stream.project_key, config, error=f"{type(exc).__name__}: {exc}")


def _run_rows(tasks: list, jobs: int) -> list[ComparisonRow]:
    if jobs <= 1 or len(tasks) <= 1:
        return [_run_row(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_row, tasks))


def compare_configs(
    stream: IssueStream,
    configs: Sequence[ModelConfig],
    seed: int | None = None,
    jobs: int = 1,
    priority_scale: dict[str, int] | None = None,
    stop_words: frozenset[str] = STOP_WORDS,
) -> list[ComparisonRow]:
    """Run every config over the same stream with one shared seed."""
    if len(configs) < 2:
        raise ValueError("compare needs at least two configs")
    seed = configs[0].seed if seed is None else seed
    tasks = [(stream, replace(c, seed=seed), priority_scale, stop_words) for c in configs]
    return _run_rows(tasks, jobs)


def sweep(
    streams: Iterable[IssueStream],
    configs: Sequence[ModelConfig],
    jobs: int = 1,
    priority_scales: dict[str, dict[str, int]] | None = None,
    stop_words: frozenset[str] = STOP_WORDS,
) -> list[ComparisonRow]:
    """All projects times all configs; rows come back in (project, config) order."""
    tasks = [
        (s, c, scale_for(priority_scales, s.project_key), stop_words)
        for s in streams
        for c in configs
    ]
    return _run_rows(tasks, jobs)


# -- reporting -------------------------------------------------------------------------

STEP_COLUMNS = ["index", "predicted", "actual", "correct", "moving_accuracy", "drift", "fallback"]
DRIFT_COLUMNS = ["instance_index", "pre_window_len", "post_window_len", "mu_before", "mu_after"]
SUMMARY_COLUMNS = ["project", "config", "final_accuracy", "n_drifts", "wall_time"]


def _writer(path: Path):
    fh = open(path, "w", newline="", encoding="utf-8")
    return fh, csv.writer(fh, lineterminator="\n")


def _run_dirs(results: Sequence[RunResult]) -> list[str]:
    names, seen = [], {}
    for r in results:
        base = f"{r.project}/{r.config.name}"
        seen[base] = seen.get(base, 0) + 1
        names.append(base if seen[base] == 1 else f"{base}-{seen[base]}")
    return names


def emit_report(results: Sequence[RunResult], out_dir: str | Path) -> list[Path]:
    """Write steps/drifts/events per run plus summary.csv and curves.dat; returns written paths."""
    if not results:
        raise ValueError("nothing to report")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    run_dirs = _run_dirs(results)
    for r, rel in zip(results, run_dirs):
        d = out / rel
        d.mkdir(parents=True, exist_ok=True)

        fh, w = _writer(d / "steps.csv")
        with fh:
            w.writerow(STEP_COLUMNS)
            for s in r.steps:
                w.writerow([s.index, s.predicted or "", s.actual, s.correct, repr(s.moving_accuracy),
                            int(s.drift), int(s.fallback)])
        fh, w = _writer(d / "drifts.csv")
        with fh:
            w.writerow(DRIFT_COLUMNS)
            for e in r.drift_events:
                w.writerow([e.instance_index, e.pre_window_len, e.post_window_len,
                            repr(e.mean_before), repr(e.mean_after)])
        fh, w = _writer(d / "events.csv")
        with fh:
            w.writerow(["instance_index", "event"])
            events = [(e.instance_index, "drift") for e in r.drift_events]
            events += [(i, "activity_fallback") for i in r.fallback_indices]
            for row in sorted(events):
                w.writerow(row)
        fh, w = _writer(d / "warnings.csv")
        with fh:
            w.writerow(["issue_id", "warning"])
            w.writerows(r.warnings)
        meta = {"project": r.project, "config": asdict(r.config), "wall_time": r.wall_time}
        (d / "run.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        written += [d / n for n in ("steps.csv", "drifts.csv", "events.csv", "warnings.csv", "run.json")]

    fh, w = _writer(out / "summary.csv")
    with fh:
        w.writerow(SUMMARY_COLUMNS)
        for r in results:
            w.writerow([r.project, r.config.name, repr(r.final_accuracy), len(r.drift_events), f"{r.wall_time:.6f}"])
    written.append(out / "summary.csv")

    written.append(_write_curves(results, run_dirs, out / "curves.dat"))
    return written


def _write_curves(results: Sequence[RunResult], run_dirs: list[str], path: Path) -> Path:
    # one gnuplot data block per project, addressable with `index N`
    by_project: dict[str, list[tuple[str, RunResult]]] = {}
    for r, rel in zip(results, run_dirs):
        by_project.setdefault(r.project, []).append((rel.split("/", 1)[1], r))
    blocks = []
    for project, runs in by_project.items():
        lines = [f"# project {project}", "# index " + " ".join(name for name, _ in runs)]
        length = max(len(r.steps) for _, r in runs)
        for i in range(length):
            vals = [f"{r.steps[i].moving_accuracy:.6f}" if i < len(r.steps) else "NaN" for _, r in runs]
            lines.append(f"{i + 1} " + " ".join(vals))
        blocks.append("\n".join(lines))
    path.write_text("\n\n\n".join(blocks) + "\n", encoding="utf-8")
    return path


def load_results(out_dir: str | Path) -> list[RunResult]:
    """Read back runs written by :func:`emit_report` (sorted by run directory)."""
    results = []
    for meta_path in sorted(Path(out_dir).glob("*/*/run.json")):
        d = meta_path.parent
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        with open(d / "steps.csv", newline="", encoding="utf-8") as fh:
            steps = [
                StepRecord(int(row["index"]), row["predicted"] or None, row["actual"], int(row["correct"]),
                           float(row["moving_accuracy"]), row["drift"] == "1", row["fallback"] == "1")
                for row in csv.DictReader(fh)
            ]
        with open(d / "drifts.csv", newline="", encoding="utf-8") as fh:
            drifts = [
                DriftEvent(int(row["instance_index"]), int(row["pre_window_len"]), int(row["post_window_len"]),
                           float(row["mu_before"]), float(row["mu_after"]))
                for row in csv.DictReader(fh)
            ]
        fallbacks = [s.index for s in steps if s.fallback]
        with open(d / "warnings.csv", newline="", encoding="utf-8") as fh:
            warnings = [(row["issue_id"], row["warning"]) for row in csv.DictReader(fh)]
        results.append(RunResult(ModelConfig.from_dict(meta["config"]), meta["project"], steps, drifts,
                                 fallbacks, warnings, meta["wall_time"]))
    return results
