"""Command-line front end: validate, stats, run, compare, sweep, report."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import fields
from pathlib import Path

from . import corpus
from .corpus import EmptyStreamError
from .evaluation import CONFIG_NAMES, ModelConfig, compare_configs, emit_report, load_results, run_pipeline, sweep
from .featurize import STOP_WORDS, load_priority_scales, load_stop_words, scale_for

logger = logging.getLogger("stream_triage")

DEFAULTS = {
    "format": None,
    "out": "out",
    "jobs": os.cpu_count() or 1,
    "no_filter": False,
    "min_assignees": 5,
    "min_issues_each": 80,
    "project": None,
    "model": "adaboost_adwin_activity",
    "configs": ",".join(CONFIG_NAMES),
    "priority_scale": None,
    "stopwords": None,
}
MODEL_FIELDS = {f.name for f in fields(ModelConfig)}


class CliError(Exception):
    pass


def setup_logging(verbosity: int = 0) -> None:
    level = os.environ.get("STREAM_TRIAGE_LOG", "WARNING").upper()
    if verbosity:
        level = "INFO" if verbosity == 1 else "DEBUG"
    logging.basicConfig(format="%(levelname)s %(name)s: %(message)s")
    logger.setLevel(getattr(logging, level, logging.WARNING))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="issue export (jsonl/csv) or, for report, a results directory")
    common.add_argument("--format", choices=["jsonl", "csv"])
    common.add_argument("--config", help="JSON file with ModelConfig fields and flag defaults")
    common.add_argument("--out", help="output directory (default: out)")
    common.add_argument("--seed", type=int)
    common.add_argument("--jobs", type=int, help="worker processes (default: logical cores)")
    common.add_argument("--no-filter", action="store_true", default=None, help="skip project filtering")
    common.add_argument("--min-assignees", type=int)
    common.add_argument("--min-issues-each", type=int)
    common.add_argument("--project", help="project key when the input holds several")
    common.add_argument("--model", choices=CONFIG_NAMES, help="configuration for `run`")
    common.add_argument("--configs", help="comma-separated configurations for compare/sweep")
    common.add_argument("--priority-scale", help="JSON sidecar mapping priority names to ranks")
    common.add_argument("--stopwords", help="stop-word file, one token per line")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="stream-triage", description="Online issue assignment replay harness")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="parse an export and write rejections.csv")
    sub.add_parser("stats", parents=[common], help="per-project assignee/issue counts")
    sub.add_parser("run", parents=[common], help="replay one project with one configuration")
    sub.add_parser("compare", parents=[common], help="replay one project with several configurations")
    sub.add_parser("sweep", parents=[common], help="all projects x all configurations")
    sub.add_parser("report", parents=[common], help="rebuild summary.csv and curves.dat from a results directory")
    return parser


class Settings:
    """Flag > config file > default lookup."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.file: dict = {}
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                self.file = json.load(fh)
            unknown = set(self.file) - MODEL_FIELDS - set(DEFAULTS) - {"input"}
            if unknown:
                raise CliError(f"unknown keys in {args.config}: {sorted(unknown)}")

    def get(self, key: str):
        value = getattr(self.args, key, None)
        if value is not None:
            return value
        if key in self.file:
            return self.file[key]
        return DEFAULTS.get(key)

    def explicit(self, key: str) -> bool:
        return getattr(self.args, key, None) is not None or key in self.file

    def model_config(self, name: str | None = None) -> ModelConfig:
        values = {k: v for k, v in self.file.items() if k in MODEL_FIELDS}
        if self.args.seed is not None:
            values["seed"] = self.args.seed
        if name is not None:
            values["name"] = name
        elif self.args.model is not None:
            values["name"] = self.args.model
        elif "name" not in values:
            values["name"] = DEFAULTS["model"]
        return ModelConfig.from_dict(values)

    def model_configs(self) -> list[ModelConfig]:
        names = self.get("configs")
        if isinstance(names, str):
            names = [n.strip() for n in names.split(",") if n.strip()]
        return [self.model_config(n) for n in names]

    def input_path(self) -> Path:
        path = self.get("input")
        if not path:
            raise CliError("--input is required")
        return Path(path)

    def stop_words(self) -> frozenset[str]:
        path = self.get("stopwords")
        return load_stop_words(path) if path else STOP_WORDS

    def priority_scales(self):
        path = self.get("priority_scale")
        return load_priority_scales(path) if path else None


def load_streams(s: Settings, filter_by_default: bool) -> list[corpus.IssueStream]:
    ingest = corpus.ingest(s.input_path(), s.get("format"))
    streams = list(ingest.streams.values())
    if s.get("project"):
        streams = [st for st in streams if st.project_key == s.get("project")]
        if not streams:
            raise CliError(f"project {s.get('project')!r} not found in input")
    apply_filter = filter_by_default or s.explicit("min_assignees") or s.explicit("min_issues_each")
    if apply_filter and not s.get("no_filter"):
        streams = corpus.filter_projects(streams, s.get("min_assignees"), s.get("min_issues_each"))
    return streams


def single_stream(s: Settings) -> corpus.IssueStream:
    streams = load_streams(s, filter_by_default=False)
    if not streams:
        raise CliError("no project left after filtering")
    if len(streams) > 1:
        keys = ", ".join(st.project_key for st in streams)
        raise CliError(f"input holds several projects ({keys}); pick one with --project")
    return streams[0]


def cmd_validate(s: Settings) -> int:
    path = s.input_path()
    out = Path(s.get("out"))
    out.mkdir(parents=True, exist_ok=True)
    try:
        ingest = corpus.ingest(path, s.get("format"))
    except EmptyStreamError as exc:
        corpus.write_rejections(exc.rejections, out / "rejections.csv")
        print(f"error: {exc} ({len(exc.rejections)} rejected)", file=sys.stderr)
        return 1
    corpus.write_rejections(ingest.rejections, out / "rejections.csv")
    print(f"{ingest.n_valid} valid, {len(ingest.rejections)} rejected, {len(ingest.streams)} project(s)")
    return 0


def cmd_stats(s: Settings) -> int:
    streams = load_streams(s, filter_by_default=True)
    if not streams:
        print("warning: no project survives the filter", file=sys.stderr)
        return 0
    print(f"{'project':<12} {'assignees':>9} {'issues':>7} {'per_assignee':>12}")
    for st in streams:
        p = corpus.project_stats(st)
        print(f"{p.project_key:<12} {p.n_assignees:>9} {p.n_issues:>7} {p.issues_per_assignee:>12}")
    return 0


def _print_rows(rows) -> int:
    failed = 0
    for row in rows:
        if row.result is None:
            failed += 1
            print(f"{row.project:<12} {row.config.name:<24} ERROR {row.error}", file=sys.stderr)
        else:
            r = row.result
            print(f"{row.project:<12} {row.config.name:<24} {r.final_accuracy:.4f} drifts={len(r.drift_events)}")
    return failed


def cmd_run(s: Settings) -> int:
    stream = single_stream(s)
    scale = scale_for(s.priority_scales(), stream.project_key)
    result = run_pipeline(stream, s.model_config(), scale, s.stop_words())
    emit_report([result], s.get("out"))
    print(f"{stream.project_key} {result.config.name} final_accuracy={result.final_accuracy:.4f} "
          f"drifts={result.drift_indices}")
    return 0


def cmd_compare(s: Settings) -> int:
    stream = single_stream(s)
    scale = scale_for(s.priority_scales(), stream.project_key)
    rows = compare_configs(stream, s.model_configs(), jobs=s.get("jobs"), priority_scale=scale,
                           stop_words=s.stop_words())
    failed = _print_rows(rows)
    ok = [r.result for r in rows if r.result is not None]
    if ok:
        emit_report(ok, s.get("out"))
    return 1 if failed else 0


def cmd_sweep(s: Settings) -> int:
    streams = load_streams(s, filter_by_default=True)
    if not streams:
        raise CliError("no project survives the filter")
    rows = sweep(streams, s.model_configs(), jobs=s.get("jobs"), priority_scales=s.priority_scales(),
                 stop_words=s.stop_words())
    failed = _print_rows(rows)
    ok = [r.result for r in rows if r.result is not None]
    if ok:
        emit_report(ok, s.get("out"))
    return 1 if failed else 0


def cmd_report(s: Settings) -> int:
    results = load_results(s.input_path())
    if not results:
        raise CliError(f"no runs found under {s.input_path()}")
    emit_report(results, s.get("out"))
    print(f"{len(results)} run(s) written to {s.get('out')}")
    return 0


COMMANDS = {
    "validate": cmd_validate,
    "stats": cmd_stats,
    "run": cmd_run,
    "compare": cmd_compare,
    "sweep": cmd_sweep,
    "report": cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)
    try:
        return COMMANDS[args.command](Settings(args))
    except (CliError, EmptyStreamError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
