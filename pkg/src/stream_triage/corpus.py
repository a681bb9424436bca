"""Issue ingestion: parsing, validation, chronological ordering and project filtering."""

from __future__ import annotations

import csv
import json
import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Iterator

logger = logging.getLogger(__name__)

FIELDS = (
    "issue_id",
    "project",
    "created_at",
    "title",
    "description",
    "issue_type",
    "priority",
    "components",
    "labels",
    "assignee",
)
REQUIRED = ("issue_id", "project", "created_at", "title", "issue_type", "priority", "assignee")
LIST_SEPARATOR = "|"


class EmptyStreamError(ValueError):
    """Raised when a stream (or an ingest) holds no valid issue."""

    def __init__(self, message: str, rejections: list | None = None):
        super().__init__(message)
        self.rejections = rejections or []


@dataclass(frozen=True)
class IssueRecord:
    issue_id: str
    project_key: str
    created_at: datetime
    title: str
    description: str
    issue_type: str
    priority: str
    components: frozenset[str]
    labels: frozenset[str]
    assignee: str

    @property
    def sort_key(self) -> tuple[datetime, str]:
        return (self.created_at, self.issue_id)

    def to_json(self) -> dict:
        return {
            "issue_id": self.issue_id,
            "project": self.project_key,
            "created_at": format_timestamp(self.created_at),
            "title": self.title,
            "description": self.description,
            "issue_type": self.issue_type,
            "priority": self.priority,
            "components": sorted(self.components),
            "labels": sorted(self.labels),
            "assignee": self.assignee,
        }


@dataclass(frozen=True)
class IssueStream:
    """Issues of one project, ascending by ``(created_at, issue_id)``."""

    project_key: str
    issues: tuple[IssueRecord, ...]

    def __post_init__(self):
        object.__setattr__(self, "issues", tuple(sorted(self.issues, key=lambda r: r.sort_key)))

    def __len__(self) -> int:
        return len(self.issues)

    def __iter__(self) -> Iterator[IssueRecord]:
        return iter(self.issues)


@dataclass(frozen=True)
class ProjectStats:
    project_key: str
    n_assignees: int
    n_issues: int
    issues_per_assignee: int


@dataclass(frozen=True)
class Rejection:
    line_no: int
    reason: str


@dataclass
class Ingest:
    """Everything read from one export file."""

    streams: dict[str, IssueStream]
    rejections: list[Rejection] = field(default_factory=list)

    @property
    def n_valid(self) -> int:
        return sum(len(s) for s in self.streams.values())


def parse_timestamp(value) -> datetime:
    """Parse ISO-8601 (or epoch milliseconds) into an aware UTC datetime at ms precision."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        dt = datetime.fromtimestamp(value / 1000.0, tz=timezone.utc)
    elif isinstance(value, str) and value.strip():
        text = value.strip()
        if text.endswith("Z") or text.endswith("z"):
            text = text[:-1] + "+00:00"
        # Jira writes offsets without a colon, e.g. +0000
        if len(text) > 5 and text[-5] in "+-" and text[-4:].isdigit() and ":" not in text[-5:]:
            text = text[:-2] + ":" + text[-2:]
        dt = datetime.fromisoformat(text)
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        dt = dt.astimezone(timezone.utc)
    else:
        raise ValueError(f"unparseable timestamp {value!r}")
    return dt.replace(microsecond=(dt.microsecond // 1000) * 1000)


def format_timestamp(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).isoformat(timespec="milliseconds").replace("+00:00", "Z")


def _as_set(value) -> frozenset[str]:
    if value is None:
        return frozenset()
    if isinstance(value, str):
        parts = value.split(LIST_SEPARATOR)
    else:
        parts = list(value)
    return frozenset(str(p).strip() for p in parts if p is not None and str(p).strip())


def _as_text(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float) and math.isnan(value):
        return ""
    return str(value).strip()


def record_from_mapping(raw: dict) -> IssueRecord:
    """Validate one raw record. Raises ``ValueError`` with a short reason on failure."""
    if not isinstance(raw, dict):
        raise ValueError("record is not an object")
    for key in REQUIRED:
        if not _as_text(raw.get(key)):
            raise ValueError(f"missing {key}")
    try:
        created = parse_timestamp(raw["created_at"])
    except (TypeError, ValueError, OverflowError):
        raise ValueError("bad created_at") from None
    return IssueRecord(
        issue_id=_as_text(raw["issue_id"]),
        project_key=_as_text(raw["project"]),
        created_at=created,
        title=_as_text(raw["title"]),
        description=_as_text(raw.get("description")),
        issue_type=_as_text(raw["issue_type"]),
        priority=_as_text(raw["priority"]),
        components=_as_set(raw.get("components")),
        labels=_as_set(raw.get("labels")),
        assignee=_as_text(raw["assignee"]),
    )


def _iter_raw(path: Path, fmt: str) -> Iterator[tuple[int, dict | None, str | None]]:
    # yields (line_no, raw_record, parse_error)
    with open(path, newline="", encoding="utf-8") as fh:
        if fmt == "jsonl":
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    yield line_no, json.loads(line), None
                except json.JSONDecodeError as exc:
                    yield line_no, None, f"malformed json: {exc.msg}"
        elif fmt == "csv":
            reader = csv.DictReader(fh)
            for row in reader:
                # line_num points at the last physical line of the row
                yield reader.line_num, row, None
        else:
            raise ValueError(f"unknown format {fmt!r}")


def infer_format(path: str | Path) -> str:
    suffix = Path(path).suffix.lower()
    if suffix in (".jsonl", ".ndjson", ".json"):
        return "jsonl"
    if suffix == ".csv":
        return "csv"
    raise ValueError(f"cannot infer format of {path}; pass jsonl or csv")


def ingest(path: str | Path, fmt: str | None = None) -> Ingest:
    """Read an export file into per-project streams plus a rejection report.

    Malformed records are rejected one by one; an unreadable file raises ``OSError``
    and a file without a single valid record raises ``EmptyStreamError``.
    """
    path = Path(path)
    fmt = fmt or infer_format(path)
    by_project: dict[str, list[IssueRecord]] = defaultdict(list)
    seen: set[tuple[str, str]] = set()
    rejections: list[Rejection] = []
    for line_no, raw, error in _iter_raw(path, fmt):
        if error is not None:
            rejections.append(Rejection(line_no, error))
            continue
        try:
            rec = record_from_mapping(raw)
        except ValueError as exc:
            rejections.append(Rejection(line_no, str(exc)))
            continue
        key = (rec.project_key, rec.issue_id)
        if key in seen:
            rejections.append(Rejection(line_no, "duplicate issue_id"))
            continue
        seen.add(key)
        by_project[rec.project_key].append(rec)
    if not by_project:
        raise EmptyStreamError(f"no valid issue records in {path}", rejections)
    if rejections:
        logger.info("%s: %d records rejected", path, len(rejections))
    streams = {k: IssueStream(k, tuple(v)) for k, v in sorted(by_project.items())}
    return Ingest(streams, rejections)


def parse_issue_stream(path: str | Path, fmt: str | None = None, project: str | None = None) -> IssueStream:
    """Parse a single-project export. Use :func:`ingest` for multi-project files."""
    result = ingest(path, fmt)
    if project is None:
        if len(result.streams) > 1:
            raise ValueError(f"{path} holds {len(result.streams)} projects; pick one with project=")
        return next(iter(result.streams.values()))
    try:
        return result.streams[project]
    except KeyError:
        raise EmptyStreamError(f"no valid issues for project {project!r} in {path}") from None


def write_rejections(rejections: Iterable[Rejection], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["line_no", "reason"])
        for r in rejections:
            writer.writerow([r.line_no, r.reason])


def write_jsonl(issues: Iterable[IssueRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in issues:
            fh.write(json.dumps(rec.to_json(), sort_keys=True) + "\n")


def write_csv(issues: Iterable[IssueRecord], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=FIELDS, lineterminator="\n")
        writer.writeheader()
        for rec in issues:
            row = rec.to_json()
            row["components"] = LIST_SEPARATOR.join(row["components"])
            row["labels"] = LIST_SEPARATOR.join(row["labels"])
            writer.writerow(row)


def filter_projects(
    streams: Iterable[IssueStream] | dict[str, IssueStream],
    min_assignees: int = 5,
    min_issues_each: int = 80,
) -> list[IssueStream]:
    """Keep projects with at least ``min_assignees`` developers holding ``min_issues_each`` issues.

    Issues of developers below the per-assignee threshold are dropped from kept projects,
    so the label space is exactly the qualifying set.
    """
    if min_assignees < 1 or min_issues_each < 1:
        raise ValueError("thresholds must be >= 1")
    if isinstance(streams, dict):
        streams = streams.values()
    kept = []
    for stream in streams:
        counts = Counter(r.assignee for r in stream.issues)
        qualifying = {a for a, n in counts.items() if n >= min_issues_each}
        if len(qualifying) < min_assignees:
            continue
        issues = tuple(r for r in stream.issues if r.assignee in qualifying)
        kept.append(replace(stream, issues=issues))
    return sorted(kept, key=lambda s: s.project_key)


def project_stats(stream: IssueStream) -> ProjectStats:
    if not stream.issues:
        raise EmptyStreamError(f"project {stream.project_key} has no issues")
    n_assignees = len({r.assignee for r in stream.issues})
    n_issues = len(stream.issues)
    return ProjectStats(stream.project_key, n_assignees, n_issues, n_issues // n_assignees)
