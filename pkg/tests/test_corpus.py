import json
from datetime import timedelta

import pytest
from hypothesis import given, strategies as st

from stream_triage.corpus import (
    EmptyStreamError,
    IssueRecord,
    IssueStream,
    ProjectStats,
    filter_projects,
    ingest,
    parse_issue_stream,
    parse_timestamp,
    project_stats,
    write_csv,
    write_jsonl,
    write_rejections,
)
from stream_triage.synthetic import EPOCH, make_stream


def raw(issue_id, assignee="alice", created="2021-03-01T10:00:00Z", project="P", **extra):
    rec = {
        "issue_id": issue_id,
        "project": project,
        "created_at": created,
        "title": f"title {issue_id}",
        "description": "",
        "issue_type": "Bug",
        "priority": "Major",
        "components": ["ui"],
        "labels": [],
        "assignee": assignee,
    }
    rec.update(extra)
    return rec


def write_lines(path, records):
    path.write_text("".join(json.dumps(r) + "\n" for r in records))
    return path


def test_assigneeless_record_is_rejected(tmp_path):
    f = write_lines(tmp_path / "a.jsonl", [raw("1"), raw("2"), raw("3"), raw("4", assignee="")])
    result = ingest(f)
    assert len(result.streams["P"]) == 3
    assert len(result.rejections) == 1
    assert result.rejections[0].line_no == 4
    assert "assignee" in result.rejections[0].reason


def test_equal_timestamps_break_ties_by_issue_id(tmp_path):
    f = write_lines(tmp_path / "a.jsonl", [raw("B"), raw("A")])
    stream = parse_issue_stream(f)
    assert [r.issue_id for r in stream] == ["A", "B"]


def test_chronological_order(tmp_path):
    f = write_lines(
        tmp_path / "a.jsonl",
        [raw("1", created="2021-03-02T00:00:00Z"), raw("2", created="2021-03-01T00:00:00+0000")],
    )
    assert [r.issue_id for r in parse_issue_stream(f)] == ["2", "1"]


@pytest.mark.parametrize(
    "bad, reason",
    [
        ({"created_at": None}, "missing created_at"),
        ({"created_at": "yesterday"}, "bad created_at"),
        ({"title": "  "}, "missing title"),
        ({"priority": None}, "missing priority"),
    ],
)
def test_field_validation(tmp_path, bad, reason):
    f = write_lines(tmp_path / "a.jsonl", [raw("1"), raw("2", **bad)])
    result = ingest(f)
    assert [r.reason for r in result.rejections] == [reason]


def test_malformed_line_and_duplicate_do_not_abort(tmp_path):
    f = tmp_path / "a.jsonl"
    f.write_text(json.dumps(raw("1")) + "\n{not json\n" + json.dumps(raw("1")) + "\n" + json.dumps(raw("2")) + "\n")
    result = ingest(f)
    assert len(result.streams["P"]) == 2
    assert [r.reason.split(":")[0] for r in result.rejections] == ["malformed json", "duplicate issue_id"]


def test_empty_and_missing_files(tmp_path):
    f = tmp_path / "empty.jsonl"
    f.write_text("")
    with pytest.raises(EmptyStreamError):
        ingest(f)
    with pytest.raises(OSError):
        ingest(tmp_path / "nope.jsonl")


def test_csv_round_trip(tmp_path):
    stream = make_stream(30, 3, seed=1)
    write_csv(stream, tmp_path / "s.csv")
    write_jsonl(stream, tmp_path / "s.jsonl")
    from_csv = parse_issue_stream(tmp_path / "s.csv")
    from_jsonl = parse_issue_stream(tmp_path / "s.jsonl")
    assert from_csv == stream
    assert from_jsonl == stream


def test_csv_list_columns(tmp_path):
    f = tmp_path / "a.csv"
    f.write_text(
        "issue_id,project,created_at,title,description,issue_type,priority,components,labels,assignee\n"
        "7,P,2021-01-01T00:00:00Z,crash,,Bug,Minor,ui|core,,bob\n"
    )
    (rec,) = parse_issue_stream(f).issues
    assert rec.components == {"ui", "core"}
    assert rec.labels == frozenset()


def test_multi_project_file(tmp_path):
    f = write_lines(tmp_path / "a.jsonl", [raw("1", project="A"), raw("2", project="B")])
    with pytest.raises(ValueError):
        parse_issue_stream(f)
    assert len(parse_issue_stream(f, project="B")) == 1


def test_replay_is_deterministic(tmp_path):
    f = tmp_path / "s.jsonl"
    write_jsonl(make_stream(50, 4, seed=3), f)
    assert parse_issue_stream(f) == parse_issue_stream(f)


def test_timestamp_millisecond_precision():
    dt = parse_timestamp("2021-03-01T10:00:00.123456+02:00")
    assert dt.microsecond == 123000
    assert dt.utcoffset() == timedelta(0)
    assert parse_timestamp(1_600_000_000_000) == parse_timestamp("2020-09-13T12:26:40Z")


def test_rejection_report_csv(tmp_path):
    f = write_lines(tmp_path / "a.jsonl", [raw("1"), raw("2", assignee=None)])
    write_rejections(ingest(f).rejections, tmp_path / "rej.csv")
    assert (tmp_path / "rej.csv").read_text() == "line_no,reason\n2,missing assignee\n"


# -- filtering -------------------------------------------------------------------------


def counts_stream(project, counts):
    issues = []
    for dev, n in counts.items():
        for _ in range(n):
            i = len(issues)
            issues.append(
                IssueRecord(f"{project}-{i}", project, EPOCH + timedelta(minutes=i), f"issue {i}", "", "Bug",
                            "Major", frozenset(), frozenset(), dev)
            )
    return IssueStream(project, tuple(issues))


def test_four_qualifying_assignees_excluded():
    s = counts_stream("P", {"a": 80, "b": 80, "c": 80, "d": 80, "e": 79})
    assert filter_projects([s]) == []


def test_boundary_is_inclusive():
    s = counts_stream("P", {d: 80 for d in "abcdef"})
    (kept,) = filter_projects([s])
    assert len(kept) == 480


def test_subthreshold_assignees_are_removed():
    s = counts_stream("P", {"a": 3, "b": 2, "c": 1})
    (kept,) = filter_projects([s], min_assignees=2, min_issues_each=2)
    assert {r.assignee for r in kept} == {"a", "b"}
    assert len(kept) == 5
    assert list(kept.issues) == sorted(kept.issues, key=lambda r: r.sort_key)


def test_filter_rejects_bad_thresholds():
    with pytest.raises(ValueError):
        filter_projects([], min_assignees=0)


@given(
    st.dictionaries(st.sampled_from("abcdefg"), st.integers(1, 6), min_size=1),
    st.integers(1, 4),
    st.integers(1, 5),
)
def test_filter_is_idempotent(counts, min_assignees, min_each):
    s = counts_stream("P", counts)
    once = filter_projects([s], min_assignees, min_each)
    assert filter_projects(once, min_assignees, min_each) == once


def test_project_stats():
    assert project_stats(counts_stream("P", {"solo": 10})) == ProjectStats("P", 1, 10, 10)
    assert project_stats(counts_stream("Q", {"a": 5, "b": 3, "c": 3})) == ProjectStats("Q", 3, 11, 3)
    with pytest.raises(EmptyStreamError):
        project_stats(IssueStream("E", ()))
