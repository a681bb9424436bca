"""Synthetic issue streams with controllable vocabulary overlap and team turnover."""

from __future__ import annotations

import random
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

from .corpus import IssueRecord, IssueStream

EPOCH = datetime(2020, 1, 1, tzinfo=timezone.utc)
PRIORITIES = ("Trivial", "Minor", "Major", "Critical", "Blocker")


@dataclass(frozen=True)
class Developer:
    name: str
    start: int = 0  # first issue index the developer can receive
    stop: int | None = None  # exclusive
    topic: str | None = None  # vocabulary owner; defaults to the developer's own


def _words(prefix: str, n: int) -> list[str]:
    return [f"{prefix}w{i}" for i in range(n)]


def make_stream(
    n_issues: int = 400,
    developers: list[Developer] | int = 4,
    project: str = "SYN",
    own_words: int = 12,
    shared_words: int = 30,
    words_per_issue: int = 8,
    own_fraction: float = 0.8,
    seed: int = 0,
) -> IssueStream:
    """Each developer owns a private vocabulary and component; issues draw ``own_fraction``
    of their words from the assignee's vocabulary and the rest from a shared pool.

    ``own_fraction=1.0`` gives a stream where assignees have disjoint vocabularies.
    """
    rng = random.Random(seed)
    if isinstance(developers, int):
        developers = [Developer(f"dev{i}") for i in range(developers)]
    topics = {d.topic or d.name for d in developers}
    vocab = {t: _words(f"{t}x", own_words) for t in sorted(topics)}
    shared = _words("common", shared_words)
    issues = []
    for i in range(n_issues):
        active = [d for d in developers if d.start <= i and (d.stop is None or i < d.stop)]
        if not active:
            raise ValueError(f"no active developer at issue {i}")
        dev = rng.choice(active)
        words = [
            rng.choice(vocab[dev.topic or dev.name]) if rng.random() < own_fraction else rng.choice(shared)
            for _ in range(words_per_issue)
        ]
        half = max(1, words_per_issue // 3)
        issues.append(
            IssueRecord(
                issue_id=f"{project}-{i + 1}",
                project_key=project,
                created_at=EPOCH + timedelta(hours=i),
                title=" ".join(words[:half]),
                description=" ".join(words[half:]),
                issue_type=rng.choice(("Bug", "Improvement", "Task")),
                priority=rng.choice(PRIORITIES),
                components=frozenset({f"comp-{dev.topic or dev.name}"} if rng.random() < own_fraction else {"core"}),
                labels=frozenset(),
                assignee=dev.name,
            )
        )
    return IssueStream(project, tuple(issues))


def turnover_stream(n_issues: int = 1200, seed: int = 0, project: str = "TURNOVER") -> IssueStream:
    """Five developers active at any time. At a third of the stream two of them hand their
    topics to newcomers; at two thirds one newcomer hands over again."""
    third, two_thirds = n_issues // 3, 2 * n_issues // 3
    devs = [
        Developer("alice"),
        Developer("bob"),
        Developer("carol"),
        Developer("dave", stop=third),
        Developer("erin", stop=third),
        Developer("frank", start=third, stop=two_thirds, topic="dave"),
        Developer("grace", start=third, topic="erin"),
        Developer("heidi", start=two_thirds, topic="dave"),
    ]
    return make_stream(n_issues, devs, project=project, own_fraction=0.7, seed=seed)
