"""Incremental TF-IDF plus one-hot metadata and ordinal priority.

Feature vectors are plain ``dict[int, float]`` mappings with strictly positive weights.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict

from .corpus import IssueRecord

FeatureVector = Dict[int, float]

PRIORITY_FEATURE = 0

# Standard Jira priority names; Critical -> 4/5 = 0.8.
DEFAULT_PRIORITY_SCALE = {"Trivial": 1, "Minor": 2, "Major": 3, "Critical": 4, "Blocker": 5}

STOP_WORDS = frozenset(
    """
    a about above after again against all am an and any are as at be because been before
    being below between both but by can could did do does doing down during each few for
    from further had has have having he her here hers herself him himself his how if in
    into is it its itself just me more most my myself no nor not now of off on once only
    or other our ours ourselves out over own same she should so some such than that the
    their theirs them themselves then there these they this those through to too under
    until up very was we were what when where which while who whom why will with would
    you your yours yourself yourselves also may might must shall us via etc ie eg
    """.split()
)

_WORD = re.compile(r"[^\W_]+")


def tokenize(text: str, stop_words: frozenset[str] = STOP_WORDS) -> list[str]:
    """Lowercase, split on non-alphanumerics, drop short, numeric and stop-word tokens."""
    return [
        tok
        for tok in _WORD.findall(text.lower())
        if len(tok) >= 2 and not tok.isdigit() and tok not in stop_words
    ]


def load_stop_words(path: str | Path) -> frozenset[str]:
    with open(path, encoding="utf-8") as fh:
        return frozenset(line.strip().lower() for line in fh if line.strip())


def load_priority_scales(path: str | Path) -> dict[str, dict[str, int]]:
    """Read a priority sidecar.

    Either a flat ``{"Minor": 2, ...}`` mapping (used for every project, key ``"*"``)
    or ``{"PROJ": {...}, "*": {...}}`` keyed by project.
    """
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if all(isinstance(v, int) for v in data.values()):
        return {"*": dict(data)}
    return {k: {name: int(rank) for name, rank in v.items()} for k, v in data.items()}


def scale_for(scales: dict[str, dict[str, int]] | None, project: str) -> dict[str, int]:
    if not scales:
        return dict(DEFAULT_PRIORITY_SCALE)
    return dict(scales.get(project) or scales.get("*") or DEFAULT_PRIORITY_SCALE)


def smoothed_idf(n_docs: int, df: int) -> float:
    return math.log((1 + n_docs) / (1 + df)) + 1.0


def document_text(issue: IssueRecord) -> str:
    return issue.title + " " + issue.description


def categorical_values(issue: IssueRecord) -> list[tuple[str, str]]:
    values = [("issue_type", issue.issue_type)]
    values += [("component", c) for c in sorted(issue.components)]
    values += [("label", lab) for lab in sorted(issue.labels)]
    return values


@dataclass
class Vectorizer:
    """Online TF-IDF state. ``observe`` grows it, ``vectorize`` only reads it."""

    priority_scale: dict[str, int] = field(default_factory=lambda: dict(DEFAULT_PRIORITY_SCALE))
    stop_words: frozenset[str] = STOP_WORDS
    vocabulary: dict[str, int] = field(default_factory=dict)
    df: dict[str, int] = field(default_factory=dict)
    n_docs: int = 0
    category_space: dict[tuple[str, str], int] = field(default_factory=dict)
    next_id: int = PRIORITY_FEATURE + 1

    def __post_init__(self):
        if not self.priority_scale:
            raise ValueError("priority scale must not be empty")

    def _new_id(self) -> int:
        fid = self.next_id
        self.next_id += 1
        return fid

    def observe(self, issue: IssueRecord) -> None:
        self.n_docs += 1
        for tok in dict.fromkeys(tokenize(document_text(issue), self.stop_words)):
            if tok not in self.vocabulary:
                self.vocabulary[tok] = self._new_id()
                self.df[tok] = 0
            self.df[tok] += 1
        for key in categorical_values(issue):
            if key not in self.category_space:
                self.category_space[key] = self._new_id()

    def idf(self, token: str) -> float:
        return smoothed_idf(self.n_docs, self.df[token])

    def priority_weight(self, priority: str) -> tuple[float, bool]:
        """Return ``(weight, known)``; unknown names fall back to the scale midpoint."""
        size = len(self.priority_scale)
        if priority in self.priority_scale:
            return self.priority_scale[priority] / size, True
        ranks = self.priority_scale.values()
        return (min(ranks) + max(ranks)) / 2 / size, False

    def vectorize(self, issue: IssueRecord, warnings: list | None = None) -> FeatureVector:
        tf = Counter(t for t in tokenize(document_text(issue), self.stop_words) if t in self.vocabulary)
        text = {self.vocabulary[t]: n * self.idf(t) for t, n in tf.items()}
        norm = math.sqrt(sum(w * w for w in text.values()))
        x: FeatureVector = {fid: w / norm for fid, w in text.items()} if norm > 0 else {}
        for key in categorical_values(issue):
            fid = self.category_space.get(key)
            if fid is not None:
                x[fid] = 1.0
        weight, known = self.priority_weight(issue.priority)
        if not known and warnings is not None:
            warnings.append((issue.issue_id, f"unknown priority {issue.priority!r}"))
        if weight > 0:
            x[PRIORITY_FEATURE] = weight
        return x

    def observe_vectorize(self, issue: IssueRecord, warnings: list | None = None) -> FeatureVector:
        self.observe(issue)
        return self.vectorize(issue, warnings)
