"""Streaming Multinomial Naive Bayes over sparse, real-valued feature vectors."""

from __future__ import annotations

import math
from collections import defaultdict

from .featurize import FeatureVector

SNAPSHOT_VERSION = 1


class ColdStartError(RuntimeError):
    """The model has not learned any class yet."""


def argmax(proba: dict[str, float]) -> str:
    """Class of maximal probability, ties to the lexicographically smallest id."""
    if not proba:
        raise ColdStartError("empty distribution")
    return min(proba, key=lambda c: (-proba[c], c))


class MultinomialNB:
    """Multinomial NB with weighted, incremental count updates.

    TF-IDF weights are accumulated as fractional counts. The smoothing denominator uses
    the number of distinct features this model has learned from so far.
    """

    def __init__(self, alpha: float = 1.0):
        if alpha <= 0:
            raise ValueError("alpha must be > 0")
        self.alpha = alpha
        self.class_doc_count: dict[str, float] = {}
        self.class_feature_sum: dict[str, dict[int, float]] = {}
        self.class_total_sum: dict[str, float] = {}
        self.features: set[int] = set()

    @property
    def known_features(self) -> int:
        return len(self.features)

    @property
    def classes(self) -> list[str]:
        return sorted(self.class_doc_count)

    def learn(self, x: FeatureVector, y: str, weight: float = 1.0) -> None:
        if weight < 0:
            raise ValueError(f"negative sample weight {weight}")
        if weight == 0:
            return
        self.class_doc_count[y] = self.class_doc_count.get(y, 0.0) + weight
        sums = self.class_feature_sum.setdefault(y, {})
        total = self.class_total_sum.get(y, 0.0)
        for f, v in x.items():
            sums[f] = sums.get(f, 0.0) + weight * v
            total += weight * v
            self.features.add(f)
        self.class_total_sum[y] = total

    def joint_log_likelihood(self, x: FeatureVector) -> dict[str, float]:
        if not self.class_doc_count:
            raise ColdStartError("no class learned yet")
        n_total = sum(self.class_doc_count.values())
        n_feat = len(self.features)
        scores = {}
        for c, n_c in self.class_doc_count.items():
            sums = self.class_feature_sum[c]
            denom = math.log(self.class_total_sum[c] + self.alpha * n_feat)
            score = math.log(n_c / n_total)
            for f, v in x.items():
                score += v * (math.log(sums.get(f, 0.0) + self.alpha) - denom)
            scores[c] = score
        return scores

    def predict_proba(self, x: FeatureVector) -> dict[str, float]:
        scores = self.joint_log_likelihood(x)
        top = max(scores.values())
        exp = {c: math.exp(s - top) for c, s in scores.items()}
        z = sum(exp.values())
        return {c: e / z for c, e in exp.items()}

    def predict(self, x: FeatureVector) -> str:
        return argmax(self.predict_proba(x))

    def to_dict(self) -> dict:
        return {
            "version": SNAPSHOT_VERSION,
            "alpha": self.alpha,
            "class_doc_count": dict(sorted(self.class_doc_count.items())),
            "class_feature_sum": {
                c: {str(f): v for f, v in sorted(s.items())} for c, s in sorted(self.class_feature_sum.items())
            },
            "class_total_sum": dict(sorted(self.class_total_sum.items())),
            "features": sorted(self.features),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MultinomialNB":
        if data.get("version") != SNAPSHOT_VERSION:
            raise ValueError(f"unsupported snapshot version {data.get('version')}")
        nb = cls(alpha=data["alpha"])
        nb.class_doc_count = dict(data["class_doc_count"])
        nb.class_feature_sum = {c: {int(f): v for f, v in s.items()} for c, s in data["class_feature_sum"].items()}
        nb.class_total_sum = dict(data["class_total_sum"])
        nb.features = set(data["features"])
        return nb

    def __eq__(self, other):
        if not isinstance(other, MultinomialNB):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    __hash__ = None


def check_totals(nb: MultinomialNB) -> dict[str, float]:
    """Recompute per-class totals from the feature sums (test helper)."""
    out: dict[str, float] = defaultdict(float)
    for c, sums in nb.class_feature_sum.items():
        out[c] = math.fsum(sums.values())
    return dict(out)
