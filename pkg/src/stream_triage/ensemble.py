"""Online AdaBoost (Poisson-weighted) over Multinomial NB weak learners."""

from __future__ import annotations

import math

import numpy as np

from .featurize import FeatureVector
from .learner import ColdStartError, MultinomialNB, argmax

SNAPSHOT_VERSION = 1
EPS_CLAMP = 1e-10


class OnlineBoost:
    """Ensemble of ``size`` NB members trained with Poisson(lambda) example weights.

    ``lambda_sc``/``lambda_sw`` accumulate correctly/wrongly classified weight per member;
    ``member_acc`` is an exponentially weighted prequential accuracy that ranks members
    for :meth:`replace_weakest`.
    """

    def __init__(self, size: int = 10, alpha: float = 1.0, seed: int | None = 42, acc_decay: float = 0.99):
        if size < 1:
            raise ValueError("ensemble size must be >= 1")
        self.size = size
        self.alpha = alpha
        self.acc_decay = acc_decay
        self.members = [MultinomialNB(alpha) for _ in range(size)]
        self.lambda_sc = [0.0] * size
        self.lambda_sw = [0.0] * size
        self.member_acc = [0.0] * size
        self.rng = np.random.default_rng(seed)

    def _member_predict(self, m: int, x: FeatureVector) -> str | None:
        try:
            return self.members[m].predict(x)
        except ColdStartError:
            return None

    def error(self, m: int) -> float | None:
        total = self.lambda_sc[m] + self.lambda_sw[m]
        if total == 0:
            return None
        return self.lambda_sw[m] / total

    def learn(self, x: FeatureVector, y: str) -> None:
        lam = 1.0
        for m, member in enumerate(self.members):
            before = self._member_predict(m, x)
            hit = 1.0 if before == y else 0.0
            self.member_acc[m] = self.acc_decay * self.member_acc[m] + (1 - self.acc_decay) * hit

            k = int(self.rng.poisson(lam))
            member.learn(x, y, weight=float(k))

            if self._member_predict(m, x) == y:
                self.lambda_sc[m] += lam
                lam *= (self.lambda_sc[m] + self.lambda_sw[m]) / (2 * self.lambda_sc[m])
            else:
                self.lambda_sw[m] += lam
                lam *= (self.lambda_sc[m] + self.lambda_sw[m]) / (2 * self.lambda_sw[m])

    def vote_weight(self, m: int) -> float | None:
        """ln((1 - e)/e) for members with error below 1/2, ln 2 for unscored ones, else None."""
        err = self.error(m)
        if err is None:
            return math.log(2.0)
        err = min(max(err, EPS_CLAMP), 1 - EPS_CLAMP)
        if err >= 0.5:
            return None
        return math.log((1 - err) / err)

    def predict_proba(self, x: FeatureVector) -> dict[str, float]:
        votes: list[tuple[str, float | None]] = []
        for m in range(self.size):
            label = self._member_predict(m, x)
            if label is not None:
                votes.append((label, self.vote_weight(m)))
        if not votes:
            raise ColdStartError("no ensemble member can predict yet")
        scores: dict[str, float] = {}
        weighted = [(label, w) for label, w in votes if w is not None and w > 0]
        if not weighted:
            # every member is at or above 50% error: fall back to a plain majority vote
            weighted = [(label, 1.0) for label, _ in votes]
        for label, w in weighted:
            scores[label] = scores.get(label, 0.0) + w
        z = sum(scores.values())
        return {c: s / z for c, s in sorted(scores.items())}

    def predict(self, x: FeatureVector) -> str:
        return argmax(self.predict_proba(x))

    def replace_weakest(self, k: int = 5) -> list[int]:
        """Swap the ``k`` lowest-accuracy members for fresh ones; returns replaced indices."""
        if not 0 <= k <= self.size:
            raise ValueError(f"k={k} outside [0, {self.size}]")
        order = sorted(range(self.size), key=lambda m: (self.member_acc[m], m))
        replaced = sorted(order[:k])
        for m in replaced:
            self.members[m] = MultinomialNB(self.alpha)
            self.lambda_sc[m] = 0.0
            self.lambda_sw[m] = 0.0
            self.member_acc[m] = 0.0
        return replaced

    def to_dict(self) -> dict:
        return {
            "version": SNAPSHOT_VERSION,
            "size": self.size,
            "alpha": self.alpha,
            "acc_decay": self.acc_decay,
            "members": [m.to_dict() for m in self.members],
            "lambda_sc": list(self.lambda_sc),
            "lambda_sw": list(self.lambda_sw),
            "member_acc": list(self.member_acc),
            "rng": self.rng.bit_generator.state,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "OnlineBoost":
        if data.get("version") != SNAPSHOT_VERSION:
            raise ValueError(f"unsupported snapshot version {data.get('version')}")
        ens = cls(size=data["size"], alpha=data["alpha"], seed=0, acc_decay=data["acc_decay"])
        ens.members = [MultinomialNB.from_dict(m) for m in data["members"]]
        ens.lambda_sc = list(data["lambda_sc"])
        ens.lambda_sw = list(data["lambda_sw"])
        ens.member_acc = list(data["member_acc"])
        ens.rng.bit_generator.state = data["rng"]
        return ens
