"""ADWIN change detector over a stream of 0/1 bits.

The window is an exponential histogram: row ``r`` holds at most ``max_buckets`` buckets,
each summarising ``2**r`` consecutive bits by their sum. Older data sits in higher rows,
and within a row the left end is oldest, so walking rows from the top down and each row
left to right visits buckets oldest to newest.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

SNAPSHOT_VERSION = 1


class EmptyWindowError(ValueError):
    pass


@dataclass(frozen=True)
class DriftEvent:
    instance_index: int
    pre_window_len: int
    post_window_len: int
    mean_before: float
    mean_after: float


def hoeffding_cut(n0: int, n1: int, width: int, delta: float) -> float:
    m = 1.0 / (1.0 / n0 + 1.0 / n1)
    delta_prime = delta / width
    return math.sqrt(1.0 / (2.0 * m) * math.log(4.0 / delta_prime))


def variance_cut(n0: int, n1: int, width: int, delta: float, variance: float) -> float:
    m = 1.0 / (1.0 / n0 + 1.0 / n1)
    log_term = math.log(2.0 / (delta / width))
    return math.sqrt(2.0 / m * variance * log_term) + 2.0 / (3.0 * m) * log_term


class Adwin:
    def __init__(
        self,
        delta: float = 0.002,
        max_buckets: int = 5,
        min_sub_window: int = 5,
        use_variance: bool = False,
    ):
        if not 0 < delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if max_buckets < 2:
            raise ValueError("max_buckets must be >= 2")
        self.delta = delta
        self.max_buckets = max_buckets
        self.min_sub_window = max(1, min_sub_window)
        self.use_variance = use_variance
        self.rows: list[deque[int]] = []
        self.width = 0
        self.total = 0
        self.n_seen = 0
        self.last_event: DriftEvent | None = None

    def __len__(self) -> int:
        return self.width

    @property
    def mean(self) -> float:
        if self.width == 0:
            raise EmptyWindowError("mean of an empty window")
        return self.total / self.width

    @property
    def variance(self) -> float:
        # exact for 0/1 data
        mu = self.mean
        return mu * (1.0 - mu)

    def bucket_sizes(self) -> list[int]:
        """Bucket lengths oldest to newest."""
        return [1 << r for r in range(len(self.rows) - 1, -1, -1) for _ in self.rows[r]]

    def buckets(self) -> list[tuple[int, int]]:
        """``(sum, count)`` pairs oldest to newest."""
        return [(s, 1 << r) for r in range(len(self.rows) - 1, -1, -1) for s in self.rows[r]]

    def n_buckets(self) -> int:
        return sum(len(row) for row in self.rows)

    def _insert(self, bit: int) -> None:
        if not self.rows:
            self.rows.append(deque())
        self.rows[0].append(bit)
        self.width += 1
        self.total += bit
        r = 0
        while len(self.rows[r]) > self.max_buckets:
            merged = self.rows[r].popleft() + self.rows[r].popleft()
            if r + 1 == len(self.rows):
                self.rows.append(deque())
            self.rows[r + 1].append(merged)
            r += 1

    def _threshold(self, n0: int, n1: int) -> float:
        if self.use_variance:
            return variance_cut(n0, n1, self.width, self.delta, self.variance)
        return hoeffding_cut(n0, n1, self.width, self.delta)

    def _find_cut(self) -> int | None:
        """Number of oldest buckets forming the first firing tail sub-window, if any."""
        n0 = s0 = 0
        n_buckets = self.n_buckets()
        for i, (s, n) in enumerate(self.buckets()):
            if i == n_buckets - 1:
                break
            n0 += n
            s0 += s
            n1 = self.width - n0
            if n0 < self.min_sub_window:
                continue
            if n1 < self.min_sub_window:
                break
            diff = abs(s0 / n0 - (self.total - s0) / n1)
            if diff >= self._threshold(n0, n1):
                return i + 1
        return None

    def _drop_oldest(self, n_buckets: int) -> None:
        for _ in range(n_buckets):
            row = self.rows[-1]
            self.total -= row.popleft()
            self.width -= 1 << (len(self.rows) - 1)
            while self.rows and not self.rows[-1]:
                self.rows.pop()

    def update(self, bit: int) -> bool:
        """Append one bit; return True if the window was cut."""
        if bit not in (0, 1):
            raise ValueError(f"ADWIN takes 0/1 bits, got {bit!r}")
        bit = int(bit)
        self.n_seen += 1
        self._insert(bit)
        pre_len, pre_mean = self.width, self.total / self.width
        detected = False
        while (cut := self._find_cut()) is not None:
            self._drop_oldest(cut)
            detected = True
        if detected:
            self.last_event = DriftEvent(self.n_seen, pre_len, self.width, pre_mean, self.mean)
        return detected

    def reset(self) -> None:
        self.rows = []
        self.width = self.total = 0

    def to_dict(self) -> dict:
        return {
            "version": SNAPSHOT_VERSION,
            "delta": self.delta,
            "max_buckets": self.max_buckets,
            "min_sub_window": self.min_sub_window,
            "use_variance": self.use_variance,
            "rows": [list(r) for r in self.rows],
            "n_seen": self.n_seen,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Adwin":
        ad = cls(data["delta"], data["max_buckets"], data["min_sub_window"], data["use_variance"])
        ad.rows = [deque(r) for r in data["rows"]]
        ad.width = sum(len(r) << i for i, r in enumerate(ad.rows))
        ad.total = sum(sum(r) for r in ad.rows)
        ad.n_seen = data["n_seen"]
        return ad
