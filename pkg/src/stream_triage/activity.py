"""Sliding index of developers who resolved one of the last ``capacity`` issues."""

from __future__ import annotations

from collections import Counter, deque


class ActivityIndex:
    def __init__(self, capacity: int = 100):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.ring: deque[str] = deque()
        self.counts: Counter[str] = Counter()

    def __len__(self) -> int:
        return len(self.ring)

    def record(self, assignee: str) -> str | None:
        """Push the true assignee of the latest issue; returns the evicted one, if any."""
        if not assignee:
            raise ValueError("assignee must be non-empty")
        self.ring.append(assignee)
        self.counts[assignee] += 1
        if len(self.ring) <= self.capacity:
            return None
        old = self.ring.popleft()
        self.counts[old] -= 1
        if self.counts[old] == 0:
            del self.counts[old]
        return old

    def weight(self, assignee: str) -> int:
        return 1 if self.counts.get(assignee, 0) >= 1 else 0

    def apply_mask(self, proba: dict[str, float]) -> tuple[dict[str, float], bool]:
        """Zero out inactive developers and renormalise.

        Returns ``(distribution, fell_back)``; when nothing active keeps any mass the input is
        returned unchanged with ``fell_back=True``.
        """
        masked = {c: p * self.weight(c) for c, p in proba.items()}
        z = sum(masked.values())
        if z <= 0:
            return dict(proba), True
        return {c: p / z for c, p in masked.items()}, False
