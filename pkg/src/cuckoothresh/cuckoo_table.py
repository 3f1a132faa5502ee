"""A k-ary cuckoo hash table with one item per slot.

Each item gets k distinct pseudo-random slots derived from ``(seed, item)``
with keyed BLAKE2b, standing in for fully random location choices. Items
can be inserted online with random-walk eviction, or the whole set can be
placed offline by a maximum matching, which succeeds exactly when some
valid placement exists.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .hypergraph import Hypergraph
from .orientation import max_matching

__all__ = ["CuckooTable", "TableStats", "InsertResult", "build_offline", "default_max_steps"]

_MASK64 = (1 << 64) - 1


def default_max_steps(capacity: int) -> int:
    return math.ceil(100 * math.log(capacity + 1))


@dataclass
class TableStats:
    inserts: int = 0
    evictions: int = 0
    failures: int = 0


@dataclass(frozen=True)
class InsertResult:
    success: bool
    evictions: int = 0
    reason: str = ""

    def __bool__(self) -> bool:
        return self.success


@dataclass
class CuckooTable:
    capacity: int
    k: int
    seed: int = 0
    max_steps: int | None = None
    slots: list[int | None] = field(init=False, repr=False)
    stats: TableStats = field(default_factory=TableStats)

    def __post_init__(self) -> None:
        if self.k < 2:
            raise ValueError(f"need k >= 2, got {self.k}")
        if self.capacity < self.k:
            raise ValueError(f"capacity {self.capacity} is smaller than k={self.k}")
        if self.max_steps is None:
            self.max_steps = default_max_steps(self.capacity)
        self.slots = [None] * self.capacity
        self._key = (self.seed & _MASK64).to_bytes(8, "little")
        self._walk = random.Random(self.seed)
        self._cache: dict[int, tuple[int, ...]] = {}

    def locations(self, item: int) -> tuple[int, ...]:
        """The k distinct slots of ``item``, a deterministic function of (seed, item)."""
        cached = self._cache.get(item)
        if cached is not None:
            return cached
        data = (item & _MASK64).to_bytes(8, "little")
        chosen: list[int] = []
        counter = 0
        while len(chosen) < self.k:
            digest = hashlib.blake2b(data + counter.to_bytes(4, "little"), key=self._key).digest()
            for off in range(0, 64, 8):
                # multiply-shift maps a 64-bit word onto [0, capacity)
                slot = (int.from_bytes(digest[off:off + 8], "little") * self.capacity) >> 64
                if slot not in chosen:
                    chosen.append(slot)
                    if len(chosen) == self.k:
                        break
            counter += 1
        out = tuple(chosen)
        self._cache[item] = out
        return out

    def lookup(self, item: int) -> bool:
        return any(self.slots[s] == item for s in self.locations(item))

    def insert(self, item: int) -> InsertResult:
        """Random-walk insertion.

        A free location (lowest index first) takes the item; otherwise the
        occupant of a uniformly chosen location among the k is evicted and
        re-inserted the same way. After ``max_steps`` evictions the walk is
        undone and the item is reported as failed.
        """
        if self.lookup(item):
            return InsertResult(True)
        trail: list[tuple[int, int]] = []  # (slot, previous occupant)
        current = item
        while True:
            locs = self.locations(current)
            free = [s for s in locs if self.slots[s] is None]
            if free:
                self.slots[min(free)] = current
                self.stats.inserts += 1
                self.stats.evictions += len(trail)
                return InsertResult(True, evictions=len(trail))
            if len(trail) >= self.max_steps:
                for slot, prev in reversed(trail):
                    self.slots[slot] = prev
                self.stats.failures += 1
                return InsertResult(False, evictions=len(trail), reason="steps_exhausted")
            slot = locs[self._walk.randrange(self.k)]
            evicted = self.slots[slot]
            trail.append((slot, evicted))
            self.slots[slot] = current
            current = evicted

    def load_factor(self) -> float:
        return sum(s is not None for s in self.slots) / self.capacity

    def occupied(self) -> int:
        return sum(s is not None for s in self.slots)

    def hypergraph(self, items: Iterable[int]) -> Hypergraph:
        """Location sets of ``items`` as a k-graph on the table slots."""
        rows = [self.locations(x) for x in items]
        return Hypergraph(self.capacity, self.k, np.array(rows, dtype=np.int64).reshape(-1, self.k))


def build_offline(capacity: int, k: int, seed: int, items: list[int],
                  backend: str = "python") -> tuple[CuckooTable, bool]:
    """Place all items at once via maximum matching.

    On failure the table holds the matched subset and the flag is False.
    """
    table = CuckooTable(capacity, k, seed)
    items = list(dict.fromkeys(items))
    H = table.hypergraph(items)
    size, assignment = max_matching(H, backend=backend)
    for e, slot in assignment.edge_to_vertex.items():
        table.slots[slot] = items[e]
    table.stats.inserts = size
    table.stats.failures = len(items) - size
    return table, size == len(items)
