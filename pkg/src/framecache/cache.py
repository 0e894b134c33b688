"""Fixed-capacity reference buffer with redundancy-aware replacement.

The buffer keeps a live pairwise cosine-similarity matrix S over the stored
appearance vectors plus its off-diagonal row sums r. Both are maintained
incrementally on every insertion/replacement; ``oracle_recompute`` rebuilds
them from scratch and is the correctness guard for the incremental path.

Replacement gain for slot i against a newcomer with similarity vector s:

    g_i = (r_i + 1) - 2*r_i + 2*(sum(s) - s_i)

where the leading term is the full row sum of S including the unit diagonal.
Lower gain means slot i is a better eviction target: it is redundant within
the cache and similar to the newcomer. Slot 0 (the initial input frame) is
pinned and never evicted.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    CacheTooSmall,
    ConfigError,
    DimensionMismatch,
    EmptyGains,
    ZeroNormVector,
)
from .vectors import NORM_EPSILON, as_vector, cosine_similarity

DEFAULT_CAPACITY = 8
DEFAULT_REDUNDANCY_THRESHOLD = 1.0


@dataclass(frozen=True)
class CachePolicyConfig:
    capacity: int = DEFAULT_CAPACITY
    redundancy_threshold: float = DEFAULT_REDUNDANCY_THRESHOLD

    def __post_init__(self):
        if not isinstance(self.capacity, int) or self.capacity < 2:
            raise ConfigError(
                f"capacity must be an integer >= 2 (slot 0 is pinned), got {self.capacity!r}"
            )
        if not np.isfinite(self.redundancy_threshold):
            raise ConfigError("redundancy_threshold must be finite")


@dataclass(frozen=True, eq=False)
class CacheEntry:
    """One buffered reference frame. ``slot`` is assigned by the cache."""

    slot: int
    frame_id: str
    appearance: np.ndarray
    pose: np.ndarray
    score: float
    admitted_at: int

    def __post_init__(self):
        object.__setattr__(self, "appearance", as_vector(self.appearance, "appearance"))
        object.__setattr__(self, "pose", as_vector(self.pose, "pose"))
        if float(np.linalg.norm(self.appearance)) < NORM_EPSILON:
            raise ZeroNormVector(f"entry {self.frame_id!r}: appearance has zero norm")
        if float(np.linalg.norm(self.pose)) < NORM_EPSILON:
            raise ZeroNormVector(f"entry {self.frame_id!r}: pose has zero norm")
        if not 0.0 <= self.score <= 1.0:
            raise ConfigError(f"entry score must lie in [0, 1], got {self.score}")


@dataclass(frozen=True)
class EvictionDecision:
    evict: bool
    slot: int
    gain: float


@dataclass(frozen=True)
class ReplacementDecision:
    kind: str  # "inserted" | "replaced" | "rejected"
    slot: Optional[int]  # inserted slot, or evicted slot
    gain: Optional[float]  # winning (minimum) gain; None on the not-full path
    gains: Optional[dict]  # slot -> gain for slots > 0; None on the not-full path


def select_eviction(gains: dict, theta_g: float) -> EvictionDecision:
    """Pick the lowest-gain slot (ties to the lowest index); evict iff gain < theta_g."""
    if not gains:
        raise EmptyGains("no evictable slots")
    slot, gain = min(gains.items(), key=lambda kv: (kv[1], kv[0]))
    return EvictionDecision(evict=gain < theta_g, slot=slot, gain=gain)


class ReferenceCache:
    """Single-writer buffer; reads may run concurrently between mutations."""

    def __init__(self, initial: CacheEntry, config: CachePolicyConfig):
        self.config = config
        self.capacity = config.capacity
        anchor = dataclasses.replace(initial, slot=0)
        self.entries: list[CacheEntry] = [anchor]
        self.sim_matrix = np.ones((1, 1), dtype=np.float64)
        self.row_sums = np.zeros(1, dtype=np.float64)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def full(self) -> bool:
        return len(self.entries) == self.capacity

    @property
    def d_a(self) -> int:
        return self.entries[0].appearance.size

    @property
    def d_p(self) -> int:
        return self.entries[0].pose.size

    def similarity_vector(self, x_new) -> np.ndarray:
        """Cosine of the candidate appearance against every cached entry, in slot order."""
        x = as_vector(x_new, "candidate appearance")
        if x.size != self.d_a:
            raise DimensionMismatch(self.d_a, x.size, "candidate appearance")
        return np.array([cosine_similarity(x, e.appearance) for e in self.entries])

    def compute_gains(self, s_new) -> dict:
        """Replacement gain per evictable slot (slot 0 excluded)."""
        if len(self.entries) < 2:
            raise CacheTooSmall("gains need at least two entries")
        s = np.asarray(s_new, dtype=np.float64)
        if s.size != len(self.entries):
            raise DimensionMismatch(len(self.entries), s.size, "similarity vector")
        total = float(s.sum())
        gains = {}
        for i in range(1, len(self.entries)):
            r_i = float(self.row_sums[i])
            row_total = r_i + 1.0  # full row of S including the unit diagonal
            gains[i] = row_total - 2.0 * r_i + 2.0 * (total - float(s[i]))
        return gains

    def _validate_candidate(self, candidate: CacheEntry) -> None:
        if candidate.appearance.size != self.d_a:
            raise DimensionMismatch(self.d_a, candidate.appearance.size, "candidate appearance")
        if candidate.pose.size != self.d_p:
            raise DimensionMismatch(self.d_p, candidate.pose.size, "candidate pose")

    def _append(self, candidate: CacheEntry) -> int:
        slot = len(self.entries)
        entry = dataclasses.replace(candidate, slot=slot)
        s = self.similarity_vector(entry.appearance)
        n = len(self.entries)
        grown = np.ones((n + 1, n + 1), dtype=np.float64)
        grown[:n, :n] = self.sim_matrix
        grown[n, :n] = s
        grown[:n, n] = s
        self.sim_matrix = grown
        self.row_sums = np.append(self.row_sums + s, float(s.sum()))
        self.entries.append(entry)
        return slot

    def _replace(self, slot: int, candidate: CacheEntry, s_new: np.ndarray) -> None:
        if slot == 0:
            raise ConfigError("slot 0 is pinned and cannot be replaced")
        entry = dataclasses.replace(candidate, slot=slot)
        old_row = self.sim_matrix[slot].copy()
        s = np.asarray(s_new, dtype=np.float64)
        self.sim_matrix[slot, :] = s
        self.sim_matrix[:, slot] = s
        self.sim_matrix[slot, slot] = 1.0
        # r_j for j != slot shifts by (s_j - old S[slot, j]); the slot's own sum is
        # rebuilt from the new row. s[slot] (similarity to the evicted entry) is dropped.
        self.row_sums += s - old_row
        self.row_sums[slot] = float(s.sum()) - float(s[slot])
        self.entries[slot] = entry

    def insert_candidate(self, candidate: CacheEntry) -> ReplacementDecision:
        """Append while below capacity; otherwise evict the lowest-gain slot or reject."""
        self._validate_candidate(candidate)
        if not self.full:
            slot = self._append(candidate)
            return ReplacementDecision(kind="inserted", slot=slot, gain=None, gains=None)
        s_new = self.similarity_vector(candidate.appearance)
        gains = self.compute_gains(s_new)
        choice = select_eviction(gains, self.config.redundancy_threshold)
        if choice.evict:
            self._replace(choice.slot, candidate, s_new)
            return ReplacementDecision(kind="replaced", slot=choice.slot, gain=choice.gain, gains=gains)
        return ReplacementDecision(kind="rejected", slot=None, gain=choice.gain, gains=gains)

    def replace_slot(self, slot: int, candidate: CacheEntry) -> None:
        """Unconditional replacement of a non-pinned slot (baseline policies)."""
        self._validate_candidate(candidate)
        if not 0 <= slot < len(self.entries):
            raise ConfigError(f"slot {slot} out of range")
        self._replace(slot, candidate, self.similarity_vector(candidate.appearance))


def init_cache(initial: CacheEntry, config: CachePolicyConfig) -> ReferenceCache:
    return ReferenceCache(initial, config)


def oracle_recompute(cache: ReferenceCache, x_new=None):
    """From-scratch (S, r[, gains]) with no reuse of the cache's maintained state.

    Plain loops over the stored vectors; index-order summation. Returns
    (S, r, gains) where gains is None unless ``x_new`` is given.
    """
    apps = [e.appearance for e in cache.entries]
    n = len(apps)
    sim = np.empty((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(i, n):
            c = cosine_similarity(apps[i], apps[j])
            sim[i, j] = c
            sim[j, i] = c
    row = np.empty(n, dtype=np.float64)
    for i in range(n):
        acc = 0.0
        for j in range(n):
            if j != i:
                acc += sim[i, j]
        row[i] = acc
    if x_new is None:
        return sim, row, None
    x = as_vector(x_new, "oracle candidate")
    s = [cosine_similarity(x, a) for a in apps]
    s_total = 0.0
    for value in s:
        s_total += value
    gains = {}
    for i in range(1, n):
        row_total = 0.0
        for j in range(n):
            row_total += sim[i, j]
        gains[i] = row_total - 2.0 * row[i] + 2.0 * (s_total - s[i])
    return sim, row, gains


def mean_pairwise_similarity(cache: ReferenceCache) -> float:
    """Mean of S_ij over unordered pairs i < j; the diversity diagnostic."""
    n = len(cache.entries)
    if n < 2:
        raise CacheTooSmall("mean pairwise similarity needs at least two entries")
    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            total += float(cache.sim_matrix[i, j])
    return total / (n * (n - 1) / 2)
