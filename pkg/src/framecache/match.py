"""Motion-consistent reference selection over a cache snapshot.

Each cached pose is scored by its mean cosine similarity against every pose
in the target window — deliberately not the cosine to a mean target vector,
which is a different (and generally wrong) quantity.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cache import ReferenceCache
from .errors import DimensionMismatch, EmptyCache, EmptySequence
from .vectors import as_vector, cosine_similarity


@dataclass(frozen=True)
class MatchResult:
    selected_slot: int
    selected_score: float
    per_slot_scores: dict


def motion_alignment(entry_pose, target_poses) -> float:
    """Unweighted mean cosine between one cached pose and every target pose."""
    poses = list(target_poses)
    if not poses:
        raise EmptySequence("target sequence must contain at least one pose")
    entry = as_vector(entry_pose, "entry pose")
    total = 0.0
    for p in poses:
        total += cosine_similarity(entry, p)
    return total / len(poses)


def select_reference(cache: ReferenceCache, target_poses) -> MatchResult:
    """Argmax of motion alignment over every slot (slot 0 included); ties to the lowest slot."""
    if len(cache.entries) == 0:
        raise EmptyCache("cannot match against an empty cache")
    poses = [as_vector(p, "target pose") for p in target_poses]
    if not poses:
        raise EmptySequence("target sequence must contain at least one pose")
    d_p = cache.d_p
    for p in poses:
        if p.size != d_p:
            raise DimensionMismatch(d_p, p.size, "target pose")
    scores = {e.slot: motion_alignment(e.pose, poses) for e in cache.entries}
    best_slot = min(scores, key=lambda slot: (-scores[slot], slot))
    return MatchResult(
        selected_slot=best_slot,
        selected_score=scores[best_slot],
        per_slot_scores=scores,
    )
