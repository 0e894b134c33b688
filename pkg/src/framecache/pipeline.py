"""Orchestrates Screen -> Cache -> Match over a frame stream.

The stream's first record is the pinned anchor: it bypasses screening, seeds
the acceptance threshold, and occupies slot 0 forever. Remaining records are
processed in consecutive windows; each window first picks its reference via
motion matching (the pose track is conditioning input, known ahead), then
screens and, for admitted frames, updates the cache immediately. Baseline
policies swap only the cache decision rule; screening and matching are
identical across policies.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .cache import (
    CacheEntry,
    CachePolicyConfig,
    ReferenceCache,
    ReplacementDecision,
    init_cache,
    mean_pairwise_similarity,
    oracle_recompute,
)
from .errors import ConfigError, EmptyStream, MalformedRecord
from .io import TRACE_VERSION, FrameRecord, FrameStream
from .match import select_reference
from .screen import (
    QualityScores,
    ScreenConfig,
    ScreenState,
    init_screen_state,
    proxy_scores,
    screen_frame,
)

logger = logging.getLogger("framecache")

DEFAULT_WINDOW = 16
POLICIES = ("framecache", "static_first", "fifo", "most_recent")

ORACLE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class RunConfig:
    screen: ScreenConfig = ScreenConfig()
    cache: CachePolicyConfig = CachePolicyConfig()
    window: int = DEFAULT_WINDOW
    policy: str = "framecache"

    def __post_init__(self):
        if not isinstance(self.window, int) or self.window < 1:
            raise ConfigError(f"window must be an integer >= 1, got {self.window!r}")
        if self.policy not in POLICIES:
            raise ConfigError(f"policy must be one of {POLICIES}, got {self.policy!r}")


@dataclass(frozen=True)
class TraceEvent:
    kind: str  # Init | WindowMatched | Screened | Inserted | Replaced | Rejected | Summary
    index: int
    payload: dict


@dataclass
class RunResult:
    events: list
    cache: ReferenceCache
    summary: dict


def resolve_scores(record: FrameRecord) -> QualityScores:
    """Precomputed scores win; otherwise proxy from the raster; never a silent default."""
    if record.scores is not None:
        return record.scores
    if record.raster is not None:
        return proxy_scores(record.raster.data, record.raster.width, record.raster.height)
    raise MalformedRecord(record.index, "record carries neither scores nor raster")


def _pairs(mapping: dict) -> list:
    return [[slot, mapping[slot]] for slot in sorted(mapping)]


def _policy_insert(cache: ReferenceCache, candidate: CacheEntry, policy: str) -> ReplacementDecision:
    if policy == "framecache":
        return cache.insert_candidate(candidate)
    if policy == "static_first":
        return ReplacementDecision(kind="rejected", slot=None, gain=None, gains=None)
    if not cache.full:
        return cache.insert_candidate(candidate)
    evictable = range(1, len(cache.entries))
    if policy == "fifo":
        slot = min(evictable, key=lambda i: (cache.entries[i].admitted_at, i))
    else:  # most_recent
        slot = max(evictable, key=lambda i: (cache.entries[i].admitted_at, -i))
    cache.replace_slot(slot, candidate)
    return ReplacementDecision(kind="replaced", slot=slot, gain=None, gains=None)


def _run(
    stream: FrameStream,
    config: RunConfig,
    inspector: Optional["OracleInspector"] = None,
) -> RunResult:
    if len(stream.records) == 0:
        raise EmptyStream("stream must contain at least one record")

    anchor = stream.records[0]
    anchor_scores = resolve_scores(anchor)
    state: ScreenState = init_screen_state(anchor_scores, config.screen)
    entry0 = CacheEntry(
        slot=0,
        frame_id=anchor.frame_id,
        appearance=anchor.appearance,
        pose=anchor.pose,
        score=state.s0,
        admitted_at=0,
    )
    cache = init_cache(entry0, config.cache)
    if inspector is not None:
        inspector.check_state(cache, "init")

    events = [
        TraceEvent(
            kind="Init",
            index=0,
            payload={
                "version": TRACE_VERSION,
                "frame_id": anchor.frame_id,
                "s0": state.s0,
                "tau": state.tau,
                "lambda": config.screen.lambda_,
                "alpha": config.screen.alpha,
                "capacity": config.cache.capacity,
                "redundancy_threshold": config.cache.redundancy_threshold,
                "window": config.window,
                "policy": config.policy,
            },
        )
    ]

    counts = {"screened": 0, "admitted": 0, "filtered": 0, "inserted": 0, "replaced": 0, "rejected": 0}
    hits: dict[int, int] = {}
    windows = 0

    rest = stream.records[1:]
    for start in range(0, len(rest), config.window):
        window_records = rest[start : start + config.window]
        windows += 1
        result = select_reference(cache, [r.pose for r in window_records])
        hits[result.selected_slot] = hits.get(result.selected_slot, 0) + 1
        events.append(
            TraceEvent(
                kind="WindowMatched",
                index=window_records[0].index,
                payload={
                    "window_start": window_records[0].index,
                    "window_len": len(window_records),
                    "selected_slot": result.selected_slot,
                    "selected_score": result.selected_score,
                    "per_slot": _pairs(result.per_slot_scores),
                },
            )
        )
        logger.debug(
            "window %d-%d matched slot %d (%.6f)",
            window_records[0].index,
            window_records[-1].index,
            result.selected_slot,
            result.selected_score,
        )

        for record in window_records:
            decision = screen_frame(resolve_scores(record), state, config.screen)
            counts["screened"] += 1
            events.append(
                TraceEvent(
                    kind="Screened",
                    index=record.index,
                    payload={"score": decision.score, "tau": state.tau, "admitted": decision.admitted},
                )
            )
            if not decision.admitted:
                counts["filtered"] += 1
                continue
            counts["admitted"] += 1
            candidate = CacheEntry(
                slot=-1,
                frame_id=record.frame_id,
                appearance=record.appearance,
                pose=record.pose,
                score=decision.score,
                admitted_at=record.index,
            )
            if inspector is not None and cache.full and config.policy == "framecache":
                inspector.check_candidate(cache, candidate.appearance, record.index)
            outcome = _policy_insert(cache, candidate, config.policy)
            if inspector is not None and outcome.kind != "rejected":
                inspector.check_state(cache, f"record {record.index}")

            if outcome.kind == "inserted":
                counts["inserted"] += 1
                events.append(
                    TraceEvent(
                        kind="Inserted",
                        index=record.index,
                        payload={"frame_id": record.frame_id, "slot": outcome.slot},
                    )
                )
            elif outcome.kind == "replaced":
                counts["replaced"] += 1
                events.append(
                    TraceEvent(
                        kind="Replaced",
                        index=record.index,
                        payload={
                            "frame_id": record.frame_id,
                            "evicted_slot": outcome.slot,
                            "gain": outcome.gain,
                            "gains": None if outcome.gains is None else _pairs(outcome.gains),
                        },
                    )
                )
            else:
                counts["rejected"] += 1
                events.append(
                    TraceEvent(
                        kind="Rejected",
                        index=record.index,
                        payload={
                            "frame_id": record.frame_id,
                            "best_gain": outcome.gain,
                            "gains": None if outcome.gains is None else _pairs(outcome.gains),
                        },
                    )
                )

    diversity = mean_pairwise_similarity(cache) if len(cache) >= 2 else None
    summary = {
        "entries": len(cache),
        "windows": windows,
        "final_mean_pairwise_similarity": diversity,
        "hits": [[slot, hits.get(slot, 0)] for slot in range(len(cache))],
        **counts,
    }
    events.append(TraceEvent(kind="Summary", index=stream.records[-1].index, payload=summary))
    return RunResult(events=events, cache=cache, summary=summary)


def run_stream(stream: FrameStream, config: RunConfig) -> list:
    """Full replay under the gain-based replacement rule."""
    return _run(stream, dataclasses.replace(config, policy="framecache")).events


def run_with_policy(stream: FrameStream, config: RunConfig) -> list:
    """Same orchestration with the cache decision rule taken from config.policy."""
    return _run(stream, config).events


def replay(stream: FrameStream, config: RunConfig) -> RunResult:
    """Like run_with_policy but also returns the final cache and summary."""
    return _run(stream, config)


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

@dataclass
class VerificationReport:
    ok: bool
    checks: int
    max_deviation: float
    first_failure: Optional[str] = None


class OracleInspector:
    """Compares the incrementally maintained (S, r, gains) against the oracle."""

    def __init__(self, atol: float = ORACLE_TOLERANCE):
        self.atol = atol
        self.checks = 0
        self.max_deviation = 0.0
        self.first_failure: Optional[str] = None

    def _note(self, deviation: float, what: str, step) -> None:
        self.max_deviation = max(self.max_deviation, deviation)
        if deviation > self.atol and self.first_failure is None:
            self.first_failure = f"{what} diverged by {deviation:.3e} at step {step}"

    def check_state(self, cache: ReferenceCache, step) -> None:
        sim, row, _ = oracle_recompute(cache)
        self.checks += 1
        self._note(float(np.abs(cache.sim_matrix - sim).max()), "sim_matrix", step)
        self._note(float(np.abs(cache.row_sums - row).max()), "row_sums", step)

    def check_candidate(self, cache: ReferenceCache, x_new, step) -> None:
        _, _, oracle_gains = oracle_recompute(cache, x_new)
        maintained = cache.compute_gains(cache.similarity_vector(x_new))
        self.checks += 1
        if set(maintained) != set(oracle_gains):
            if self.first_failure is None:
                self.first_failure = f"gain slots differ at step {step}"
            return
        for slot, value in maintained.items():
            self._note(abs(value - oracle_gains[slot]), f"gain[{slot}]", step)

    def report(self) -> VerificationReport:
        return VerificationReport(
            ok=self.first_failure is None,
            checks=self.checks,
            max_deviation=self.max_deviation,
            first_failure=self.first_failure,
        )


def verify_stream(stream: FrameStream, config: RunConfig) -> VerificationReport:
    """Replay with the oracle riding along at every mutation and full-cache decision."""
    inspector = OracleInspector()
    _run(stream, config, inspector=inspector)
    return inspector.report()


# ---------------------------------------------------------------------------
# policy comparison
# ---------------------------------------------------------------------------

def compare_policies(
    streams: Sequence[FrameStream],
    config: RunConfig,
    policies: Sequence[str],
    labels: Optional[Sequence[str]] = None,
) -> dict:
    """Run every policy over every stream; deterministic, ordered by policy then stream."""
    if not streams:
        raise EmptyStream("compare_policies needs at least one stream")
    if labels is None:
        labels = [f"stream{i}" for i in range(len(streams))]
    if len(labels) != len(streams):
        raise ConfigError("labels must match streams one-to-one")
    for policy in policies:
        if policy not in POLICIES:
            raise ConfigError(f"unknown policy {policy!r}")

    report = {
        "config": {
            "lambda": config.screen.lambda_,
            "alpha": config.screen.alpha,
            "capacity": config.cache.capacity,
            "redundancy_threshold": config.cache.redundancy_threshold,
            "window": config.window,
        },
        "streams": list(labels),
        "policies": {},
    }
    for policy in policies:
        per_stream = []
        totals = {"inserted": 0, "replaced": 0, "rejected": 0, "admitted": 0, "filtered": 0}
        merged_hits: dict[int, int] = {}
        diversities = []
        for label, stream in zip(labels, streams):
            run = _run(stream, dataclasses.replace(config, policy=policy))
            s = run.summary
            for key in totals:
                totals[key] += s[key]
            for slot, count in s["hits"]:
                merged_hits[slot] = merged_hits.get(slot, 0) + count
            if s["final_mean_pairwise_similarity"] is not None:
                diversities.append(s["final_mean_pairwise_similarity"])
            per_stream.append(
                {
                    "label": label,
                    "final_diversity": s["final_mean_pairwise_similarity"],
                    "inserted": s["inserted"],
                    "replaced": s["replaced"],
                    "rejected": s["rejected"],
                    "admitted": s["admitted"],
                    "filtered": s["filtered"],
                }
            )
        report["policies"][policy] = {
            "mean_final_diversity": (sum(diversities) / len(diversities)) if diversities else None,
            "hits": [[slot, merged_hits[slot]] for slot in sorted(merged_hits)],
            "per_stream": per_stream,
            **totals,
        }
    return report
