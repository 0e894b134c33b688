"""Training-free reference-frame cache policy engine.

Three stages over generic feature streams: quality-aware screening with an
adaptive threshold, redundancy-aware buffer replacement driven by a live
cosine-similarity matrix, and motion-consistent reference matching. Ships
with a trace-replay CLI, a from-scratch verification oracle, baseline
policies, and a deterministic synthetic stream generator.
"""

from . import errors
from .cache import (
    CacheEntry,
    CachePolicyConfig,
    EvictionDecision,
    ReferenceCache,
    ReplacementDecision,
    init_cache,
    mean_pairwise_similarity,
    oracle_recompute,
    select_eviction,
)
from .estimator import FrameCachePolicy
from .io import (
    FrameRecord,
    FrameStream,
    Raster,
    parse_stream,
    read_snapshot,
    read_trace,
    write_snapshot,
    write_stream,
    write_trace,
)
from .match import MatchResult, motion_alignment, select_reference
from .pipeline import (
    RunConfig,
    RunResult,
    TraceEvent,
    VerificationReport,
    compare_policies,
    replay,
    run_stream,
    run_with_policy,
    verify_stream,
)
from .screen import (
    QualityScores,
    ScreenConfig,
    ScreenDecision,
    ScreenState,
    acceptance_threshold,
    combined_score,
    init_screen_state,
    proxy_scores,
    screen_frame,
)
from .synth import XorShift64Star, generate_synthetic
from .vectors import as_vector, cosine_similarity, validate_vector

__version__ = "0.1.0"

__all__ = [
    "CacheEntry",
    "CachePolicyConfig",
    "EvictionDecision",
    "FrameCachePolicy",
    "FrameRecord",
    "FrameStream",
    "MatchResult",
    "QualityScores",
    "Raster",
    "ReferenceCache",
    "ReplacementDecision",
    "RunConfig",
    "RunResult",
    "ScreenConfig",
    "ScreenDecision",
    "ScreenState",
    "TraceEvent",
    "VerificationReport",
    "XorShift64Star",
    "acceptance_threshold",
    "as_vector",
    "combined_score",
    "compare_policies",
    "cosine_similarity",
    "errors",
    "generate_synthetic",
    "init_cache",
    "init_screen_state",
    "mean_pairwise_similarity",
    "motion_alignment",
    "oracle_recompute",
    "parse_stream",
    "proxy_scores",
    "read_snapshot",
    "read_trace",
    "replay",
    "run_stream",
    "run_with_policy",
    "screen_frame",
    "select_eviction",
    "select_reference",
    "validate_vector",
    "verify_stream",
    "write_snapshot",
    "write_stream",
    "write_trace",
    "__version__",
]
