"""Command-line entry point: run, verify, synth, match, compare, stats.

Exit status: 0 on success, 1 on verification failure or runtime errors,
2 on usage errors. FRAMECACHE_LOG in {quiet, info, debug} controls diagnostic
verbosity on standard error; standard output carries only results.
"""

from __future__ import annotations

import argparse
import glob
import json
import logging
import os
import sys

from . import io as fcio
from .cache import DEFAULT_CAPACITY, DEFAULT_REDUNDANCY_THRESHOLD, CachePolicyConfig
from .errors import FrameCacheError
from .pipeline import (
    DEFAULT_WINDOW,
    POLICIES,
    RunConfig,
    replay,
    verify_stream,
)
from .match import select_reference
from .screen import DEFAULT_ALPHA, DEFAULT_LAMBDA, ScreenConfig
from .synth import MODES, generate_synthetic

logger = logging.getLogger("framecache")

_LOG_LEVELS = {"quiet": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}


def _setup_logging() -> None:
    level_name = os.environ.get("FRAMECACHE_LOG", "quiet").lower()
    level = _LOG_LEVELS.get(level_name, logging.WARNING)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    logging.basicConfig(level=level, handlers=[handler])


def _add_policy_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lambda", dest="lambda_", type=float, default=DEFAULT_LAMBDA,
                        help="weight on the clip component of the combined score")
    parser.add_argument("--alpha", type=float, default=DEFAULT_ALPHA,
                        help="strictness floor of the screening threshold")
    parser.add_argument("--capacity", type=int, default=DEFAULT_CAPACITY,
                        help="reference buffer capacity (slot 0 pinned)")
    parser.add_argument("--theta-g", dest="theta_g", type=float, default=DEFAULT_REDUNDANCY_THRESHOLD,
                        help="redundancy threshold on the replacement gain")
    parser.add_argument("--window", type=int, default=DEFAULT_WINDOW,
                        help="frames per matching window")
    parser.add_argument("--policy", choices=POLICIES, default="framecache")


def _config_from(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        screen=ScreenConfig(lambda_=args.lambda_, alpha=args.alpha),
        cache=CachePolicyConfig(capacity=args.capacity, redundancy_threshold=args.theta_g),
        window=args.window,
        policy=args.policy,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="framecache",
        description="Reference-frame cache policy engine: replay, verify, and compare.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="replay a stream and write the decision trace")
    p_run.add_argument("--stream", required=True)
    p_run.add_argument("--out", required=True, help="trace output path (.fct)")
    p_run.add_argument("--snapshot-out", help="optional final cache snapshot path")
    _add_policy_flags(p_run)

    p_verify = sub.add_parser("verify", help="replay with the from-scratch oracle riding along")
    p_verify.add_argument("--stream", required=True)
    _add_policy_flags(p_verify)

    p_synth = sub.add_parser("synth", help="generate a deterministic synthetic stream")
    p_synth.add_argument("--seed", type=int, required=True)
    p_synth.add_argument("--mode", choices=MODES, required=True)
    p_synth.add_argument("--n", type=int, required=True)
    p_synth.add_argument("--d-a", dest="d_a", type=int, default=16)
    p_synth.add_argument("--d-p", dest="d_p", type=int, default=16)
    p_synth.add_argument("--clusters", type=int, default=4)
    p_synth.add_argument("--noise", type=float, default=0.05)
    p_synth.add_argument("--out", required=True)

    p_match = sub.add_parser("match", help="match one window against a cache snapshot")
    p_match.add_argument("--snapshot", required=True)
    p_match.add_argument("--stream", required=True)
    p_match.add_argument("--window-start", dest="window_start", type=int, required=True)
    p_match.add_argument("--window-len", dest="window_len", type=int, required=True)

    p_compare = sub.add_parser("compare", help="run several policies over a set of streams")
    p_compare.add_argument("--streams", required=True, help="glob over .fcs files")
    p_compare.add_argument("--policies", default="framecache,fifo,static_first,most_recent")
    p_compare.add_argument("--out", required=True, help="report output path (.json)")
    _add_policy_flags(p_compare)

    p_stats = sub.add_parser("stats", help="summarize a trace file")
    p_stats.add_argument("--trace", required=True)

    return parser


def _cmd_run(args) -> int:
    stream = fcio.parse_stream(args.stream)
    config = _config_from(args)
    result = replay(stream, config)
    fcio.write_trace(result.events, args.out)
    if args.snapshot_out:
        fcio.write_snapshot(result.cache, args.snapshot_out)
    s = result.summary
    diversity = s["final_mean_pairwise_similarity"]
    print(
        f"policy={config.policy} frames={len(stream)} windows={s['windows']} "
        f"screened={s['screened']} admitted={s['admitted']} inserted={s['inserted']} "
        f"replaced={s['replaced']} rejected={s['rejected']} entries={s['entries']} "
        f"final_diversity={'n/a' if diversity is None else f'{diversity:.6f}'} trace={args.out}"
    )
    return 0


def _cmd_verify(args) -> int:
    stream = fcio.parse_stream(args.stream)
    report = verify_stream(stream, _config_from(args))
    if report.ok:
        print(f"verified {report.checks} checkpoints, max deviation {report.max_deviation:.3e}")
        return 0
    print(f"verification failed: {report.first_failure}", file=sys.stderr)
    return 1


def _cmd_synth(args) -> int:
    stream = generate_synthetic(
        seed=args.seed,
        mode=args.mode,
        n=args.n,
        d_a=args.d_a,
        d_p=args.d_p,
        cluster_count=args.clusters,
        noise=args.noise,
    )
    fcio.write_stream(stream, args.out)
    print(f"wrote {len(stream)} records to {args.out}")
    return 0


def _cmd_match(args) -> int:
    cache = fcio.read_snapshot(args.snapshot)
    stream = fcio.parse_stream(args.stream)
    start, length = args.window_start, args.window_len
    if length < 1 or start < 0 or start + length > len(stream):
        raise FrameCacheError(
            f"window [{start}, {start + length}) out of range for {len(stream)} records"
        )
    window = stream.records[start : start + length]
    result = select_reference(cache, [r.pose for r in window])
    print(
        fcio.dumps_canonical(
            {
                "selected_slot": result.selected_slot,
                "selected_score": result.selected_score,
                "per_slot": [[slot, result.per_slot_scores[slot]] for slot in sorted(result.per_slot_scores)],
            }
        )
    )
    return 0


def _cmd_compare(args) -> int:
    paths = sorted(glob.glob(args.streams))
    if not paths:
        raise FrameCacheError(f"no streams match {args.streams!r}")
    streams = [fcio.parse_stream(p) for p in paths]
    policies = [p.strip() for p in args.policies.split(",") if p.strip()]
    from .pipeline import compare_policies

    report = compare_policies(streams, _config_from(args), policies, labels=paths)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(fcio.dumps_canonical(report))
        fh.write("\n")
    for policy in policies:
        entry = report["policies"][policy]
        diversity = entry["mean_final_diversity"]
        print(
            f"{policy}: mean_final_diversity="
            f"{'n/a' if diversity is None else f'{diversity:.6f}'} "
            f"inserted={entry['inserted']} replaced={entry['replaced']} rejected={entry['rejected']}"
        )
    return 0


def _cmd_stats(args) -> int:
    events = fcio.read_trace(args.trace)
    counts = {"Inserted": 0, "Replaced": 0, "Rejected": 0, "Screened": 0, "WindowMatched": 0}
    hits: dict[int, int] = {}
    diversity = None
    for event in events:
        if event.kind in counts:
            counts[event.kind] += 1
        if event.kind == "WindowMatched":
            slot = event.payload["selected_slot"]
            hits[slot] = hits.get(slot, 0) + 1
        if event.kind == "Summary":
            diversity = event.payload.get("final_mean_pairwise_similarity")
    print(f"events={len(events)}")
    print(f"screened={counts['Screened']} inserted={counts['Inserted']} "
          f"replaced={counts['Replaced']} rejected={counts['Rejected']}")
    print("hits=" + json.dumps([[slot, hits[slot]] for slot in sorted(hits)]))
    print(f"final_diversity={'n/a' if diversity is None else f'{diversity:.6f}'}")
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "verify": _cmd_verify,
    "synth": _cmd_synth,
    "match": _cmd_match,
    "compare": _cmd_compare,
    "stats": _cmd_stats,
}


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except FrameCacheError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
