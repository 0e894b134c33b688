"""fc-extract: directory of frames in, framecache .fcs stream out."""

from __future__ import annotations

import argparse
import sys

from . import backends
from .extract import ExtractionError, ExtractionJob, extract


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fc-extract",
        description="Score and embed a directory of frame images into a .fcs stream.",
    )
    parser.add_argument("--input", required=True, help="directory of ordered frame images")
    parser.add_argument("--out", required=True, help="output .fcs path")
    parser.add_argument("--clip-backend", default=backends.DEFAULT_CLIP)
    parser.add_argument("--musiq-backend", default=backends.DEFAULT_MUSIQ)
    parser.add_argument("--embed-backend", default=backends.DEFAULT_EMBED)
    parser.add_argument("--pose-backend", default=backends.DEFAULT_POSE)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    job = ExtractionJob(
        input_dir=args.input,
        output=args.out,
        clip_backend=args.clip_backend,
        musiq_backend=args.musiq_backend,
        embed_backend=args.embed_backend,
        pose_backend=args.pose_backend,
    )
    try:
        extract(job)
    except (ExtractionError, backends.UnknownBackend, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
