"""Turn a directory of ordered frame images into a framecache .fcs stream.

Frames are taken in lexicographic filename order (recorded in the header
meta for auditability), resized so the short side is 512 and center-cropped
to 512x512, then scored and embedded by the configured backends. A failure
at any stage on any frame aborts the whole job; partial streams are invalid.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from . import backends

TARGET_SIZE = 512
IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp"}
STREAM_VERSION = "fcs/1"


class ExtractionError(Exception):
    pass


@dataclass
class ExtractionJob:
    input_dir: str
    output: str
    clip_backend: str = backends.DEFAULT_CLIP
    musiq_backend: str = backends.DEFAULT_MUSIQ
    embed_backend: str = backends.DEFAULT_EMBED
    pose_backend: str = backends.DEFAULT_POSE


def list_frames(input_dir: str) -> list:
    root = Path(input_dir)
    if not root.is_dir():
        raise ExtractionError(f"input directory {input_dir!r} does not exist")
    frames = sorted(
        (p for p in root.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES),
        key=lambda p: p.name,
    )
    if not frames:
        raise ExtractionError(f"no decodable frame images under {input_dir!r}")
    return frames


def preprocess(path: Path):
    """Decode, resize short side to 512, center-crop to 512x512.

    Returns (luma, rgb) float64 arrays with intensities in [0, 1].
    """
    with Image.open(path) as img:
        rgb = img.convert("RGB")
        w, h = rgb.size
        scale = TARGET_SIZE / min(w, h)
        rgb = rgb.resize((max(TARGET_SIZE, round(w * scale)), max(TARGET_SIZE, round(h * scale))),
                         Image.Resampling.BILINEAR)
        w, h = rgb.size
        left = (w - TARGET_SIZE) // 2
        top = (h - TARGET_SIZE) // 2
        rgb = rgb.crop((left, top, left + TARGET_SIZE, top + TARGET_SIZE))
        arr = np.asarray(rgb, dtype=np.float64) / 255.0
    luma = 0.299 * arr[:, :, 0] + 0.587 * arr[:, :, 1] + 0.114 * arr[:, :, 2]
    return luma, arr


def clamp01(x: float) -> float:
    return max(0.0, min(1.0, float(x)))


def extract(job: ExtractionJob) -> str:
    """Run the job and write the .fcs file; returns the output path."""
    score_clip = backends.resolve("clip", job.clip_backend)
    score_musiq = backends.resolve("musiq", job.musiq_backend)
    embed = backends.resolve("embed", job.embed_backend)
    pose_embed = backends.resolve("pose", job.pose_backend)

    frames = list_frames(job.input_dir)
    records = []
    d_a = d_p = None
    for index, path in enumerate(frames):
        try:
            luma, rgb = preprocess(path)
            clip = clamp01(score_clip(luma, rgb))
            musiq = clamp01(score_musiq(luma, rgb) / 100.0)
            appearance = np.asarray(embed(luma, rgb), dtype=np.float64).reshape(-1)
            pose = np.asarray(pose_embed(luma, rgb), dtype=np.float64).reshape(-1)
        except Exception as exc:
            raise ExtractionError(f"frame {path.name!r} (index {index}) failed: {exc}") from exc
        if d_a is None:
            d_a, d_p = appearance.size, pose.size
        elif appearance.size != d_a or pose.size != d_p:
            raise ExtractionError(f"frame {path.name!r}: embedding dimensions changed mid-job")
        records.append(
            {
                "index": index,
                "frame_id": path.name,
                "appearance": appearance.tolist(),
                "pose": pose.tolist(),
                "scores": {"clip": clip, "musiq": musiq},
            }
        )

    header = {
        "version": STREAM_VERSION,
        "d_a": d_a,
        "d_p": d_p,
        "meta": {
            "source_dir": str(Path(job.input_dir)),
            "frame_order": [p.name for p in frames],
            "preprocess": f"resize-short-{TARGET_SIZE}+center-crop-{TARGET_SIZE}",
            "backends": {
                "clip": job.clip_backend,
                "musiq": job.musiq_backend,
                "embed": job.embed_backend,
                "pose": job.pose_backend,
            },
        },
    }
    lines = [json.dumps(header, sort_keys=True)]
    lines += [json.dumps(rec, sort_keys=True) for rec in records]
    Path(job.output).write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return job.output
