"""Offline adapter from frame-image directories to framecache .fcs streams."""

from .backends import (
    CLIP_BACKENDS,
    DEFAULT_CLIP,
    DEFAULT_EMBED,
    DEFAULT_MUSIQ,
    DEFAULT_POSE,
    EMBED_BACKENDS,
    MUSIQ_BACKENDS,
    POSE_BACKENDS,
    UnknownBackend,
)
from .extract import ExtractionError, ExtractionJob, extract, list_frames, preprocess

__version__ = "0.1.0"
