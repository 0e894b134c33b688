"""Pluggable scoring and embedding backends.

Every backend is a plain function over the preprocessed 512x512 frame
(luma in [0, 1], plus the RGB array where needed) and is registered under a
versioned identifier that gets pinned into the output header. The defaults
are self-contained classical measures, so extraction runs fully offline;
neural scorers/embedders can be registered under new identifiers without
touching the extraction loop.

Score backend contract: "clip" backends return a value on the native [0, 1]
scale; "musiq" backends return a native [0, 100] scale. The extractor
normalizes musiq by /100 and clamps both into [0, 1].
"""

from __future__ import annotations

import numpy as np

SATURATION = 0.01  # v / (v + k) squash constant, intensities in [0, 1]


class UnknownBackend(Exception):
    def __init__(self, kind: str, identifier: str, available):
        self.identifier = identifier
        super().__init__(
            f"unknown {kind} backend {identifier!r}; available: {', '.join(sorted(available))}"
        )


# --- scoring -----------------------------------------------------------------

def contrast_proxy(luma: np.ndarray, rgb: np.ndarray) -> float:
    """Intensity-variance score on the native [0, 1] scale."""
    v = float(luma.var())
    return v / (v + SATURATION)


def gradient_proxy_100(luma: np.ndarray, rgb: np.ndarray) -> float:
    """Mean gradient-magnitude score on the native [0, 100] scale."""
    gy, gx = np.gradient(luma)
    g = float(np.sqrt(gx * gx + gy * gy).mean())
    return 100.0 * g / (g + SATURATION)


# --- embeddings ----------------------------------------------------------------

def _box_downsample(img: np.ndarray, cells: int) -> np.ndarray:
    h, w = img.shape[:2]
    ys = np.linspace(0, h, cells + 1, dtype=int)
    xs = np.linspace(0, w, cells + 1, dtype=int)
    out = np.empty((cells, cells) + img.shape[2:], dtype=np.float64)
    for i in range(cells):
        for j in range(cells):
            out[i, j] = img[ys[i] : ys[i + 1], xs[j] : xs[j + 1]].mean(axis=(0, 1))
    return out


def rgb_grid_8(luma: np.ndarray, rgb: np.ndarray) -> np.ndarray:
    """8x8x3 box-averaged RGB thumbnail plus a unit bias component, L2-normalized."""
    grid = _box_downsample(rgb, 8).reshape(-1)
    v = np.append(grid, 1.0)  # bias keeps the norm positive for flat frames
    return v / np.linalg.norm(v)


def grad_orient_hist(luma: np.ndarray, rgb: np.ndarray) -> np.ndarray:
    """Pose-representation stand-in: magnitude-weighted gradient-orientation
    histogram (9 bins) pooled over a 2x2 spatial grid, plus mean luma and a
    unit bias, L2-normalized."""
    gy, gx = np.gradient(luma)
    magnitude = np.sqrt(gx * gx + gy * gy)
    angle = np.mod(np.arctan2(gy, gx), np.pi)  # orientation, not direction
    bins = np.minimum((angle / np.pi * 9).astype(int), 8)

    h, w = luma.shape
    features = []
    for i in range(2):
        for j in range(2):
            sl = (slice(i * h // 2, (i + 1) * h // 2), slice(j * w // 2, (j + 1) * w // 2))
            hist = np.bincount(bins[sl].reshape(-1), weights=magnitude[sl].reshape(-1), minlength=9)
            features.extend(hist.tolist())
    features.append(float(luma.mean()))
    features.append(1.0)
    v = np.asarray(features, dtype=np.float64)
    return v / np.linalg.norm(v)


CLIP_BACKENDS = {"contrast-proxy/1": contrast_proxy}
MUSIQ_BACKENDS = {"gradient-proxy/1": gradient_proxy_100}
EMBED_BACKENDS = {"rgb-grid-8/1": rgb_grid_8}
POSE_BACKENDS = {"grad-orient-hist/1": grad_orient_hist}

DEFAULT_CLIP = "contrast-proxy/1"
DEFAULT_MUSIQ = "gradient-proxy/1"
DEFAULT_EMBED = "rgb-grid-8/1"
DEFAULT_POSE = "grad-orient-hist/1"


def resolve(kind: str, identifier: str):
    registry = {
        "clip": CLIP_BACKENDS,
        "musiq": MUSIQ_BACKENDS,
        "embed": EMBED_BACKENDS,
        "pose": POSE_BACKENDS,
    }[kind]
    if identifier not in registry:
        raise UnknownBackend(kind, identifier, registry)
    return registry[identifier]
