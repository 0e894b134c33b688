"""Quality gate: combined no-reference score, adaptive threshold, admission rule.

Both quality components are expected on a common [0, 1] scale (MUSIQ-style
scores come pre-divided by 100); the sigmoid in the threshold only has a
useful non-saturated regime when the anchor score is O(1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionMismatch, EmptyRaster, NegativeScore

DEFAULT_LAMBDA = 0.6
DEFAULT_ALPHA = 0.95

# k in the v / (v + k) squash used by the proxy scorer, on intensities in [0, 1].
PROXY_SATURATION = 0.01


def _check_unit_interval(value: float, name: str) -> None:
    if not (isinstance(value, (int, float)) and math.isfinite(value)):
        raise ConfigError(f"{name} must be a finite number, got {value!r}")
    if not 0.0 <= value <= 1.0:
        raise ConfigError(f"{name} must lie in [0, 1], got {value}")


@dataclass(frozen=True)
class QualityScores:
    """Per-frame quality pair, both components normalized to [0, 1]."""

    q_clip: float
    q_musiq: float

    def __post_init__(self):
        _check_unit_interval(self.q_clip, "q_clip")
        _check_unit_interval(self.q_musiq, "q_musiq")


@dataclass(frozen=True)
class ScreenConfig:
    lambda_: float = DEFAULT_LAMBDA  # weight on q_clip; 1 - lambda_ goes to q_musiq
    alpha: float = DEFAULT_ALPHA     # strictness floor inside the threshold

    def __post_init__(self):
        _check_unit_interval(self.lambda_, "lambda")
        _check_unit_interval(self.alpha, "alpha")
        if self.alpha <= 0.0:
            raise ConfigError(f"alpha must lie in (0, 1], got {self.alpha}")


@dataclass(frozen=True)
class ScreenState:
    """Threshold state derived from the anchor frame's combined score."""

    s0: float
    tau: float


@dataclass(frozen=True)
class ScreenDecision:
    admitted: bool
    score: float


def combined_score(scores: QualityScores, config: ScreenConfig) -> float:
    return config.lambda_ * scores.q_clip + (1.0 - config.lambda_) * scores.q_musiq


def acceptance_threshold(s0: float, alpha: float) -> float:
    """Adaptive threshold: s0 scaled by max(alpha, sigmoid(2*s0))."""
    if s0 < 0.0:
        raise NegativeScore(f"anchor score must be nonnegative, got {s0}")
    if not 0.0 < alpha <= 1.0:
        raise ConfigError(f"alpha must lie in (0, 1], got {alpha}")
    return s0 * max(alpha, 1.0 / (1.0 + math.exp(-2.0 * s0)))


def init_screen_state(anchor_scores: QualityScores, config: ScreenConfig) -> ScreenState:
    s0 = combined_score(anchor_scores, config)
    return ScreenState(s0=s0, tau=acceptance_threshold(s0, config.alpha))


def screen_frame(scores: QualityScores, state: ScreenState, config: ScreenConfig) -> ScreenDecision:
    """Admit iff the combined score strictly exceeds tau (equality filters)."""
    score = combined_score(scores, config)
    return ScreenDecision(admitted=score > state.tau, score=score)


def proxy_scores(pixels, width: int, height: int) -> QualityScores:
    """Deterministic stand-in scores computed from a grayscale raster.

    q_clip tracks pixel-intensity variance and q_musiq the mean forward-difference
    gradient magnitude, each mapped to [0, 1] via v / (v + 0.01). Used when a
    stream record carries raw pixels instead of precomputed scores.
    """
    if width < 1 or height < 1 or width * height < 4:
        raise EmptyRaster(f"raster {width}x{height} too small for proxy scoring")
    flat = np.asarray(pixels, dtype=np.float64).reshape(-1)
    if flat.size != width * height:
        raise DimensionMismatch(width * height, flat.size, "raster data")
    if not np.isfinite(flat).all():
        raise ConfigError("raster intensities must be finite")
    if flat.min() < 0.0 or flat.max() > 1.0:
        raise ConfigError("raster intensities must lie in [0, 1]")
    img = flat.reshape(height, width)

    variance = float(img.var())
    gx = np.zeros_like(img)
    gy = np.zeros_like(img)
    gx[:, :-1] = img[:, 1:] - img[:, :-1]  # forward differences, zero at the far edges
    gy[:-1, :] = img[1:, :] - img[:-1, :]
    gradient = float(np.sqrt(gx * gx + gy * gy).mean())

    def squash(v: float) -> float:
        return v / (v + PROXY_SATURATION)

    return QualityScores(q_clip=squash(variance), q_musiq=squash(gradient))
