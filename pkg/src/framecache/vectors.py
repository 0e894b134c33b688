"""Vector validation and cosine similarity, the numeric substrate for the engine.

All feature vectors are flat float64 arrays. Multi-axis inputs are flattened
on ingestion; only vector cosine is ever computed downstream.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, NonFiniteComponent, ZeroNormVector

# Norms below this are treated as zero: cosine is undefined and we fail loudly
# rather than silently mapping to 0 similarity.
NORM_EPSILON = 1e-12


def as_vector(values, context: str = "") -> np.ndarray:
    """Copy ``values`` into a finite, flat float64 vector."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1:
        v = v.reshape(-1)
    if v.size == 0:
        raise DimensionMismatch(1, 0, context or "vector must have at least one component")
    bad = np.flatnonzero(~np.isfinite(v))
    if bad.size:
        raise NonFiniteComponent(int(bad[0]), context)
    return v


def validate_vector(v, expected_dim: int, context: str = "") -> np.ndarray:
    """Check dimension first, then finiteness; returns the validated array."""
    arr = np.asarray(v, dtype=np.float64).reshape(-1)
    if arr.size != expected_dim:
        raise DimensionMismatch(expected_dim, arr.size, context)
    bad = np.flatnonzero(~np.isfinite(arr))
    if bad.size:
        raise NonFiniteComponent(int(bad[0]), context)
    return arr


def norm(v) -> float:
    return float(np.linalg.norm(np.asarray(v, dtype=np.float64)))


def cosine_similarity(a, b) -> float:
    """Cosine of the angle between two equal-dimension vectors, clamped to [-1, 1].

    The clamp absorbs the ~1e-16 floating-point overshoot so downstream
    threshold logic can assume the closed interval. Zero-norm operands are an
    error, not similarity 0.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size != b.size:
        raise DimensionMismatch(a.size, b.size, "cosine operands")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na < NORM_EPSILON or nb < NORM_EPSILON:
        raise ZeroNormVector(f"cosine undefined for near-zero norm ({na:.3e}, {nb:.3e})")
    c = float(np.dot(a, b)) / (na * nb)
    if c > 1.0:
        return 1.0
    if c < -1.0:
        return -1.0
    return c
