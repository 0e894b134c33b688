"""Deterministic synthetic feature-stream generator.

The pseudo-random core is xorshift64* (shift triple 12/25/27, multiplier
0x2545F4914F6CDD1D) over unsigned 64-bit integer arithmetic only, seeded
through a single splitmix64 scramble so any seed (including 0) yields a
nonzero state. Uniform doubles take the top 53 bits of each output word
(u >> 11) * 2**-53, which constructs identical values on every platform.
Gaussians use Box-Muller over two fresh uniforms (no cached spare).

Per-record draw order is fixed: centroid choice (clustered mode only), then
appearance noise, then pose noise, then the two quality scores. Centroids are
drawn up front, appearance set first.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConfigError
from .io import STREAM_VERSION, FrameRecord, FrameStream
from .screen import QualityScores

MASK64 = (1 << 64) - 1
MODES = ("clustered", "orthogonal_burst", "drift")

SCORE_LOW = 0.3
SCORE_HIGH = 0.9
ANCHOR_SCORE = 0.8


class XorShift64Star:
    """Marsaglia xorshift64* with Vigna's M32 multiplier."""

    def __init__(self, seed: int):
        z = (int(seed) + 0x9E3779B97F4A7C15) & MASK64
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        z ^= z >> 31
        self.state = z or 0x9E3779B97F4A7C15

    def next_u64(self) -> int:
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & MASK64
        x ^= x >> 27
        self.state = x
        return (x * 0x2545F4914F6CDD1D) & MASK64

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def uniform_in(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.uniform()

    def randint(self, n: int) -> int:
        # Lemire-style scaling; n is tiny relative to 2**64 so bias is negligible.
        return (self.next_u64() * n) >> 64

    def gauss(self) -> float:
        u1 = self.uniform()
        u2 = self.uniform()
        if u1 < 2.0**-53:
            u1 = 2.0**-53
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def gauss_vector(self, dim: int) -> np.ndarray:
        return np.array([self.gauss() for _ in range(dim)], dtype=np.float64)

    def unit_vector(self, dim: int) -> np.ndarray:
        while True:
            v = self.gauss_vector(dim)
            n = float(np.linalg.norm(v))
            if n > 1e-9:
                return v / n


def _basis_centroids(count: int, dim: int) -> list:
    centroids = []
    for i in range(count):
        e = np.zeros(dim, dtype=np.float64)
        e[i % dim] = 1.0
        centroids.append(e)
    return centroids


def _orthonormal_pair(rng: XorShift64Star, dim: int):
    u = rng.unit_vector(dim)
    while True:
        w = rng.unit_vector(dim)
        w = w - float(np.dot(w, u)) * u
        n = float(np.linalg.norm(w))
        if n > 1e-6:
            return u, w / n


def generate_synthetic(
    seed: int,
    mode: str,
    n: int,
    d_a: int,
    d_p: int,
    cluster_count: int = 4,
    noise: float = 0.05,
) -> FrameStream:
    """Deterministic pseudo-random stream; same arguments give identical bytes.

    clustered: each record sits near one of ``cluster_count`` random unit
    centroids. orthogonal_burst: records cycle through near-orthogonal basis
    centroids. drift: the centroid rotates smoothly through one revolution
    across the stream. Scores are uniform in [0.3, 0.9] except record 0,
    which is forced to 0.8.
    """
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    if d_a < 2 or d_p < 2:
        raise ConfigError(f"dimensions must be >= 2, got d_a={d_a}, d_p={d_p}")
    if cluster_count < 1:
        raise ConfigError(f"cluster_count must be >= 1, got {cluster_count}")
    if noise < 0:
        raise ConfigError(f"noise must be nonnegative, got {noise}")
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")

    rng = XorShift64Star(seed)

    if mode == "clustered":
        app_centroids = [rng.unit_vector(d_a) for _ in range(cluster_count)]
        pose_centroids = [rng.unit_vector(d_p) for _ in range(cluster_count)]
    elif mode == "orthogonal_burst":
        app_centroids = _basis_centroids(cluster_count, d_a)
        pose_centroids = _basis_centroids(cluster_count, d_p)
    else:  # drift
        app_u, app_w = _orthonormal_pair(rng, d_a)
        pose_u, pose_w = _orthonormal_pair(rng, d_p)

    records = []
    for t in range(n):
        if mode == "clustered":
            k = rng.randint(cluster_count)
            app_center = app_centroids[k]
            pose_center = pose_centroids[k]
        elif mode == "orthogonal_burst":
            k = t % cluster_count
            app_center = app_centroids[k]
            pose_center = pose_centroids[k]
        else:
            theta = 2.0 * math.pi * t / n
            app_center = math.cos(theta) * app_u + math.sin(theta) * app_w
            pose_center = math.cos(theta) * pose_u + math.sin(theta) * pose_w

        appearance = app_center + noise * rng.gauss_vector(d_a)
        pose = pose_center + noise * rng.gauss_vector(d_p)

        if t == 0:
            scores = QualityScores(q_clip=ANCHOR_SCORE, q_musiq=ANCHOR_SCORE)
            # keep the per-record draw count constant so truncation-style
            # reasoning about the sequence stays simple
            rng.uniform()
            rng.uniform()
        else:
            scores = QualityScores(
                q_clip=rng.uniform_in(SCORE_LOW, SCORE_HIGH),
                q_musiq=rng.uniform_in(SCORE_LOW, SCORE_HIGH),
            )

        records.append(
            FrameRecord(
                index=t,
                frame_id=f"f{t:05d}",
                appearance=appearance,
                pose=pose,
                scores=scores,
            )
        )

    return FrameStream(version=STREAM_VERSION, d_a=d_a, d_p=d_p, records=records)
