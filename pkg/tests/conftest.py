import numpy as np
import pytest

from framecache import CacheEntry, CachePolicyConfig, FrameRecord, FrameStream, QualityScores, init_cache


def entry(appearance, pose=None, frame_id="f", score=0.8, admitted_at=0, slot=-1):
    return CacheEntry(
        slot=slot,
        frame_id=frame_id,
        appearance=np.asarray(appearance, dtype=np.float64),
        pose=np.asarray(pose if pose is not None else appearance, dtype=np.float64),
        score=score,
        admitted_at=admitted_at,
    )


def cache_with(appearances, capacity=8, theta=1.0, poses=None):
    """Cache whose entries hold the given appearance vectors, slot order preserved."""
    poses = poses if poses is not None else appearances
    cache = init_cache(
        entry(appearances[0], poses[0], frame_id="e0"),
        CachePolicyConfig(capacity=capacity, redundancy_threshold=theta),
    )
    for i, (a, p) in enumerate(list(zip(appearances, poses))[1:], start=1):
        cache._append(entry(a, p, frame_id=f"e{i}", admitted_at=i))
    return cache


def record(index, appearance, pose, clip=0.8, musiq=0.8, frame_id=None):
    return FrameRecord(
        index=index,
        frame_id=frame_id or f"r{index:03d}",
        appearance=np.asarray(appearance, dtype=np.float64),
        pose=np.asarray(pose, dtype=np.float64),
        scores=QualityScores(q_clip=clip, q_musiq=musiq),
    )


def stream_of(records, d_a=2, d_p=2):
    return FrameStream(version="fcs/1", d_a=d_a, d_p=d_p, records=records)


@pytest.fixture
def three_record_replace_stream():
    """Reproduces the worked duplicate-pair example: insert, then replace slot 1."""
    return stream_of(
        [
            record(0, [1, 0], [1, 0], frame_id="anchor"),
            record(1, [1, 0], [0, 1], clip=0.9, musiq=0.9, frame_id="dup"),
            record(2, [0, 1], [1, 1], clip=0.9, musiq=0.9, frame_id="ortho"),
        ]
    )


@pytest.fixture
def three_record_reject_stream():
    """Reproduces the duplicate-of-pinned example: insert, then reject."""
    return stream_of(
        [
            record(0, [1, 0], [1, 0], frame_id="anchor"),
            record(1, [0, 1], [0, 1], clip=0.9, musiq=0.9, frame_id="ortho"),
            record(2, [1, 0], [1, 1], clip=0.9, musiq=0.9, frame_id="pinned-dup"),
        ]
    )
