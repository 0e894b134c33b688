import io as pyio

import pytest

from framecache import cosine_similarity, replay, write_stream
from framecache.errors import ConfigError
from framecache.pipeline import RunConfig
from framecache.synth import MASK64, XorShift64Star, generate_synthetic

# pinned by the first oracle-verified run (seed 42, clustered, n=64, d=16,
# k=4, noise=0.05, capacity=4, window=8) and guarded thereafter
GOLDEN_SEED42_REPLACEMENTS = 1
GOLDEN_SEED42_REJECTIONS = 1


def render(stream) -> str:
    buf = pyio.StringIO()
    write_stream(stream, buf)
    return buf.getvalue()


def test_prng_is_integer_only_and_seeded():
    rng = XorShift64Star(0)
    values = [rng.next_u64() for _ in range(4)]
    assert all(0 <= v <= MASK64 for v in values)
    assert values == [XorShift64Star(0).next_u64() for _ in range(1)] + values[1:]
    # seed 0 must not collapse to the all-zero fixed point
    assert any(values)


def test_prng_uniform_range():
    rng = XorShift64Star(123)
    for _ in range(1000):
        u = rng.uniform()
        assert 0.0 <= u < 1.0


def test_generator_deterministic_bytes():
    a = generate_synthetic(seed=7, mode="clustered", n=32, d_a=6, d_p=4)
    b = generate_synthetic(seed=7, mode="clustered", n=32, d_a=6, d_p=4)
    assert render(a) == render(b)


def test_generator_seed_changes_output():
    a = generate_synthetic(seed=7, mode="clustered", n=8, d_a=4, d_p=4)
    b = generate_synthetic(seed=8, mode="clustered", n=8, d_a=4, d_p=4)
    assert render(a) != render(b)


def test_degenerate_single_cluster_no_noise():
    stream = generate_synthetic(seed=5, mode="clustered", n=6, d_a=4, d_p=4,
                                cluster_count=1, noise=0.0)
    first = stream.records[0].appearance
    for rec in stream.records[1:]:
        assert cosine_similarity(first, rec.appearance) == pytest.approx(1.0, abs=1e-9)


def test_anchor_scores_forced():
    stream = generate_synthetic(seed=9, mode="orthogonal_burst", n=5, d_a=4, d_p=4)
    assert stream.records[0].scores.q_clip == 0.8
    assert stream.records[0].scores.q_musiq == 0.8
    for rec in stream.records[1:]:
        assert 0.3 <= rec.scores.q_clip <= 0.9
        assert 0.3 <= rec.scores.q_musiq <= 0.9


def test_orthogonal_burst_alternates_centroids():
    stream = generate_synthetic(seed=2, mode="orthogonal_burst", n=8, d_a=8, d_p=8,
                                cluster_count=4, noise=0.0)
    # records 0 and 4 share a centroid; 0 and 1 are orthogonal
    a = stream.records[0].appearance
    assert cosine_similarity(a, stream.records[4].appearance) == pytest.approx(1.0, abs=1e-9)
    assert cosine_similarity(a, stream.records[1].appearance) == pytest.approx(0.0, abs=1e-9)


def test_drift_rotates_smoothly():
    stream = generate_synthetic(seed=3, mode="drift", n=16, d_a=4, d_p=4, noise=0.0)
    sims = [
        cosine_similarity(stream.records[i].appearance, stream.records[i + 1].appearance)
        for i in range(8)
    ]
    # adjacent frames stay close while the sequence moves away from the start
    assert all(s > 0.9 for s in sims)
    assert cosine_similarity(stream.records[0].appearance, stream.records[8].appearance) == pytest.approx(-1.0, abs=1e-9)


def test_generator_validates_config():
    with pytest.raises(ConfigError):
        generate_synthetic(seed=1, mode="clustered", n=0, d_a=4, d_p=4)
    with pytest.raises(ConfigError):
        generate_synthetic(seed=1, mode="clustered", n=4, d_a=1, d_p=4)
    with pytest.raises(ConfigError):
        generate_synthetic(seed=1, mode="spiral", n=4, d_a=4, d_p=4)
    with pytest.raises(ConfigError):
        generate_synthetic(seed=1, mode="clustered", n=4, d_a=4, d_p=4, noise=-0.1)
    with pytest.raises(ConfigError):
        generate_synthetic(seed=1, mode="clustered", n=4, d_a=4, d_p=4, cluster_count=0)


def test_golden_replacement_count_seed42():
    from framecache.cache import CachePolicyConfig

    stream = generate_synthetic(seed=42, mode="clustered", n=64, d_a=16, d_p=16,
                                cluster_count=4, noise=0.05)
    config = RunConfig(cache=CachePolicyConfig(capacity=4), window=8)
    summary = replay(stream, config).summary
    assert summary["replaced"] == GOLDEN_SEED42_REPLACEMENTS
    assert summary["rejected"] == GOLDEN_SEED42_REJECTIONS
