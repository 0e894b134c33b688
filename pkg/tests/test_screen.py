import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from framecache import (
    QualityScores,
    ScreenConfig,
    ScreenState,
    acceptance_threshold,
    combined_score,
    init_screen_state,
    proxy_scores,
    screen_frame,
)
from framecache.errors import ConfigError, DimensionMismatch, EmptyRaster, NegativeScore

# frozen from an mpmath (60-digit) sigmoid evaluation of 0.9 / (1 + e^-1.8)
TAU_09_05 = 0.772334041589561


def test_combined_score_equal_components():
    assert combined_score(QualityScores(0.5, 0.5), ScreenConfig(lambda_=0.6)) == 0.5


def test_combined_score_weighted():
    got = combined_score(QualityScores(0.3, 0.7), ScreenConfig(lambda_=0.6))
    # 0.6*0.3 + 0.4*0.7 is one ulp below the decimal literal in binary64
    assert abs(got - 0.46) <= 1e-15


def test_combined_score_degenerate_weight():
    assert combined_score(QualityScores(0.83, 0.1), ScreenConfig(lambda_=1.0)) == 0.83


def test_scores_validated():
    with pytest.raises(ConfigError):
        QualityScores(1.2, 0.5)
    with pytest.raises(ConfigError):
        QualityScores(0.5, -0.1)
    with pytest.raises(ConfigError):
        ScreenConfig(lambda_=1.5)
    with pytest.raises(ConfigError):
        ScreenConfig(alpha=0.0)


def test_threshold_zero_anchor():
    assert acceptance_threshold(0.0, 0.95) == 0.0


def test_threshold_alpha_floor_active():
    # sigmoid(1.6) ~= 0.832 < 0.95, so the floor wins
    assert acceptance_threshold(0.8, 0.95) == pytest.approx(0.76, abs=1e-12)


def test_threshold_sigmoid_active():
    # sigmoid(1.8) ~= 0.858 > 0.5
    assert acceptance_threshold(0.9, 0.5) == pytest.approx(TAU_09_05, abs=1e-6)


def test_threshold_negative_score():
    with pytest.raises(NegativeScore):
        acceptance_threshold(-0.1, 0.95)


def test_threshold_alpha_validated():
    with pytest.raises(ConfigError):
        acceptance_threshold(0.5, 0.0)
    with pytest.raises(ConfigError):
        acceptance_threshold(0.5, 1.1)


def test_screen_strictly_above_admits():
    state = ScreenState(s0=0.5, tau=0.475)
    config = ScreenConfig()
    decision = screen_frame(QualityScores(0.476, 0.476), state, config)
    assert decision.admitted and decision.score == pytest.approx(0.476)


def test_screen_equality_filters():
    state = ScreenState(s0=0.5, tau=0.475)
    decision = screen_frame(QualityScores(0.475, 0.475), state, ScreenConfig())
    assert decision.score == 0.475
    assert not decision.admitted


def test_screen_composition_filters():
    config = ScreenConfig(lambda_=0.6, alpha=0.95)
    state = ScreenState(s0=0.8, tau=acceptance_threshold(0.8, 0.95))
    decision = screen_frame(QualityScores(0.3, 0.7), state, config)
    assert not decision.admitted
    assert abs(decision.score - 0.46) <= 1e-15


def test_init_screen_state():
    state = init_screen_state(QualityScores(0.8, 0.8), ScreenConfig())
    assert state.s0 == pytest.approx(0.8)
    assert state.tau == pytest.approx(0.76, abs=1e-12)


# --- proxy scoring -----------------------------------------------------------

def test_proxy_constant_raster():
    scores = proxy_scores([0.5] * 16, 4, 4)
    assert scores.q_clip == 0.0
    assert scores.q_musiq == 0.0


def test_proxy_checkerboard_variance():
    board = [[(x + y) % 2 for x in range(4)] for y in range(4)]
    flat = [float(v) for row in board for v in row]
    scores = proxy_scores(flat, 4, 4)
    # balanced 0/1 raster has population variance exactly 0.25
    assert scores.q_clip == pytest.approx(0.25 / 0.26, abs=1e-12)
    assert 0.0 <= scores.q_musiq <= 1.0


def test_proxy_range_property():
    rng = np.random.default_rng(7)
    for _ in range(20):
        w, h = int(rng.integers(2, 9)), int(rng.integers(2, 9))
        img = rng.random(w * h)
        scores = proxy_scores(img, w, h)
        assert 0.0 <= scores.q_clip <= 1.0
        assert 0.0 <= scores.q_musiq <= 1.0


def test_proxy_too_small():
    with pytest.raises(EmptyRaster):
        proxy_scores([0.0, 1.0], 1, 2)


def test_proxy_size_mismatch():
    with pytest.raises(DimensionMismatch):
        proxy_scores([0.0] * 5, 2, 2)


def test_proxy_bad_intensities():
    with pytest.raises(ConfigError):
        proxy_scores([0.0, 0.5, 1.5, 0.2], 2, 2)


# --- properties --------------------------------------------------------------

unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)
alpha_st = st.floats(min_value=1e-6, max_value=1.0, allow_nan=False)


@given(st.floats(min_value=0.0, max_value=4.0), st.floats(min_value=0.0, max_value=4.0), alpha_st)
@settings(max_examples=300)
def test_threshold_monotone(s0_a, s0_b, alpha):
    lo, hi = sorted((s0_a, s0_b))
    assert acceptance_threshold(lo, alpha) <= acceptance_threshold(hi, alpha) + 1e-15


@given(st.floats(min_value=0.0, max_value=10.0), alpha_st)
@settings(max_examples=300)
def test_threshold_never_exceeds_anchor(s0, alpha):
    assert acceptance_threshold(s0, alpha) <= s0 + 1e-15


@given(unit, unit, unit)
@settings(max_examples=300)
def test_combined_bounded_by_components(lam, q_clip, q_musiq):
    score = combined_score(QualityScores(q_clip, q_musiq), ScreenConfig(lambda_=lam))
    assert min(q_clip, q_musiq) - 1e-12 <= score <= max(q_clip, q_musiq) + 1e-12


@given(unit, unit, unit, st.floats(min_value=0.0, max_value=1.0))
@settings(max_examples=200)
def test_screen_decision_replayable(lam, q_clip, q_musiq, tau):
    config = ScreenConfig(lambda_=lam)
    state = ScreenState(s0=tau, tau=tau)
    first = screen_frame(QualityScores(q_clip, q_musiq), state, config)
    second = screen_frame(QualityScores(q_clip, q_musiq), state, config)
    assert first == second
