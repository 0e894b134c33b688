"""Scikit-learn style facade over the replay pipeline.

``fit`` replays a feature stream and freezes the resulting reference cache;
``predict`` maps target pose windows to reference slots. Hyperparameters are
plain constructor attributes, so ``get_params`` / ``set_params`` / ``clone``
and grid search over (lambda_, alpha, capacity, ...) work out of the box.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .cache import CachePolicyConfig
from .errors import FrameCacheError
from .io import FrameStream, parse_stream
from .match import MatchResult, select_reference
from .pipeline import RunConfig, replay
from .screen import ScreenConfig


class FrameCachePolicy(BaseEstimator):
    """Reference-frame cache policy as a fit/predict estimator.

    Parameters
    ----------
    lambda_ : weight on the first quality component in the combined score.
    alpha : strictness floor of the adaptive screening threshold.
    capacity : reference buffer size (slot 0 pinned).
    redundancy_threshold : gain cutoff below which replacement happens.
    window : frames per matching window.
    policy : "framecache", "static_first", "fifo", or "most_recent".
    """

    def __init__(
        self,
        lambda_: float = 0.6,
        alpha: float = 0.95,
        capacity: int = 8,
        redundancy_threshold: float = 1.0,
        window: int = 16,
        policy: str = "framecache",
    ):
        self.lambda_ = lambda_
        self.alpha = alpha
        self.capacity = capacity
        self.redundancy_threshold = redundancy_threshold
        self.window = window
        self.policy = policy

    def _config(self) -> RunConfig:
        return RunConfig(
            screen=ScreenConfig(lambda_=self.lambda_, alpha=self.alpha),
            cache=CachePolicyConfig(
                capacity=self.capacity,
                redundancy_threshold=self.redundancy_threshold,
            ),
            window=self.window,
            policy=self.policy,
        )

    def fit(self, X, y=None):
        """Replay a stream (FrameStream or .fcs path) and freeze the cache."""
        stream = X if isinstance(X, FrameStream) else parse_stream(X)
        result = replay(stream, self._config())
        self.cache_ = result.cache
        self.events_ = result.events
        self.summary_ = result.summary
        self.n_features_appearance_ = stream.d_a
        self.n_features_pose_ = stream.d_p
        return self

    def _check_fitted(self):
        if not hasattr(self, "cache_"):
            raise FrameCacheError("this FrameCachePolicy instance is not fitted yet")

    def match_window(self, poses) -> MatchResult:
        """Full MatchResult for one window of target poses."""
        self._check_fitted()
        return select_reference(self.cache_, poses)

    def predict(self, X) -> np.ndarray:
        """Selected reference slot for each window in X (sequence of pose windows)."""
        self._check_fitted()
        return np.array([self.match_window(window).selected_slot for window in X], dtype=np.int64)
