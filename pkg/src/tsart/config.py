"""Tunable thresholds and run limits."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ToolkitConfig:
    # trend: flat iff |slope| * (L - 1) <= flat_threshold * segment std
    flat_threshold: float = 0.5
    # seasonality: "strong" iff strength score >= season_threshold
    season_threshold: float = 0.6
    # noise_profile family-wise significance across the tested lags
    noise_alpha: float = 0.05
    noise_min_length: int = 16
    granger_alpha: float = 0.05


@dataclass(frozen=True)
class EpisodeLimits:
    """Bounds on one agent episode.

    ``max_steps`` caps well-formed model turns (tool calls plus the final
    answer); ``max_malformed`` caps consecutive unparseable turns.
    """

    max_steps: int = 8
    max_malformed: int = 3

    def __post_init__(self) -> None:
        if self.max_steps < 0 or self.max_malformed < 1:
            raise ValueError("max_steps must be >= 0 and max_malformed >= 1")


EVAL_TEMPERATURE = 0.0
COLLECT_TEMPERATURE = 0.7
DEFAULT_SIGMA = 0.8
DEFAULT_J = 3
DEFAULT_RENDER_PRECISION = 3

DEFAULT_TOOLKIT = ToolkitConfig()
