"""Early-experience construction: alternative actions and the observations they produce."""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass
from typing import Protocol

from tsart.agent.client import ChatModel, EndpointError
from tsart.agent.parsing import parse_step
from tsart.agent.prompts import PROPOSE_TEMPLATE
from tsart.agent.trajectory import State, Trajectory, render_state
from tsart.registry import Registry, ToolCall, ToolResult
from tsart.series import TimeSeries

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExperienceSample:
    k: int
    context: tuple[State, ...]
    thought: str
    alt_action: ToolCall
    alt_observation: ToolResult
    trajectory_id: str = ""

    def to_dict(self) -> dict:
        return {
            "trajectory_id": self.trajectory_id,
            "k": self.k,
            "thought": self.thought,
            "alt_action": self.alt_action.to_dict(),
            "alt_observation": self.alt_observation.to_dict(),
        }


class ActionSampler(Protocol):
    def propose(
        self, context: list[State], thought: str, series: TimeSeries, count: int, rng: random.Random
    ) -> list[ToolCall]: ...


class UniformSampler:
    """Uniform choice over registry tools, each with its default example arguments."""

    def __init__(self, registry: Registry):
        self.registry = registry

    def propose(self, context, thought, series, count, rng):
        names = self.registry.names()
        return [self.registry.example_call(rng.choice(names), series) for _ in range(count)]


def render_context(context: list[State] | tuple[State, ...]) -> str:
    headers = {"Q": "Query", "T": "Thought", "A": "Action", "O": "Observation", "F": "Final Answer"}
    return "\n\n".join(f"{headers[s.kind]}:\n{render_state(s)}" for s in context)


class ModelSampler:
    """Asks a model for each proposal; any failure falls back to a uniform proposal."""

    def __init__(self, model: ChatModel, registry: Registry):
        self.model = model
        self.registry = registry
        self.fallback = UniformSampler(registry)

    def propose(self, context, thought, series, count, rng):
        prompt = (
            PROPOSE_TEMPLATE.replace("{context}", render_context(context))
            .replace("{thought}", thought)
            .replace("{tools}", "\n" + self.registry.list_tools())
        )
        calls = []
        for j in range(count):
            messages = [{"role": "user", "content": f"{prompt}\n(proposal {j + 1} of {count})"}]
            try:
                parsed = parse_step(self.model.chat(messages))
            except EndpointError as exc:
                log.warning("proposal endpoint failed, using uniform fallback: %s", exc)
                parsed = None
            if parsed is not None and parsed.call is not None:
                calls.append(parsed.call)
            else:
                calls.extend(self.fallback.propose(context, thought, series, 1, rng))
        return calls


def build_early_experience(
    traj: Trajectory,
    series: TimeSeries,
    sampler: ActionSampler,
    registry: Registry,
    J: int = 3,
    seed=0,
    trajectory_id: str = "",
) -> list[ExperienceSample]:
    """J alternatives per thought, each executed against the series; J*K samples."""
    if J < 1:
        raise ValueError("J must be >= 1")
    rng = random.Random(str(seed))
    fallback = UniformSampler(registry)
    out = []
    for k in range(1, traj.K + 1):
        context = traj.prefix(k)
        thought = traj.steps[k - 1].thought
        try:
            calls = list(sampler.propose(context, thought, series, J, rng))[:J]
        except EndpointError as exc:
            log.warning("sampler failed at step %d: %s", k, exc)
            calls = []
        if len(calls) < J:
            calls += fallback.propose(context, thought, series, J - len(calls), rng)
        for call in calls:
            result = registry.dispatch(series, call)
            out.append(ExperienceSample(k, tuple(context), thought, call, result, trajectory_id))
    return out
