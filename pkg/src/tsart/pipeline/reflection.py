"""Self-reflection generation: why the expert action beats an alternative."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass

from tsart.agent.client import ChatModel, EndpointError
from tsart.agent.prompts import REFLECTION_TEMPLATE
from tsart.agent.trajectory import State, Trajectory, render_action
from tsart.pipeline.experience import ExperienceSample, render_context
from tsart.registry import ToolCall, ToolResult

log = logging.getLogger(__name__)

_REFUSAL = re.compile(r"^\s*(i'?m sorry|i am sorry|i can(?:no|')t|i cannot|i won'?t|as an ai)\b", re.I)


@dataclass(frozen=True)
class ReflectionSample:
    k: int
    context: tuple[State, ...]
    thought: str
    expert_action: ToolCall
    expert_observation: ToolResult
    alt_action: ToolCall
    alt_observation: ToolResult
    explanation: str
    trajectory_id: str = ""

    def __post_init__(self) -> None:
        if not self.explanation.strip():
            raise ValueError("reflection explanation must be non-empty")

    def to_dict(self) -> dict:
        return {
            "trajectory_id": self.trajectory_id,
            "k": self.k,
            "thought": self.thought,
            "expert_action": self.expert_action.to_dict(),
            "expert_observation": self.expert_observation.to_dict(),
            "alt_action": self.alt_action.to_dict(),
            "alt_observation": self.alt_observation.to_dict(),
            "explanation": self.explanation,
        }


def reflection_prompt(sample: ExperienceSample, traj: Trajectory) -> str:
    step = traj.steps[sample.k - 1]
    situation = render_context(sample.context) + f"\n\nThought:\n{sample.thought}"
    alternatives = (
        f"  1. Action: {render_action(sample.alt_action)}\n"
        f"     Resulting state: {sample.alt_observation.text()}"
    )
    return (
        REFLECTION_TEMPLATE.replace("{situation}", situation)
        .replace("{expert_action}", render_action(step.action))
        .replace("{expert_outcome}", step.observation.text())
        .replace("{alternatives}", alternatives)
    )


def is_refusal(text: str) -> bool:
    return bool(_REFUSAL.match(text))


def build_reflections(
    experience: list[ExperienceSample], traj: Trajectory, model: ChatModel
) -> list[ReflectionSample]:
    """One model call per experience sample; unusable replies drop the sample."""
    out = []
    for sample in experience:
        step = traj.steps[sample.k - 1]
        messages = [{"role": "user", "content": reflection_prompt(sample, traj)}]
        try:
            text = model.chat(messages).strip()
        except EndpointError as exc:
            log.warning("dropping reflection (step %d): endpoint failure: %s", sample.k, exc)
            continue
        if not text:
            log.warning("dropping reflection (step %d): empty reply", sample.k)
            continue
        if is_refusal(text):
            log.warning("dropping reflection (step %d): refusal", sample.k)
            continue
        out.append(
            ReflectionSample(
                sample.k, sample.context, sample.thought, step.action, step.observation,
                sample.alt_action, sample.alt_observation, text, sample.trajectory_id,
            )
        )
    return out
