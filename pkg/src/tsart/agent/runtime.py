"""The ReAct episode loop."""

from __future__ import annotations

import logging

from tsart.agent.client import ChatModel
from tsart.agent.parsing import parse_step
from tsart.agent.prompts import CORRECTION_MESSAGE, build_prompt
from tsart.agent.trajectory import Step, Trajectory
from tsart.config import EpisodeLimits
from tsart.registry import Registry
from tsart.series import TimeSeries

log = logging.getLogger(__name__)


def observation_message(text: str) -> dict:
    return {"role": "user", "content": f"Observation:\n{text}"}


def run_episode(
    model: ChatModel,
    registry: Registry,
    series: TimeSeries,
    query: str,
    mode: str = "evaluate",
    limits: EpisodeLimits = EpisodeLimits(),
    known_answer: str | None = None,
    series_ref: str = "",
) -> Trajectory:
    """Run one episode to a final answer or a limit.

    Each model turn is conditioned on the whole history so far. Tool errors
    come back as observations; only endpoint failures raise (EndpointError).
    Hitting a limit returns a truncated trajectory with no final answer.
    """
    messages = build_prompt(mode, registry, query, known_answer)
    traj = Trajectory(query=query, series_ref=series_ref)
    well_formed = 0
    malformed_streak = 0
    while True:
        if well_formed >= limits.max_steps:
            traj.termination = "max_steps"
            return traj
        raw = model.chat(messages)
        messages.append({"role": "assistant", "content": raw})
        parsed = parse_step(raw)

        if parsed.kind == "malformed":
            traj.malformed_turns += 1
            malformed_streak += 1
            log.info("malformed turn %d: %s", malformed_streak, parsed.diagnostic)
            if malformed_streak >= limits.max_malformed:
                traj.termination = "malformed"
                return traj
            messages.append(
                {"role": "user", "content": CORRECTION_MESSAGE.format(diagnostic=parsed.diagnostic)}
            )
            continue

        malformed_streak = 0
        well_formed += 1
        if parsed.kind == "final":
            traj.final_answer = parsed.answer
            traj.termination = "final"
            return traj

        result = registry.dispatch(series, parsed.call)
        traj.steps.append(Step(parsed.thought, parsed.call, result))
        messages.append(observation_message(result.text()))
