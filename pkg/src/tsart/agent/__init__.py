from tsart.agent.client import (
    ChatModel,
    EndpointClient,
    EndpointConfig,
    EndpointError,
    chat,
)
from tsart.agent.mock import ConstantModel, ScriptedModel
from tsart.agent.parsing import StepParse, parse_step, render_final, render_step
from tsart.agent.prompts import build_prompt, compose_query
from tsart.agent.runtime import run_episode
from tsart.agent.trajectory import Step, Trajectory, parse_transcript, render_transcript

__all__ = [
    "ChatModel",
    "ConstantModel",
    "EndpointClient",
    "EndpointConfig",
    "EndpointError",
    "ScriptedModel",
    "Step",
    "StepParse",
    "Trajectory",
    "build_prompt",
    "chat",
    "compose_query",
    "parse_step",
    "parse_transcript",
    "render_final",
    "render_step",
    "render_transcript",
    "run_episode",
]
