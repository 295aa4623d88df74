"""Conversion of trajectories and derived samples to sharegpt conversations.

Positions are 1-based: human and observation turns sit at odd positions,
gpt and function_call turns at even ones, and every conversation ends on a
learned (even) turn. A gpt turn followed by a function_call is bridged by a
"(continue)" human turn.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

from tsart.agent.trajectory import Trajectory, render_action
from tsart.pipeline.experience import ExperienceSample
from tsart.pipeline.reflection import ReflectionSample

CONTINUE = "(continue)"
ODD_ROLES = ("human", "observation")
EVEN_ROLES = ("gpt", "function_call")
STAGES = ("stage1", "stage2", "stage4")


class ParityError(AssertionError):
    pass


def _turn(role: str, value: str) -> dict:
    return {"from": role, "value": value}


def prefix_turns(traj: Trajectory, k: int) -> list[dict]:
    """Conversation for S_1 .. S_{3k-2}: the query and the first k-1 full steps."""
    turns = [_turn("human", traj.query)]
    for step in traj.steps[: k - 1]:
        turns += [
            _turn("gpt", step.thought),
            _turn("human", CONTINUE),
            _turn("function_call", render_action(step.action)),
            _turn("observation", step.observation.text()),
        ]
    return turns


def trajectory_conversation(traj: Trajectory) -> list[dict]:
    if traj.final_answer is None:
        raise ValueError("only finished trajectories convert to a full conversation")
    return prefix_turns(traj, traj.K + 1) + [_turn("gpt", traj.final_answer)]


def stage1_conversation(sample: ExperienceSample, traj: Trajectory) -> list[dict]:
    return prefix_turns(traj, sample.k) + [
        _turn("gpt", sample.thought),
        _turn("human", CONTINUE),
        _turn("function_call", render_action(sample.alt_action)),
        _turn("human", CONTINUE),
        _turn("gpt", sample.alt_observation.text()),
    ]


def stage2_conversation(traj: Trajectory, k: int) -> list[dict]:
    step = traj.steps[k - 1]
    return prefix_turns(traj, k) + [
        _turn("gpt", step.thought),
        _turn("human", CONTINUE),
        _turn("function_call", render_action(step.action)),
    ]


def stage4_conversation(sample: ReflectionSample, traj: Trajectory) -> list[dict]:
    return prefix_turns(traj, sample.k) + [
        _turn("gpt", sample.thought),
        _turn("human", CONTINUE),
        _turn("gpt", sample.explanation),
        _turn("human", CONTINUE),
        _turn("function_call", render_action(sample.expert_action)),
    ]


def parity_problems(conversation: list[dict]) -> list[str]:
    problems = []
    if not conversation:
        return ["empty conversation"]
    for pos, turn in enumerate(conversation, start=1):
        role = turn.get("from")
        allowed = ODD_ROLES if pos % 2 else EVEN_ROLES
        if role not in allowed:
            problems.append(f"position {pos}: role {role!r} not in {allowed}")
        if not isinstance(turn.get("value"), str):
            problems.append(f"position {pos}: value is not a string")
    if len(conversation) % 2:
        problems.append("conversation ends on an odd (unlearned) position")
    return problems


def check_parity(conversation: list[dict]) -> None:
    problems = parity_problems(conversation)
    if problems:
        raise ParityError("; ".join(problems))


def _records(conversations: list[list[dict]]) -> list[dict]:
    for conv in conversations:
        check_parity(conv)
    return [{"conversations": conv} for conv in conversations]


def mix_stage4(
    reflections: list[list[dict]], experts: list[list[dict]], mix_ratio: float = 1.0, seed=0
) -> list[list[dict]]:
    """Interleave reflection conversations with up to mix_ratio expert ones per reflection."""
    if mix_ratio < 0:
        raise ValueError("mix_ratio must be >= 0")
    rng = random.Random(f"stage4:{seed}")
    pool = list(experts)
    rng.shuffle(pool)
    n_expert = min(len(pool), round(mix_ratio * len(reflections)))
    mixed = list(reflections) + pool[:n_expert]
    rng.shuffle(mixed)
    return mixed


def export_stage(
    kind: str,
    trajectories: dict[str, Trajectory],
    experience: list[ExperienceSample] = (),
    reflections: list[ReflectionSample] = (),
    mix_ratio: float = 1.0,
    seed=0,
) -> list[dict]:
    """Build a sharegpt dataset; trajectories are keyed by id in a stable order."""
    if kind == "stage1":
        convs = [stage1_conversation(s, trajectories[s.trajectory_id]) for s in experience]
    elif kind == "stage2":
        convs = [
            stage2_conversation(t, k) for t in trajectories.values() for k in range(1, t.K + 1)
        ]
    elif kind == "stage4":
        refl = [stage4_conversation(r, trajectories[r.trajectory_id]) for r in reflections]
        experts = [
            trajectory_conversation(t) for t in trajectories.values() if t.final_answer is not None
        ]
        convs = mix_stage4(refl, experts, mix_ratio, seed)
    else:
        raise ValueError(f"unknown stage {kind!r}; expected one of {STAGES}")
    return _records(convs)


def write_sharegpt(path: str | Path, records: list[dict]) -> None:
    Path(path).write_text(json.dumps(records, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")


def check_sharegpt_file(path: str | Path) -> list[str]:
    """Problems found in a sharegpt JSON file; empty means it passes."""
    try:
        records = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        return [f"unreadable: {exc}"]
    if not isinstance(records, list):
        return ["top level is not a list"]
    problems = []
    for i, rec in enumerate(records):
        conv = rec.get("conversations") if isinstance(rec, dict) else None
        if not isinstance(conv, list):
            problems.append(f"record {i}: missing conversations list")
            continue
        problems += [f"record {i}: {p}" for p in parity_problems(conv)]
    return problems
