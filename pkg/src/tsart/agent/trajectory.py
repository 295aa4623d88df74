"""Trajectory records: Q, (T, A, O)*, F."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any, Iterator

from tsart.registry import ToolCall, ToolResult, serialize

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Step:
    thought: str
    action: ToolCall
    observation: ToolResult

    def to_dict(self) -> dict:
        return {
            "thought": self.thought,
            "action": self.action.to_dict(),
            "observation": self.observation.to_dict(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Step":
        return cls(
            doc["thought"], ToolCall.from_dict(doc["action"]), ToolResult.from_dict(doc["observation"])
        )


@dataclass(frozen=True)
class State:
    """One element of the flat state sequence; ``index`` is 1-based."""

    index: int
    kind: str  # Q | T | A | O | F
    content: Any


@dataclass
class Trajectory:
    query: str
    steps: list[Step] = field(default_factory=list)
    final_answer: str | None = None
    series_ref: str = ""
    termination: str = "final"
    malformed_turns: int = 0

    @property
    def K(self) -> int:
        return len(self.steps)

    def states(self) -> list[State]:
        out = [State(1, "Q", self.query)]
        for step in self.steps:
            for kind, content in (("T", step.thought), ("A", step.action), ("O", step.observation)):
                out.append(State(len(out) + 1, kind, content))
        if self.final_answer is not None:
            out.append(State(len(out) + 1, "F", self.final_answer))
        return out

    def prefix(self, k: int) -> list[State]:
        """States S_1 .. S_{3k-2}: everything before the k-th thought (k is 1-based)."""
        if not 1 <= k <= self.K:
            raise IndexError(f"step {k} out of range [1, {self.K}]")
        return self.states()[: 3 * k - 2]

    def to_dict(self) -> dict:
        return {
            "v": SCHEMA_VERSION,
            "query": self.query,
            "series_ref": self.series_ref,
            "steps": [s.to_dict() for s in self.steps],
            "final_answer": self.final_answer,
            "termination": self.termination,
            "malformed_turns": self.malformed_turns,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Trajectory":
        if doc.get("v") != SCHEMA_VERSION:
            raise ValueError(f"unsupported trajectory schema version {doc.get('v')!r}")
        return cls(
            query=doc["query"],
            steps=[Step.from_dict(s) for s in doc["steps"]],
            final_answer=doc.get("final_answer"),
            series_ref=doc.get("series_ref", ""),
            termination=doc.get("termination", "final"),
            malformed_turns=doc.get("malformed_turns", 0),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, allow_nan=False)

    @classmethod
    def from_json(cls, line: str) -> "Trajectory":
        return cls.from_dict(json.loads(line))


def render_action(call: ToolCall) -> str:
    text = f"tool: [{call.tool}]"
    if call.arguments:
        text += f", tool_input: {serialize(call.arguments)}"
    return text


def render_state(state: State) -> str:
    if state.kind == "A":
        return render_action(state.content)
    if state.kind == "O":
        return state.content.text()
    return str(state.content)


_HEADERS = {"Q": "Query", "T": "Thought", "A": "Action", "O": "Observation", "F": "Final Answer"}
_SECTION = re.compile(r"^(Query|Thought|Action|Observation|Final Answer):[ \t]*$", re.M)


def render_transcript(traj: Trajectory) -> str:
    """ReAct-style text transcript, one headed section per state."""
    return "\n\n".join(f"{_HEADERS[s.kind]}:\n{render_state(s)}" for s in traj.states())


def parse_observation(text: str) -> ToolResult:
    m = re.match(r"tool: \[([^\]]*)\]\n(output|error): (.*)\Z", text, re.S)
    if not m:
        raise ValueError(f"unrecognized observation text: {text[:60]!r}")
    tool, kind, body = m.groups()
    if kind == "error":
        return ToolResult(tool, error=body)
    return ToolResult(tool, payload=json.loads(body))


def _sections(text: str) -> Iterator[tuple[str, str]]:
    marks = list(_SECTION.finditer(text))
    for m, nxt in zip(marks, marks[1:] + [None]):
        end = nxt.start() if nxt else len(text)
        body = text[m.end() + 1 : end]
        yield m.group(1), body[:-2] if nxt and body.endswith("\n\n") else body


def parse_transcript(text: str) -> Trajectory:
    """Inverse of ``render_transcript`` for transcripts it produced."""
    from tsart.agent.parsing import parse_action

    sections = list(_sections(text))
    if not sections or sections[0][0] != "Query":
        raise ValueError("transcript must start with a Query section")
    traj = Trajectory(query=sections[0][1])
    rest = sections[1:]
    final = None
    if rest and rest[-1][0] == "Final Answer":
        final = rest[-1][1]
        rest = rest[:-1]
    if len(rest) % 3:
        raise ValueError("transcript body is not a sequence of Thought/Action/Observation triples")
    for i in range(0, len(rest), 3):
        (h1, thought), (h2, action), (h3, obs) = rest[i : i + 3]
        if (h1, h2, h3) != ("Thought", "Action", "Observation"):
            raise ValueError(f"unexpected section order {h1}/{h2}/{h3}")
        traj.steps.append(Step(thought, parse_action(action), parse_observation(obs)))
    traj.final_answer = final
    traj.termination = "final" if final is not None else "max_steps"
    return traj
