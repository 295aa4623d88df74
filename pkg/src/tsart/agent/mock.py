"""Offline stand-ins for the model endpoint.

A script file is JSON (a list) or JSONL (one object per line). Each entry is
an episode script::

    {"match": "moving average", "turns": ["Thought: ...\\nAction: ...", "Final Answer: ..."]}
    {"reply": "yes"}

The episode whose ``match`` occurs in the first user message (for agent
prompts, in the question part of it) is chosen
(entries without ``match`` are fallbacks, used in file order). The turn is
selected by the number of assistant messages already in the conversation,
so replay is stateless and safe to share between threads. Past the last
turn the last one repeats. A turn ``{"error": "..."}`` raises an
EndpointError.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from tsart.agent.client import EndpointError


@dataclass(frozen=True)
class Episode:
    turns: tuple
    match: str | None = None


_QUESTION_MARK = "The question is:"


class ScriptedModel:
    def __init__(self, episodes: list[Episode]):
        if not episodes:
            raise ValueError("mock script has no episodes")
        self.episodes = list(episodes)

    @classmethod
    def from_entries(cls, entries: list[dict]) -> "ScriptedModel":
        episodes = []
        for e in entries:
            if "reply" in e:
                turns = (e["reply"],)
            else:
                turns = tuple(e["turns"])
            if not turns:
                raise ValueError("mock episode needs at least one turn")
            episodes.append(Episode(turns, e.get("match")))
        return cls(episodes)

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedModel":
        text = Path(path).read_text(encoding="utf-8")
        stripped = text.lstrip()
        if stripped.startswith("["):
            entries = json.loads(text)
        else:
            entries = [json.loads(line) for line in text.splitlines() if line.strip()]
        return cls.from_entries(entries)

    def _episode(self, messages: list[dict]) -> Episode:
        first_user = next((m["content"] for m in messages if m["role"] == "user"), "")
        # agent prompts: match against the question, not the tool catalogue
        cut = first_user.rfind(_QUESTION_MARK)
        if cut >= 0:
            first_user = first_user[cut:]
        for ep in self.episodes:
            if ep.match is not None and ep.match in first_user:
                return ep
        for ep in self.episodes:
            if ep.match is None:
                return ep
        raise EndpointError("mock script has no episode matching this conversation")

    def chat(self, messages: list[dict]) -> str:
        ep = self._episode(messages)
        turn = sum(1 for m in messages if m["role"] == "assistant")
        reply = ep.turns[min(turn, len(ep.turns) - 1)]
        if isinstance(reply, dict):
            raise EndpointError(reply.get("error", "scripted failure"))
        return reply


class ConstantModel:
    def __init__(self, reply: str):
        self.reply = reply

    def chat(self, messages: list[dict]) -> str:
        return self.reply


class FailingModel:
    def __init__(self, message: str = "endpoint unavailable"):
        self.message = message

    def chat(self, messages: list[dict]) -> str:
        raise EndpointError(self.message)
