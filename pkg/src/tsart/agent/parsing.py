"""Parser for model turns in the Thought / Action / Final Answer text protocol."""

from __future__ import annotations

import ast
import json
import re
from dataclasses import dataclass

from tsart.agent.trajectory import render_action
from tsart.registry import ToolCall


class ActionSyntaxError(ValueError):
    pass


@dataclass(frozen=True)
class StepParse:
    kind: str  # thought_action | final | malformed
    thought: str = ""
    call: ToolCall | None = None
    answer: str | None = None
    diagnostic: str | None = None


_FENCE = re.compile(r"```[\w-]*[ \t]*\n?")
_FINAL = re.compile(r"final[ \t]*answer[ \t]*:", re.I)
_ACTION = re.compile(r"(?:^|\n)[ \t*#]*action[ \t*]*:", re.I)
_THOUGHT = re.compile(r"(?:^|\n)[ \t*#]*thought[ \t*]*:", re.I)
_TOOL = re.compile(r"\btool[ \t]*:[ \t]*\[?[ \t]*([A-Za-z_][\w.-]*)[ \t]*\]?", re.I)
_TOOL_INPUT = re.compile(r"\btool_input[ \t]*:[ \t]*", re.I)


def _balanced_object(text: str, start: int) -> str:
    """Return the ``{...}`` block starting at ``start``, honouring quoted strings."""
    depth, quote, escaped = 0, None, False
    for i in range(start, len(text)):
        ch = text[i]
        if quote:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == quote:
                quote = None
        elif ch in "\"'":
            quote = ch
        elif ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return text[start : i + 1]
    raise ActionSyntaxError("unbalanced braces in tool_input")


def _parse_arguments(text: str) -> dict:
    stripped = text.strip()
    if not stripped or re.match(r"(null|none)\b", stripped, re.I):
        return {}
    if not stripped.startswith("{"):
        raise ActionSyntaxError("tool_input must be a JSON object")
    block = _balanced_object(stripped, 0)
    try:
        args = json.loads(block)
    except json.JSONDecodeError:
        try:
            args = ast.literal_eval(block)
        except (ValueError, SyntaxError):
            raise ActionSyntaxError(f"tool_input is not valid JSON: {block[:80]}") from None
    if not isinstance(args, dict):
        raise ActionSyntaxError("tool_input must be a JSON object")
    return {str(k): v for k, v in args.items()}


def parse_action(text: str) -> ToolCall:
    """Parse ``tool: [NAME], tool_input: {...}`` (input optional, brackets optional)."""
    m = _TOOL.search(text)
    if not m:
        raise ActionSyntaxError("no 'tool: [NAME]' found in the Action")
    rest = text[m.end() :]
    ti = _TOOL_INPUT.search(rest)
    args = _parse_arguments(rest[ti.end() :]) if ti else {}
    return ToolCall(m.group(1), args)


def parse_step(raw: str) -> StepParse:
    text = _FENCE.sub("", raw or "").replace("```", "").strip()
    final = _FINAL.search(text)
    action = _ACTION.search(text)
    tool = _TOOL.search(text, action.end() if action else 0)
    action_start = action.start() if action else (tool.start() if tool else None)

    if final and (tool is None or final.start() < action_start):
        answer = text[final.end() :].strip()
        if not answer:
            return StepParse("malformed", diagnostic="empty Final Answer")
        return StepParse("final", answer=answer)

    if tool is None:
        if action:
            return StepParse("malformed", diagnostic="Action without 'tool: [NAME]'")
        return StepParse(
            "malformed", diagnostic="expected 'Thought: ... Action: tool: [NAME], tool_input: {...}' "
            "or 'Final Answer: ...'"
        )

    thought_m = _THOUGHT.search(text, 0, action_start)
    thought = text[thought_m.end() if thought_m else 0 : action_start].strip()
    try:
        call = parse_action(text[action.end() if action else action_start :])
    except ActionSyntaxError as exc:
        return StepParse("malformed", thought=thought, diagnostic=str(exc))
    return StepParse("thought_action", thought=thought, call=call)


def render_step(thought: str, call: ToolCall) -> str:
    return f"Thought: {thought}\nAction: {render_action(call)}"


def render_final(answer: str, thought: str | None = None) -> str:
    head = f"Thought: {thought}\n" if thought else ""
    return f"{head}Final Answer: {answer}"
