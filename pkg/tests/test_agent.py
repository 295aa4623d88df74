import json

import httpx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import ts
from reference_samples import SAMPLE2, SAMPLE2_MEANS
from tsart.agent import (
    ConstantModel,
    EndpointClient,
    EndpointConfig,
    EndpointError,
    ScriptedModel,
    Step,
    Trajectory,
    build_prompt,
    parse_step,
    parse_transcript,
    render_final,
    render_step,
    render_transcript,
    run_episode,
)
from tsart.agent.client import EndpointTimeout, MalformedResponse, chat
from tsart.agent.mock import FailingModel
from tsart.config import EpisodeLimits
from tsart.registry import ToolCall, ToolResult, serialize

SAMPLE2_TURN = (
    "Thought:\nI need to compute the 3-point moving average for the given sequence. "
    "This can be done using the [rolling_stat] tool with a window size of 3 and the \"mean\" statistic.\n\n"
    "Action:\ntool: [rolling_stat], tool_input: {\"stat\": \"mean\", \"window\": 3, \"step\": 1}"
)


# prompts

def test_prompt_modes(registry):
    ev = build_prompt("evaluate", registry, "What is up?")
    assert "think step by step in ReAct-style" in ev[1]["content"]
    assert "What is up?" in ev[1]["content"] and "series_info" in ev[1]["content"]
    co = build_prompt("collect", registry, "What is up?", known_answer="B")
    assert "should call a tool at least once" in co[1]["content"]
    assert "B" in co[1]["content"].split("The question is:")[1]
    with pytest.raises(ValueError):
        build_prompt("collect", registry, "q")
    with pytest.raises(ValueError):
        build_prompt("evaluate", registry, "  ")


def test_prompt_braces_survive(registry):
    msg = build_prompt("evaluate", registry, "values {x} and {series}")[1]["content"]
    assert "values {x} and {series}" in msg


# parsing

def test_parse_sample2_turn():
    p = parse_step(SAMPLE2_TURN)
    assert p.kind == "thought_action"
    assert p.call == ToolCall("rolling_stat", {"stat": "mean", "window": 3, "step": 1})
    assert p.thought.startswith("I need to compute")


def test_parse_final_and_garbage():
    p = parse_step("Final Answer:\nA) 0.51")
    assert (p.kind, p.answer) == ("final", "A) 0.51")
    assert parse_step("I think we are done.").kind == "malformed"
    assert parse_step("Final Answer:   ").kind == "malformed"


@pytest.mark.parametrize(
    "raw, tool, args",
    [
        ("```\nThought: x\nAction: tool: volatility, tool_input: {'window': 5}\n```", "volatility", {"window": 5}),
        ("THOUGHT: x\nACTION: TOOL: [series_info]", "series_info", {}),
        ("Thought: x\nAction: tool: [trend_classifier], tool_input: {\"window\": null}", "trend_classifier", {"window": None}),
        ("Thought: x\nAction: tool: [summary_stats], tool_input: null", "summary_stats", {}),
        ("Thought: a {brace}\nAction: tool: [x], tool_input: {\"s\": \"}{\"}", "x", {"s": "}{"}),
    ],
)
def test_parse_variants(raw, tool, args):
    p = parse_step(raw)
    assert p.kind == "thought_action"
    assert (p.call.tool, p.call.arguments) == (tool, args)


def test_parse_bad_input_json():
    p = parse_step("Thought: x\nAction: tool: [x], tool_input: {oops")
    assert p.kind == "malformed" and p.diagnostic


names = st.from_regex(r"[a-z_]{1,12}", fullmatch=True)
json_scalars = st.one_of(st.integers(-1000, 1000), st.floats(-1e6, 1e6, allow_nan=False), st.text(max_size=10), st.none(), st.booleans())
arguments = st.dictionaries(st.from_regex(r"[a-z_]{1,8}", fullmatch=True), json_scalars, max_size=4)
thoughts = st.text(st.characters(blacklist_categories=("Cs",), blacklist_characters="\r\x0b\x0c\x1c\x1d\x1e\x85  "), max_size=60).map(str.strip).filter(
    lambda t: "final answer" not in t.lower() and "action" not in t.lower() and "tool" not in t.lower()
    and "```" not in t
)


@given(thoughts, names, arguments)
def test_render_parse_identity(thought, tool, args):
    p = parse_step(render_step(thought, ToolCall(tool, args)))
    assert p.kind == "thought_action"
    assert (p.thought, p.call.tool, p.call.arguments) == (thought, tool, args)


@given(st.text(min_size=1, max_size=40).map(str.strip).filter(bool))
def test_render_final_identity(answer):
    p = parse_step(render_final(answer))
    assert (p.kind, p.answer) == ("final", answer)


# trajectory shape and serialization

safe_text = st.text(st.characters(whitelist_categories=("L", "N", "Zs"), whitelist_characters=".,;!?-\n"), max_size=40)
payloads = st.dictionaries(st.from_regex(r"[a-z]{1,6}", fullmatch=True), json_scalars, max_size=3)


@st.composite
def trajectories(draw):
    steps = []
    for _ in range(draw(st.integers(0, 4))):
        call = ToolCall(draw(names), draw(arguments))
        if draw(st.booleans()):
            obs = ToolResult(call.tool, payload=draw(payloads))
        else:
            obs = ToolResult(call.tool, error=draw(safe_text.filter(bool)))
        steps.append(Step(draw(safe_text), call, obs))
    return Trajectory(draw(safe_text.filter(bool)), steps, draw(safe_text.filter(bool)), "ref")


@settings(max_examples=1000)
@given(trajectories())
def test_trajectory_roundtrips(traj):
    back = Trajectory.from_json(traj.to_json())
    assert back.to_dict() == traj.to_dict()
    states = traj.states()
    assert [s.kind for s in states] == ["Q"] + ["T", "A", "O"] * traj.K + ["F"]
    for k in range(1, traj.K + 1):
        assert states[3 * k - 2].kind == "T" and len(traj.prefix(k)) == 3 * k - 2
    parsed = parse_transcript(render_transcript(traj))
    assert parsed.query == traj.query and parsed.final_answer == traj.final_answer
    assert [(s.thought, s.action.to_dict(), s.observation.to_dict()) for s in parsed.steps] == [
        (s.thought, s.action.to_dict(), s.observation.to_dict()) for s in traj.steps
    ]


def test_schema_version_checked():
    with pytest.raises(ValueError):
        Trajectory.from_dict({"v": 99, "query": "q", "steps": []})


# runtime

def test_sample2_replay(registry):
    model = ScriptedModel.from_entries([{"turns": [SAMPLE2_TURN, "Final Answer: done"]}])
    traj = run_episode(model, registry, ts(SAMPLE2), "moving average?")
    assert traj.K == 1 and traj.final_answer == "done"
    rows = traj.steps[0].observation.payload["rolling_results"]["channel_0"]
    assert [r["mean"] for r in rows] == pytest.approx(SAMPLE2_MEANS, abs=1e-9)


def test_direct_final(registry):
    traj = run_episode(ConstantModel("Final Answer: 42"), registry, ts(SAMPLE2), "q")
    assert traj.K == 0 and traj.final_answer == "42"


def test_garbage_truncates(registry):
    traj = run_episode(ConstantModel("blah"), registry, ts(SAMPLE2), "q", limits=EpisodeLimits(8, 3))
    assert traj.final_answer is None and traj.termination == "malformed" and traj.malformed_turns == 3


def test_max_steps(registry):
    loop = ConstantModel("Thought: again\nAction: tool: [series_info]")
    traj = run_episode(loop, registry, ts(SAMPLE2), "q", limits=EpisodeLimits(max_steps=3))
    assert traj.K == 3 and traj.final_answer is None and traj.termination == "max_steps"
    zero = run_episode(loop, registry, ts(SAMPLE2), "q", limits=EpisodeLimits(max_steps=0))
    assert zero.K == 0 and zero.termination == "max_steps"


def test_tool_error_continues(registry):
    model = ScriptedModel.from_entries([{"turns": [
        "Thought: x\nAction: tool: [summary_stats], tool_input: {\"start\": 0, \"end\": 99, \"stat\": \"mean\"}",
        "Final Answer: ok",
    ]}])
    traj = run_episode(model, registry, ts(SAMPLE2), "q")
    assert not traj.steps[0].observation.ok and traj.final_answer == "ok"


def test_correction_message_sent(registry):
    seen = []

    class Recorder:
        def chat(self, messages):
            seen.append([m["content"] for m in messages])
            return "junk" if len(seen) == 1 else "Final Answer: fine"

    traj = run_episode(Recorder(), registry, ts(SAMPLE2), "q")
    assert traj.final_answer == "fine" and traj.malformed_turns == 1
    assert "did not match the required format" in seen[1][-1]


def test_endpoint_failure_propagates(registry):
    with pytest.raises(EndpointError):
        run_episode(FailingModel(), registry, ts(SAMPLE2), "q")


def test_episode_deterministic(registry):
    model = ScriptedModel.from_entries([{"turns": [SAMPLE2_TURN, "Final Answer: x"]}])
    a = run_episode(model, registry, ts(SAMPLE2), "q").to_json()
    b = run_episode(model, registry, ts(SAMPLE2), "q").to_json()
    assert a == b


# client

def _reply(text):
    return httpx.Response(200, json={"choices": [{"message": {"content": text}}]})


def flaky(failures, status=503):
    calls = []

    def handler(request):
        calls.append(json.loads(request.content))
        if len(calls) <= failures:
            return httpx.Response(status)
        return _reply("hello")

    return httpx.MockTransport(handler), calls


def test_client_canned_reply():
    transport, calls = flaky(0)
    cfg = EndpointConfig("http://mock/v1", "m", api_key="sk-secret")
    assert chat(cfg, [{"role": "user", "content": "hi"}], transport) == "hello"
    assert calls[0]["model"] == "m" and calls[0]["temperature"] == 0.0


def test_client_retries_then_succeeds():
    transport, calls = flaky(2)
    sleeps = []
    client = EndpointClient(EndpointConfig("http://mock", "m", max_retries=3), transport, sleep=sleeps.append)
    assert client.chat([{"role": "user", "content": "hi"}]) == "hello"
    assert len(calls) == 3 and sleeps == [0.5, 1.0]


def test_client_no_retries_surfaces_error():
    transport, _ = flaky(5)
    client = EndpointClient(EndpointConfig("http://mock", "m", max_retries=0), transport, sleep=lambda s: None)
    with pytest.raises(EndpointError):
        client.chat([])


def test_client_non_retryable_and_malformed():
    transport, calls = flaky(5, status=401)
    client = EndpointClient(EndpointConfig("http://mock", "m", api_key="sk-secret"), transport, sleep=lambda s: None)
    with pytest.raises(EndpointError) as exc:
        client.chat([])
    assert len(calls) == 1 and "sk-secret" not in str(exc.value)
    bad = EndpointClient(EndpointConfig("http://mock", "m"), httpx.MockTransport(lambda r: httpx.Response(200, json={"x": 1})))
    with pytest.raises(MalformedResponse):
        bad.chat([])


def test_client_timeout():
    def handler(request):
        raise httpx.ReadTimeout("slow", request=request)

    client = EndpointClient(EndpointConfig("http://mock", "m", max_retries=1), httpx.MockTransport(handler), sleep=lambda s: None)
    with pytest.raises(EndpointTimeout):
        client.chat([])


def test_config_from_env(monkeypatch):
    monkeypatch.setenv("TSART_API_BASE", "http://x")
    monkeypatch.setenv("TSART_MODEL", "m1")
    monkeypatch.setenv("TSART_API_KEY", "k")
    cfg = EndpointConfig.from_env(model="m2")
    assert (cfg.base_url, cfg.model, cfg.api_key) == ("http://x", "m2", "k")
    assert "api_key" not in repr(cfg)
    with pytest.raises(ValueError):
        EndpointConfig("http://x", "m", timeout=0)


def test_mock_script_file(tmp_path):
    p = tmp_path / "script.jsonl"
    p.write_text('{"match": "alpha", "turns": ["Final Answer: A"]}\n{"turns": [{"error": "boom"}]}\n')
    model = ScriptedModel.from_file(p)
    assert model.chat([{"role": "user", "content": "The question is: alpha?"}]) == "Final Answer: A"
    with pytest.raises(EndpointError):
        model.chat([{"role": "user", "content": "The question is: beta?"}])
