"""Prompt templates and message assembly."""

from __future__ import annotations

from tsart.registry import Registry
from tsart.series import TimeSeries, render_for_prompt

EVALUATE_TEMPLATE = """You are an intelligent Time Series Reasoner capable of performing time series analysis by invoking appropriate tools step by step.
1. You should first understand the question and analyze whether it is necessary to invoke the tool. If not, you can directly give the final answer.
2. If tools are needed, you can utilize them to help answer the question. Multiple tool calls are encouraged.
3. You should think step by step in ReAct-style, output a structured reasoning trajectory that leads to the final answer.
You have access to the following tools: {tools}
The only tools you may use are: {tool_names}.
"Begin!"

The question is: {input}"""

COLLECT_TEMPLATE = """You are an intelligent Time Series Reasoner capable of performing time series analysis by invoking appropriate tools step by step.
1. Given time series data, a question, and the known answer, reconstruct the intermediate reasoning steps.
2. You should understand the time series and use the tools to enhance your confidence. You shouldn't completely rely on the results from tools.
3. You should call a tool at least once to help answer the question. More tool calls are encouraged.
4. You should think step by step in ReAct-style, output a structured reasoning trajectory that leads to the final answer.
You have access to the following tools: {tools}
The only tools you may use are: {tool_names}.
"Begin!"

The question is: {input}"""

REFLECTION_TEMPLATE = """You will be presented with a situation where you need to choose between multiple possible actions.
Your task is to analyze the situation and provide reasoning about why we decide to take the expert action.

- Situation Description (S_k): {situation}
- Expert Action (A_k): {expert_action}
- Expected Outcome (O_k): {expert_outcome}
- Alternative Actions:
{alternatives}

Provide a detailed self-reflection as an internal monologue that demonstrates your reasoning process for the current situation.
Your monologue should:
1. Analyze the situation and the goal.
2. Compare the possible actions, explaining why each may be less optimal.
3. Justify why the expert action is most suitable, grounded in the expected outcome.
4. Highlight any relevant clues, constraints, or consequences from the situation.

Guidelines:
- Stay strictly within the provided information.
- Avoid meta-commentary about being an AI.
- Use natural, step-by-step reasoning.
- Focus on logical decision-making.

Output: Directly write the self-reflection monologue, no extra headings, disclaimers, or external notes."""

# Everything below is repo-defined protocol text.

FORMAT_INSTRUCTIONS = """Reply with exactly one step per message, using one of these two forms.

To use a tool:
Thought: <your reasoning about what to do next>
Action: tool: [<tool name>], tool_input: <JSON object with the tool arguments>

When you can answer:
Final Answer: <the answer; for multiple-choice questions start with the option letter, e.g. "A) ...">

Tool results come back to you as messages starting with "Observation:". Indices are 0-based."""

CORRECTION_MESSAGE = (
    "Observation:\noutput did not match the required format ({diagnostic}). "
    "Reply with 'Thought: ...' followed by 'Action: tool: [NAME], tool_input: {{...}}', "
    "or with 'Final Answer: ...'."
)

KNOWN_ANSWER_SUFFIX = "\nThe known answer is: {answer}"

JUDGE_TEMPLATE = """You are reviewing one reasoning step of a time-series analysis agent.

Previous state (query or last tool observation):
{previous}

Thought:
{thought}

Action:
{action}

Is the thought a reasonable reading of the previous state, and is the action a sensible consequence of the thought?
Start your reply with "yes" or "no", then give one sentence of justification."""

PROPOSE_TEMPLATE = """You are exploring alternative tool calls for a time-series reasoning agent.

Context so far:
{context}

Current thought:
{thought}

You have access to the following tools: {tools}
Propose one tool call that could follow this thought. Reply only with:
Action: tool: [<tool name>], tool_input: <JSON object>"""


def compose_query(question: str, series: TimeSeries, precision: int = 3) -> str:
    """Embed the rendered series into a question (``{series}`` placeholder or appended)."""
    rendered = render_for_prompt(series, precision)
    if "{series}" in question:
        return question.replace("{series}", rendered)
    return f"{question.rstrip()}\nThe time series is: {rendered}"


def build_prompt(
    mode: str, registry: Registry, query: str, known_answer: str | None = None
) -> list[dict]:
    if not query or not query.strip():
        raise ValueError("query must be non-empty")
    if mode == "evaluate":
        template, text = EVALUATE_TEMPLATE, query
    elif mode == "collect":
        if known_answer is None or not str(known_answer).strip():
            raise ValueError("collect mode requires the known answer")
        template, text = COLLECT_TEMPLATE, query + KNOWN_ANSWER_SUFFIX.format(answer=known_answer)
    else:
        raise ValueError(f"unknown prompt mode {mode!r}")
    # str.replace, not format(): tool descriptions and queries may contain braces
    content = (
        template.replace("{tools}", "\n" + registry.list_tools())
        .replace("{tool_names}", registry.tool_names())
        .replace("{input}", text)
    )
    return [
        {"role": "system", "content": FORMAT_INSTRUCTIONS},
        {"role": "user", "content": content},
    ]
