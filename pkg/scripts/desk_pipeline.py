"""Run collect, validate, export (stages 1, 2, 4) and eval end to end from mock scripts.

Everything runs offline: the agent, judgers and reflection model are scripted.
Outputs land in --workdir (default ./desk_run).

    python3 scripts/desk_pipeline.py --workdir /tmp/desk
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from tsart.cli import main as cli

SERIES = {
    "spike": [0.06, 0.11, 0.13, 0.14, 0.12, 0.13, 0.15, 0.14, 0.15, 0.51, 0.14, 0.12, 0.13, 0.14, 0.13, 0.12],
    "decline": [float(v) for v in np.linspace(10, 4, 30).round(3)],
}

SAMPLES = [
    {"query": "Which value is an outlier? A) 0.51 B) 0.15", "answer": "A", "answer_kind": "fixed_options",
     "series_path": "spike.csv"},
    {"query": "What is the overall trend of this series?", "answer": "down", "answer_kind": "open_ended",
     "series_path": "decline.csv"},
]

AGENT_SCRIPT = [
    {"match": "outlier", "turns": [
        "Thought: score each point by reconstruction error\n"
        "Action: tool: [anomaly_detection], tool_input: {\"anomaly_threshold\": 1}",
        "Final Answer: A) 0.51",
    ]},
    {"match": "overall trend", "turns": [
        "Thought: classify the global trend\nAction: tool: [trend_classifier]",
        "Thought: confirm with a change-point scan\n"
        "Action: tool: [change_point_detector], tool_input: {\"penalty_or_n_cp\": \"n_cp=1\"}",
        "Final Answer: down",
    ]},
    {"match": "Forecast the next", "turns": [
        "Thought: project the series forward\nAction: tool: [forecaster], tool_input: {\"forecast_horizon\": 3}",
        "Final Answer: see the forecaster output",
    ]},
]


def write(workdir: Path) -> None:
    workdir.mkdir(parents=True, exist_ok=True)
    for name, values in SERIES.items():
        (workdir / f"{name}.csv").write_text("value\n" + "\n".join(repr(v) for v in values) + "\n")
    (workdir / "samples.jsonl").write_text("".join(json.dumps(s) + "\n" for s in SAMPLES))
    (workdir / "agent.json").write_text(json.dumps(AGENT_SCRIPT, indent=1))
    (workdir / "reflect.json").write_text(json.dumps([{"reply": "The expert call measures exactly what was asked."}]))
    (workdir / "judgers.toml").write_text(
        '[[judger]]\nid = "strict"\nreply = "yes"\n\n[[judger]]\nid = "lenient"\nreply = "Yes, consistent."\n'
    )
    step = SERIES["decline"][1] - SERIES["decline"][0]
    truth = [round(SERIES["decline"][-1] + step * h, 6) for h in (1, 2, 3)]
    tasks = [SAMPLES[0], {"query": "Forecast the next 3 values.", "task_type": "forecast", "horizon": 3,
                          "truth_values": truth, "series_path": "decline.csv"}]
    (workdir / "tasks.jsonl").write_text("".join(json.dumps(t) + "\n" for t in tasks))


def run(workdir: Path, seed: int) -> int:
    w = lambda name: str(workdir / name)  # noqa: E731
    steps = [
        ["collect", "--in", w("samples.jsonl"), "--out", w("traj.jsonl"), "--mock", w("agent.json"),
         "--failures", w("failures.jsonl"), "--seed", str(seed)],
        ["validate", "--in", w("traj.jsonl"), "--judgers", w("judgers.toml"), "--out", w("verdicts.jsonl"),
         "--kept", w("kept.jsonl"), "--seed", str(seed)],
        *[
            ["export", "--stage", str(s), "--in", w("kept.jsonl"), "--out", w(f"stage{s}.json"),
             "--mock", w("reflect.json"), "--seed", str(seed)]
            for s in (1, 2, 4)
        ],
        *[["export", "--check", w(f"stage{s}.json")] for s in (1, 2, 4)],
        ["eval", "--tasks", w("tasks.jsonl"), "--mock", w("agent.json"), "--out", w("report.json")],
    ]
    for argv in steps:
        print("$ tsart " + " ".join(argv[:3]), flush=True)
        code = cli(argv)
        if code != 0:
            print(f"step failed with exit code {code}", file=sys.stderr)
            return code
    return 0


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--workdir", type=Path, default=Path("desk_run"))
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    write(args.workdir)
    return run(args.workdir, args.seed)


if __name__ == "__main__":
    sys.exit(main())
