"""Command-line entry points.

Exit codes:
  0  success
  1  usage error or unreadable input
  2  tool returned an error (analyze)
  3  model endpoint failure
  4  episode truncated before a final answer (agent)
  5  validation or parity failure (validate with --require-all, export --check)
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

import tomli

from tsart.agent.client import EndpointClient, EndpointConfig, EndpointError
from tsart.agent.mock import ConstantModel, ScriptedModel
from tsart.agent.prompts import compose_query
from tsart.agent.runtime import run_episode
from tsart.agent.trajectory import render_transcript
from tsart.config import COLLECT_TEMPERATURE, DEFAULT_J, DEFAULT_SIGMA, EVAL_TEMPERATURE, EpisodeLimits
from tsart.evaluation import load_tasks, run_benchmark
from tsart.pipeline.corpus import (
    collect,
    experience_for,
    load_records,
    load_samples,
    reflections_for,
    validate_records,
    write_jsonl,
)
from tsart.pipeline.experience import ModelSampler, UniformSampler
from tsart.pipeline.judging import Judger
from tsart.pipeline.sharegpt import check_sharegpt_file, export_stage, write_sharegpt
from tsart.registry import ToolCall, default_registry
from tsart.series import SeriesError, load_series

EXIT_OK, EXIT_USAGE, EXIT_TOOL, EXIT_ENDPOINT, EXIT_TRUNCATED, EXIT_INVALID = range(6)

log = logging.getLogger("tsart")


class UsageError(Exception):
    pass


def _file_digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(out: str | Path, command: str, seed, options: dict, inputs: list, counts: dict) -> None:
    """Sidecar <out>.manifest.json; hashes input contents, not paths, so reruns compare equal."""
    config = {"command": command, "options": options, "inputs": [_file_digest(p) for p in inputs if p]}
    digest = hashlib.sha256(json.dumps(config, sort_keys=True).encode()).hexdigest()
    manifest = {"v": 1, "command": command, "seed": seed, "config_hash": digest, "counts": counts}
    Path(f"{out}.manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")


def _model(args, temperature: float, mock: str | None = None):
    mock = mock if mock is not None else getattr(args, "mock", None)
    if mock:
        return ScriptedModel.from_file(mock)
    try:
        config = EndpointConfig.from_env(
            base_url=getattr(args, "api_base", None), model=getattr(args, "model", None),
            temperature=temperature,
        )
    except ValueError as exc:
        raise UsageError(f"{exc}; or pass --mock SCRIPT") from exc
    return EndpointClient(config)


def load_judgers(path: str | Path) -> list[Judger]:
    """Judger panel from TOML: [[judger]] tables with id plus reply, mock, or base_url/model."""
    doc = tomli.loads(Path(path).read_text(encoding="utf-8"))
    base = Path(path).parent
    judgers = []
    for i, entry in enumerate(doc.get("judger", [])):
        jid = str(entry.get("id", f"judger{i}"))
        if "reply" in entry:
            model = ConstantModel(str(entry["reply"]))
        elif "mock" in entry:
            model = ScriptedModel.from_file(base / entry["mock"])
        else:
            model = EndpointClient(
                EndpointConfig.from_env(
                    base_url=entry.get("base_url"), model=entry.get("model"),
                    temperature=float(entry.get("temperature", 0.0)),
                )
            )
        judgers.append(Judger(jid, model))
    if not judgers:
        raise UsageError(f"{path}: no [[judger]] entries")
    return judgers


def _limits(args) -> EpisodeLimits:
    return EpisodeLimits(max_steps=args.max_steps, max_malformed=args.max_malformed)


def cmd_tools(args) -> int:
    registry = default_registry()
    if args.json:
        rows = [{"name": s.name, "description": s.description,
                 "params": [p.name for p in s.params]} for s in registry.schemas]
        print(json.dumps(rows, indent=1))
    else:
        print(registry.list_tools())
    return EXIT_OK


def cmd_analyze(args) -> int:
    registry = default_registry()
    series = load_series(args.series)
    try:
        arguments = json.loads(args.args)
    except json.JSONDecodeError as exc:
        raise UsageError(f"--args is not valid JSON: {exc}") from exc
    if not isinstance(arguments, dict):
        raise UsageError("--args must be a JSON object")
    if registry.resolve_name(args.tool) is None:
        raise UsageError(f"unknown tool {args.tool!r}; run 'tsart tools' for the list")
    result = registry.dispatch(series, ToolCall(args.tool, arguments))
    if not result.ok:
        print(f"error: {result.error}", file=sys.stderr)
        return EXIT_TOOL
    print(json.dumps(result.payload, indent=1))
    return EXIT_OK


def cmd_agent(args) -> int:
    if not args.question or not args.question.strip():
        raise UsageError("--question is required")
    registry = default_registry()
    series = load_series(args.series)
    model = _model(args, args.temperature)
    query = compose_query(args.question, series, args.precision)
    traj = run_episode(model, registry, series, query, limits=_limits(args), series_ref=args.series)
    print(render_transcript(traj))
    if args.out:
        write_jsonl(args.out, [traj.to_dict()])
    if traj.final_answer is None:
        print(f"episode truncated: {traj.termination}", file=sys.stderr)
        return EXIT_TRUNCATED
    return EXIT_OK


def cmd_collect(args) -> int:
    samples = load_samples(args.input)
    model = _model(args, args.temperature)
    records, failures = collect(samples, model, default_registry(), _limits(args), args.jobs)
    write_jsonl(args.out, [r.to_dict() for r in records])
    if args.failures:
        write_jsonl(args.failures, failures)
    counts = {"samples": len(samples), "collected": len(records), "failed": len(failures)}
    write_manifest(args.out, "collect", args.seed, {"limits": asdict(_limits(args))}, [args.input, args.mock], counts)
    print(json.dumps(counts))
    return EXIT_OK


def cmd_validate(args) -> int:
    records = load_records(args.input)
    judgers = load_judgers(args.judgers)
    verdicts = validate_records(records, judgers, args.seed, sigma=args.sigma, jobs=args.jobs)
    write_jsonl(args.out, [{"v": 1, "id": r.id, "verdict": v.to_dict()} for r, v in zip(records, verdicts)])
    kept = [r for r, v in zip(records, verdicts) if v.kept]
    if args.kept:
        write_jsonl(args.kept, [r.to_dict() for r in kept])
    counts = {"records": len(records), "kept": len(kept)}
    write_manifest(args.out, "validate", args.seed, {"sigma": args.sigma},
                   [args.input, args.judgers], counts)
    print(json.dumps(counts))
    if args.require_all and len(kept) != len(records):
        return EXIT_INVALID
    return EXIT_OK


def cmd_export(args) -> int:
    if args.check:
        problems = check_sharegpt_file(args.check)
        for p in problems:
            print(p, file=sys.stderr)
        print(json.dumps({"file": str(args.check), "problems": len(problems)}))
        return EXIT_INVALID if problems else EXIT_OK
    if not (args.stage and args.input and args.out):
        raise UsageError("export needs --stage, --in and --out (or --check FILE)")
    registry = default_registry()
    records = load_records(args.input)
    trajectories = {r.id: r.trajectory for r in records}
    kind = f"stage{args.stage}"
    experience, reflections = [], []
    if kind in ("stage1", "stage4"):
        sampler = (
            ModelSampler(ScriptedModel.from_file(args.sampler_mock), registry)
            if args.sampler_mock else UniformSampler(registry)
        )
        experience = experience_for(records, sampler, registry, args.J, args.seed, args.jobs)
    if kind == "stage4":
        reflections = reflections_for(records, experience, _model(args, EVAL_TEMPERATURE), args.jobs)
    data = export_stage(kind, trajectories, experience, reflections, args.mix_ratio, args.seed)
    write_sharegpt(args.out, data)
    counts = {"records": len(records), "experience": len(experience),
              "reflections": len(reflections), "conversations": len(data)}
    write_manifest(args.out, "export", args.seed, {"stage": kind, "J": args.J, "mix_ratio": args.mix_ratio},
                   [args.input, args.mock, args.sampler_mock], counts)
    print(json.dumps(counts))
    return EXIT_OK


def cmd_eval(args) -> int:
    tasks = load_tasks(args.tasks)
    model = _model(args, args.temperature)
    report = run_benchmark(tasks, model, default_registry(), _limits(args), args.jobs, args.precision)
    text = json.dumps(report, indent=1, sort_keys=True, allow_nan=False)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        write_manifest(args.out, "eval", args.seed, {"limits": asdict(_limits(args))},
                       [args.tasks, args.mock], {k: report[k] for k in ("n_tasks", "n_scored", "n_failed")})
    print(json.dumps(report["metrics"], sort_keys=True))
    return EXIT_OK


def _endpoint_flags(p: argparse.ArgumentParser, temperature: float) -> None:
    p.add_argument("--mock", help="scripted-turn file (JSON list or JSONL) used instead of an endpoint")
    p.add_argument("--api-base", help="chat-completions base URL (default $TSART_API_BASE)")
    p.add_argument("--model", help="model name (default $TSART_MODEL)")
    p.add_argument("--temperature", type=float, default=temperature)


def _episode_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-steps", type=int, default=EpisodeLimits.max_steps)
    p.add_argument("--max-malformed", type=int, default=EpisodeLimits.max_malformed)
    p.add_argument("--precision", type=int, default=3, help="digits when rendering the series")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tsart", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("tools", help="list the registered tools")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_tools)

    p = sub.add_parser("analyze", help="run one tool on a series file")
    p.add_argument("--series", required=True)
    p.add_argument("--tool", required=True)
    p.add_argument("--args", default="{}", help="JSON object of tool arguments")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("agent", help="answer one question with the tool-using agent")
    p.add_argument("--series", required=True)
    p.add_argument("--question")
    p.add_argument("--out", help="write the trajectory as JSONL")
    _endpoint_flags(p, EVAL_TEMPERATURE)
    _episode_flags(p)
    p.set_defaults(func=cmd_agent)

    p = sub.add_parser("collect", help="collect answer-conditioned trajectories for QA samples")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--failures", help="write per-sample failures as JSONL")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    _endpoint_flags(p, COLLECT_TEMPERATURE)
    _episode_flags(p)
    p.set_defaults(func=cmd_collect)

    p = sub.add_parser("validate", help="answer check plus judger-panel chain review")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--judgers", required=True, help="TOML file of [[judger]] entries")
    p.add_argument("--out", required=True, help="verdicts JSONL")
    p.add_argument("--kept", help="write kept records here")
    p.add_argument("--sigma", type=float, default=DEFAULT_SIGMA)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--require-all", action="store_true", help="exit 5 unless every record is kept")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("export", help="build sharegpt training data, or check a file's parity")
    p.add_argument("--stage", type=int, choices=(1, 2, 4))
    p.add_argument("--in", dest="input")
    p.add_argument("--out")
    p.add_argument("--check", metavar="FILE", help="only run the parity validator on FILE")
    p.add_argument("--J", type=int, default=DEFAULT_J, help="alternatives per thought")
    p.add_argument("--mix-ratio", type=float, default=1.0, help="expert conversations per reflection")
    p.add_argument("--sampler-mock", help="scripted proposals for alternative actions")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    _endpoint_flags(p, EVAL_TEMPERATURE)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("eval", help="run the benchmark over a task file")
    p.add_argument("--tasks", required=True)
    p.add_argument("--out", help="report JSON path")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    _endpoint_flags(p, EVAL_TEMPERATURE)
    _episode_flags(p)
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except EndpointError as exc:
        print(f"endpoint failure: {exc}", file=sys.stderr)
        return EXIT_ENDPOINT
    except (UsageError, SeriesError, ValueError, KeyError, OSError, tomli.TOMLDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
