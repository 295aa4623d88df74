"""Metrics, technical indicators and the local benchmark runner."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from tsart.agent.client import ChatModel, EndpointError
from tsart.agent.prompts import compose_query
from tsart.agent.runtime import run_episode
from tsart.agent.trajectory import Trajectory
from tsart.config import DEFAULT_RENDER_PRECISION, EpisodeLimits
from tsart.pipeline.answers import QASample, options_match
from tsart.pipeline.corpus import pool_map, read_jsonl
from tsart.registry import Registry

log = logging.getLogger(__name__)

REPORT_VERSION = 1
TASK_TYPES = ("mcq", "forecast")


def score_mcq(predictions: Sequence[str | None], truths: Sequence[str]) -> float:
    if len(predictions) != len(truths):
        raise ValueError("predictions and truths differ in length")
    if not truths:
        raise ValueError("no predictions to score")
    hits = sum(p is not None and options_match(p, t) for p, t in zip(predictions, truths))
    return hits / len(truths)


def score_forecast(pred: Sequence[float], truth: Sequence[float]) -> dict:
    p, t = np.asarray(pred, dtype=float), np.asarray(truth, dtype=float)
    if p.shape != t.shape or p.ndim != 1 or p.size == 0:
        raise ValueError("pred and truth must be equal-length non-empty vectors")
    if np.any(t == 0):
        raise ValueError("mape undefined: truth contains zero")
    err = p - t
    return {
        "mse": float(np.mean(err**2)),
        "mae": float(np.mean(np.abs(err))),
        "mape": float(100 * np.mean(np.abs(err) / np.abs(t))),
    }


def ema(values: Sequence[float], span: int) -> np.ndarray:
    x = np.asarray(values, dtype=float)
    alpha = 2.0 / (span + 1)
    out = np.empty_like(x)
    out[0] = x[0]
    for i in range(1, len(x)):
        out[i] = alpha * x[i] + (1 - alpha) * out[i - 1]
    return out


def macd(values: Sequence[float], fast: int = 12, slow: int = 26) -> list[float]:
    if len(values) < slow:
        raise ValueError(f"macd needs at least {slow} points, got {len(values)}")
    return (ema(values, fast) - ema(values, slow)).tolist()


def bollinger_upper(values: Sequence[float], window: int = 20, k: float = 2.0) -> list[float]:
    """Rolling mean plus k population standard deviations, one value per full window."""
    x = np.asarray(values, dtype=float)
    if window < 1 or len(x) < window:
        raise ValueError(f"bollinger band needs at least {window} points, got {len(x)}")
    windows = np.lib.stride_tricks.sliding_window_view(x, window)
    return (windows.mean(axis=1) + k * windows.std(axis=1)).tolist()


@dataclass(frozen=True)
class TaskRecord:
    sample: QASample
    task_type: str
    horizon: int | None = None
    truth_values: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.task_type not in TASK_TYPES:
            raise ValueError(f"unknown task_type {self.task_type!r}")
        if self.task_type == "forecast":
            if self.horizon is None or self.truth_values is None:
                raise ValueError("forecast tasks need horizon and truth_values")
            if len(self.truth_values) != self.horizon:
                raise ValueError("truth_values length must equal horizon")

    @classmethod
    def from_dict(cls, doc: dict, base_dir=None, default_id: str = "") -> "TaskRecord":
        task_type = doc.get("task_type", "mcq")
        doc = dict(doc)
        if task_type == "forecast":
            doc.setdefault("answer", "")
            doc.setdefault("answer_kind", "open_ended")
        truth = doc.get("truth_values")
        return cls(
            QASample.from_dict(doc, base_dir=base_dir, default_id=default_id),
            task_type,
            doc.get("horizon"),
            None if truth is None else tuple(float(v) for v in truth),
        )


def load_tasks(path) -> list[TaskRecord]:
    base = Path(path).parent
    return [
        TaskRecord.from_dict(doc, base_dir=base, default_id=f"t{i:05d}")
        for i, doc in enumerate(read_jsonl(path))
    ]


def forecast_from_trajectory(traj: Trajectory) -> list[float]:
    """Values of the first channel in the last successful forecaster observation."""
    for step in reversed(traj.steps):
        obs = step.observation
        if obs.tool == "forecaster" and obs.ok:
            forecasts = obs.payload["forecasts"]
            return list(next(iter(forecasts.values())))
    raise ValueError("trajectory has no forecaster observation")


def _run_task(task: TaskRecord, model, registry, limits, precision) -> dict:
    row: dict = {"id": task.sample.id, "task_type": task.task_type}
    try:
        query = compose_query(task.sample.query, task.sample.series, precision)
        traj = run_episode(model, registry, task.sample.series, query, limits=limits,
                           series_ref=task.sample.id)
    except EndpointError as exc:
        return {**row, "status": "failed", "error": f"endpoint: {exc}"}
    except Exception as exc:  # noqa: BLE001 - a bad task must not abort the run
        return {**row, "status": "failed", "error": f"{type(exc).__name__}: {exc}"}
    row["termination"] = traj.termination
    row["final_answer"] = traj.final_answer
    if task.task_type == "mcq":
        if traj.final_answer is None:
            return {**row, "status": "failed", "error": f"no final answer ({traj.termination})"}
        row["correct"] = options_match(traj.final_answer, task.sample.answer)
        return {**row, "status": "scored"}
    try:
        pred = forecast_from_trajectory(traj)[: task.horizon]
        if len(pred) != task.horizon or any(v is None for v in pred):
            raise ValueError(f"forecast has {len(pred)} usable values, need {task.horizon}")
        row["prediction"] = pred
        row["metrics"] = score_forecast(pred, task.truth_values)
    except ValueError as exc:
        return {**row, "status": "failed", "error": str(exc)}
    return {**row, "status": "scored"}


def run_benchmark(
    tasks: list[TaskRecord],
    model: ChatModel,
    registry: Registry,
    limits: EpisodeLimits = EpisodeLimits(),
    jobs: int = 1,
    precision: int = DEFAULT_RENDER_PRECISION,
) -> dict:
    rows = pool_map(lambda t: _run_task(t, model, registry, limits, precision), tasks, jobs)
    scored = [r for r in rows if r["status"] == "scored"]
    mcq = [r for r in scored if r["task_type"] == "mcq"]
    n_mcq = sum(t.task_type == "mcq" for t in tasks)
    fc = [r["metrics"] for r in scored if r["task_type"] == "forecast"]
    metrics: dict = {
        # failed mcq tasks count as wrong
        "mcq": {"acc": (sum(r["correct"] for r in mcq) / n_mcq) if n_mcq else None, "n": n_mcq},
        "forecast": {
            key: (float(np.mean([m[key] for m in fc])) if fc else None) for key in ("mse", "mae", "mape")
        },
    }
    metrics["forecast"]["n"] = len(fc)
    return {
        "v": REPORT_VERSION,
        "n_tasks": len(tasks),
        "n_scored": len(scored),
        "n_failed": len(rows) - len(scored),
        "metrics": metrics,
        "tasks": rows,
    }
