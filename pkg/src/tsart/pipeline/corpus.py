"""Corpus files and the fan-out drivers for collection, validation and derivation."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, TypeVar

from tsart.agent.client import ChatModel, EndpointError
from tsart.agent.prompts import compose_query
from tsart.agent.runtime import run_episode
from tsart.agent.trajectory import Trajectory
from tsart.config import DEFAULT_RENDER_PRECISION, EpisodeLimits
from tsart.pipeline.answers import QASample, Scorer, token_f1
from tsart.pipeline.experience import ActionSampler, ExperienceSample, build_early_experience
from tsart.pipeline.judging import Judger, Verdict, validate
from tsart.pipeline.reflection import ReflectionSample, build_reflections
from tsart.registry import Registry

log = logging.getLogger(__name__)

RECORD_VERSION = 1
T = TypeVar("T")
R = TypeVar("R")


def read_jsonl(path: str | Path) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if line.strip():
                try:
                    rows.append(json.loads(line))
                except json.JSONDecodeError as exc:
                    raise ValueError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
    return rows


def write_jsonl(path: str | Path, rows: Iterable[dict]) -> int:
    # key order is kept: observation text must survive a round trip byte for byte
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False, allow_nan=False) + "\n")
            n += 1
    return n


def load_samples(path: str | Path) -> list[QASample]:
    base = Path(path).parent
    return [
        QASample.from_dict(doc, base_dir=base, default_id=f"s{i:05d}")
        for i, doc in enumerate(read_jsonl(path))
    ]


def pool_map(fn: Callable[[T], R], items: list[T], jobs: int = 1) -> list[R]:
    """Bounded fan-out; results come back in input order."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class Record:
    id: str
    sample: QASample
    trajectory: Trajectory

    def to_dict(self) -> dict:
        return {
            "v": RECORD_VERSION,
            "id": self.id,
            "sample": self.sample.to_dict(),
            "trajectory": self.trajectory.to_dict(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Record":
        if doc.get("v") != RECORD_VERSION:
            raise ValueError(f"unsupported record version {doc.get('v')!r}")
        return cls(doc["id"], QASample.from_dict(doc["sample"]), Trajectory.from_dict(doc["trajectory"]))


def load_records(path: str | Path) -> list[Record]:
    return [Record.from_dict(doc) for doc in read_jsonl(path)]


def collect(
    samples: list[QASample],
    model: ChatModel,
    registry: Registry,
    limits: EpisodeLimits = EpisodeLimits(),
    jobs: int = 1,
    precision: int = DEFAULT_RENDER_PRECISION,
) -> tuple[list[Record], list[dict]]:
    """Answer-conditioned episodes for every sample; returns (records, failures)."""

    def one(sample: QASample):
        query = compose_query(sample.query, sample.series, precision)
        try:
            traj = run_episode(
                model, registry, sample.series, query, mode="collect", limits=limits,
                known_answer=sample.answer, series_ref=sample.id,
            )
        except EndpointError as exc:
            return None, {"id": sample.id, "error": f"endpoint: {exc}"}
        if traj.termination != "final":
            return None, {"id": sample.id, "error": f"truncated: {traj.termination}"}
        return Record(sample.id, sample, traj), None

    records, failures = [], []
    for rec, fail in pool_map(one, samples, jobs):
        if rec is not None:
            records.append(rec)
        else:
            failures.append(fail)
    return records, failures


def validate_records(
    records: list[Record],
    judgers: list[Judger],
    seed=0,
    scorer: Scorer = token_f1,
    sigma: float = 0.8,
    jobs: int = 1,
) -> list[Verdict]:
    def one(rec: Record) -> Verdict:
        return validate(rec.sample, rec.trajectory, judgers, f"{seed}:{rec.id}", scorer, sigma)

    return pool_map(one, records, jobs)


def experience_for(
    records: list[Record], sampler: ActionSampler, registry: Registry, J: int = 3, seed=0, jobs: int = 1
) -> list[ExperienceSample]:
    def one(rec: Record):
        return build_early_experience(
            rec.trajectory, rec.sample.series, sampler, registry, J, f"{seed}:{rec.id}", rec.id
        )

    return [s for batch in pool_map(one, records, jobs) for s in batch]


def reflections_for(
    records: list[Record], experience: list[ExperienceSample], model: ChatModel, jobs: int = 1
) -> list[ReflectionSample]:
    by_id: dict[str, list[ExperienceSample]] = {}
    for s in experience:
        by_id.setdefault(s.trajectory_id, []).append(s)

    def one(rec: Record):
        return build_reflections(by_id.get(rec.id, []), rec.trajectory, model)

    return [r for batch in pool_map(one, records, jobs) for r in batch]
