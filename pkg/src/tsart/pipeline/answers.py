"""QA samples, answer normalization and the coarse answer check."""

from __future__ import annotations

import re
import string
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from tsart.series import TimeSeries, load_series

Scorer = Callable[[str, str], float]

_OPTION = re.compile(r"^\(?([a-z])(?:\)|\.|:|$)|^\(([a-z])\)")


def normalize_option(text: str) -> str | None:
    """Option letter of ``"A"``, ``"A)"``, ``"(a)"``, ``"A) 0.51"`` or ``"a. foo"``; else None."""
    t = str(text).strip().casefold().strip("*` ")
    m = _OPTION.match(t)
    if not m:
        return None
    return m.group(1) or m.group(2)


def _normalize_text(text: str) -> str:
    t = str(text).casefold().strip()
    t = t.strip(string.punctuation + string.whitespace)
    return " ".join(t.split())


def options_match(prediction: str, truth: str) -> bool:
    p, t = normalize_option(prediction), normalize_option(truth)
    if t is not None:
        return p == t
    return _normalize_text(prediction) == _normalize_text(truth)


def _tokens(text: str) -> list[str]:
    return re.findall(r"[a-z0-9]+(?:\.[0-9]+)?", str(text).casefold())


def token_f1(prediction: str, reference: str) -> float:
    """Token-overlap F1 in [0, 1]; the default open-ended answer scorer."""
    p, r = _tokens(prediction), _tokens(reference)
    if not p and not r:
        return 1.0
    if not p or not r:
        return 0.0
    common = sum((Counter(p) & Counter(r)).values())
    if common == 0:
        return 0.0
    precision, recall = common / len(p), common / len(r)
    return 2 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class QASample:
    query: str
    answer: str
    answer_kind: str  # fixed_options | open_ended
    series: TimeSeries
    id: str = ""

    def __post_init__(self) -> None:
        if self.answer_kind not in ("fixed_options", "open_ended"):
            raise ValueError(f"unknown answer_kind {self.answer_kind!r}")
        if self.answer_kind == "fixed_options" and normalize_option(self.answer) is None:
            raise ValueError(f"fixed-option answer {self.answer!r} is not an option letter")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "query": self.query,
            "answer": self.answer,
            "answer_kind": self.answer_kind,
            "series": self.series.to_dict(),
        }

    @classmethod
    def from_dict(cls, doc: dict, base_dir: str | Path | None = None, default_id: str = "") -> "QASample":
        if "series" in doc:
            series = TimeSeries.from_dict(doc["series"])
        elif "series_path" in doc:
            path = Path(doc["series_path"])
            if base_dir is not None and not path.is_absolute():
                path = Path(base_dir) / path
            series = load_series(path)
        else:
            raise ValueError("sample needs 'series' or 'series_path'")
        return cls(
            query=doc["query"],
            answer=str(doc["answer"]),
            answer_kind=doc.get("answer_kind", "fixed_options"),
            series=series,
            id=str(doc.get("id", default_id)),
        )


def check_answer(
    sample: QASample, final: str | None, scorer: Scorer = token_f1, sigma: float = 0.8
) -> bool:
    if final is None:
        return False
    if sample.answer_kind == "fixed_options":
        return options_match(final, sample.answer)
    return scorer(final, sample.answer) > sigma
