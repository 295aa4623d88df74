"""Chain verification by a panel of judger models, and the full validation verdict."""

from __future__ import annotations

import logging
import random
import re
from dataclasses import dataclass, field

from tsart.agent.client import ChatModel, EndpointError
from tsart.agent.prompts import JUDGE_TEMPLATE
from tsart.agent.trajectory import Trajectory, render_action
from tsart.pipeline.answers import QASample, Scorer, check_answer, token_f1

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Judger:
    id: str
    model: ChatModel = field(compare=False)


@dataclass(frozen=True)
class ChainVote:
    judger_id: str
    chain_index: int  # k, 1-based; 0 marks a structural rejection
    vote: bool
    diagnostic: str = ""

    def to_dict(self) -> dict:
        return {
            "judger_id": self.judger_id,
            "chain_index": self.chain_index,
            "vote": self.vote,
            "diagnostic": self.diagnostic,
        }


@dataclass(frozen=True)
class Verdict:
    answer_flag: bool
    chain_votes: tuple[ChainVote, ...] = ()

    @property
    def kept(self) -> bool:
        return self.answer_flag and all(v.vote for v in self.chain_votes)

    def to_dict(self) -> dict:
        return {
            "answer_flag": self.answer_flag,
            "chain_votes": [v.to_dict() for v in self.chain_votes],
            "kept": self.kept,
        }


def parse_vote(reply: str) -> bool | None:
    m = re.match(r"[\s*_`\"'>#-]*(yes|no)\b", reply, re.I)
    return None if m is None else m.group(1).lower() == "yes"


def chain_prompt(traj: Trajectory, k: int) -> str:
    step = traj.steps[k - 1]
    previous = traj.query if k == 1 else traj.steps[k - 2].observation.text()
    return JUDGE_TEMPLATE.format(
        previous=previous, thought=step.thought, action=render_action(step.action)
    )


def judge_chains(traj: Trajectory, judgers: list[Judger], seed) -> list[ChainVote]:
    """Each judger gets its own uniformly sampled chain (O_{k-1}, T_k, A_k)."""
    if traj.K < 1:
        raise ValueError("chain judging needs at least one step")
    rng = random.Random(str(seed))
    votes = []
    for judger in judgers:
        k = rng.randrange(traj.K) + 1
        messages = [{"role": "user", "content": chain_prompt(traj, k)}]
        try:
            reply = judger.model.chat(messages)
        except EndpointError as exc:
            log.warning("judger %s failed: %s", judger.id, exc)
            votes.append(ChainVote(judger.id, k, False, f"judger error: {exc}"))
            continue
        vote = parse_vote(reply)
        if vote is None:
            votes.append(ChainVote(judger.id, k, False, f"no leading yes/no: {reply[:80]!r}"))
        else:
            votes.append(ChainVote(judger.id, k, vote, reply.strip()[:200]))
    return votes


def validate(
    sample: QASample,
    traj: Trajectory,
    judgers: list[Judger],
    seed,
    scorer: Scorer = token_f1,
    sigma: float = 0.8,
) -> Verdict:
    """Answer check first; chains are judged only for correct answers."""
    flag = check_answer(sample, traj.final_answer, scorer, sigma)
    if not flag:
        return Verdict(False)
    if traj.K == 0:
        return Verdict(True, (ChainVote("structure", 0, False, "trajectory has no tool steps"),))
    return Verdict(True, tuple(judge_chains(traj, judgers, seed)))
