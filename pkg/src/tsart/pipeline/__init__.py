from tsart.pipeline.answers import QASample, check_answer, normalize_option, token_f1
from tsart.pipeline.corpus import Record, collect, load_records, load_samples, validate_records
from tsart.pipeline.experience import (
    ExperienceSample,
    ModelSampler,
    UniformSampler,
    build_early_experience,
)
from tsart.pipeline.judging import ChainVote, Judger, Verdict, judge_chains, validate
from tsart.pipeline.reflection import ReflectionSample, build_reflections
from tsart.pipeline.sharegpt import ParityError, check_parity, check_sharegpt_file, export_stage

__all__ = [
    "ChainVote",
    "ExperienceSample",
    "Judger",
    "ModelSampler",
    "ParityError",
    "QASample",
    "Record",
    "ReflectionSample",
    "UniformSampler",
    "Verdict",
    "build_early_experience",
    "build_reflections",
    "check_answer",
    "check_parity",
    "check_sharegpt_file",
    "collect",
    "export_stage",
    "judge_chains",
    "load_records",
    "load_samples",
    "normalize_option",
    "token_f1",
    "validate",
    "validate_records",
]
