"""Tool-augmented time-series reasoning: analytical toolkit, ReAct runtime and trajectory pipeline."""

__version__ = "0.1.0"
