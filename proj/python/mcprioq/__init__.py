"""Concurrent sparse Markov chain with count-sorted edge queues."""

from ._core import (
    BenchReport,
    FormatError,
    Graph,
    GraphStats,
    InputError,
    InvariantError,
    Recommendation,
    WorkloadConfig,
    parse_transitions,
    run_bench,
)

__all__ = [
    "BenchReport",
    "FormatError",
    "Graph",
    "GraphStats",
    "InputError",
    "InvariantError",
    "Recommendation",
    "WorkloadConfig",
    "parse_transitions",
    "run_bench",
]
