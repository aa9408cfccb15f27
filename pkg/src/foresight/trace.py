"""Records of what a solve did, step by step."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction


@dataclass(frozen=True)
class Candidate:
    action: str
    endpoint: int
    value: tuple[Fraction, ...]


@dataclass
class Step:
    history: int
    chosen: str
    table: dict[int, str] = field(default_factory=dict)
    candidates: list[Candidate] = field(default_factory=list)


@dataclass
class SolveTrace:
    solver: str
    steps: list[Step] = field(default_factory=list)
    outcome: int = 0
    stats: dict[str, int] = field(default_factory=dict)
