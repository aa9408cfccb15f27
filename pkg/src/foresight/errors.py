"""Exception hierarchy shared by all modules."""

from __future__ import annotations

from dataclasses import dataclass


class ForesightError(Exception):
    """Base class for every error raised by this package."""


@dataclass(frozen=True)
class Violation:
    """One broken invariant, as reported by the validators."""

    kind: str
    where: str
    detail: str = ""

    def __str__(self) -> str:
        text = f"{self.kind} at {self.where}"
        return f"{text}: {self.detail}" if self.detail else text


class InvalidGame(ForesightError):
    def __init__(self, violations: list[Violation]):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class UndefinedChoice(ForesightError):
    """A strategy profile is silent at a history the play reaches."""

    def __init__(self, node: str):
        self.node = node
        super().__init__(f"profile has no action at {node!r}")


class ForkCoverageError(ForesightError):
    """A frontier node has no exploration terminal to average over."""

    def __init__(self, node: str):
        self.node = node
        super().__init__(f"frontier node {node!r} has no exploration terminal")


class UnspecifiedSequence(ForesightError):
    """A table belief oracle has no entry for the queried history-sequence."""

    def __init__(self, sequence: tuple[str, ...]):
        self.sequence = sequence
        super().__init__(f"unspecified sequence ({', '.join(sequence)})")


class CapExceeded(ForesightError):
    """An exhaustive procedure was asked to exceed its configured size cap."""


class BlindSight(ForesightError):
    """A move was requested at a history whose believed sight shows no move."""


class InfeasibleSpec(ForesightError):
    """Generator bounds cannot be satisfied."""


class BenchTimeout(ForesightError):
    pass
