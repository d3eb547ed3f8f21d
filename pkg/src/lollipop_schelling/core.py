"""Shared Schelling semantics: configurations, the satisfaction predicate and the move rule.

Cells hold ``A = 1``, ``B = -1`` and ``VACANT = 0`` (the same trinary values the
QUBO encoder uses). Satisfaction compares integer counts against an exact
rational threshold so that no floating-point rounding can flip a verdict.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .topology import Topology

A = 1
B = -1
VACANT = 0

_CHARS = {A: "A", B: "B", VACANT: "."}
_CODES = {"A": A, "B": B, ".": VACANT}


class AgentType(enum.IntEnum):
    A = 1
    B = -1


@dataclass(frozen=True)
class Threshold:
    """Satisfaction threshold p/q: satisfied iff q * same >= p * occupied."""

    p: int
    q: int

    def __post_init__(self):
        if self.q <= 0 or self.p < 0 or self.p > self.q:
            raise ValueError(f"threshold must satisfy 0 <= p/q <= 1, got {self.p}/{self.q}")

    @classmethod
    def parse(cls, text: str) -> "Threshold":
        """Parse a ``P/Q`` literal. Floats are refused on purpose."""
        parts = str(text).strip().split("/")
        if len(parts) != 2:
            raise ValueError(f"threshold must be written P/Q, got {text!r}")
        try:
            p, q = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"threshold must be written P/Q with integers, got {text!r}") from None
        return cls(p, q)

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.p, self.q)

    def satisfied(self, same: int, occupied: int) -> bool:
        return self.q * same >= self.p * occupied

    def __str__(self):
        return f"{self.p}/{self.q}"


class MoveRule(str, enum.Enum):
    UNIFORM_VACANCY = "UniformVacancy"


@dataclass(frozen=True)
class SchellingParams:
    count_a: int
    count_b: int
    tau: Threshold
    max_steps: int = 10**7
    move_rule: MoveRule = MoveRule.UNIFORM_VACANCY

    def __post_init__(self):
        if self.count_a < 0 or self.count_b < 0:
            raise ValueError("agent counts must be non-negative")
        if self.count_a + self.count_b < 1:
            raise ValueError("at least one agent is required")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")

    @property
    def agents(self) -> int:
        return self.count_a + self.count_b

    def validate_for(self, vertex_count: int) -> None:
        if self.agents > vertex_count:
            raise ValueError(f"{self.agents} agents do not fit on {vertex_count} vertices")


class Configuration:
    """Assignment of vertices to {A, B, vacant}. Mutated in place by :func:`apply_move`."""

    __slots__ = ("cells",)

    def __init__(self, cells):
        self.cells = np.asarray(cells, dtype=np.int8).copy()

    @classmethod
    def from_string(cls, text: str) -> "Configuration":
        try:
            return cls([_CODES[ch] for ch in text])
        except KeyError as exc:
            raise ValueError(f"unknown cell symbol {exc.args[0]!r}") from None

    def to_string(self) -> str:
        return "".join(_CHARS[int(c)] for c in self.cells)

    def counts(self) -> tuple[int, int]:
        return int(np.count_nonzero(self.cells == A)), int(np.count_nonzero(self.cells == B))

    def copy(self) -> "Configuration":
        return Configuration(self.cells)

    def __len__(self):
        return len(self.cells)

    def __eq__(self, other):
        return isinstance(other, Configuration) and np.array_equal(self.cells, other.cells)

    def __repr__(self):
        return f"Configuration({self.to_string()!r})"


class Outcome(str, enum.Enum):
    SATISFIED = "satisfied"
    TIMED_OUT = "timeout"
    UNSATISFIABLE = "unsatisfiable"


@dataclass
class SimOutcome:
    result: Outcome
    steps: int
    wall_time: float = 0.0
    seed: object = None
    trace: object = None

    @property
    def satisfied(self) -> bool:
        return self.result is Outcome.SATISFIED

    def __str__(self):
        if self.result is Outcome.SATISFIED:
            return f"Satisfied(T={self.steps})"
        if self.result is Outcome.TIMED_OUT:
            return f"TimedOut({self.steps})"
        return "Unsatisfiable"


def neighbor_counts(config: Configuration, topo: Topology, v: int) -> tuple[int, int]:
    """(same-type occupied neighbors, occupied neighbors) of vertex ``v``."""
    nb = config.cells[topo.neighbors(v)]
    mine = config.cells[v]
    return int(np.count_nonzero(nb == mine)), int(np.count_nonzero(nb))


def is_satisfied(config: Configuration, topo: Topology, v: int, tau: Threshold) -> bool:
    if config.cells[v] == VACANT:
        raise ValueError(f"vertex {v} is vacant")
    same, occ = neighbor_counts(config, topo, v)
    return tau.satisfied(same, occ)


def unhappy_vertices(config: Configuration, topo: Topology, tau: Threshold) -> list[int]:
    return [v for v in np.flatnonzero(config.cells).tolist()
            if not is_satisfied(config, topo, v, tau)]


def count_unhappy(config: Configuration, topo: Topology, tau: Threshold) -> int:
    return len(unhappy_vertices(config, topo, tau))


def apply_move(config: Configuration, src: int, dst: int) -> Configuration:
    if config.cells[src] == VACANT:
        raise ValueError(f"move source {src} is vacant")
    if config.cells[dst] != VACANT:
        raise ValueError(f"move target {dst} is occupied")
    config.cells[dst] = config.cells[src]
    config.cells[src] = VACANT
    return config


def random_cells(n: int, count_a: int, count_b: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform placement of typed agents on ``n`` distinct vertices."""
    if count_a + count_b > n:
        raise ValueError(f"{count_a + count_b} agents do not fit on {n} vertices")
    cells = np.zeros(n, dtype=np.int8)
    cells[:count_a] = A
    cells[count_a:count_a + count_b] = B
    rng.shuffle(cells)
    return cells


def place_agents(topo: Topology, params: SchellingParams, seed) -> Configuration:
    params.validate_for(topo.vertex_count)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return Configuration(random_cells(topo.vertex_count, params.count_a, params.count_b, rng))
