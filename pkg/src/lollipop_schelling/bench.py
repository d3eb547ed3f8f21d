"""Trial farming and wall-clock measurement for the scaling study."""
from __future__ import annotations

import csv
import io
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .core import Outcome, SchellingParams, Threshold
from .count_first import simulate_lollipop_count_first
from .topology import LollipopSpec, build_lollipop
from .traditional import simulate_traditional

log = logging.getLogger(__name__)

ENGINES = ("traditional", "count_first")
_ENGINE_KEY = {"traditional": 0, "count_first": 1}
CSV_HEADER = ("engine", "size", "trial", "seed", "outcome", "T", "wall_time_ns")


def normalize_engine(name: str) -> str:
    key = name.strip().lower().replace("-", "_")
    if key not in _ENGINE_KEY:
        raise ValueError(f"unknown engine {name!r}; choose from traditional, count-first")
    return key


@dataclass
class ExperimentPlan:
    sizes: list[int]
    trials_per_size: int = 500
    density: float = 0.8
    split: float = 0.5
    clique_fraction: float = 0.1
    tau: Threshold = field(default_factory=lambda: Threshold(1, 2))
    engines: tuple[str, ...] = ENGINES
    max_steps: int = 10**8
    master_seed: int = 0

    def __post_init__(self):
        if not self.sizes:
            raise ValueError("sizes must be non-empty")
        if not 0 < self.density <= 1:
            raise ValueError("density must be in (0, 1]")
        if not 0 <= self.split <= 1:
            raise ValueError("split must be in [0, 1]")
        if not 0 < self.clique_fraction < 1:
            raise ValueError("clique_fraction must be in (0, 1)")
        if self.trials_per_size < 1:
            raise ValueError("trials_per_size must be positive")
        self.engines = tuple(normalize_engine(e) for e in self.engines)

    def shape(self, size: int) -> tuple[LollipopSpec, SchellingParams]:
        clique = max(1, round(self.clique_fraction * size))
        agents = round(self.density * size)
        a = round(self.split * agents)
        spec = LollipopSpec(clique, size - clique)
        return spec, SchellingParams(a, agents - a, self.tau, self.max_steps)


@dataclass(frozen=True)
class RunRecord:
    engine: str
    size: int
    trial_index: int
    seed: int
    outcome: Outcome
    steps: int
    wall_time_ns: int

    def row(self):
        return (self.engine, self.size, self.trial_index, self.seed, self.outcome.value,
                self.steps, self.wall_time_ns)


def trial_seed(master_seed: int, engine: str, size: int, trial: int) -> int:
    """Per-trial seed keyed on (engine, size, trial), independent of scheduling."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(_ENGINE_KEY[engine], size, trial))
    return int(ss.generate_state(1, np.uint64)[0])


@lru_cache(maxsize=4)
def _lollipop(clique: int, path: int):
    return build_lollipop(clique, path)


def warmup() -> None:
    """Trigger kernel compilation so it never lands inside a timed run."""
    p = SchellingParams(2, 2, Threshold(1, 2), 50)
    simulate_traditional(build_lollipop(3, 4), p, 0)
    simulate_lollipop_count_first(LollipopSpec(3, 4), p, 0)


def run_trial(plan: ExperimentPlan, engine: str, size: int, trial: int) -> RunRecord:
    spec, params = plan.shape(size)
    seed = trial_seed(plan.master_seed, engine, size, trial)
    if engine == "traditional":
        topo = _lollipop(spec.clique_size, spec.path_length)
        t0 = time.perf_counter_ns()
        out = simulate_traditional(topo, params, seed)
    else:
        t0 = time.perf_counter_ns()
        out = simulate_lollipop_count_first(spec, params, seed)
    wall = time.perf_counter_ns() - t0
    return RunRecord(engine, size, trial, seed, out.result, out.steps, wall)


def _run_cell(args):
    plan, engine, size = args
    warmup()
    return [run_trial(plan, engine, size, t) for t in range(plan.trials_per_size)]


def run_experiment(plan: ExperimentPlan, jobs: int = 1, progress=None) -> list[RunRecord]:
    """Run every (engine, size, trial) cell; records come back sorted.

    Sizes are processed in increasing order per engine. If every trial at some
    size times out, the remaining (larger) sizes for that engine are skipped.
    """
    records: list[RunRecord] = []
    sizes = sorted(plan.sizes)
    if jobs <= 1:
        warmup()
        for engine in plan.engines:
            for size in sizes:
                cell = _run_cell((plan, engine, size))
                records.extend(cell)
                if progress:
                    progress(engine, size, cell)
                if all(r.outcome is not Outcome.SATISFIED for r in cell):
                    log.warning("%s: every trial at size %d timed out; skipping larger sizes", engine, size)
                    break
    else:
        cells = [(plan, e, s) for e in plan.engines for s in sizes]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_cell, cells))
        dead: dict[str, int] = {}
        for (_, engine, size), cell in zip(cells, results):
            if engine in dead and size > dead[engine]:
                continue
            records.extend(cell)
            if progress:
                progress(engine, size, cell)
            if all(r.outcome is not Outcome.SATISFIED for r in cell):
                log.warning("%s: every trial at size %d timed out; dropping larger sizes", engine, size)
                dead[engine] = size
    records.sort(key=lambda r: (r.engine, r.size, r.trial_index))
    return records


def records_to_csv(records: list[RunRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow(r.row())
    return buf.getvalue()


def read_records(path) -> list[RunRecord]:
    with open(path, newline="") as fh:
        return [RunRecord(row["engine"], int(row["size"]), int(row["trial"]), int(row["seed"]),
                          Outcome(row["outcome"]), int(row["T"]), int(row["wall_time_ns"]))
                for row in csv.DictReader(fh)]


@dataclass
class SizeSummary:
    size: int
    trials: int
    satisfied: int
    mean_runtime: float  # seconds, satisfied runs only
    mean_steps: float

    @property
    def timeout_fraction(self) -> float:
        return 1.0 - self.satisfied / self.trials


def summarize(records: list[RunRecord]) -> dict[str, list[SizeSummary]]:
    """Per-engine, per-size means over satisfied runs; timeouts are counted apart."""
    out: dict[str, list[SizeSummary]] = {}
    groups: dict[tuple[str, int], list[RunRecord]] = {}
    for r in records:
        groups.setdefault((r.engine, r.size), []).append(r)
    for (engine, size), rs in sorted(groups.items()):
        ok = [r for r in rs if r.outcome is Outcome.SATISFIED]
        if not ok:
            continue
        out.setdefault(engine, []).append(SizeSummary(
            size, len(rs), len(ok), float(np.mean([r.wall_time_ns for r in ok])) / 1e9,
            float(np.mean([r.steps for r in ok]))))
    return out


def series_of(summaries: list[SizeSummary]) -> list[tuple[int, float]]:
    return [(s.size, s.mean_runtime) for s in summaries]


def plot_data(summaries: list[SizeSummary]) -> str:
    """Two-column ``size mean_runtime`` text for external plotting."""
    return "".join(f"{s.size} {s.mean_runtime:.9g}\n" for s in summaries)
