"""Batch experiment harness: sweeps over sizes and seeds, aggregate tables.

A sweep runs generate, enumerate, build, solve, validate for every (size,
seed) cell and folds the outcomes into three flat shapes: one row per cell
with counts and feasible-only averages, one row per instance with the raw
solver outcome, and a satisfaction tally over every feasible solution.
Averages deliberately cover feasible instances only; an infeasible instance
has no solution value to average and its proof time answers a different
question than solve time does.

Every feasible solution is re-checked by the independent validator before it
counts; a violation is a bug somewhere in the pipeline and fails the sweep
loudly rather than polluting the table.
"""

from __future__ import annotations

import csv
import io as _io
import statistics
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .configs import ConfigurationSet, enumerate_all
from .generator import GeneratorParams
from .generator import generate as _generate
from .ilp import build_model
from .model import (
    STATUS_OPTIMAL,
    STATUS_TIMEOUT_INCUMBENT,
    Instance,
    Solution,
    TapError,
    Validator,
)
from .solve import SolverParams, solve_model

CELL_CSV_HEADER = ("n_tutors", "n_courses", "n_instances", "n_feasible",
                   "n_optimal", "avg_time_s", "avg_value", "sd_time_s",
                   "sd_value")
INSTANCE_CSV_HEADER = ("n_tutors", "n_courses", "seed", "status", "objective",
                       "bound", "solve_seconds")
SATISFACTION_CSV_HEADER = ("preference_count", "tutors", "satisfied",
                           "possible", "share")

FEASIBLE_STATUSES = frozenset({STATUS_OPTIMAL, STATUS_TIMEOUT_INCUMBENT})


class ExperimentError(TapError):
    """A sweep produced a solution the independent validator rejects."""


@dataclass(frozen=True)
class SatisfactionBin:
    """Tally for tutors sharing one preference-list length."""

    tutors: int
    satisfied: int
    possible: int

    @property
    def share(self) -> float:
        return self.satisfied / self.possible if self.possible else 0.0


@dataclass(frozen=True)
class SatisfactionStats:
    """How well a solution honors the preferences that were expressed.

    ``objective`` is the preference objective of the assignment (each tutor
    weighs in at satisfied / min(list length, course budget), so one fully
    happy tutor counts 1).  ``satisfied`` / ``possible`` is the blunter tally:
    preferences honored over preferences honorable.  Tutors who expressed no
    preference, or whose course budget is zero, appear in neither.
    """

    objective: float
    satisfied: int
    possible: int
    histogram: Mapping[int, SatisfactionBin]

    @property
    def fraction(self) -> float:
        return self.satisfied / self.possible if self.possible else 0.0


@dataclass(frozen=True)
class CellRow:
    n_tutors: int
    n_courses: int
    n_instances: int
    n_feasible: int
    n_optimal: int
    avg_time_s: float
    avg_value: float
    sd_time_s: float
    sd_value: float


@dataclass(frozen=True)
class InstanceRow:
    n_tutors: int
    n_courses: int
    seed: int
    status: str
    objective: float
    bound: float
    solve_seconds: float


@dataclass(frozen=True)
class ExperimentReport:
    cells: tuple[CellRow, ...]
    instances: tuple[InstanceRow, ...]
    satisfaction: SatisfactionStats

    def cells_csv(self) -> str:
        return _csv(CELL_CSV_HEADER, (
            (c.n_tutors, c.n_courses, c.n_instances, c.n_feasible,
             c.n_optimal, c.avg_time_s, c.avg_value, c.sd_time_s, c.sd_value)
            for c in self.cells
        ))

    def instances_csv(self) -> str:
        return _csv(INSTANCE_CSV_HEADER, (
            (r.n_tutors, r.n_courses, r.seed, r.status, r.objective, r.bound,
             r.solve_seconds)
            for r in self.instances
        ))

    def satisfaction_csv(self) -> str:
        return _csv(SATISFACTION_CSV_HEADER, (
            (m, b.tutors, b.satisfied, b.possible, b.share)
            for m, b in sorted(self.satisfaction.histogram.items())
        ))


def _csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    out = _io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return out.getvalue()


def satisfaction_stats(instance: Instance, configs: ConfigurationSet,
                       solution: Solution) -> SatisfactionStats:
    """Tally honored preferences per tutor, grouped by list length."""
    held: dict[str, set[str]] = {t.id: set() for t in instance.tutors}
    for tid, cid in solution.assignments:
        held[tid].add(configs.config(cid).course_id)

    objective = 0.0
    total_sat = 0
    total_pos = 0
    tally: dict[int, list[int]] = {}
    for tutor in instance.tutors:
        m = tutor.preference_count
        cap = min(m, tutor.max_courses)
        if cap < 1:
            continue
        sat = len(held[tutor.id] & tutor.preferred_courses)
        objective += sat / cap
        total_sat += sat
        total_pos += cap
        bucket = tally.setdefault(m, [0, 0, 0])
        bucket[0] += 1
        bucket[1] += sat
        bucket[2] += cap
    histogram = {
        m: SatisfactionBin(tutors=t, satisfied=s, possible=p)
        for m, (t, s, p) in tally.items()
    }
    return SatisfactionStats(
        objective=objective,
        satisfied=total_sat,
        possible=total_pos,
        histogram=histogram,
    )


def _merged(parts: list[SatisfactionStats]) -> SatisfactionStats:
    tally: dict[int, list[int]] = {}
    for part in parts:
        for m, b in part.histogram.items():
            bucket = tally.setdefault(m, [0, 0, 0])
            bucket[0] += b.tutors
            bucket[1] += b.satisfied
            bucket[2] += b.possible
    return SatisfactionStats(
        objective=sum(p.objective for p in parts),
        satisfied=sum(p.satisfied for p in parts),
        possible=sum(p.possible for p in parts),
        histogram={
            m: SatisfactionBin(tutors=t, satisfied=s, possible=p)
            for m, (t, s, p) in tally.items()
        },
    )


def run_experiment(
    sizes: Iterable[tuple[int, int]],
    seeds: Iterable[int],
    params: GeneratorParams,
    solver_params: Optional[SolverParams] = None,
    progress: Optional[Callable[[InstanceRow], None]] = None,
) -> ExperimentReport:
    """Sweep sizes x seeds from a parameter template and aggregate.

    ``params`` supplies everything except n_tutors, n_courses and seed,
    which the sweep overrides per cell.  A timeout is recorded like any
    other status; a validator rejection raises, because it means two
    independent readings of the constraints disagree.
    """
    solver_params = solver_params or SolverParams()
    seeds = list(seeds)
    cells: list[CellRow] = []
    rows: list[InstanceRow] = []
    sats: list[SatisfactionStats] = []
    for n_tutors, n_courses in sizes:
        times: list[float] = []
        values: list[float] = []
        n_optimal = 0
        n_total = 0
        for seed in seeds:
            inst = _generate(replace(params, n_tutors=n_tutors,
                                     n_courses=n_courses, seed=seed))
            configs = enumerate_all(inst)
            model = build_model(inst, configs)
            sol = solve_model(model, params=solver_params)
            n_total += 1
            if sol.status in FEASIBLE_STATUSES:
                violations = Validator(inst, configs).validate(sol)
                if violations:
                    raise ExperimentError(
                        f"solver answer fails validation on seed {seed} at"
                        f" ({n_tutors}, {n_courses}): {violations[0]}"
                    )
                times.append(sol.solve_seconds)
                values.append(sol.objective)
                sats.append(satisfaction_stats(inst, configs, sol))
                if sol.status == STATUS_OPTIMAL:
                    n_optimal += 1
            row = InstanceRow(
                n_tutors=n_tutors, n_courses=n_courses, seed=seed,
                status=sol.status, objective=sol.objective, bound=sol.bound,
                solve_seconds=sol.solve_seconds,
            )
            rows.append(row)
            if progress is not None:
                progress(row)
        if n_total:
            cells.append(CellRow(
                n_tutors=n_tutors,
                n_courses=n_courses,
                n_instances=n_total,
                n_feasible=len(values),
                n_optimal=n_optimal,
                avg_time_s=statistics.fmean(times) if times else 0.0,
                avg_value=statistics.fmean(values) if values else 0.0,
                sd_time_s=statistics.stdev(times) if len(times) > 1 else 0.0,
                sd_value=statistics.stdev(values) if len(values) > 1 else 0.0,
            ))
    cells.sort(key=lambda c: (c.n_tutors, c.n_courses))
    rows.sort(key=lambda r: (r.n_tutors, r.n_courses, r.seed))
    return ExperimentReport(
        cells=tuple(cells),
        instances=tuple(rows),
        satisfaction=_merged(sats),
    )
