"""Assembly of the 0/1 assignment model.

Variables are (tutor, configuration) pairs; pairs forbidden by eligibility,
supertutor duty, blacklists or busy slots are never created, mirroring what a
solver's preprocessing would eliminate anyway.  Forced pairs stay visible as
fixings to one.

Row families:

  * coverage: each section collects exactly its required tutor count;
  * hours: each tutor's scaled hours stay inside [min_hours, max_hours];
  * course-count: configurations held stay inside [min_courses, max_courses];
  * one-config-per-course: a tutor never holds two bundles of one course;
  * concurrency: a tutor is in one place per (day, slot);
  * travel: activities at different locations need the travel gap between
    them, for every ordered location pair and every gap up to the limit.

A row no 0/1 point can violate is dropped, and rows identical up to their
name are emitted once (weekly repetition produces many duplicates); neither
pruning changes the feasible set.  An *empty* row that is already violated,
such as a section no eligible tutor can cover, is kept: it records the
infeasibility explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .configs import ConfigurationSet
from .model import Instance, TapError

ROW_TOL = 1e-7


class IlpError(TapError):
    """The model cannot be assembled from these inputs."""


@dataclass(frozen=True)
class LinearRow:
    """One constraint row: sparse coefficients over variable indices."""

    name: str
    sense: str  # "<=", "=" or ">="
    rhs: float
    coeffs: tuple[tuple[int, float], ...]


@dataclass(frozen=True)
class IlpModel:
    variables: tuple[tuple[str, str], ...]
    objective: tuple[tuple[int, float], ...]
    constraints: tuple[LinearRow, ...]
    fixings: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self,
            "variable_index",
            {pair: k for k, pair in enumerate(self.variables)},
        )
        object.__setattr__(self, "_coeff_by_index", dict(self.objective))

    def objective_value(self, assignments: Iterable[tuple[str, str]]) -> float:
        """Objective of an assignment set, summed the same way everywhere.

        fsum keeps the result independent of iteration order, so any two
        paths that sum the same coefficient terms agree bit for bit.
        """
        idx = self.variable_index
        coeff = self._coeff_by_index
        terms = []
        for pair in assignments:
            k = idx.get(pair)
            if k is not None and k in coeff:
                terms.append(coeff[k])
        return math.fsum(terms)


def _violable(sense: str, rhs: float, coeffs: Sequence[tuple[int, float]]) -> bool:
    lo = sum(c for _, c in coeffs if c < 0)
    hi = sum(c for _, c in coeffs if c > 0)
    if sense == "<=":
        return hi > rhs + ROW_TOL
    if sense == ">=":
        return lo < rhs - ROW_TOL
    if sense == "=":
        return not (abs(lo - rhs) <= ROW_TOL and abs(hi - rhs) <= ROW_TOL)
    raise IlpError(f"unknown sense {sense!r}")


class _RowBuilder:
    def __init__(self) -> None:
        self.rows: list[LinearRow] = []
        self._seen: set[tuple] = set()

    def add(self, name: str, sense: str, rhs: float,
            raw: Iterable[tuple[int, float]]) -> None:
        merged: dict[int, float] = {}
        for idx, c in raw:
            merged[idx] = merged.get(idx, 0.0) + c
        coeffs = tuple(sorted(merged.items()))
        if not _violable(sense, rhs, coeffs):
            return
        key = (sense, rhs, coeffs)
        if key in self._seen:
            return
        self._seen.add(key)
        self.rows.append(LinearRow(name=name, sense=sense, rhs=rhs, coeffs=coeffs))


def build_model(instance: Instance, configs: ConfigurationSet) -> IlpModel:
    """Build the assignment model for an instance and its configurations.

    Feasible 0/1 points of the result (rows plus fixings) are exactly the
    assignments the validator accepts; the objective awards each preferred
    configuration 1/min(preference count, max courses) for its tutor.
    """
    cfg_list = configs.configurations
    variables: list[tuple[str, str]] = []
    tvars: dict[str, dict[str, int]] = {}
    for tutor in instance.tutors:
        banned = configs.forbidden[tutor.id]
        mine: dict[str, int] = {}
        for cfg in cfg_list:
            if cfg.id in banned:
                continue
            mine[cfg.id] = len(variables)
            variables.append((tutor.id, cfg.id))
        tvars[tutor.id] = mine

    objective: list[tuple[int, float]] = []
    for tutor in instance.tutors:
        denom = min(tutor.preference_count, tutor.max_courses)
        if denom < 1:
            continue  # no expressed preferences, or no capacity to honor any
        weight = 1.0 / denom
        prefs = configs.preferred[tutor.id]
        for cfg in cfg_list:
            if cfg.id in prefs:
                objective.append((tvars[tutor.id][cfg.id], weight))
    objective.sort()

    rows = _RowBuilder()

    for sec in instance.sections:
        terms = []
        for tutor in instance.tutors:
            mine = tvars[tutor.id]
            for cid in configs.by_section.get(sec.id, ()):
                if cid in mine:
                    terms.append((mine[cid], 1.0))
        rows.add(f"cover_{sec.id}", "=", float(sec.required_tutors), terms)

    scaled_hours = {
        cfg.id: cfg.hours * instance.course(cfg.course_id).tmm for cfg in cfg_list
    }
    for tutor in instance.tutors:
        mine = tvars[tutor.id]
        hour_terms = [(idx, scaled_hours[cid]) for cid, idx in mine.items()]
        rows.add(f"hrs_lo_{tutor.id}", ">=", float(tutor.min_hours), hour_terms)
        rows.add(f"hrs_hi_{tutor.id}", "<=", float(tutor.max_hours), hour_terms)
        count_terms = [(idx, 1.0) for idx in mine.values()]
        rows.add(f"cnt_lo_{tutor.id}", ">=", float(tutor.min_courses), count_terms)
        rows.add(f"cnt_hi_{tutor.id}", "<=", float(tutor.max_courses), count_terms)

    for tutor in instance.tutors:
        mine = tvars[tutor.id]
        for course in instance.courses:
            terms = [
                (mine[cid], 1.0)
                for cid in configs.by_course.get(course.id, ())
                if cid in mine
            ]
            rows.add(f"one_{tutor.id}_{course.id}", "<=", 1.0, terms)

    cells_by_time: dict[tuple[int, int], list[str]] = {}
    for (day, slot, _), ids in configs.active_index.items():
        cells_by_time.setdefault((day, slot), []).extend(ids)
    for tutor in instance.tutors:
        mine = tvars[tutor.id]
        for (day, slot) in sorted(cells_by_time):
            terms = [
                (mine[cid], 1.0) for cid in cells_by_time[(day, slot)] if cid in mine
            ]
            rows.add(f"clash_{tutor.id}_d{day}_t{slot}", "<=", 1.0, terms)

    gap_max = instance.grid.travel_gap_slots
    if instance.locations > 1:
        index = configs.active_index
        keys = sorted(cells_by_time)
        for tutor in instance.tutors:
            mine = tvars[tutor.id]
            for (day, slot) in keys:
                for g in range(1, gap_max + 1):
                    for a in range(instance.locations):
                        here = index.get((day, slot, a))
                        if not here:
                            continue
                        for b in range(instance.locations):
                            if a == b:
                                continue
                            there = index.get((day, slot + g, b))
                            if not there:
                                continue
                            terms = [(mine[cid], 1.0) for cid in here if cid in mine]
                            terms += [(mine[cid], 1.0) for cid in there if cid in mine]
                            rows.add(
                                f"trv_{tutor.id}_d{day}_t{slot}_g{g}_{a}to{b}",
                                "<=", 1.0, terms,
                            )

    fixings: list[tuple[int, int]] = []
    for tutor in instance.tutors:
        mine = tvars[tutor.id]
        for cfg in cfg_list:
            if cfg.id in configs.forced[tutor.id]:
                idx = mine.get(cfg.id)
                if idx is None:
                    raise IlpError(
                        f"forced configuration {cfg.id} is not available to"
                        f" tutor {tutor.id}"
                    )
                fixings.append((idx, 1))

    return IlpModel(
        variables=tuple(variables),
        objective=tuple(objective),
        constraints=tuple(rows.rows),
        fixings=tuple(fixings),
    )


def row_satisfied(row: LinearRow, x: Sequence[float], tol: float = ROW_TOL) -> bool:
    lhs = sum(c * x[i] for i, c in row.coeffs)
    if row.sense == "<=":
        return lhs <= row.rhs + tol
    if row.sense == ">=":
        return lhs >= row.rhs - tol
    return abs(lhs - row.rhs) <= tol
