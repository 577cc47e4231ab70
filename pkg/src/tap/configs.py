"""Configuration enumeration and per-tutor eligibility sets.

A configuration is the unit a tutor can be assigned: a bundle of sections of
one course that is teachable by one person, namely a single section, a run of
two or three back-to-back sections on one day, or a combination of such runs
on up to ``max_multi_day`` different days (one run per day).  Runs longer than
three are never bundled; that limit is structural here, not a solver
constraint.

Enumeration happens once per instance, before any model is built.  The
derived :class:`ConfigurationSet` also carries, per tutor, the preferred,
forced and forbidden configuration-id sets that the model and the service
layer work against.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import combinations, product
from typing import Iterable, Optional, Sequence

from .model import (
    Course,
    Instance,
    InstanceError,
    Section,
    StructuralError,
    TapError,
    TimeGrid,
    Tutor,
)


class EnumerationError(TapError):
    """The course's section layout cannot be enumerated (malformed instance)."""


class EditConflictError(TapError):
    """A force/forbid edit set contradicts itself or the instance."""


@dataclass(frozen=True)
class Configuration:
    """A teachable bundle of sections of one course.

    ``hours`` counts contact hours over the whole semester, before any
    marking multiplier is applied.  ``active_slots`` is the concrete
    footprint: (day, slot, location) triples over the semester days the
    bundle actually meets, honoring the course's weekly pattern.
    """

    id: str
    course_id: str
    section_ids: frozenset[str]
    hours: float
    active_slots: frozenset[tuple[int, int, int]]


@dataclass(frozen=True)
class ConfigurationSet:
    """Everything the model needs to know about configurations, indexed.

    ``preferred``, ``forced`` and ``forbidden`` map tutor id to configuration
    id sets.  A forbidden pair never becomes a variable; a forced pair is
    fixed to one; preferred pairs carry the objective.
    """

    configurations: tuple[Configuration, ...]
    by_course: dict[str, tuple[str, ...]]
    by_section: dict[str, tuple[str, ...]]
    active_index: dict[tuple[int, int, int], tuple[str, ...]]
    preferred: dict[str, frozenset[str]]
    forced: dict[str, frozenset[str]]
    forbidden: dict[str, frozenset[str]]
    grid: TimeGrid
    locations: int

    def config(self, config_id: str) -> Configuration:
        try:
            return self._by_id[config_id]
        except KeyError:
            raise StructuralError(f"unknown configuration {config_id}") from None

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "_by_id", {cfg.id: cfg for cfg in self.configurations}
        )


def _day_runs(day_sections: list[Section]) -> list[tuple[Section, ...]]:
    """All consecutive runs of length 1..3 within one day's sections."""
    ordered = sorted(day_sections, key=lambda s: (s.start_slot, s.id))
    for prev, nxt in zip(ordered, ordered[1:]):
        if nxt.start_slot <= prev.end_slot:
            raise EnumerationError(
                f"sections {prev.id} and {nxt.id} overlap on day {prev.day}"
            )
    runs = []
    n = len(ordered)
    for i in range(n):
        for length in (1, 2, 3):
            j = i + length
            if j > n:
                break
            window = ordered[i:j]
            if all(
                b.start_slot == a.end_slot + 1 for a, b in zip(window, window[1:])
            ):
                runs.append(tuple(window))
    return runs


def enumerate_configurations(
    course: Course,
    sections: Sequence[Section],
    grid: TimeGrid,
    max_multi_day: int = 2,
) -> list[Configuration]:
    """Enumerate every teachable bundle of this course's sections.

    Returns configurations in canonical order (earliest day, earliest start,
    then growing size), with ids ``<course>.g1``, ``<course>.g2``, ...
    stable under any input ordering of ``sections``.
    """
    if max_multi_day < 1:
        raise EnumerationError("max_multi_day must be >= 1")
    for sec in sections:
        if sec.course_id != course.id:
            raise EnumerationError(
                f"section {sec.id} belongs to {sec.course_id}, not {course.id}"
            )
    by_day: dict[int, list[Section]] = {}
    for sec in sections:
        by_day.setdefault(sec.day, []).append(sec)
    runs_by_day = {day: _day_runs(group) for day, group in sorted(by_day.items())}

    bundles: list[tuple[Section, ...]] = []
    days = sorted(runs_by_day)
    for k in range(1, min(max_multi_day, len(days)) + 1):
        for day_combo in combinations(days, k):
            for pick in product(*(runs_by_day[d] for d in day_combo)):
                bundles.append(tuple(s for run in pick for s in run))

    built = []
    for bundle in bundles:
        ordered = sorted(bundle, key=lambda s: (s.day, s.start_slot))
        hours = 0.0
        cells = set()
        for sec in ordered:
            occurrences = grid.occurrence_days(sec.day, course.weeks_pattern)
            hours += sec.slot_count * (grid.slot_minutes / 60.0) * len(occurrences)
            for day in occurrences:
                for slot in sec.slots:
                    cells.add((day, slot, sec.location))
        key = (
            ordered[0].day,
            ordered[0].start_slot,
            len(ordered),
            tuple((s.day, s.start_slot, s.id) for s in ordered),
        )
        built.append((key, ordered, hours, cells))
    built.sort(key=lambda item: item[0])

    out = []
    for idx, (_, ordered, hours, cells) in enumerate(built, start=1):
        out.append(
            Configuration(
                id=f"{course.id}.g{idx}",
                course_id=course.id,
                section_ids=frozenset(s.id for s in ordered),
                hours=hours,
                active_slots=frozenset(cells),
            )
        )
    return out


def derive_tutor_sets(
    instance: Instance, configs: Sequence[Configuration]
) -> ConfigurationSet:
    """Index configurations and work out each tutor's eligibility sets.

    A configuration is forbidden for a tutor when any of these hold: a member
    section needs a skill the tutor lacks; tutor and course share no research
    group; the course's year is not one the tutor may teach; the course is on
    the tutor's blacklist; the tutor is supertutor of any section of the
    course; or the tutor has a weekly commitment on a slot the configuration
    occupies.  Forced demands must resolve to an enumerated, non-forbidden
    configuration or the instance is rejected outright.
    """
    by_course: dict[str, list[str]] = {}
    by_section: dict[str, list[str]] = {}
    active: dict[tuple[int, int, int], list[str]] = {}
    seen: set[str] = set()
    for cfg in configs:
        if cfg.id in seen:
            raise InstanceError(f"duplicate configuration id {cfg.id}")
        seen.add(cfg.id)
        by_course.setdefault(cfg.course_id, []).append(cfg.id)
        for sid in cfg.section_ids:
            by_section.setdefault(sid, []).append(cfg.id)
        for cell in cfg.active_slots:
            active.setdefault(cell, []).append(cfg.id)

    dpw = instance.grid.days_per_week
    skills_union = {}
    pattern_cells = {}
    for cfg in configs:
        union: set[str] = set()
        cells: set[tuple[int, int]] = set()
        for sid in cfg.section_ids:
            sec = instance.section(sid)
            union |= sec.required_skills
            for slot in sec.slots:
                cells.add((sec.day % dpw, slot))
        skills_union[cfg.id] = union
        pattern_cells[cfg.id] = cells

    supertutored: dict[str, set[str]] = {}
    for sec in instance.sections:
        if sec.supertutor_id is not None:
            supertutored.setdefault(sec.supertutor_id, set()).add(sec.course_id)

    preferred: dict[str, frozenset[str]] = {}
    forced: dict[str, frozenset[str]] = {}
    forbidden: dict[str, frozenset[str]] = {}
    for tutor in instance.tutors:
        banned: set[str] = set()
        busy_cells = {(b.day, b.slot) for b in tutor.busy}
        for course_id, cfg_ids in by_course.items():
            course = instance.course(course_id)
            course_banned = (
                not (tutor.research_groups & course.research_groups)
                or course.year not in tutor.allowed_years
                or course_id in tutor.forbidden_courses
                or course_id in supertutored.get(tutor.id, ())
            )
            if course_banned:
                banned.update(cfg_ids)
                continue
            for cid in cfg_ids:
                if not skills_union[cid] <= tutor.skills:
                    banned.add(cid)
                elif busy_cells and busy_cells & pattern_cells[cid]:
                    banned.add(cid)

        pins: set[str] = set()
        for demand in tutor.forced_course_sections:
            wanted = set(demand.section_ids)
            match = None
            for cid in by_course.get(demand.course_id, ()):
                cfg = next(c for c in configs if c.id == cid)
                if set(cfg.section_ids) == wanted:
                    match = cid
                    break
            if match is None:
                raise InstanceError(
                    f"tutor {tutor.id}: forced sections {sorted(wanted)} of course"
                    f" {demand.course_id} do not form a teachable configuration"
                )
            if match in banned:
                raise InstanceError(
                    f"tutor {tutor.id}: forced configuration {match} is also"
                    f" forbidden for them"
                )
            pins.add(match)

        prefs = {
            cid
            for course_id in tutor.preferred_courses
            for cid in by_course.get(course_id, ())
            if cid not in banned
        }
        preferred[tutor.id] = frozenset(prefs)
        forced[tutor.id] = frozenset(pins)
        forbidden[tutor.id] = frozenset(banned)

    return ConfigurationSet(
        configurations=tuple(configs),
        by_course={k: tuple(v) for k, v in by_course.items()},
        by_section={k: tuple(v) for k, v in by_section.items()},
        active_index={cell: tuple(sorted(ids)) for cell, ids in active.items()},
        preferred=preferred,
        forced=forced,
        forbidden=forbidden,
        grid=instance.grid,
        locations=instance.locations,
    )


def enumerate_all(instance: Instance, max_multi_day: int = 2) -> ConfigurationSet:
    """Enumerate every course of the instance and derive tutor sets."""
    configs: list[Configuration] = []
    for course in instance.courses:
        configs.extend(
            enumerate_configurations(
                course, instance.course_sections(course.id), instance.grid,
                max_multi_day,
            )
        )
    return derive_tutor_sets(instance, configs)


def active_at(
    configs: ConfigurationSet, day: int, slot: int, location: int
) -> frozenset[str]:
    """Configuration ids occupying a concrete (day, slot, location) cell."""
    grid = configs.grid
    if not 0 <= day < grid.days:
        raise IndexError(f"day {day} outside grid")
    if not 0 <= slot < grid.slots_per_day:
        raise IndexError(f"slot {slot} outside grid")
    if not 0 <= location < configs.locations:
        raise IndexError(f"location {location} out of range")
    return frozenset(configs.active_index.get((day, slot, location), ()))


@dataclass(frozen=True)
class Edit:
    """One operator action: force or forbid a tutor on a course.

    ``section_ids`` narrows a force to a specific bundle; without it the
    bundle covering every section of the course is meant (the usual shape for
    externally hired tutors).
    """

    tutor_id: str
    course_id: str
    action: str  # "force" | "forbid"
    section_ids: Optional[frozenset[str]] = None

    def __post_init__(self) -> None:
        if self.action not in ("force", "forbid"):
            raise TapError(f"unknown edit action {self.action!r}")
        if self.section_ids is not None:
            object.__setattr__(self, "section_ids", frozenset(self.section_ids))


def apply_edits(configs: ConfigurationSet, edits: Sequence[Edit]) -> ConfigurationSet:
    """Compile operator edits into updated per-tutor sets, atomically.

    Raises :class:`EditConflictError` on any contradiction that is visible
    statically: force and forbid on the same pair, two forces pinning
    different bundles, or an edit fighting the instance's own forced or
    forbidden sets.  Solver-level infeasibility is not detected here.
    """
    for e in edits:
        if e.tutor_id not in configs.forbidden:
            raise StructuralError(f"unknown tutor {e.tutor_id}")
        if e.course_id not in configs.by_course:
            raise StructuralError(f"unknown course {e.course_id}")

    actions: dict[tuple[str, str], str] = {}
    for e in edits:
        key = (e.tutor_id, e.course_id)
        prior = actions.get(key)
        if prior is not None and prior != e.action:
            raise EditConflictError(
                f"tutor {e.tutor_id}, course {e.course_id}: both forced and forbidden"
            )
        actions[key] = e.action

    preferred = {t: set(v) for t, v in configs.preferred.items()}
    forced = {t: set(v) for t, v in configs.forced.items()}
    banned = {t: set(v) for t, v in configs.forbidden.items()}
    pinned: dict[tuple[str, str], str] = {}

    for e in edits:
        cfg_ids = configs.by_course[e.course_id]
        if e.action == "forbid":
            for cid in cfg_ids:
                if cid in forced[e.tutor_id]:
                    raise EditConflictError(
                        f"tutor {e.tutor_id}: configuration {cid} is forced but the"
                        f" edit forbids course {e.course_id}"
                    )
            banned[e.tutor_id].update(cfg_ids)
            preferred[e.tutor_id] -= set(cfg_ids)
        else:
            if e.section_ids is None:
                wanted = set()
                for cid in cfg_ids:
                    wanted |= set(configs.config(cid).section_ids)
            else:
                wanted = set(e.section_ids)
            target = None
            for cid in cfg_ids:
                if set(configs.config(cid).section_ids) == wanted:
                    target = cid
                    break
            if target is None:
                raise EditConflictError(
                    f"tutor {e.tutor_id}, course {e.course_id}: no configuration"
                    f" bundles sections {sorted(wanted)}; name an explicit bundle"
                )
            key = (e.tutor_id, e.course_id)
            if key in pinned and pinned[key] != target:
                raise EditConflictError(
                    f"tutor {e.tutor_id}, course {e.course_id}: two forces pin"
                    f" different bundles"
                )
            if target in banned[e.tutor_id]:
                raise EditConflictError(
                    f"tutor {e.tutor_id}: forced configuration {target} is"
                    f" forbidden (eligibility or an earlier edit)"
                )
            pinned[key] = target
            forced[e.tutor_id].add(target)

    return replace(
        configs,
        preferred={t: frozenset(v) for t, v in preferred.items()},
        forced={t: frozenset(v) for t, v in forced.items()},
        forbidden={t: frozenset(v) for t, v in banned.items()},
    )
