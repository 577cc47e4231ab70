"""Domain types for the tutor allocation problem, plus the independent
feasibility checker.

The data model mirrors the administrative reality: a semester time grid,
courses delivered as weekly workshop sections, and tutors with hour budgets,
course-count budgets, skills, research groups and preferences.  Assignments
are expressed against *configurations* (bundles of sections of one course, see
``tap.configs``); this module only needs their identity, membership and the
raw section data to re-check every requirement from scratch.

All types are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

TOL = 1e-7  # feasibility tolerance for hour comparisons

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible"
STATUS_TIMEOUT_INCUMBENT = "timeout-with-incumbent"
STATUS_TIMEOUT_NO_INCUMBENT = "timeout-no-incumbent"
SOLUTION_STATUSES = frozenset(
    {
        STATUS_OPTIMAL,
        STATUS_INFEASIBLE,
        STATUS_TIMEOUT_INCUMBENT,
        STATUS_TIMEOUT_NO_INCUMBENT,
    }
)

PATTERN_EVERY = "every-week"
PATTERN_EVEN = "even-weeks"
PATTERN_ODD = "odd-weeks"
WEEK_PATTERNS = frozenset({PATTERN_EVERY, PATTERN_EVEN, PATTERN_ODD})

# Violation families, in the order checks run.
FAMILY_COVERAGE = "coverage"
FAMILY_HOURS = "hours"
FAMILY_COURSE_COUNT = "course-count"
FAMILY_ONE_CONFIG = "one-config-per-course"
FAMILY_CONCURRENCY = "concurrency"
FAMILY_TRAVEL = "travel"
FAMILY_FORCED = "forced"
FAMILY_FORBIDDEN = "forbidden"
FAMILY_ELIGIBILITY = "eligibility"
FAMILY_SUPERTUTOR = "supertutor"


class TapError(Exception):
    """Base class for all errors raised by this package."""


class InstanceError(TapError):
    """The instance data is malformed or internally inconsistent."""


class StructuralError(TapError):
    """A solution references ids that do not exist for this instance.

    Distinct from a constraint violation: a violation is a meaningful answer
    about a well-formed solution, a structural error means the question
    itself was ill-posed.
    """


@dataclass(frozen=True)
class TimeGrid:
    """Semester calendar: teaching days, slots per day, slot length.

    ``days`` counts concrete teaching days over the whole semester.  Days are
    grouped into weeks of ``days_per_week`` teaching days; sections and busy
    marks are weekly patterns indexed by weekday (0 .. days_per_week - 1) and
    expand to the concrete days of the weeks they occur in.  Week parity is
    1-based: the first teaching week is an odd week.

    ``travel_gap_slots`` is the number of slots a tutor needs to move between
    two locations; activities at different locations closer than that clash.
    """

    days: int
    slots_per_day: int
    slot_minutes: int
    travel_gap_slots: int = 2
    days_per_week: int = 5

    def __post_init__(self) -> None:
        if self.days < 1 or self.slots_per_day < 1 or self.slot_minutes <= 0:
            raise InstanceError("grid dimensions must be positive")
        if self.travel_gap_slots < 1:
            raise InstanceError("travel_gap_slots must be >= 1")
        if self.days_per_week < 1:
            raise InstanceError("days_per_week must be >= 1")

    @property
    def week_count(self) -> int:
        return -(-self.days // self.days_per_week)

    def weeks_matching(self, pattern: str) -> range:
        """Week indices (0-based) on which a delivery pattern occurs."""
        if pattern == PATTERN_EVERY:
            return range(0, self.week_count)
        if pattern == PATTERN_ODD:  # weeks 1, 3, 5, ... in 1-based counting
            return range(0, self.week_count, 2)
        if pattern == PATTERN_EVEN:
            return range(1, self.week_count, 2)
        raise InstanceError(f"unknown weeks pattern: {pattern!r}")

    def occurrence_days(self, weekday: int, pattern: str) -> list[int]:
        """Concrete day indices on which a weekly activity occurs."""
        out = []
        for week in self.weeks_matching(pattern):
            day = weekday + week * self.days_per_week
            if day < self.days:
                out.append(day)
        return out


@dataclass(frozen=True)
class ForcedAssignment:
    """An administrative demand: this tutor must take exactly these sections
    of this course, as one bundle."""

    course_id: str
    section_ids: frozenset[str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "section_ids", frozenset(self.section_ids))
        if not self.section_ids:
            raise InstanceError("forced assignment needs at least one section")


@dataclass(frozen=True)
class BusySlot:
    """A weekly commitment (usually lecturing) blocking one slot."""

    day: int
    slot: int
    location: int


@dataclass(frozen=True)
class Tutor:
    id: str
    research_groups: frozenset[str] = frozenset()
    skills: frozenset[str] = frozenset()
    allowed_years: frozenset[int] = frozenset()
    min_hours: float = 0.0
    max_hours: float = 0.0
    min_courses: int = 0
    max_courses: int = 0
    preferred_courses: frozenset[str] = frozenset()
    forced_course_sections: tuple[ForcedAssignment, ...] = ()
    forbidden_courses: frozenset[str] = frozenset()
    busy: frozenset[BusySlot] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "research_groups", frozenset(self.research_groups))
        object.__setattr__(self, "skills", frozenset(self.skills))
        object.__setattr__(self, "allowed_years", frozenset(self.allowed_years))
        object.__setattr__(self, "preferred_courses", frozenset(self.preferred_courses))
        object.__setattr__(
            self, "forced_course_sections", tuple(self.forced_course_sections)
        )
        object.__setattr__(self, "forbidden_courses", frozenset(self.forbidden_courses))
        object.__setattr__(self, "busy", frozenset(self.busy))
        if not (0 <= self.min_hours <= self.max_hours):
            raise InstanceError(f"tutor {self.id}: need 0 <= min_hours <= max_hours")
        if not (0 <= self.min_courses <= self.max_courses):
            raise InstanceError(f"tutor {self.id}: need 0 <= min_courses <= max_courses")
        if self.preferred_courses & self.forbidden_courses:
            raise InstanceError(
                f"tutor {self.id}: preferred and forbidden courses overlap"
            )

    @property
    def preference_count(self) -> int:
        return len(self.preferred_courses)


@dataclass(frozen=True)
class Course:
    id: str
    year: int
    research_groups: frozenset[str]
    tmm: float
    weeks_pattern: str = PATTERN_EVERY
    sections: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "research_groups", frozenset(self.research_groups))
        object.__setattr__(self, "sections", tuple(self.sections))
        if not 1.0 <= self.tmm <= 2.5:
            raise InstanceError(f"course {self.id}: tmm {self.tmm} outside [1, 2.5]")
        if self.weeks_pattern not in WEEK_PATTERNS:
            raise InstanceError(
                f"course {self.id}: unknown weeks_pattern {self.weeks_pattern!r}"
            )
        if not self.sections:
            raise InstanceError(f"course {self.id}: needs at least one section")


@dataclass(frozen=True)
class Section:
    """One weekly workshop occurrence: a day-of-week, a slot range, a room
    location, and the number of tutors it requires."""

    id: str
    course_id: str
    day: int
    start_slot: int
    end_slot: int
    location: int = 0
    required_skills: frozenset[str] = frozenset()
    required_tutors: int = 1
    supertutor_id: Optional[str] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "required_skills", frozenset(self.required_skills))
        if self.start_slot > self.end_slot:
            raise InstanceError(f"section {self.id}: start_slot > end_slot")
        if self.required_tutors < 1:
            raise InstanceError(f"section {self.id}: required_tutors must be >= 1")

    @property
    def slot_count(self) -> int:
        return self.end_slot - self.start_slot + 1

    @property
    def slots(self) -> range:
        return range(self.start_slot, self.end_slot + 1)


@dataclass(frozen=True)
class Instance:
    grid: TimeGrid
    tutors: tuple[Tutor, ...]
    courses: tuple[Course, ...]
    sections: tuple[Section, ...]
    locations: int = 1
    name: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "tutors", tuple(self.tutors))
        object.__setattr__(self, "courses", tuple(self.courses))
        object.__setattr__(self, "sections", tuple(self.sections))
        if self.locations < 1:
            raise InstanceError("locations must be >= 1")
        courses = {}
        for course in self.courses:
            if course.id in courses:
                raise InstanceError(f"duplicate course id {course.id}")
            courses[course.id] = course
        sections = {}
        for sec in self.sections:
            if sec.id in sections:
                raise InstanceError(f"duplicate section id {sec.id}")
            sections[sec.id] = sec
        tutors = {}
        for tutor in self.tutors:
            if tutor.id in tutors:
                raise InstanceError(f"duplicate tutor id {tutor.id}")
            tutors[tutor.id] = tutor
        object.__setattr__(self, "_courses_by_id", courses)
        object.__setattr__(self, "_sections_by_id", sections)
        object.__setattr__(self, "_tutors_by_id", tutors)

        grid = self.grid
        for sec in self.sections:
            if sec.course_id not in courses:
                raise InstanceError(
                    f"section {sec.id}: unknown course {sec.course_id}"
                )
            if not (0 <= sec.day < grid.days_per_week and sec.day < grid.days):
                raise InstanceError(f"section {sec.id}: weekday {sec.day} outside grid")
            if not (0 <= sec.start_slot and sec.end_slot < grid.slots_per_day):
                raise InstanceError(f"section {sec.id}: slots outside grid")
            if not (0 <= sec.location < self.locations):
                raise InstanceError(f"section {sec.id}: unknown location {sec.location}")
            if sec.supertutor_id is not None and sec.supertutor_id not in tutors:
                raise InstanceError(
                    f"section {sec.id}: unknown supertutor {sec.supertutor_id}"
                )
        for course in self.courses:
            listed = set(course.sections)
            actual = {s.id for s in self.sections if s.course_id == course.id}
            if listed != actual:
                raise InstanceError(
                    f"course {course.id}: section list disagrees with section records"
                )
        for tutor in self.tutors:
            for cid in tutor.preferred_courses | tutor.forbidden_courses:
                if cid not in courses:
                    raise InstanceError(f"tutor {tutor.id}: unknown course {cid}")
            for demand in tutor.forced_course_sections:
                if demand.course_id not in courses:
                    raise InstanceError(
                        f"tutor {tutor.id}: forced unknown course {demand.course_id}"
                    )
                for sid in demand.section_ids:
                    sec = sections.get(sid)
                    if sec is None or sec.course_id != demand.course_id:
                        raise InstanceError(
                            f"tutor {tutor.id}: forced section {sid} does not belong"
                            f" to course {demand.course_id}"
                        )
            for b in tutor.busy:
                if not (0 <= b.day < grid.days_per_week and b.day < grid.days):
                    raise InstanceError(f"tutor {tutor.id}: busy day {b.day} outside grid")
                if not (0 <= b.slot < grid.slots_per_day):
                    raise InstanceError(f"tutor {tutor.id}: busy slot {b.slot} outside grid")
                if not (0 <= b.location < self.locations):
                    raise InstanceError(f"tutor {tutor.id}: busy location out of range")

    def course(self, course_id: str) -> Course:
        return self._courses_by_id[course_id]

    def section(self, section_id: str) -> Section:
        return self._sections_by_id[section_id]

    def tutor(self, tutor_id: str) -> Tutor:
        return self._tutors_by_id[tutor_id]

    def course_sections(self, course_id: str) -> list[Section]:
        return [self._sections_by_id[sid] for sid in self.course(course_id).sections]


@dataclass(frozen=True)
class Solution:
    """A 0/1 assignment of tutors to configurations plus solver metadata.

    ``objective`` is always the preference objective of the assignment;
    ``bound`` the best proven upper bound on it.  ``secondary`` carries
    auxiliary metrics for special solve modes (minimal-change re-solves
    report their change count here).
    """

    status: str
    assignments: frozenset[tuple[str, str]] = frozenset()
    objective: float = 0.0
    bound: float = 0.0
    solve_seconds: float = 0.0
    secondary: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.status not in SOLUTION_STATUSES:
            raise TapError(f"unknown solution status {self.status!r}")
        object.__setattr__(
            self, "assignments", frozenset((t, c) for t, c in self.assignments)
        )

    def sorted_assignments(self) -> list[tuple[str, str]]:
        return sorted(self.assignments)


@dataclass(frozen=True)
class Violation:
    """One broken requirement, with the ids needed to point an operator at it."""

    family: str
    ids: tuple[str, ...]
    detail: str

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return f"[{self.family}] {self.detail}"


class Validator:
    """Re-checks a solution against the instance, from first principles.

    Deliberately independent of the solver: hour totals and slot footprints
    are recomputed from the raw section records rather than read off the
    Configuration objects, so a bug in the enumeration or model pipeline
    surfaces as a disagreement here instead of being silently shared.

    Construct once per (instance, configurations) pair and call
    :meth:`validate` for each solution; construction does the heavy
    precomputation.
    """

    def __init__(self, instance: Instance, configs) -> None:
        self.instance = instance
        grid = instance.grid
        self._grid = grid
        self._configs = {}
        for cfg in configs.configurations:
            course = instance.course(cfg.course_id)
            secs = [instance.section(sid) for sid in cfg.section_ids]
            hours = 0.0
            cells: list[tuple[int, int, int]] = []
            pattern_cells: set[tuple[int, int]] = set()
            for sec in secs:
                occ = grid.occurrence_days(sec.day, course.weeks_pattern)
                hours += sec.slot_count * (grid.slot_minutes / 60.0) * len(occ)
                for day in occ:
                    for slot in sec.slots:
                        cells.append((day, slot, sec.location))
                for slot in sec.slots:
                    pattern_cells.add((sec.day, slot))
            self._configs[cfg.id] = (course, secs, hours * course.tmm, cells, pattern_cells)

    def validate(self, solution: Solution) -> list[Violation]:
        inst = self.instance
        out: list[Violation] = []
        per_tutor: dict[str, list[str]] = {t.id: [] for t in inst.tutors}
        for tid, cid in solution.sorted_assignments():
            if tid not in per_tutor:
                raise StructuralError(f"assignment references unknown tutor {tid}")
            if cid not in self._configs:
                raise StructuralError(f"assignment references unknown configuration {cid}")
            per_tutor[tid].append(cid)

        # Coverage: each section gets exactly the tutors it requires.
        taken: dict[str, int] = {s.id: 0 for s in inst.sections}
        for tid, cids in per_tutor.items():
            for cid in cids:
                for sec in self._configs[cid][1]:
                    taken[sec.id] += 1
        for sec in inst.sections:
            if taken[sec.id] != sec.required_tutors:
                out.append(
                    Violation(
                        FAMILY_COVERAGE,
                        (sec.id,),
                        f"section {sec.id} has {taken[sec.id]} tutors,"
                        f" requires {sec.required_tutors}",
                    )
                )

        for tutor in inst.tutors:
            cids = per_tutor[tutor.id]
            scaled = math.fsum(self._configs[cid][2] for cid in cids)
            if scaled < tutor.min_hours - TOL or scaled > tutor.max_hours + TOL:
                out.append(
                    Violation(
                        FAMILY_HOURS,
                        (tutor.id,),
                        f"tutor {tutor.id} has {scaled:.2f} scaled hours, window"
                        f" [{tutor.min_hours}, {tutor.max_hours}]",
                    )
                )
            if not (tutor.min_courses <= len(cids) <= tutor.max_courses):
                out.append(
                    Violation(
                        FAMILY_COURSE_COUNT,
                        (tutor.id,),
                        f"tutor {tutor.id} takes {len(cids)} configurations, window"
                        f" [{tutor.min_courses}, {tutor.max_courses}]",
                    )
                )

            by_course: dict[str, list[str]] = {}
            for cid in cids:
                by_course.setdefault(self._configs[cid][0].id, []).append(cid)
            for course_id, group in sorted(by_course.items()):
                if len(group) > 1:
                    out.append(
                        Violation(
                            FAMILY_ONE_CONFIG,
                            (tutor.id, course_id),
                            f"tutor {tutor.id} holds {len(group)} configurations of"
                            f" course {course_id}, at most one allowed",
                        )
                    )

            # Concurrency and travel both read off the concrete slot cells.
            cells: dict[tuple[int, int], list[tuple[int, str]]] = {}
            for cid in cids:
                for day, slot, loc in self._configs[cid][3]:
                    cells.setdefault((day, slot), []).append((loc, cid))
            for (day, slot), here in sorted(cells.items()):
                if len(here) > 1:
                    out.append(
                        Violation(
                            FAMILY_CONCURRENCY,
                            (tutor.id,) + tuple(sorted({c for _, c in here})),
                            f"tutor {tutor.id} is double-booked on day {day}"
                            f" slot {slot}",
                        )
                    )
            gap = self._grid.travel_gap_slots
            for (day, slot), here in sorted(cells.items()):
                for g in range(1, gap + 1):
                    there = cells.get((day, slot + g))
                    if not there:
                        continue
                    locs_a = {loc for loc, _ in here}
                    locs_b = {loc for loc, _ in there}
                    if any(a != b for a in locs_a for b in locs_b):
                        out.append(
                            Violation(
                                FAMILY_TRAVEL,
                                (tutor.id,),
                                f"tutor {tutor.id} changes location between day {day}"
                                f" slot {slot} and slot {slot + g}, needs {gap} slots",
                            )
                        )

            for demand in tutor.forced_course_sections:
                hit = any(
                    self._configs[cid][0].id == demand.course_id
                    and {s.id for s in self._configs[cid][1]} == set(demand.section_ids)
                    for cid in cids
                )
                if not hit:
                    out.append(
                        Violation(
                            FAMILY_FORCED,
                            (tutor.id, demand.course_id),
                            f"tutor {tutor.id} misses forced sections"
                            f" {sorted(demand.section_ids)} of course {demand.course_id}",
                        )
                    )

            busy_cells = {(b.day, b.slot) for b in tutor.busy}
            for cid in cids:
                course, secs, _, _, pattern_cells = self._configs[cid]
                if course.id in tutor.forbidden_courses:
                    out.append(
                        Violation(
                            FAMILY_FORBIDDEN,
                            (tutor.id, course.id),
                            f"tutor {tutor.id} assigned forbidden course {course.id}",
                        )
                    )
                clash = busy_cells & pattern_cells
                if clash:
                    day, slot = min(clash)
                    out.append(
                        Violation(
                            FAMILY_FORBIDDEN,
                            (tutor.id, cid),
                            f"tutor {tutor.id} is busy on weekday {day} slot {slot}"
                            f" while configuration {cid} is active there",
                        )
                    )
                for sec in secs:
                    if not sec.required_skills <= tutor.skills:
                        missing = sorted(sec.required_skills - tutor.skills)
                        out.append(
                            Violation(
                                FAMILY_ELIGIBILITY,
                                (tutor.id, sec.id),
                                f"tutor {tutor.id} lacks skills {missing} required"
                                f" by section {sec.id}",
                            )
                        )
                if not (tutor.research_groups & course.research_groups):
                    out.append(
                        Violation(
                            FAMILY_ELIGIBILITY,
                            (tutor.id, course.id),
                            f"tutor {tutor.id} shares no research group with"
                            f" course {course.id}",
                        )
                    )
                if course.year not in tutor.allowed_years:
                    out.append(
                        Violation(
                            FAMILY_ELIGIBILITY,
                            (tutor.id, course.id),
                            f"tutor {tutor.id} cannot teach year {course.year}"
                            f" (course {course.id})",
                        )
                    )
                if any(
                    s.supertutor_id == tutor.id
                    for s in inst.sections
                    if s.course_id == course.id
                ):
                    out.append(
                        Violation(
                            FAMILY_SUPERTUTOR,
                            (tutor.id, course.id),
                            f"tutor {tutor.id} is supertutor of course {course.id}"
                            f" and cannot also tutor it",
                        )
                    )
        return out


def validate_solution(instance: Instance, configs, solution: Solution) -> list[Violation]:
    """Check a solution against every requirement; empty list means feasible.

    Convenience wrapper over :class:`Validator`; when validating many
    solutions against one instance, build the Validator once instead.
    """
    return Validator(instance, configs).validate(solution)
