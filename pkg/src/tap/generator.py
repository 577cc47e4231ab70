"""Random instance generation shaped like the real allocation data.

Sizes, rates and calendar defaults mirror the documented case: an 18-slot
day of half-hour slots, two campuses with around 95% of activity in the
first, hour limits between 80 and 120, at most 3 courses per tutor, and a
tutor-course compatibility rate near 37%.

Compatibility is not drawn directly.  Tutors and courses get research
groups and years, and compatibility emerges from the overlap, calibrated
so the expected rate lands on ``compatibility_rate``: courses hold 2-3 of
the 9 groups, the year gate passes 92% of pairs, and the number of groups
a tutor holds is chosen by interpolating on the exact match curve.  At
the default rate tutors end up with one or two groups; higher rates add
more.  The year gate caps the reachable rate at 0.92.

Everything is driven by one seeded RNG with a fixed draw order, so equal
parameters give equal instances, byte for byte once serialized.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, replace

from .model import (
    PATTERN_EVEN,
    PATTERN_EVERY,
    PATTERN_ODD,
    BusySlot,
    Course,
    Instance,
    Section,
    TapError,
    TimeGrid,
    Tutor,
)

RESEARCH_GROUPS = tuple(f"rg{k}" for k in range(1, 10))
SKILLS = ("maple", "matlab", "python", "r")
YEARS = (1, 2, 3, 4, 5)

# course shape mix: one section; two or three sections on separate days;
# four to six consecutive sections in one day
SMALL, MEDIUM, LARGE = "small", "medium", "large"
COURSE_MIX = (0.50, 0.35, 0.15)

SECTION_SLOTS = 2           # a workshop lasts one hour
SKILL_SECTION_RATE = 0.15   # sections demanding one computer skill
FULL_YEARS_RATE = 0.80      # tutors allowed to teach every year
BUSY_TUTOR_RATE = 0.25      # tutors with weekly commitments
ZERO_MIN_HOURS_RATE = 0.30  # tutors with no lower hour limit
PATTERN_WEIGHTS = ((PATTERN_EVERY, 0.80), (PATTERN_ODD, 0.10),
                   (PATTERN_EVEN, 0.10))

# P(a course's 2-3 groups hit a tutor holding k of the 9), k = 0..9, and
# the share of tutor-course pairs surviving the year gate
GROUP_MATCH = tuple(
    1.0 - 0.5 * (math.comb(9 - k, 2) / math.comb(9, 2)
                 + math.comb(9 - k, 3) / math.comb(9, 3))
    for k in range(10)
)
YEAR_MATCH = FULL_YEARS_RATE + (1.0 - FULL_YEARS_RATE) * 3 / 5
COMPATIBILITY_CAP = GROUP_MATCH[-1] * YEAR_MATCH


class GeneratorError(TapError):
    """Generation parameters are contradictory."""


def _default_location_weights(n_locations: int) -> tuple[float, ...]:
    if n_locations == 1:
        return (1.0,)
    if n_locations == 2:
        return (0.95, 0.05)
    if n_locations == 3:
        return (0.90, 0.05, 0.05)
    raise GeneratorError(f"n_locations must be 1..3, got {n_locations}")


@dataclass(frozen=True)
class GeneratorParams:
    n_tutors: int
    n_courses: int
    n_locations: int = 2
    location_weights: tuple[float, ...] | None = None
    max_preferences: int = 3
    compatibility_rate: float = 0.37
    slots_per_day: int = 18
    slot_minutes: int = 30
    weeks: int = 11
    days_per_week: int = 5
    travel_gap_slots: int = 2
    tmm_range: tuple[float, float] = (1.0, 2.5)
    tmm_mode: float = 2.0
    hours_range: tuple[float, float] = (80.0, 120.0)
    min_hours_zero_rate: float = ZERO_MIN_HOURS_RATE
    course_mix: tuple[float, float, float] = COURSE_MIX
    required_tutors_range: tuple[int, int] = (1, 3)
    skills_per_tutor_range: tuple[int, int] = (0, 2)
    max_courses: int = 3
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_tutors < 1 or self.n_courses < 1:
            raise GeneratorError("need at least one tutor and one course")
        weights = self.location_weights
        if weights is None:
            weights = _default_location_weights(self.n_locations)
            object.__setattr__(self, "location_weights", weights)
        if len(weights) != self.n_locations:
            raise GeneratorError("one location weight per location")
        if abs(sum(weights) - 1.0) > 1e-9 or any(w < 0 for w in weights):
            raise GeneratorError("location weights must be a distribution")
        if not 0.0 < self.compatibility_rate <= COMPATIBILITY_CAP:
            raise GeneratorError(
                "compatibility_rate must be in (0, "
                f"{COMPATIBILITY_CAP:.2f}]; the year gate caps what group "
                "overlap can reach")
        lo, hi = self.hours_range
        if not 0 <= lo <= hi:
            raise GeneratorError("hours_range must satisfy 0 <= low <= high")
        if not 0.0 <= self.min_hours_zero_rate <= 1.0:
            raise GeneratorError("min_hours_zero_rate must be in [0, 1]")
        mix = self.course_mix
        if len(mix) != 3 or any(w < 0 for w in mix) \
                or abs(sum(mix) - 1.0) > 1e-9:
            raise GeneratorError("course_mix needs three weights summing to 1")
        rlo, rhi = self.required_tutors_range
        if not 1 <= rlo <= rhi:
            raise GeneratorError("required_tutors_range must satisfy 1 <= low <= high")
        slo, shi = self.skills_per_tutor_range
        if not 0 <= slo <= shi <= len(SKILLS):
            raise GeneratorError(
                f"skills_per_tutor_range must fit within 0..{len(SKILLS)}")
        if self.max_preferences < 0 or self.max_courses < 1:
            raise GeneratorError("max_preferences >= 0 and max_courses >= 1")
        if self.slots_per_day < SECTION_SLOTS:
            raise GeneratorError("day too short for a workshop")
        if self.weeks < 1 or self.days_per_week < 1:
            raise GeneratorError("calendar must be nonempty")


def _weighted(rng: random.Random, pairs) -> str:
    roll = rng.random()
    acc = 0.0
    for value, weight in pairs:
        acc += weight
        if roll < acc:
            return value
    return pairs[-1][0]


def _course_sections(rng: random.Random, params: GeneratorParams,
                     course_id: str, kind: str) -> list[Section]:
    last_start = params.slots_per_day - SECTION_SLOTS
    locations = list(range(params.n_locations))
    weights = list(params.location_weights)

    def location() -> int:
        return rng.choices(locations, weights=weights)[0]

    def skills() -> tuple[str, ...]:
        if rng.random() < SKILL_SECTION_RATE:
            return (rng.choice(SKILLS),)
        return ()

    sections = []
    if kind == SMALL:
        count = 1
        days = [rng.randrange(params.days_per_week)]
        starts = [rng.randrange(last_start + 1)]
    elif kind == MEDIUM:
        count = min(rng.randint(2, 3), params.days_per_week)
        days = rng.sample(range(params.days_per_week), count)
        starts = [rng.randrange(last_start + 1) for _ in range(count)]
    else:
        count = rng.randint(4, 6)
        day = rng.randrange(params.days_per_week)
        days = [day] * count
        first = rng.randrange(params.slots_per_day - count * SECTION_SLOTS + 1)
        starts = [first + k * SECTION_SLOTS for k in range(count)]
    required = rng.randint(*params.required_tutors_range)
    for k in range(count):
        sections.append(Section(
            id=f"{course_id}_s{k + 1}",
            course_id=course_id,
            day=days[k],
            start_slot=starts[k],
            end_slot=starts[k] + SECTION_SLOTS - 1,
            location=location(),
            required_skills=skills(),
            required_tutors=required,
        ))
    return sections


def _tutor_groups(rng: random.Random, rate: float) -> frozenset[str]:
    # Pick how many groups the tutor belongs to by interpolating on the
    # match curve: the year gate contributes YEAR_MATCH, so aim the group
    # overlap at rate / YEAR_MATCH and mix the two bracketing counts.
    target = rate / YEAR_MATCH
    if target >= GROUP_MATCH[-1]:
        count = len(RESEARCH_GROUPS)
    else:
        k = 0
        while GROUP_MATCH[k + 1] < target:
            k += 1
        lo, hi = GROUP_MATCH[k], GROUP_MATCH[k + 1]
        count = k + 1 if rng.random() < (target - lo) / (hi - lo) else k
    return frozenset(rng.sample(RESEARCH_GROUPS, count))


def generate(params: GeneratorParams) -> Instance:
    """Produce one random instance, deterministically in the seed."""
    rng = random.Random(params.seed)
    grid = TimeGrid(
        days=params.weeks * params.days_per_week,
        slots_per_day=params.slots_per_day,
        slot_minutes=params.slot_minutes,
        travel_gap_slots=params.travel_gap_slots,
        days_per_week=params.days_per_week,
    )

    width = len(str(params.n_courses))
    courses = []
    sections = []
    for k in range(1, params.n_courses + 1):
        cid = f"c{k:0{width}d}"
        kind = _weighted(rng, tuple(zip((SMALL, MEDIUM, LARGE), params.course_mix)))
        year = rng.choice(YEARS)
        groups = frozenset(rng.sample(RESEARCH_GROUPS, rng.randint(2, 3)))
        lo, hi = params.tmm_range
        tmm = round(rng.triangular(lo, hi, params.tmm_mode), 2)
        pattern = _weighted(rng, PATTERN_WEIGHTS)
        course_secs = _course_sections(rng, params, cid, kind)
        courses.append(Course(
            id=cid,
            year=year,
            research_groups=groups,
            tmm=tmm,
            weeks_pattern=pattern,
            sections=tuple(sec.id for sec in course_secs),
        ))
        sections.extend(course_secs)

    twidth = len(str(params.n_tutors))
    tutors = []
    for k in range(1, params.n_tutors + 1):
        tid = f"t{k:0{twidth}d}"
        groups = _tutor_groups(rng, params.compatibility_rate)
        held = rng.randint(*params.skills_per_tutor_range)
        skills = frozenset(rng.sample(SKILLS, held))
        if rng.random() < FULL_YEARS_RATE:
            years = frozenset(YEARS)
        else:
            years = frozenset(rng.sample(YEARS, 3))
        max_hours = round(rng.uniform(*params.hours_range), 1)
        if rng.random() < params.min_hours_zero_rate:
            min_hours = 0.0
        else:
            min_hours = round(rng.uniform(0.0, max_hours / 2.0), 1)
        max_courses = params.max_courses
        roll = rng.random()
        if roll < 0.10 and max_courses > 1:
            max_courses -= 1
        elif roll > 0.95:
            max_courses += 1

        busy: tuple[BusySlot, ...] = ()
        if rng.random() < BUSY_TUTOR_RATE:
            cells = rng.randint(1, 3)
            seen = set()
            for _ in range(cells):
                cell = (rng.randrange(params.days_per_week),
                        rng.randrange(params.slots_per_day))
                if cell in seen:
                    continue
                seen.add(cell)
                busy += (BusySlot(day=cell[0], slot=cell[1],
                                  location=rng.choices(
                                      list(range(params.n_locations)),
                                      weights=list(params.location_weights))[0]),)

        tutors.append(Tutor(
            id=tid,
            research_groups=groups,
            skills=skills,
            allowed_years=years,
            min_hours=min_hours,
            max_hours=max_hours,
            min_courses=0,
            max_courses=max_courses,
            preferred_courses=frozenset(),
            busy=busy,
        ))

    # Preferences come last so that two runs differing only in
    # max_preferences agree on everything else; the shared count draw
    # makes a larger cap a superset of a smaller one, seed for seed.
    for i, tutor in enumerate(tutors):
        compatible = [
            course.id for course in courses
            if (tutor.research_groups & course.research_groups)
            and course.year in tutor.allowed_years
        ]
        raw = rng.random()
        order = rng.sample(compatible, len(compatible))
        want = min(int(raw * (params.max_preferences + 1)),
                   params.max_preferences, len(order))
        tutors[i] = replace(tutor, preferred_courses=frozenset(order[:want]))

    return Instance(
        grid=grid,
        tutors=tuple(tutors),
        courses=tuple(courses),
        sections=tuple(sections),
        locations=params.n_locations,
        name=f"gen-{params.n_tutors}x{params.n_courses}-seed{params.seed}",
    )


def compatibility_share(instance: Instance) -> float:
    """Fraction of tutor-course pairs passing the course-level gate."""
    hits = 0
    total = len(instance.tutors) * len(instance.courses)
    for tutor in instance.tutors:
        for course in instance.courses:
            if (tutor.research_groups & course.research_groups) \
                    and course.year in tutor.allowed_years:
                hits += 1
    return hits / total if total else 0.0


def location_share(instance: Instance, location: int = 0) -> float:
    """Fraction of sections held at the given location."""
    if not instance.sections:
        return 0.0
    at = sum(1 for sec in instance.sections if sec.location == location)
    return at / len(instance.sections)
