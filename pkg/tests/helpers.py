"""Shared fixture builders for the test suite.

Kept deliberately dumb: explicit ids, explicit slots, no randomness unless a
test asks for it.  Randomized tests draw through the public generator so that
seeds stay meaningful.
"""

from __future__ import annotations

from tap.model import (
    BusySlot,
    Course,
    ForcedAssignment,
    Instance,
    Section,
    TimeGrid,
    Tutor,
)

GROUPS = ("g1", "g2")


def grid(days=5, slots=8, travel_gap=2, days_per_week=5, slot_minutes=30):
    return TimeGrid(
        days=days,
        slots_per_day=slots,
        slot_minutes=slot_minutes,
        travel_gap_slots=travel_gap,
        days_per_week=days_per_week,
    )


def run_sections(course_id, n, day=0, first_slot=0, length=2, location=0, n_s=1):
    """n back-to-back sections of one course on one day."""
    out = []
    slot = first_slot
    for k in range(n):
        out.append(
            Section(
                id=f"{course_id}_s{k + 1}",
                course_id=course_id,
                day=day,
                start_slot=slot,
                end_slot=slot + length - 1,
                location=location,
                required_tutors=n_s,
            )
        )
        slot += length
    return out


def course(course_id, sections, year=1, groups=GROUPS, tmm=2.0, pattern="every-week"):
    return Course(
        id=course_id,
        year=year,
        research_groups=groups,
        tmm=tmm,
        weeks_pattern=pattern,
        sections=tuple(s.id for s in sections),
    )


def tutor(tutor_id, prefers=(), max_hours=200.0, max_courses=3, years=(1, 2, 3, 4, 5),
          groups=GROUPS, skills=(), min_hours=0.0, min_courses=0, forced=(),
          forbidden=(), busy=()):
    return Tutor(
        id=tutor_id,
        research_groups=groups,
        skills=skills,
        allowed_years=years,
        min_hours=min_hours,
        max_hours=max_hours,
        min_courses=min_courses,
        max_courses=max_courses,
        preferred_courses=prefers,
        forced_course_sections=tuple(forced),
        forbidden_courses=forbidden,
        busy=busy,
    )


def instance(tutors, courses, sections, g=None, locations=1, name="fixture"):
    return Instance(
        grid=g or grid(),
        tutors=tuple(tutors),
        courses=tuple(courses),
        sections=tuple(sections),
        locations=locations,
        name=name,
    )


def one_course_instance(n_sections=3, n_tutors=2, prefers_all=True, n_s=1, **tutor_kw):
    secs = run_sections("A", n_sections, n_s=n_s)
    c = course("A", secs)
    tutors = [
        tutor(f"t{i + 1}", prefers=("A",) if prefers_all else (), **tutor_kw)
        for i in range(n_tutors)
    ]
    return instance(tutors, [c], secs)
