"""JSON text for instances and solutions, and the operator-facing CSV.

Instances travel as JSON so an administrator can audit them by eye and a
schema checker can reject malformed files with a pointer to the offending
field.  The writer emits a canonical form: object keys sorted, record lists
sorted by id, set-valued fields sorted; same data, same bytes.  Reading a
canonical file and writing the result reproduces it exactly.

Schema checking happens before construction, so error messages carry the
JSON path of the problem rather than a Python traceback; cross-reference
problems (a section naming a course that does not exist) surface afterwards
as :class:`~tap.model.InstanceError` from the domain constructors.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
from functools import lru_cache
from importlib import resources

import jsonschema

from .configs import ConfigurationSet
from .model import (
    BusySlot,
    Course,
    ForcedAssignment,
    Instance,
    Section,
    Solution,
    TapError,
    TimeGrid,
    Tutor,
)

SOLUTION_CSV_HEADER = ("tutor_id", "course_id", "section_ids",
                       "scaled_hours", "preferred")


class SchemaError(TapError):
    """The text does not conform to the published JSON schema.

    ``path`` points at the offending element in JSONPath notation
    ("$.tutors[2].max_hours"); ``reason`` says what is wrong with it.
    """

    def __init__(self, path: str, reason: str) -> None:
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


@lru_cache(maxsize=None)
def _validator(name: str) -> jsonschema.Draft202012Validator:
    text = resources.files("tap").joinpath(f"schema/{name}").read_text()
    schema = json.loads(text)
    jsonschema.Draft202012Validator.check_schema(schema)
    return jsonschema.Draft202012Validator(schema)


def _checked(text: str, schema_name: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"not valid JSON: {exc}") from exc
    errors = sorted(
        _validator(schema_name).iter_errors(doc),
        key=lambda e: (len(e.json_path), e.json_path),
    )
    if errors:
        best = jsonschema.exceptions.best_match(errors)
        raise SchemaError(best.json_path, best.message)
    return doc


# ---------------------------------------------------------------------------
# instances

def read_instance(text: str) -> Instance:
    """Parse and schema-check JSON text into an Instance."""
    doc = _checked(text, "instance.schema.json")
    g = doc["grid"]
    grid = TimeGrid(
        days=g["days"],
        slots_per_day=g["slots_per_day"],
        slot_minutes=g["slot_minutes"],
        travel_gap_slots=g.get("travel_gap_slots", 2),
        days_per_week=g.get("days_per_week", 5),
    )
    tutors = [
        Tutor(
            id=t["id"],
            research_groups=frozenset(t.get("research_groups", ())),
            skills=frozenset(t.get("skills", ())),
            allowed_years=frozenset(t.get("allowed_years", ())),
            min_hours=float(t.get("min_hours", 0.0)),
            max_hours=float(t.get("max_hours", 0.0)),
            min_courses=t.get("min_courses", 0),
            max_courses=t.get("max_courses", 0),
            preferred_courses=frozenset(t.get("preferred_courses", ())),
            forced_course_sections=tuple(
                ForcedAssignment(f["course_id"], frozenset(f["section_ids"]))
                for f in t.get("forced_course_sections", ())
            ),
            forbidden_courses=frozenset(t.get("forbidden_courses", ())),
            busy=frozenset(
                BusySlot(b["day"], b["slot"], b["location"])
                for b in t.get("busy", ())
            ),
        )
        for t in doc["tutors"]
    ]
    courses = [
        Course(
            id=c["id"],
            year=c["year"],
            research_groups=frozenset(c["research_groups"]),
            tmm=float(c["tmm"]),
            weeks_pattern=c.get("weeks_pattern", "every-week"),
            sections=tuple(c["sections"]),
        )
        for c in doc["courses"]
    ]
    sections = [
        Section(
            id=s["id"],
            course_id=s["course_id"],
            day=s["day"],
            start_slot=s["start_slot"],
            end_slot=s["end_slot"],
            location=s.get("location", 0),
            required_skills=frozenset(s.get("required_skills", ())),
            required_tutors=s.get("required_tutors", 1),
            supertutor_id=s.get("supertutor_id"),
        )
        for s in doc["sections"]
    ]
    return Instance(
        grid=grid,
        tutors=tuple(tutors),
        courses=tuple(courses),
        sections=tuple(sections),
        locations=doc.get("locations", 1),
        name=doc.get("name", ""),
    )


def write_instance(instance: Instance) -> str:
    """Render an Instance as canonical JSON text."""
    doc = {
        "name": instance.name,
        "locations": instance.locations,
        "grid": {
            "days": instance.grid.days,
            "slots_per_day": instance.grid.slots_per_day,
            "slot_minutes": instance.grid.slot_minutes,
            "travel_gap_slots": instance.grid.travel_gap_slots,
            "days_per_week": instance.grid.days_per_week,
        },
        "tutors": [
            {
                "id": t.id,
                "research_groups": sorted(t.research_groups),
                "skills": sorted(t.skills),
                "allowed_years": sorted(t.allowed_years),
                "min_hours": t.min_hours,
                "max_hours": t.max_hours,
                "min_courses": t.min_courses,
                "max_courses": t.max_courses,
                "preferred_courses": sorted(t.preferred_courses),
                "forced_course_sections": sorted(
                    (
                        {
                            "course_id": f.course_id,
                            "section_ids": sorted(f.section_ids),
                        }
                        for f in t.forced_course_sections
                    ),
                    key=lambda f: (f["course_id"], f["section_ids"]),
                ),
                "forbidden_courses": sorted(t.forbidden_courses),
                "busy": [
                    {"day": b.day, "slot": b.slot, "location": b.location}
                    for b in sorted(
                        t.busy, key=lambda b: (b.day, b.slot, b.location)
                    )
                ],
            }
            for t in sorted(instance.tutors, key=lambda t: t.id)
        ],
        "courses": [
            {
                "id": c.id,
                "year": c.year,
                "research_groups": sorted(c.research_groups),
                "tmm": c.tmm,
                "weeks_pattern": c.weeks_pattern,
                "sections": sorted(c.sections),
            }
            for c in sorted(instance.courses, key=lambda c: c.id)
        ],
        "sections": [
            {
                "id": s.id,
                "course_id": s.course_id,
                "day": s.day,
                "start_slot": s.start_slot,
                "end_slot": s.end_slot,
                "location": s.location,
                "required_skills": sorted(s.required_skills),
                "required_tutors": s.required_tutors,
                "supertutor_id": s.supertutor_id,
            }
            for s in sorted(instance.sections, key=lambda s: s.id)
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# solutions

def _bound_out(value: float):
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


def _bound_in(value) -> float:
    if isinstance(value, str):
        return float(value)
    return float(value)


def read_solution(text: str) -> Solution:
    """Parse and schema-check JSON text into a Solution."""
    doc = _checked(text, "solution.schema.json")
    return Solution(
        status=doc["status"],
        assignments=frozenset(
            (a["tutor_id"], a["configuration_id"]) for a in doc["assignments"]
        ),
        objective=float(doc["objective"]),
        bound=_bound_in(doc["bound"]),
        solve_seconds=float(doc.get("solve_seconds", 0.0)),
        secondary=dict(doc.get("secondary", {})),
    )


def write_solution(solution: Solution) -> str:
    """Render a Solution as canonical JSON text."""
    doc = {
        "status": solution.status,
        "assignments": [
            {"tutor_id": t, "configuration_id": c}
            for t, c in solution.sorted_assignments()
        ],
        "objective": solution.objective,
        "bound": _bound_out(solution.bound),
        "solve_seconds": solution.solve_seconds,
        "secondary": solution.secondary,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def solution_csv(instance: Instance, configs: ConfigurationSet,
                 solution: Solution) -> str:
    """Flatten a solution into the roster CSV the admin team reads.

    One row per assignment: who, which course, which sections (semicolon
    separated), the scaled hours the bundle costs them, and whether they
    asked for the course.
    """
    out = _io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(SOLUTION_CSV_HEADER)
    rows = []
    for tid, cid in solution.assignments:
        cfg = configs.config(cid)
        course = instance.course(cfg.course_id)
        tutor = instance.tutor(tid)
        rows.append((
            tid,
            course.id,
            ";".join(sorted(cfg.section_ids)),
            repr(cfg.hours * course.tmm),
            "1" if course.id in tutor.preferred_courses else "0",
        ))
    writer.writerows(sorted(rows))
    return out.getvalue()
