"""Exact optimization suite for assigning tutors to workshop configurations."""

from .configs import (
    Configuration,
    ConfigurationSet,
    active_at,
    apply_edits,
    derive_tutor_sets,
    enumerate_all,
    enumerate_configurations,
)
from .io import (
    SchemaError,
    read_instance,
    read_solution,
    solution_csv,
    write_instance,
    write_solution,
)
from .model import (
    Course,
    Instance,
    Section,
    Solution,
    TimeGrid,
    Tutor,
    Validator,
    Violation,
    validate_solution,
)

__version__ = "0.1.0"

__all__ = [
    "Configuration",
    "ConfigurationSet",
    "Course",
    "Instance",
    "SchemaError",
    "Section",
    "Solution",
    "TimeGrid",
    "Tutor",
    "Validator",
    "Violation",
    "active_at",
    "apply_edits",
    "derive_tutor_sets",
    "enumerate_all",
    "enumerate_configurations",
    "read_instance",
    "read_solution",
    "solution_csv",
    "validate_solution",
    "write_instance",
    "write_solution",
    "__version__",
]
