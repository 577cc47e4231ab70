"""The bundled toy fixture carries several demos; pin the properties they rely on.

fixtures/toy.json: six single-section courses, one eligible tutor each plus a
fully-eligible spare.  Preference counts run 1..6 so the satisfaction
histogram shows every bucket, and the optimum is unique so the solve demo is
deterministic.
"""

from pathlib import Path

import pytest

from tap.configs import Edit, apply_edits, enumerate_all
from tap.ilp import build_model
from tap.io import read_instance
from tap.report import satisfaction_stats
from tap.solve import SolverParams, brute_force, resolve_with_min_changes, solve

FIXTURE = Path(__file__).resolve().parents[1] / "fixtures" / "toy.json"

EXPECTED = frozenset((f"p{k}", f"c{k}.g1") for k in range(1, 7))


@pytest.fixture(scope="module")
def inst():
    return read_instance(FIXTURE.read_text())


@pytest.fixture(scope="module")
def solved(inst):
    sol = solve(inst, params=SolverParams(time_limit_seconds=30.0))
    assert sol.status == "optimal"
    return sol


def test_unique_optimum(inst, solved):
    assert solved.objective == pytest.approx(3.5)
    assert solved.assignments == EXPECTED
    oracle = brute_force(build_model(inst, enumerate_all(inst)))
    assert oracle.objective == pytest.approx(solved.objective)


def test_histogram_covers_buckets_one_through_six(inst, solved):
    stats = satisfaction_stats(inst, enumerate_all(inst), solved)
    assert sorted(stats.histogram) == [1, 2, 3, 4, 5, 6]
    assert stats.histogram[1].share == pytest.approx(1.0)
    for m in range(2, 7):
        assert stats.histogram[m].share == pytest.approx(0.5)


def test_forbid_then_min_change_moves_exactly_two(inst, solved):
    configs = apply_edits(
        enumerate_all(inst),
        [Edit(tutor_id="p3", course_id="c3", action="forbid")],
    )
    model = build_model(inst, configs)
    redone = resolve_with_min_changes(
        model, solved, params=SolverParams(time_limit_seconds=30.0)
    )
    assert redone.status == "optimal"
    delta = redone.assignments ^ solved.assignments
    assert delta == {("p3", "c3.g1"), ("spare", "c3.g1")}
