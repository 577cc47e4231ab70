"""HTTP facade for the operator loop: upload, solve, edit, re-solve, diff.

Solves run as background jobs because realistic instances take minutes: the
solve endpoints enqueue and return a job id immediately, and the client polls
the job for progress snapshots (incumbent, bound, node count).  Jobs on the
same instance run one at a time in submission order; jobs on different
instances run concurrently up to the worker budget and share nothing.

An infeasible model is a result, not a failure: the job completes normally
and its payload carries the solver status.  The failed state is reserved for
genuine breakage (a bug, not a verdict).  Every solution with an assignment
is re-checked by the independent validator before it leaves the process.
"""

from __future__ import annotations

import itertools
import json
import queue
import threading
import time
from dataclasses import dataclass, field
from typing import Optional

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from .configs import ConfigurationSet, Edit, EditConflictError, apply_edits, enumerate_all
from .ilp import build_model
from .io import SchemaError, read_instance, solution_csv, write_instance, write_solution
from .model import (
    STATUS_OPTIMAL,
    STATUS_TIMEOUT_INCUMBENT,
    Instance,
    InstanceError,
    Solution,
    StructuralError,
    Validator,
)
from .solve import SolverParams, resolve_with_min_changes, solve_model

FEASIBLE_STATUSES = frozenset({STATUS_OPTIMAL, STATUS_TIMEOUT_INCUMBENT})

JOB_QUEUED = "queued"
JOB_RUNNING = "running"
JOB_DONE = "done"
JOB_FAILED = "failed"


@dataclass
class Job:
    id: str
    kind: str  # "solve" | "resolve-min-change"
    instance_id: str
    state: str = JOB_QUEUED
    progress: dict = field(default_factory=dict)
    solution_id: Optional[str] = None
    status: Optional[str] = None
    detail: Optional[str] = None
    started: float = 0.0

    def view(self) -> dict:
        out = {
            "id": self.id,
            "kind": self.kind,
            "instance_id": self.instance_id,
            "state": self.state,
            "progress": dict(self.progress),
        }
        if self.solution_id is not None:
            out["solution_id"] = self.solution_id
        if self.status is not None:
            out["status"] = self.status
        if self.detail is not None:
            out["detail"] = self.detail
        return out


@dataclass
class _StoredInstance:
    instance: Instance
    configs: ConfigurationSet


@dataclass
class _StoredSolution:
    solution: Solution
    instance_id: str


class Store:
    """All server state, with serialized mutations.

    One worker thread per instance, started lazily, drains that instance's
    FIFO job queue; a shared semaphore caps how many solve at once.  Read
    paths only take the lock long enough to copy a reference out.
    """

    def __init__(self, worker_count: int = 2,
                 default_params: Optional[SolverParams] = None) -> None:
        self._lock = threading.Lock()
        self._ids = itertools.count(1)
        self.instances: dict[str, _StoredInstance] = {}
        self.solutions: dict[str, _StoredSolution] = {}
        self.jobs: dict[str, Job] = {}
        self.edits: dict[str, tuple[Edit, ...]] = {}  # solution id -> staged
        self.default_params = default_params or SolverParams()
        self._queues: dict[str, queue.Queue] = {}
        self._workers = threading.Semaphore(max(1, worker_count))

    def fresh_id(self, prefix: str) -> str:
        with self._lock:
            return f"{prefix}{next(self._ids)}"

    def add_instance(self, instance: Instance) -> str:
        iid = self.fresh_id("i")
        stored = _StoredInstance(instance, enumerate_all(instance))
        with self._lock:
            self.instances[iid] = stored
        return iid

    def add_solution(self, instance_id: str, solution: Solution) -> str:
        sid = self.fresh_id("s")
        with self._lock:
            self.solutions[sid] = _StoredSolution(solution, instance_id)
        return sid

    def enqueue(self, job: Job, work) -> None:
        with self._lock:
            self.jobs[job.id] = job
            q = self._queues.get(job.instance_id)
            if q is None:
                q = queue.Queue()
                self._queues[job.instance_id] = q
                threading.Thread(
                    target=self._drain, args=(q,), daemon=True
                ).start()
        q.put((job, work))

    def _drain(self, q: queue.Queue) -> None:
        while True:
            job, work = q.get()
            with self._workers:
                job.state = JOB_RUNNING
                job.started = time.monotonic()
                try:
                    solution = work(job)
                except Exception as exc:  # a verdict never lands here
                    job.detail = str(exc)
                    job.state = JOB_FAILED
                else:
                    job.solution_id = self.add_solution(
                        job.instance_id, solution
                    )
                    job.status = solution.status
                    job.state = JOB_DONE


def _error(status: int, kind: str, **extra) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": kind, **extra})


def _not_found(what: str, key: str) -> JSONResponse:
    return _error(404, "not-found", detail=f"unknown {what} {key}")


def _tutor_shares(instance: Instance, configs: ConfigurationSet,
                  solution: Solution) -> dict[str, float]:
    held: dict[str, set[str]] = {t.id: set() for t in instance.tutors}
    for tid, cid in solution.assignments:
        held[tid].add(configs.config(cid).course_id)
    out = {}
    for tutor in instance.tutors:
        cap = min(tutor.preference_count, tutor.max_courses)
        if cap >= 1:
            out[tutor.id] = len(held[tutor.id] & tutor.preferred_courses) / cap
    return out


def _parse_edits(body):
    """Turn the request body into Edit objects, reporting paths on bad shape."""
    if not isinstance(body, dict):
        raise SchemaError("$", "body must be an object")
    edits_raw = body.get("edits")
    if not isinstance(edits_raw, list):
        raise SchemaError("$.edits", "must be a list of edits")
    out = []
    for k, e in enumerate(edits_raw):
        path = f"$.edits[{k}]"
        if not isinstance(e, dict):
            raise SchemaError(path, "must be an object")
        unknown = set(e) - {"tutor_id", "course_id", "action", "section_ids"}
        if unknown:
            raise SchemaError(path, f"unexpected field {sorted(unknown)[0]!r}")
        for name in ("tutor_id", "course_id", "action"):
            if not isinstance(e.get(name), str):
                raise SchemaError(f"{path}.{name}", "must be a string")
        if e["action"] not in ("force", "forbid"):
            raise SchemaError(f"{path}.action", "must be 'force' or 'forbid'")
        section_ids = e.get("section_ids")
        if section_ids is not None:
            if (not isinstance(section_ids, list)
                    or not all(isinstance(s, str) for s in section_ids)):
                raise SchemaError(f"{path}.section_ids",
                                  "must be a list of section ids")
            section_ids = frozenset(section_ids)
        out.append(Edit(tutor_id=e["tutor_id"], course_id=e["course_id"],
                        action=e["action"], section_ids=section_ids))
    return tuple(out)


def create_app(worker_count: int = 2,
               default_params: Optional[SolverParams] = None) -> FastAPI:
    """Assemble the HTTP app around a fresh store."""
    app = FastAPI(title="tutor allocation service")
    store = Store(worker_count=worker_count, default_params=default_params)
    app.state.store = store

    def _solver_params(body) -> SolverParams:
        limit = store.default_params.time_limit_seconds
        if isinstance(body, dict) and "time_limit_seconds" in body:
            limit = float(body["time_limit_seconds"])
        return SolverParams(
            time_limit_seconds=limit,
            absolute_gap_tolerance=store.default_params.absolute_gap_tolerance,
        )

    def _progress_hook(job: Job):
        def hook(nodes: int, incumbent: float, bound: float) -> None:
            job.progress = {
                "nodes": nodes,
                "incumbent": incumbent,
                "bound": bound,
                "elapsed": time.monotonic() - job.started,
            }
        return hook

    @app.post("/instances", status_code=201)
    async def upload_instance(request: Request):
        text = (await request.body()).decode("utf-8", errors="replace")
        try:
            instance = read_instance(text)
        except SchemaError as exc:
            return _error(400, "schema", path=exc.path, reason=exc.reason)
        except InstanceError as exc:
            return _error(400, "invalid-instance", path="$", reason=str(exc))
        iid = store.add_instance(instance)
        return {"id": iid, "name": instance.name,
                "n_tutors": len(instance.tutors),
                "n_courses": len(instance.courses)}

    @app.get("/instances/{iid}")
    def get_instance(iid: str):
        stored = store.instances.get(iid)
        if stored is None:
            return _not_found("instance", iid)
        return Response(content=write_instance(stored.instance),
                        media_type="application/json")

    @app.post("/instances/{iid}/solve", status_code=202)
    async def solve_instance(iid: str, request: Request):
        stored = store.instances.get(iid)
        if stored is None:
            return _not_found("instance", iid)
        body = await request.json() if await request.body() else {}
        params = _solver_params(body)
        job = Job(id=store.fresh_id("j"), kind="solve", instance_id=iid)

        def work(job: Job) -> Solution:
            model = build_model(stored.instance, stored.configs)
            return solve_model(model, params=params,
                               progress=_progress_hook(job))

        store.enqueue(job, work)
        return {"job_id": job.id}

    @app.get("/jobs/{jid}")
    def get_job(jid: str):
        job = store.jobs.get(jid)
        if job is None:
            return _not_found("job", jid)
        return job.view()

    @app.get("/solutions/{sid}/diff/{other}")
    def diff_solutions(sid: str, other: str):
        a = store.solutions.get(sid)
        b = store.solutions.get(other)
        if a is None:
            return _not_found("solution", sid)
        if b is None:
            return _not_found("solution", other)
        if a.instance_id != b.instance_id:
            return _error(400, "different-instances",
                          reason="solutions answer different instances")
        stored = store.instances[a.instance_id]
        added = sorted(b.solution.assignments - a.solution.assignments)
        removed = sorted(a.solution.assignments - b.solution.assignments)
        before = _tutor_shares(stored.instance, stored.configs, a.solution)
        after = _tutor_shares(stored.instance, stored.configs, b.solution)
        deltas = [
            {"tutor_id": tid, "before": before[tid], "after": after[tid],
             "delta": after[tid] - before[tid]}
            for tid in sorted(before)
            if abs(after[tid] - before[tid]) > 1e-12
        ]

        def as_obj(pairs):
            return [
                {"tutor_id": t, "configuration_id": c,
                 "course_id": stored.configs.config(c).course_id}
                for t, c in pairs
            ]

        return {
            "added": as_obj(added),
            "removed": as_obj(removed),
            "distance": len(added) + len(removed),
            "satisfaction_deltas": deltas,
        }

    @app.get("/solutions/{sid}")
    def get_solution(sid: str):
        key, _, suffix = sid.partition(".")
        stored = store.solutions.get(key)
        if stored is None or suffix not in ("", "json", "csv"):
            return _not_found("solution", sid)
        inst = store.instances[stored.instance_id]
        if stored.solution.status in FEASIBLE_STATUSES:
            violations = Validator(inst.instance, inst.configs).validate(
                stored.solution
            )
            if violations:
                return _error(500, "validation",
                              reason=str(violations[0]))
        if suffix == "csv":
            return Response(
                content=solution_csv(inst.instance, inst.configs,
                                     stored.solution),
                media_type="text/csv",
            )
        return Response(content=write_solution(stored.solution),
                        media_type="application/json")

    @app.post("/solutions/{sid}/edits")
    async def stage_edits(sid: str, request: Request):
        stored = store.solutions.get(sid)
        if stored is None:
            return _not_found("solution", sid)
        inst = store.instances[stored.instance_id]
        try:
            body = json.loads((await request.body()).decode("utf-8",
                                                            errors="replace"))
        except json.JSONDecodeError as exc:
            return _error(400, "schema", path="$",
                          reason=f"not valid JSON: {exc}")
        try:
            edits = _parse_edits(body)
            apply_edits(inst.configs, edits)  # static contradiction check
        except SchemaError as exc:
            return _error(400, "schema", path=exc.path, reason=exc.reason)
        except EditConflictError as exc:
            return _error(409, "conflict", reason=str(exc))
        except StructuralError as exc:
            return _not_found("id in edit", str(exc))
        store.edits[sid] = edits
        return {
            "solution_id": sid,
            "edits": [
                {
                    "tutor_id": e.tutor_id,
                    "course_id": e.course_id,
                    "action": e.action,
                    **({"section_ids": sorted(e.section_ids)}
                       if e.section_ids is not None else {}),
                }
                for e in edits
            ],
        }

    @app.post("/solutions/{sid}/resolve", status_code=202)
    async def resolve_min_change(sid: str, request: Request):
        stored = store.solutions.get(sid)
        if stored is None:
            return _not_found("solution", sid)
        edits = store.edits.get(sid)
        if edits is None:
            return _error(400, "no-edits",
                          reason="stage an edit set before re-solving")
        inst = store.instances[stored.instance_id]
        body = await request.json() if await request.body() else {}
        params = _solver_params(body)
        reference = stored.solution
        job = Job(id=store.fresh_id("j"), kind="resolve-min-change",
                  instance_id=stored.instance_id)

        def work(job: Job) -> Solution:
            edited = apply_edits(inst.configs, edits)
            model = build_model(inst.instance, edited)
            return resolve_with_min_changes(model, reference, params=params,
                                            progress=_progress_hook(job))

        store.enqueue(job, work)
        return {"job_id": job.id}

    return app
