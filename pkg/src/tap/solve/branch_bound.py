"""Exact 0/1 solve: presolve, branch and bound, and a brute-force oracle.

The search maximizes the preference objective exactly.  Objective values
are sums of unit fractions, so every attainable value is a multiple of
1/L for L the least common multiple of the per-tutor denominators; LP
bounds are rounded down to that grid before pruning, which makes "proved
optimal" an exact statement rather than a tolerance.

The brute-force path deliberately shares nothing with the search: it
applies the model's fixings and then enumerates every remaining 0/1
vector in numpy chunks.  Keeping it free of presolve and LP machinery is
what makes it usable as an oracle.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from ..ilp import IlpModel, LinearRow, ROW_TOL
from ..model import (
    STATUS_INFEASIBLE,
    STATUS_OPTIMAL,
    STATUS_TIMEOUT_INCUMBENT,
    STATUS_TIMEOUT_NO_INCUMBENT,
    Solution,
    TapError,
)
from .revised import solve_lp_revised
from .simplex import (
    LP_INFEASIBLE,
    LP_OPTIMAL,
    LP_UNBOUNDED,
    LinearProgram,
    solve_lp,
)

INT_TOL = 1e-7
BRANCHING_RULES = ("most-fractional", "first-fractional")

# beyond this size the dense tableau stops being the right tool
DENSE_ROW_LIMIT = 500
DENSE_CELL_LIMIT = 150_000


class SolveError(TapError):
    """The solver was driven outside its contract."""


@dataclass(frozen=True)
class SolverParams:
    time_limit_seconds: float = 3600.0
    absolute_gap_tolerance: float = 1e-6
    branching_rule: str = "most-fractional"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.branching_rule not in BRANCHING_RULES:
            raise SolveError(f"unknown branching rule {self.branching_rule!r}")
        if self.time_limit_seconds < 0 or self.absolute_gap_tolerance < 0:
            raise SolveError("limits must be nonnegative")


@dataclass(frozen=True)
class DiffObjective:
    """Re-solve target: stay close to a reference assignment."""

    reference: Solution
    mode: str = "min-changes"

    def __post_init__(self) -> None:
        if self.mode != "min-changes":
            raise SolveError(f"unknown diff mode {self.mode!r}")


# ---------------------------------------------------------------------------
# presolve


@dataclass
class _Presolved:
    kept: list[int]                      # original index per reduced column
    fixed: dict[int, int]                # original index -> 0/1
    rows: list[LinearRow]                # reindexed to reduced columns
    infeasible_row: str | None = None


def presolve(model: IlpModel) -> _Presolved:
    """Shrink the model without changing its feasible set.

    Substitutes fixings into rows, fixes to zero any variable whose
    coefficient alone overshoots a <= or = right side, flags rows no 0/1
    point can satisfy, and removes duplicate and dominated rows.  All
    reductions happen solver-side; the model object itself stays intact.
    """
    n = len(model.variables)
    fixed: dict[int, int] = {}
    for idx, value in model.fixings:
        if fixed.get(idx, value) != value:
            return _Presolved([], dict(model.fixings), [], "conflicting fixings")
        fixed[idx] = value

    rows = [(row.name, row.sense, row.rhs, dict(row.coeffs))
            for row in model.constraints]

    changed = True
    while changed:
        changed = False
        next_rows = []
        for name, sense, rhs, coeffs in rows:
            live = {}
            shift = 0.0
            for j, c in coeffs.items():
                v = fixed.get(j)
                if v is None:
                    live[j] = c
                elif v == 1:
                    shift += c
            rhs_eff = rhs - shift
            pos = sum(c for c in live.values() if c > 0)
            neg = sum(c for c in live.values() if c < 0)
            # rows nothing can violate vanish
            if sense == "<=" and pos <= rhs_eff + ROW_TOL:
                continue
            if sense == ">=" and neg >= rhs_eff - ROW_TOL:
                continue
            if sense == "=" and abs(pos - rhs_eff) <= ROW_TOL \
                    and abs(neg - rhs_eff) <= ROW_TOL:
                continue
            # rows nothing can satisfy end the story
            if sense in ("<=", "=") and neg > rhs_eff + ROW_TOL:
                return _Presolved([], fixed, [], name)
            if sense in (">=", "=") and pos < rhs_eff - ROW_TOL:
                return _Presolved([], fixed, [], name)
            # a single coefficient overshooting the right side pins its
            # variable at zero (travel rows with weight two die here)
            if sense in ("<=", "="):
                for j, c in live.items():
                    if c > 0 and c > rhs_eff + ROW_TOL and j not in fixed:
                        fixed[j] = 0
                        changed = True
            next_rows.append((name, sense, rhs_eff, live))
        rows = next_rows

    # duplicates: same support, coefficients, sense, right side
    seen = {}
    unique_rows = []
    for name, sense, rhs, coeffs in rows:
        key = (sense, rhs, tuple(sorted(coeffs.items())))
        if key in seen:
            continue
        seen[key] = name
        unique_rows.append((name, sense, rhs, coeffs))

    # domination among <= rows with nonnegative coefficients: a row implied
    # by a kept row with superset support, no smaller coefficients, and no
    # larger right side adds nothing
    by_var: dict[int, list[int]] = {}
    le_rows = [k for k, r in enumerate(unique_rows) if r[1] == "<="
               and all(c >= 0 for c in r[3].values())]
    for k in le_rows:
        for j in unique_rows[k][3]:
            by_var.setdefault(j, []).append(k)
    dropped = set()
    for k in le_rows:
        name, sense, rhs, coeffs = unique_rows[k]
        if not coeffs:
            continue
        anchor = min(coeffs, key=lambda j: len(by_var[j]))
        for other in by_var[anchor]:
            if other == k or other in dropped:
                continue
            oname, osense, orhs, ocoeffs = unique_rows[other]
            if len(ocoeffs) < len(coeffs) or orhs > rhs + ROW_TOL:
                continue
            if all(ocoeffs.get(j, 0.0) >= c - ROW_TOL
                   for j, c in coeffs.items()):
                dropped.add(k)
                break

    kept_vars = [j for j in range(n) if j not in fixed]
    pos_of = {j: p for p, j in enumerate(kept_vars)}
    out_rows = [
        LinearRow(
            name=name, sense=sense, rhs=rhs,
            coeffs=tuple(sorted((pos_of[j], c) for j, c in coeffs.items())),
        )
        for k, (name, sense, rhs, coeffs) in enumerate(unique_rows)
        if k not in dropped
    ]
    return _Presolved(kept=kept_vars, fixed=fixed, rows=out_rows)


# ---------------------------------------------------------------------------
# branch and bound


class _Node:
    __slots__ = ("changes", "basis", "at_upper", "bound_k")

    def __init__(self, changes, basis, at_upper, bound_k):
        self.changes = changes          # tuple of (reduced var, value) down the path
        self.basis = basis
        self.at_upper = at_upper
        self.bound_k = bound_k          # inherited integer-scaled bound


def _denominator_lcm(coeffs: np.ndarray) -> int:
    lcm = 1
    for c in coeffs:
        if c == 0.0:
            continue
        denom = round(1.0 / abs(c)) if abs(c) <= 1.0 else 1
        if denom < 1 or abs(abs(c) * denom - 1.0) > 1e-9:
            return 0  # not unit fractions; exact grid unavailable
        lcm = lcm * denom // math.gcd(lcm, denom)
        if lcm > 10_000_000:
            return 0  # grid too fine for safe float rounding
    return lcm


@dataclass
class _SearchResult:
    status: str
    x: np.ndarray | None
    bound: float
    nodes: int
    seconds: float


def _search(c: np.ndarray, rows: list[LinearRow], params: SolverParams,
            progress=None) -> _SearchResult:
    """Maximize c'x over 0/1 points satisfying the rows."""
    t0 = time.monotonic()
    deadline = t0 + params.time_limit_seconds
    n = c.size
    m = len(rows)

    scale = _denominator_lcm(c)
    c_int = None
    if scale:
        c_int = np.rint(c * scale).astype(np.int64)

    def exact_value(x01: np.ndarray) -> tuple[float, int]:
        chosen = np.flatnonzero(x01)
        value = math.fsum(float(c[j]) for j in chosen)
        k = int(c_int[chosen].sum()) if scale else 0
        return value, k

    def bound_k_of(z: float) -> int:
        return math.floor(z * scale + 1e-5) if scale else 0

    senses = tuple(row.sense for row in rows)
    rhs = np.array([row.rhs for row in rows])
    use_dense = m <= DENSE_ROW_LIMIT and m * n <= DENSE_CELL_LIMIT
    if use_dense:
        a = np.zeros((m, n))
        for i, row in enumerate(rows):
            for j, coeff in row.coeffs:
                a[i, j] = coeff
    else:
        data, ri, ci = [], [], []
        for i, row in enumerate(rows):
            for j, coeff in row.coeffs:
                ri.append(i)
                ci.append(j)
                data.append(coeff)
        a = sparse.csr_matrix((data, (ri, ci)), shape=(m, n))

    lo = np.zeros(n)
    hi = np.ones(n)

    def lp_solve(lo_v, hi_v, basis, at_upper):
        if use_dense:
            problem = LinearProgram(c=c, a=a, senses=senses, rhs=rhs,
                                    lower=lo_v, upper=hi_v)
            return solve_lp(problem, basis=basis, at_upper=at_upper)
        return solve_lp_revised(c, a, senses, rhs, lo_v, hi_v,
                                basis=basis, at_upper=at_upper)

    le = np.array([s == "<=" for s in senses])
    ge = np.array([s == ">=" for s in senses])
    eq = np.array([s == "=" for s in senses])

    def rows_hold(x01: np.ndarray) -> bool:
        if m == 0:
            return True
        act = a @ x01.astype(float)
        return bool(
            (act[le] <= rhs[le] + ROW_TOL).all()
            and (act[ge] >= rhs[ge] - ROW_TOL).all()
            and (np.abs(act[eq] - rhs[eq]) <= ROW_TOL).all()
        )

    # propagation tables: per-row support and coefficients, plus which rows
    # touch each variable; only all-positive rows participate
    sup_of = [np.array([j for j, _ in row.coeffs], dtype=np.intp)
              for row in rows]
    co_of = [np.array([coeff for _, coeff in row.coeffs]) for row in rows]
    all_pos = [bool((co > 0).all()) and co.size > 0 for co in co_of]
    rows_by_var: list[list[int]] = [[] for _ in range(n)]
    for i in range(m):
        if all_pos[i]:
            for j in sup_of[i]:
                rows_by_var[j].append(i)

    def propagate(lo_v: np.ndarray, hi_v: np.ndarray, seed_vars=None) -> bool:
        """Tighten bounds to a fixpoint; False when a row becomes hopeless.

        Sound only for rows with positive coefficients: a one saturating
        an equality or a <= right side zeroes its free siblings, and a
        >= or = row short on slack forces its indispensable members in.

        ``seed_vars`` restricts the initial queue to rows touching those
        variables.  Callers pass it when the incoming bounds are a
        fixpoint except for changes at the listed variables; untouched
        rows cannot fire first, and anything they learn later arrives
        through the queue, so the result is the same fixpoint a full
        scan would reach.
        """
        queued = np.zeros(m, dtype=bool)
        if seed_vars is None:
            pending = [i for i in range(m) if all_pos[i]]
            queued[pending] = True
        else:
            pending = []
            for j in seed_vars:
                for i in rows_by_var[j]:
                    if not queued[i]:
                        queued[i] = True
                        pending.append(i)
        head = 0
        while head < len(pending):
            i = pending[head]
            head += 1
            queued[i] = False
            sup = sup_of[i]
            co = co_of[i]
            lo_s = lo_v[sup]
            hi_s = hi_v[sup]
            ones = lo_s > 0.5
            free = (~ones) & (hi_s > 0.5)
            fixed_sum = float(co[ones].sum())
            free_sum = float(co[free].sum())
            sense = senses[i]
            r = rhs[i]
            changed: list[int] = []
            if sense in ("<=", "="):
                if fixed_sum > r + ROW_TOL:
                    return False
                residual = r - fixed_sum
                kill = free & (co > residual + ROW_TOL)
                if kill.any():
                    idx = sup[kill]
                    hi_v[idx] = 0.0
                    changed.extend(idx)
                    free = free & ~kill
                    free_sum = float(co[free].sum())
            if sense in (">=", "="):
                if fixed_sum + free_sum < r - ROW_TOL:
                    return False
                needed = r - fixed_sum
                if needed > ROW_TOL:
                    force = free & (free_sum - co < needed - ROW_TOL)
                    if force.any():
                        idx = sup[force]
                        lo_v[idx] = 1.0
                        changed.extend(idx)
            for j in changed:
                for k in rows_by_var[j]:
                    if not queued[k]:
                        queued[k] = True
                        pending.append(k)
        return True

    # lo and hi are shared by every node; the root propagation below and
    # any reduced-cost fixing later tighten them for the whole search
    if not propagate(lo, hi):
        return _SearchResult(STATUS_INFEASIBLE, None, -math.inf, 0,
                             time.monotonic() - t0)

    best_x = None
    best_value = -math.inf
    best_k = -(1 << 62)
    nodes = 0
    root_bound = math.inf
    root_lp = None          # last optimal root relaxation, kept for refixing
    root_z = math.inf
    stack = [_Node((), None, None, 1 << 62)]
    timed_out = False

    def open_bound() -> float:
        zs = [node.bound_k / scale if scale else math.inf for node in stack]
        return max(zs, default=-math.inf)

    def reduced_cost_fix(res, z: float) -> np.ndarray:
        """Pin variables no improving solution can move; returns them.

        At an optimum worth z, a nonbasic variable leaving its bound
        costs at least its reduced cost, so when that drop lands under
        the next grid value above the incumbent the variable can sit
        where it is for the rest of the search.  Tightens the shared
        bounds in place; only called once an incumbent exists.
        """
        d = res.reduced_costs
        if d is None or not scale or best_x is None:
            return np.empty(0, dtype=np.intp)
        needed = (best_k + 1) / scale - 1e-9
        in_b = np.zeros(n, dtype=bool)
        in_b[res.basis[res.basis < n]] = True
        up = res.at_upper[:n]
        free = hi > lo
        to_zero = free & ~in_b & ~up & (z + d < needed)
        to_one = free & ~in_b & up & (z - d < needed)
        hi[to_zero] = 0.0
        lo[to_one] = 1.0
        return np.flatnonzero(to_zero | to_one)

    def offer(x01: np.ndarray, z: float) -> None:
        nonlocal best_x, best_value, best_k
        value, k = exact_value(x01)
        if (scale and k > best_k) or (not scale and value > best_value):
            best_x = x01
            best_value = value
            best_k = k
            if progress is not None:
                progress(nodes=nodes, incumbent=best_value,
                         bound=min(root_bound, max(z, open_bound())))
            if root_lp is not None:
                fixed_now = reduced_cost_fix(root_lp, root_z)
                if fixed_now.size and not propagate(lo, hi,
                                                    seed_vars=fixed_now):
                    # the tightened bounds exclude every improving point,
                    # so whatever is still stacked proves nothing
                    stack.clear()

    def dive(res0, lo_from: np.ndarray, hi_from: np.ndarray) -> None:
        """Drive an LP point to integrality by rounding in rounds.

        Each round settles every free variable already integral at its
        current value (which keeps the point inside the bounds, so it
        costs nothing), then rounds the most fractional one and re-solves
        warm; when that rounding kills the relaxation the opposite value
        gets one try from the same snapshot.  Any 0/1 point that survives
        the rows becomes an incumbent.  Purely a heuristic: it gives up
        rather than backtrack further, and it never prunes.
        """
        lo_d = lo_from.copy()
        hi_d = hi_from.copy()
        basis, at_up = res0.basis, res0.at_upper
        x_lp = res0.x
        for _ in range(60):
            if time.monotonic() > deadline:
                return
            x = np.clip(x_lp, lo_d, hi_d)
            r = np.rint(x)
            frac = np.abs(x - r)
            free = hi_d > lo_d
            loose = free & (frac > INT_TOL)
            settle = free & ~loose
            if settle.any():
                idx = np.flatnonzero(settle)
                lo_d[idx] = r[idx]
                hi_d[idx] = r[idx]
                if not propagate(lo_d, hi_d, seed_vars=idx):
                    return
            if not loose.any():
                x01 = np.rint(lo_d).astype(np.int8)
                if rows_hold(x01):
                    offer(x01, root_bound)
                return
            j = int(np.argmin(np.where(loose, np.abs(x - 0.5), np.inf)))
            keep_lo = lo_d.copy()
            keep_hi = hi_d.copy()
            res = None
            for v in (r[j], 1.0 - r[j]):
                lo_d[:] = keep_lo
                hi_d[:] = keep_hi
                if lo_d[j] > v + 0.5 or hi_d[j] < v - 0.5:
                    continue
                lo_d[j] = hi_d[j] = v
                if not propagate(lo_d, hi_d, seed_vars=[j]):
                    continue
                cand = lp_solve(lo_d, hi_d, basis, at_up)
                if cand.status == LP_OPTIMAL:
                    res = cand
                    break
            if res is None:
                return
            if scale and bound_k_of(res.objective) <= best_k:
                return
            x_lp = res.x
            basis, at_up = res.basis, res.at_upper

    while stack:
        if time.monotonic() > deadline:
            timed_out = True
            break
        node = stack.pop()
        if scale and node.bound_k <= best_k:
            continue
        lo_v = lo.copy()
        hi_v = hi.copy()
        conflict = False
        for j, value in node.changes:
            # bounds fixed globally since the push can contradict the path
            if lo_v[j] > value + 0.5 or hi_v[j] < value - 0.5:
                conflict = True
                break
            lo_v[j] = hi_v[j] = float(value)
        if conflict:
            continue
        nodes += 1
        if not propagate(lo_v, hi_v,
                         seed_vars=[j for j, _ in node.changes]):
            continue
        if not (hi_v > lo_v).any():
            # propagation decided every variable; no LP needed
            x01 = np.rint(lo_v).astype(np.int8)
            if rows_hold(x01):
                offer(x01, node.bound_k / scale if scale else math.inf)
            continue
        res = lp_solve(lo_v, hi_v, node.basis, node.at_upper)
        if res.status == LP_INFEASIBLE:
            continue
        if res.status == LP_UNBOUNDED:
            raise SolveError("relaxation unbounded; the model is not 0/1")
        if res.status == LP_OPTIMAL:
            z = res.objective
            zk = bound_k_of(z)
        else:
            # iteration limit: the premature objective proves nothing, so
            # fall back on the bound inherited from the parent
            z = node.bound_k / scale if scale else math.inf
            zk = node.bound_k
        if nodes == 1:
            root_bound = z
            if res.status == LP_OPTIMAL:
                x0 = np.clip(res.x, lo_v, hi_v)
                if ((hi_v > lo_v)
                        & (np.abs(x0 - np.rint(x0)) > INT_TOL)).any():
                    dive(res, lo_v, hi_v)
                # alternate reduced-cost fixing with warm re-solves while
                # it keeps biting; each pass shrinks what branching faces
                # and pulls the root bound toward the incumbent
                closed = False
                for _ in range(20):
                    if (scale and zk <= best_k) \
                            or time.monotonic() > deadline:
                        break
                    fixed_now = reduced_cost_fix(res, z)
                    if not fixed_now.size:
                        break
                    if not propagate(lo, hi, seed_vars=fixed_now):
                        closed = True
                        break
                    res = lp_solve(lo, hi, res.basis, res.at_upper)
                    if res.status == LP_INFEASIBLE:
                        closed = True
                        break
                    if res.status != LP_OPTIMAL:
                        break
                    z = res.objective
                    zk = bound_k_of(z)
                    root_bound = z
                if closed:
                    # fixing only ever runs with an incumbent in hand, so
                    # a dead end here means best_x is optimal, not that
                    # the model is infeasible
                    continue
                if res.reduced_costs is not None:
                    root_lp, root_z = res, z
                lo_v = lo.copy()
                hi_v = hi.copy()
        if scale and zk <= best_k:
            continue
        if best_x is not None and z <= best_value + params.absolute_gap_tolerance:
            continue
        x = np.clip(res.x, lo_v, hi_v)
        frac = np.abs(x - np.rint(x))
        free = hi_v > lo_v
        fractional = free & (frac > INT_TOL)
        if not fractional.any():
            x01 = np.rint(x).astype(np.int8)
            if rows_hold(x01):
                offer(x01, z)
                continue
            # integral within tolerance yet off the rows: pin a variable
            # exactly and let the children settle it
            fractional = free
        if params.branching_rule == "most-fractional":
            score = np.where(fractional, np.abs(x - 0.5), np.inf)
            jstar = int(np.argmin(score))
        else:
            jstar = int(np.argmax(fractional))
        first = 1 if x[jstar] >= 0.5 else 0
        zk_child = min(zk, node.bound_k) if scale else 0
        # rounded child explored first: push it last
        stack.append(_Node(node.changes + ((jstar, 1 - first),),
                           res.basis, res.at_upper, zk_child))
        stack.append(_Node(node.changes + ((jstar, first),),
                           res.basis, res.at_upper, zk_child))
        if progress is not None and nodes % 64 == 0:
            progress(nodes=nodes, incumbent=(None if best_x is None else best_value),
                     bound=min(root_bound, max(z, open_bound())))

    seconds = time.monotonic() - t0
    if timed_out:
        bound = min(root_bound, open_bound())
        if best_x is None:
            return _SearchResult(STATUS_TIMEOUT_NO_INCUMBENT, None, bound,
                                 nodes, seconds)
        return _SearchResult(STATUS_TIMEOUT_INCUMBENT, best_x,
                             max(bound, best_value), nodes, seconds)
    if best_x is None:
        return _SearchResult(STATUS_INFEASIBLE, None, -math.inf, nodes, seconds)
    return _SearchResult(STATUS_OPTIMAL, best_x, best_value, nodes, seconds)


# ---------------------------------------------------------------------------
# public entry points


def _assignments_from(model: IlpModel, x_full: np.ndarray) -> frozenset:
    return frozenset(
        model.variables[j] for j in np.flatnonzero(x_full)
    )


def _expand(pre: _Presolved, n: int, x_reduced) -> np.ndarray:
    x_full = np.zeros(n, dtype=np.int8)
    for j, value in pre.fixed.items():
        x_full[j] = value
    if x_reduced is not None:
        for p, j in enumerate(pre.kept):
            x_full[j] = int(x_reduced[p])
    return x_full


def solve_model(model: IlpModel, params: SolverParams | None = None,
                progress=None, diff: DiffObjective | None = None) -> Solution:
    """Solve an assembled model to proven optimality (or timeout).

    With ``diff`` the search instead maximizes agreement with the
    reference assignment; the returned Solution still reports the
    preference objective, with change counts in ``secondary``.
    """
    params = params or SolverParams()
    t0 = time.monotonic()
    n = len(model.variables)
    pre = presolve(model)

    c_full = np.zeros(n)
    for j, coeff in model.objective:
        c_full[j] = coeff
    secondary: dict = {}
    if diff is None:
        c_search = c_full
    else:
        ref_pairs = set(diff.reference.assignments)
        c_search = np.zeros(n)
        hits = 0
        for j, pair in enumerate(model.variables):
            if pair in ref_pairs:
                c_search[j] = 1.0
                hits += 1
        secondary["unavailable"] = len(ref_pairs) - hits

    if pre.infeasible_row is not None:
        secondary["conflict"] = pre.infeasible_row
        return Solution(
            status=STATUS_INFEASIBLE,
            objective=0.0,
            bound=-math.inf,
            solve_seconds=time.monotonic() - t0,
            secondary=secondary,
        )

    c_reduced = c_search[pre.kept]
    result = _search(c_reduced, pre.rows, params, progress=progress)
    fixed_gain = math.fsum(
        float(c_search[j]) for j, v in pre.fixed.items() if v == 1
    )
    # nothing beats taking every positive coefficient; caps an unexplored bound
    trivial = float(np.clip(c_search, 0.0, None).sum())

    if result.x is None:
        status = result.status
        if status == STATUS_INFEASIBLE:
            bound = -math.inf
        else:
            bound = min(result.bound + fixed_gain, trivial)
        return Solution(
            status=status,
            objective=0.0,
            bound=bound,
            solve_seconds=time.monotonic() - t0,
            secondary=secondary,
        )

    x_full = _expand(pre, n, result.x)
    assignments = _assignments_from(model, x_full)
    objective = model.objective_value(assignments)
    if diff is None:
        bound = (objective if result.status == STATUS_OPTIMAL
                 else min(result.bound + fixed_gain, trivial))
    else:
        ref_pairs = set(diff.reference.assignments)
        chosen = set(assignments)
        changes = len(ref_pairs - chosen)
        agree_cap = min(result.bound + fixed_gain, trivial)
        secondary.update(
            changes=changes,
            distance=len(ref_pairs ^ chosen),
            distance_bound=(changes if result.status == STATUS_OPTIMAL else
                            max(0, math.ceil(len(ref_pairs) - agree_cap - 1e-9))),
        )
        bound = objective
    return Solution(
        status=result.status,
        assignments=assignments,
        objective=objective,
        bound=bound,
        solve_seconds=time.monotonic() - t0,
        secondary=secondary,
    )


def solve(instance, configs=None, params: SolverParams | None = None,
          progress=None) -> Solution:
    """Enumerate, assemble and solve an instance end to end."""
    from ..configs import enumerate_all
    from ..ilp import build_model

    if configs is None:
        configs = enumerate_all(instance)
    model = build_model(instance, configs)
    return solve_model(model, params=params, progress=progress)


def resolve_with_min_changes(model: IlpModel, reference: Solution,
                             params: SolverParams | None = None,
                             progress=None) -> Solution:
    """Re-solve after edits, keeping as much of ``reference`` as allowed."""
    return solve_model(
        model, params=params, progress=progress,
        diff=DiffObjective(reference=reference),
    )


BRUTE_FORCE_LIMIT = 24
_CHUNK = 1 << 16


def brute_force(model: IlpModel, *, limit: int = BRUTE_FORCE_LIMIT) -> Solution:
    """Exhaustive reference solve over every free 0/1 vector.

    Applies the model's fixings and nothing else; refuses models with more
    than ``limit`` free variables.  Exists to check the real solver, so it
    must stay independent of presolve and the LP machinery.
    """
    t0 = time.monotonic()
    n = len(model.variables)
    fixed = dict(model.fixings)
    free = [j for j in range(n) if j not in fixed]
    f = len(free)
    if f > limit:
        raise SolveError(f"{f} free variables exceed the brute-force limit {limit}")

    c = np.zeros(n)
    for j, coeff in model.objective:
        c[j] = coeff
    m = len(model.constraints)
    a = np.zeros((m, n))
    senses = np.array([row.sense for row in model.constraints])
    rhs = np.array([row.rhs for row in model.constraints])
    for i, row in enumerate(model.constraints):
        for j, coeff in row.coeffs:
            a[i, j] = coeff

    x_fixed = np.zeros(n)
    for j, v in fixed.items():
        x_fixed[j] = v
    base_act = a @ x_fixed if m else np.zeros(0)
    a_free = a[:, free] if m else np.zeros((0, f))
    c_free = c[free]

    le = senses == "<="
    ge = senses == ">="
    eq = senses == "="

    best_value = -math.inf
    best_bits = None
    total = 1 << f
    for start in range(0, total, _CHUNK):
        count = min(_CHUNK, total - start)
        ks = np.arange(start, start + count, dtype=np.int64)
        bits = ((ks[:, None] >> np.arange(f, dtype=np.int64)) & 1).astype(float)
        act = bits @ a_free.T + base_act
        ok = np.ones(count, dtype=bool)
        if le.any():
            ok &= (act[:, le] <= rhs[le] + ROW_TOL).all(axis=1)
        if ge.any():
            ok &= (act[:, ge] >= rhs[ge] - ROW_TOL).all(axis=1)
        if eq.any():
            ok &= (np.abs(act[:, eq] - rhs[eq]) <= ROW_TOL).all(axis=1)
        if not ok.any():
            continue
        vals = bits @ c_free
        vals[~ok] = -math.inf
        kbest = int(np.argmax(vals))
        if vals[kbest] > best_value:
            best_value = float(vals[kbest])
            best_bits = bits[kbest].astype(np.int8)

    seconds = time.monotonic() - t0
    if best_bits is None:
        return Solution(status=STATUS_INFEASIBLE, objective=0.0,
                        bound=-math.inf, solve_seconds=seconds)
    x_full = x_fixed.astype(np.int8)
    x_full[free] = best_bits
    assignments = _assignments_from(model, x_full)
    objective = model.objective_value(assignments)
    return Solution(
        status=STATUS_OPTIMAL,
        assignments=assignments,
        objective=objective,
        bound=objective,
        solve_seconds=seconds,
    )
