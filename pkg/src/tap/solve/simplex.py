"""Bounded-variable primal simplex on a dense tableau.

Maximizes c'x subject to rows with <=, >= or = senses and finite lower
bounds (upper bounds may be infinite).  >= rows are negated on entry so
every slack has lower bound zero; equality slacks are fixed at zero.

Infeasible starts are repaired by a composite phase 1: while any basic
variable sits outside its bounds, the objective becomes the total bound
violation and the ratio test stops at the first breakpoint, where either a
violated basic reaches the bound it was missing or a feasible basic would
leave its range.  The same machinery serves warm starts after bound
changes, which is how the branch-and-bound reuses parent bases.

Pricing is Dantzig (steepest reduced cost, lowest index on ties) with a
Bland fallback after a run of degenerate steps, plus bound flips for
nonbasic variables whose opposite bound blocks first.

The two inner scalar loops, the pivot elimination and the ratio-test scan,
live in a kernel with two interchangeable implementations: vectorized
numpy (this module) and a compiled twin (``tap.solve._core``).  Both share
numpy's dot products for every reduction, so their floating-point paths
agree to the last bit; the compiled twin only replaces loops whose
per-element arithmetic is order-independent.  Selection: compiled when
available, numpy otherwise, overridable per call or with TAP_PURE_PYTHON=1.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from types import SimpleNamespace

import numpy as np

from ..model import TapError

LP_OPTIMAL = "optimal"
LP_INFEASIBLE = "infeasible"
LP_UNBOUNDED = "unbounded"
LP_ITERATION_LIMIT = "iteration-limit"

TOL = 1e-9
PIVOT_TOL = 1e-10
DEGENERATE_STEP = 1e-12
BLAND_AFTER = 200
REFACTOR_EVERY = 500


class SimplexError(TapError):
    """The problem data cannot be solved as given."""


@dataclass(frozen=True)
class LinearProgram:
    """max c'x, rows a x (sense) rhs, lower <= x <= upper."""

    c: np.ndarray
    a: np.ndarray
    senses: tuple
    rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "c", np.asarray(self.c, dtype=float))
        object.__setattr__(self, "a", np.asarray(self.a, dtype=float))
        object.__setattr__(self, "senses", tuple(self.senses))
        object.__setattr__(self, "rhs", np.asarray(self.rhs, dtype=float))
        object.__setattr__(self, "lower", np.asarray(self.lower, dtype=float))
        object.__setattr__(self, "upper", np.asarray(self.upper, dtype=float))
        m, n = self.a.shape if self.a.ndim == 2 else (0, self.c.size)
        if self.a.ndim != 2 or self.c.shape != (n,) or self.rhs.shape != (m,):
            raise SimplexError("inconsistent problem shapes")
        if len(self.senses) != m or not set(self.senses) <= {"<=", ">=", "="}:
            raise SimplexError("bad row senses")
        if self.lower.shape != (n,) or self.upper.shape != (n,):
            raise SimplexError("bad bound shapes")
        if not np.isfinite(self.lower).all():
            raise SimplexError("lower bounds must be finite")
        if (self.lower > self.upper).any():
            raise SimplexError("crossed bounds")


@dataclass
class LpResult:
    status: str
    objective: float
    x: np.ndarray
    basis: np.ndarray
    at_upper: np.ndarray
    iterations: int
    # structural reduced costs at the final basis, only set on LP_OPTIMAL;
    # callers use them for bound-based variable fixing
    reduced_costs: np.ndarray | None = None
    # row indices carrying the infeasibility proof, only set on LP_INFEASIBLE
    # from the sparse path; callers use them to pick what to relax
    infeasible_rows: np.ndarray | None = None


# ---------------------------------------------------------------------------
# kernel: the two scalar loops, in vectorized numpy form


def _np_eliminate(T, u, r, j):
    piv = T[r, j]
    T[r] /= piv
    u[r] /= piv
    col = T[:, j].copy()
    col[r] = 0.0
    T -= col[:, None] * T[r]
    u -= col * u[r]


def _np_ratio_test(col, xb, lob, hib, d, sigma, own_span, piv_tol):
    delta = -sigma * col
    m = col.size
    target = np.full(m, np.nan)
    upper = np.zeros(m, dtype=bool)
    rise = delta > piv_tol
    fall = delta < -piv_tol
    mask = (d == 0) & rise
    target[mask] = hib[mask]
    upper[mask] = True
    mask = (d == 0) & fall
    target[mask] = lob[mask]
    mask = (d == -1) & rise
    target[mask] = lob[mask]
    mask = (d == 1) & fall
    target[mask] = hib[mask]
    upper[mask] = True
    with np.errstate(invalid="ignore", divide="ignore"):
        t = (target - xb) / delta
    t = np.where(np.isnan(t) | np.isinf(target), np.inf, t)
    t = np.maximum(t, 0.0)
    if m and t.min() < np.inf:
        row = int(np.argmin(t))
        best = float(t[row])
    else:
        row, best = -2, np.inf
    if own_span < best:
        return float(own_span), -1, False
    if row == -2:
        return np.inf, -2, False
    return best, row, bool(upper[row])


_NUMPY_KERNEL = SimpleNamespace(eliminate=_np_eliminate, ratio_test=_np_ratio_test)

try:  # compiled twin; identical arithmetic, loops in C
    from . import _core as _compiled
    if not hasattr(_compiled, "eliminate"):
        _compiled = None
except ImportError:  # pragma: no cover - build-dependent
    _compiled = None


def compiled_available() -> bool:
    return _compiled is not None


def _pick_kernel(backend):
    if backend in (None, "auto"):
        if _compiled is None or os.environ.get("TAP_PURE_PYTHON") == "1":
            return _NUMPY_KERNEL
        return _compiled
    if backend == "numpy":
        return _NUMPY_KERNEL
    if backend == "cython":
        if _compiled is None:
            raise SimplexError("compiled kernel not available")
        return _compiled
    raise SimplexError(f"unknown backend {backend!r}")


# ---------------------------------------------------------------------------


def _slack_form(problem):
    m, n = problem.a.shape
    a = problem.a.copy()
    rhs = problem.rhs.astype(float).copy()
    slack_hi = np.empty(m)
    for i, sense in enumerate(problem.senses):
        if sense == ">=":
            a[i] *= -1.0
            rhs[i] *= -1.0
            slack_hi[i] = np.inf
        elif sense == "<=":
            slack_hi[i] = np.inf
        else:
            slack_hi[i] = 0.0
    a_full = np.ascontiguousarray(np.hstack([a, np.eye(m)]))
    c_full = np.concatenate([problem.c, np.zeros(m)])
    lo = np.concatenate([problem.lower, np.zeros(m)])
    hi = np.concatenate([problem.upper, slack_hi])
    return a_full, c_full, lo, hi, rhs


def _refactor(a_full, rhs, basis):
    b = a_full[:, basis]
    if b.shape[0] == 0:
        return a_full.copy(), rhs.copy()
    T = np.ascontiguousarray(np.linalg.solve(b, a_full))
    u = np.linalg.solve(b, rhs)
    return T, u


def solve_lp(problem: LinearProgram, *, basis=None, at_upper=None,
             maxiter=None, backend=None) -> LpResult:
    """Solve one LP; pass basis/at_upper from a previous result to warm start."""
    kernel = _pick_kernel(backend)
    a_full, c_full, lo, hi, rhs = _slack_form(problem)
    m, nt = a_full.shape
    n = problem.c.size
    if maxiter is None:
        maxiter = 20000 + 50 * (m + n)

    if basis is None or len(basis) != m or len(np.unique(basis)) != m \
            or (np.asarray(basis) >= nt).any():
        basis = np.arange(n, n + m)
        at_upper = np.zeros(nt, dtype=bool)
    else:
        basis = np.asarray(basis, dtype=np.intp).copy()
        at_upper = (np.zeros(nt, dtype=bool) if at_upper is None
                    else np.asarray(at_upper, dtype=bool).copy())
        at_upper &= np.isfinite(hi)  # never park on an infinite bound

    in_basis = np.zeros(nt, dtype=bool)
    in_basis[basis] = True
    x = np.where(at_upper, np.where(np.isfinite(hi), hi, 0.0), lo)

    try:
        T, u = _refactor(a_full, rhs, basis)
    except np.linalg.LinAlgError:
        basis = np.arange(n, n + m)
        at_upper = np.zeros(nt, dtype=bool)
        in_basis = np.zeros(nt, dtype=bool)
        in_basis[basis] = True
        x = np.where(at_upper, hi, lo)
        T, u = _refactor(a_full, rhs, basis)

    nonb = ~in_basis
    x[basis] = u - T[:, nonb] @ x[nonb]

    iterations = 0
    degen_streak = 0
    bland = False
    status = None
    reduced = None
    zeros_d = np.zeros(m, dtype=np.int8)

    while True:
        if iterations >= maxiter:
            status = LP_ITERATION_LIMIT
            break
        xb = x[basis]
        lo_b = lo[basis]
        hi_b = hi[basis]
        below = xb < lo_b - TOL
        above = xb > hi_b + TOL
        phase1 = bool(below.any() or above.any())
        if phase1:
            d = above.astype(np.int8) - below.astype(np.int8)
            v = np.dot(d.astype(float), T)
        else:
            d = zeros_d
            v = c_full - np.dot(c_full[basis], T)

        movable = ~in_basis & (hi > lo)
        from_lo = movable & ~at_upper & (v > TOL)
        from_hi = movable & at_upper & (v < -TOL)
        cand = from_lo | from_hi
        if not cand.any():
            status = LP_INFEASIBLE if phase1 else LP_OPTIMAL
            if not phase1:
                reduced = v[:n].copy()
            break
        if bland:
            j = int(np.argmax(cand))
        else:
            score = np.where(cand, np.abs(v), -1.0)
            j = int(np.argmax(score))
        sigma = 1.0 if from_lo[j] else -1.0

        col = np.ascontiguousarray(T[:, j])
        own_span = hi[j] - lo[j]
        t, rrow, leave_upper = kernel.ratio_test(
            col, xb, lo_b, hi_b, d, sigma, own_span, PIVOT_TOL
        )
        if rrow == -2:
            if phase1:
                # the violation total is bounded below by zero, so a
                # downhill direction always meets a breakpoint
                raise SimplexError("phase 1 lost its floor; numerical trouble")
            status = LP_UNBOUNDED
            break

        iterations += 1
        if t <= DEGENERATE_STEP:
            degen_streak += 1
            if degen_streak >= BLAND_AFTER:
                bland = True
        else:
            degen_streak = 0
            bland = False

        if rrow == -1:
            x[basis] = xb - sigma * t * col
            x[j] = lo[j] if at_upper[j] else hi[j]
            at_upper[j] = not at_upper[j]
            continue

        leaving = int(basis[rrow])
        x[basis] = xb - sigma * t * col
        x[j] = (lo[j] if sigma > 0 else hi[j]) + sigma * t
        x[leaving] = hi[leaving] if leave_upper else lo[leaving]
        kernel.eliminate(T, u, rrow, j)
        basis[rrow] = j
        in_basis[leaving] = False
        in_basis[j] = True
        at_upper[leaving] = bool(leave_upper)
        at_upper[j] = False

        if iterations % REFACTOR_EVERY == 0:
            T, u = _refactor(a_full, rhs, basis)
            nonb = ~in_basis
            x[basis] = u - T[:, nonb] @ x[nonb]

    objective = float(np.dot(problem.c, x[:n]))
    return LpResult(
        status=status,
        objective=objective,
        x=x[:n].copy(),
        basis=basis.copy(),
        at_upper=at_upper.copy(),
        iterations=iterations,
        reduced_costs=reduced,
    )
