"""Sparse revised simplex for models too large for a dense tableau.

Same pivot rules as the dense path (composite phase 1, Dantzig with Bland
fallback, bound flips, first-breakpoint ratio test in phase 1); what
changes is the linear algebra.  The basis is held as a scipy ``splu``
factorization plus product-form eta updates recorded at each pivot, and
the factorization is rebuilt from scratch every ``refactor_every`` pivots
to keep the eta file short and the arithmetic honest.

The ratio-test scan is shared with the dense path's kernel, so the
compiled twin accelerates this path too.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from .simplex import (
    BLAND_AFTER,
    DEGENERATE_STEP,
    LP_INFEASIBLE,
    LP_ITERATION_LIMIT,
    LP_OPTIMAL,
    LP_UNBOUNDED,
    PIVOT_TOL,
    TOL,
    LpResult,
    SimplexError,
    _pick_kernel,
)

REFACTOR_EVERY = 100


class _Basis:
    """B as an LU factorization plus eta updates since the last rebuild."""

    def __init__(self, a_csc, basis):
        self.a_csc = a_csc
        self.m = a_csc.shape[0]
        self.rebuild(basis)

    def rebuild(self, basis) -> None:
        if self.m == 0:
            self.lu = None
        else:
            b = self.a_csc[:, basis].tocsc()
            self.lu = splu(b)
        self.etas: list[tuple[int, np.ndarray]] = []

    def ftran(self, v: np.ndarray) -> np.ndarray:
        """B^-1 v."""
        y = v.copy() if self.lu is None else self.lu.solve(v)
        for r, w in self.etas:
            yr = y[r] / w[r]
            y -= w * yr
            y[r] = yr
        return y

    def btran(self, c: np.ndarray) -> np.ndarray:
        """y with y B = c."""
        y = c.copy()
        for r, w in reversed(self.etas):
            y[r] = (y[r] - (y @ w - y[r] * w[r])) / w[r]
        if self.lu is None:
            return y
        return self.lu.solve(y, trans="T")

    def push_eta(self, r: int, w: np.ndarray) -> None:
        self.etas.append((r, w.copy()))


def solve_lp_revised(c, a, senses, rhs, lower, upper, *, basis=None,
                     at_upper=None, maxiter=None, backend=None,
                     refactor_every=REFACTOR_EVERY) -> LpResult:
    """Solve max c'x with a scipy-sparse row matrix ``a``.

    Returns the same result type as the dense path, so callers can switch
    between the two on problem size alone.
    """
    kernel = _pick_kernel(backend)
    c = np.asarray(c, dtype=float)
    rhs = np.asarray(rhs, dtype=float).copy()
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    a = sparse.csr_matrix(a, dtype=float)
    m, n = a.shape
    if not np.isfinite(lower).all():
        raise SimplexError("lower bounds must be finite")

    flip = np.array([sense == ">=" for sense in senses])
    if flip.any():
        scale = np.where(flip, -1.0, 1.0)
        a = sparse.diags(scale) @ a
        rhs = rhs * scale
    slack_hi = np.array(
        [0.0 if sense == "=" else np.inf for sense in senses]
    )
    a_full = sparse.hstack([a, sparse.identity(m, format="csc")], format="csc")
    a_full_t = a_full.T.tocsr()
    c_full = np.concatenate([c, np.zeros(m)])
    lo = np.concatenate([lower, np.zeros(m)])
    hi = np.concatenate([upper, slack_hi])
    nt = n + m
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
        at_upper &= np.isfinite(hi)

    in_basis = np.zeros(nt, dtype=bool)
    in_basis[basis] = True
    x = np.where(at_upper, np.where(np.isfinite(hi), hi, 0.0), lo)

    try:
        factor = _Basis(a_full, basis)
    except RuntimeError:  # singular warm basis; cold start instead
        basis = np.arange(n, n + m)
        at_upper = np.zeros(nt, dtype=bool)
        in_basis = np.zeros(nt, dtype=bool)
        in_basis[basis] = True
        x = np.where(at_upper, np.where(np.isfinite(hi), hi, 0.0), lo)
        factor = _Basis(a_full, basis)

    def recompute_basics():
        x_off = x.copy()
        x_off[basis] = 0.0
        return factor.ftran(rhs - a_full @ x_off)

    x[basis] = recompute_basics()

    iterations = 0
    degen_streak = 0
    bland = False
    status = None
    reduced = None
    bad_rows = None
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
            y = factor.btran(d.astype(float))
            v = a_full_t @ y
        else:
            d = zeros_d
            y = factor.btran(c_full[basis])
            v = c_full - a_full_t @ y

        movable = ~in_basis & (hi > lo)
        from_lo = movable & ~at_upper & (v > TOL)
        from_hi = movable & at_upper & (v < -TOL)
        cand = from_lo | from_hi
        if not cand.any():
            status = LP_INFEASIBLE if phase1 else LP_OPTIMAL
            if phase1:
                bad_rows = np.flatnonzero(np.abs(y) > TOL)
            else:
                reduced = v[:n].copy()
            break
        if bland:
            j = int(np.argmax(cand))
        else:
            score = np.where(cand, np.abs(v), -1.0)
            j = int(np.argmax(score))
        sigma = 1.0 if from_lo[j] else -1.0

        col = factor.ftran(np.asarray(a_full[:, j].todense()).ravel())
        col = np.ascontiguousarray(col)
        own_span = hi[j] - lo[j]
        t, rrow, leave_upper = kernel.ratio_test(
            col, xb, lo_b, hi_b, d, sigma, own_span, PIVOT_TOL
        )
        if rrow == -2:
            if phase1:
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
        factor.push_eta(rrow, col)
        basis[rrow] = j
        in_basis[leaving] = False
        in_basis[j] = True
        at_upper[leaving] = bool(leave_upper)
        at_upper[j] = False

        if len(factor.etas) >= refactor_every:
            factor.rebuild(basis)
            x[basis] = recompute_basics()

    objective = float(np.dot(c, x[:n]))
    return LpResult(
        status=status,
        objective=objective,
        x=x[:n].copy(),
        basis=basis.copy(),
        at_upper=at_upper.copy(),
        iterations=iterations,
        reduced_costs=reduced,
        infeasible_rows=bad_rows,
    )
