"""Dense two-phase tableau simplex for LPs with free variables.

Free variables are kept unsplit: a nonbasic free column whose reduced cost
points the wrong way is negated, and once basic a free variable never leaves
(its row is skipped by the ratio test). Dantzig pricing is used until a run
of degenerate pivots is seen, after which the solve switches to Bland's rule
for the remainder to rule out cycling.
"""

from __future__ import annotations

import numpy as np

from .problems import LPProblem, SolveResult, Status

PIVOT_TOL = 1e-11
FEAS_TOL = 1e-8
DEGENERATE_RUN = 50
NULL_ROW_TOL = 1e-13


class _Tableau:
    def __init__(self, T, basis, free, sign):
        self.T = T
        self.basis = basis
        self.free = free
        self.sign = sign
        self.iterations = 0
        self.bland = False

    @property
    def rows(self):
        return self.T.shape[0] - 1

    def pivot(self, r, j):
        T = self.T
        prow = T[r] / T[r, j]
        # only rows with a nonzero in the pivot column change
        nz = np.flatnonzero(T[:, j])
        T[nz] -= np.outer(T[nz, j], prow)
        T[r] = prow
        self.basis[r] = j

    def run(self, ncols, cost_tol, max_iter):
        """Iterate to optimality over the first ``ncols`` columns.

        Returns ``"optimal"``, ``"unbounded"`` or ``"iterations"``.
        """
        T = self.T
        R = self.rows
        degenerate = 0
        is_basic = np.zeros(T.shape[1] - 1, dtype=bool)
        is_basic[self.basis] = True
        basic_free = self.free[self.basis]
        while True:
            if self.iterations >= max_iter:
                return "iterations"
            d = T[-1, :ncols]
            # free nonbasic columns may move in either direction
            flip = np.flatnonzero(self.free[:ncols] & ~is_basic[:ncols] & (d > cost_tol))
            if flip.size:
                T[:, flip] *= -1.0
                self.sign[flip] *= -1.0
                d = T[-1, :ncols]
            cand = np.flatnonzero((d < -cost_tol) & ~is_basic[:ncols])
            if cand.size == 0:
                return "optimal"
            j = int(cand[0]) if self.bland else int(cand[np.argmin(d[cand])])

            col = T[:R, j]
            ok = (col > PIVOT_TOL) & ~basic_free
            rows = np.flatnonzero(ok)
            if rows.size == 0:
                return "unbounded"
            ratios = T[rows, -1] / col[rows]
            rmin = ratios.min()
            ties = rows[ratios <= rmin + 1e-12 * (1.0 + abs(rmin))]
            if self.bland:
                r = int(ties[np.argmin(np.asarray(self.basis)[ties])])
            else:
                r = int(ties[np.argmax(col[ties])])

            if rmin <= 1e-12:
                degenerate += 1
                if degenerate > DEGENERATE_RUN:
                    self.bland = True
            else:
                degenerate = 0

            leaving = self.basis[r]
            self.pivot(r, j)
            is_basic[leaving] = False
            is_basic[j] = True
            basic_free[r] = self.free[j]
            self.iterations += 1


def _violation(G, h, A, b, x) -> float:
    return max(
        float(np.max(G @ x - h, initial=0.0)),
        float(np.max(np.abs(A @ x - b), initial=0.0)),
    )


def _basis_resolve(rows, rhs, q, nv, tab, kept_rows):
    """Primal values of the final basis from the unreduced (scaled) rows."""
    full = np.hstack([rows[kept_rows] * tab.sign[:nv], np.eye(rows.shape[0])[kept_rows][:, :q]])
    Bm = full[:, tab.basis]
    try:
        vals = np.linalg.solve(Bm, rhs[kept_rows])
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(vals)):
        return None
    x = np.zeros(nv)
    structural = tab.basis < nv
    x[tab.basis[structural]] = vals[structural] * tab.sign[tab.basis[structural]]
    return x


def solve_lp(p: LPProblem, max_iter: int | None = None) -> SolveResult:
    """Maximise ``c @ x`` over ``{G x <= h, A_eq x == b_eq}``."""
    nv = p.num_vars
    G, h, A, b = p.G, p.h, p.A_eq, p.b_eq
    # rows that are zero up to rounding are constant constraints 0 <= rhs;
    # scaling them up would turn noise into real facets
    big = max(np.abs(G).max(initial=0.0), np.abs(A).max(initial=0.0), 1.0)
    gnull = np.abs(G).max(axis=1, initial=0.0) <= NULL_ROW_TOL * big
    anull = np.abs(A).max(axis=1, initial=0.0) <= NULL_ROW_TOL * big
    ftol = FEAS_TOL * (1.0 + max(np.abs(h).max(initial=0.0), np.abs(b).max(initial=0.0)))
    if np.any(h[gnull] < -ftol) or np.any(np.abs(b[anull]) > ftol):
        return SolveResult(Status.INFEASIBLE, message="constant constraint violated")
    if gnull.any() or anull.any():
        reduced = LPProblem(p.c, G[~gnull], h[~gnull], A[~anull], b[~anull])
        return solve_lp(reduced, max_iter)
    q, e = G.shape[0], A.shape[0]
    R = q + e

    if R == 0:
        if np.any(p.c != 0.0):
            return SolveResult(Status.UNBOUNDED, message="no constraints")
        return SolveResult(Status.OPTIMAL, x=np.zeros(nv), objective=0.0)

    # row scaling keeps pivots comparable across rows of very different norm
    rows = np.vstack([G, A]) if e else G.copy()
    rhs = np.concatenate([h, b])
    scale = np.abs(rows).max(axis=1)
    scale[scale == 0.0] = 1.0
    rows = rows / scale[:, None]
    rhs = rhs / scale

    neg = rhs < 0.0
    needs_art = neg.copy()
    needs_art[q:] = True
    art_rows = np.flatnonzero(needs_art)
    na = art_rows.size
    ncols = nv + q + na

    T = np.zeros((R + 1, ncols + 1))
    T[:R, :nv] = rows
    T[np.arange(q), nv + np.arange(q)] = 1.0
    T[:R, -1] = rhs
    T[:R][neg] *= -1.0
    T[art_rows, nv + q + np.arange(na)] = 1.0

    basis = np.empty(R, dtype=int)
    basis[:q] = nv + np.arange(q)
    basis[art_rows] = nv + q + np.arange(na)

    free = np.zeros(ncols, dtype=bool)
    free[:nv] = True
    sign = np.ones(ncols)
    tab = _Tableau(T, basis, free, sign)
    if max_iter is None:
        max_iter = 50 * (R + ncols) + 100

    kept_rows = np.arange(R)
    if na:
        # phase 1: minimise the sum of artificials
        T[-1, :] = 0.0
        T[-1, nv + q:ncols] = 1.0
        T[-1] -= T[art_rows].sum(axis=0)
        outcome = tab.run(ncols, 1e-12, max_iter)
        if outcome == "iterations":
            return SolveResult(Status.NUMERICAL_FAILURE, iterations=tab.iterations, message="phase 1 iteration limit")
        infeas = -T[-1, -1]
        # only rows carrying an artificial contribute to the phase-1 objective
        if infeas > FEAS_TOL * (1.0 + np.abs(rhs[art_rows]).max()):
            return SolveResult(Status.INFEASIBLE, iterations=tab.iterations, message=f"phase 1 residual {infeas:.3e}")
        # drive remaining artificials out of the basis, dropping redundant rows
        keep = np.ones(R + 1, dtype=bool)
        for r in range(R):
            if tab.basis[r] >= nv + q:
                cand = np.flatnonzero(np.abs(T[r, : nv + q]) > 1e-9)
                if cand.size:
                    tab.pivot(r, int(cand[np.argmax(np.abs(T[r, cand]))]))
                else:
                    keep[r] = False
        if not keep.all():
            tab.basis = tab.basis[keep[:R]]
            T = T[keep]
        kept_rows = np.flatnonzero(keep[:R])
        T = np.delete(T, np.s_[nv + q:ncols], axis=1)
        ncols = nv + q
        tab.T = T
        tab.free = free[:ncols]
        tab.sign = sign[:ncols]

    # phase 2: minimise -c
    w = np.zeros(ncols)
    w[:nv] = -p.c * tab.sign[:nv]
    T = tab.T
    T[-1, :] = 0.0
    T[-1, :ncols] = w
    wb = w[tab.basis]
    T[-1] -= wb @ T[:-1]
    cost_tol = 1e-11 * (1.0 + np.abs(p.c).max())
    outcome = tab.run(ncols, cost_tol, max_iter)
    if outcome == "iterations":
        return SolveResult(Status.NUMERICAL_FAILURE, iterations=tab.iterations, message="phase 2 iteration limit")
    if outcome == "unbounded":
        return SolveResult(Status.UNBOUNDED, iterations=tab.iterations)

    vals = np.zeros(ncols)
    vals[tab.basis] = tab.T[:-1, -1]
    x = vals[:nv] * tab.sign[:nv]
    viol = _violation(G, h, A, b, x)
    # the tableau accumulates rounding over many pivots; re-solving the final
    # basis against the original rows removes it
    refined = _basis_resolve(rows, rhs, q, nv, tab, kept_rows)
    if refined is not None:
        rviol = _violation(G, h, A, b, refined)
        if rviol < viol:
            x, viol = refined, rviol
    size = 1.0 + max(np.abs(h).max(initial=0.0), np.abs(b).max(initial=0.0))
    if viol > FEAS_TOL * size * (1.0 + np.abs(x).max(initial=0.0)):
        return SolveResult(Status.NUMERICAL_FAILURE, x=x, iterations=tab.iterations,
                           message=f"primal residual {viol:.3e} after simplex")
    return SolveResult(Status.OPTIMAL, x=x, objective=float(p.c @ x), iterations=tab.iterations)
