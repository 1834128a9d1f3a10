"""Dense primal active-set method for convex QPs.

Equalities are eliminated once by a null-space parametrisation ``z = z_p + Z y``
(SVD based, so rank-deficient equality blocks are handled). A feasible start
comes from a phase-1 LP; from there the classic add/drop working-set loop runs
on the reduced problem. Zero-curvature directions of a PSD Hessian are
followed along the null space of the working set until a constraint blocks.
"""

from __future__ import annotations

import numpy as np

from .problems import LPProblem, QPProblem, SolveResult, Status
from .simplex import solve_lp

DEGENERATE_RUN = 30


def _eliminate(A: np.ndarray, b: np.ndarray, nv: int, rtol: float = 1e-12):
    """Minimum-norm particular solution and null-space basis of ``A z = b``."""
    if A.shape[0] == 0:
        return np.zeros(nv), np.eye(nv)
    U, s, Vt = np.linalg.svd(A)
    r = int(np.sum(s > rtol * max(A.shape) * s[0])) if s.size else 0
    zp = Vt[:r].T @ ((U[:, :r].T @ b) / s[:r])
    return zp, Vt[r:].T


def _independent_subset(rows: np.ndarray, cand: np.ndarray, limit: int) -> list:
    """Greedy selection of linearly independent constraint rows."""
    chosen: list = []
    basis = np.zeros((0, rows.shape[1]))
    for i in cand:
        if len(chosen) >= limit:
            break
        v = rows[i]
        if basis.shape[0]:
            v = v - basis.T @ (basis @ v)
        nv = np.linalg.norm(v)
        if nv > 1e-9 * max(1.0, np.linalg.norm(rows[i])):
            chosen.append(int(i))
            basis = np.vstack([basis, v / nv])
    return chosen


def _eqp_step(H, g, Aw):
    """Solve ``min 1/2 d'Hd + g'd  s.t.  Aw d = 0``.

    Works in the null space of ``Aw``, where the reduced Hessian is split by
    eigenvalue into curved and flat directions. If the gradient has a
    component along a flat direction, that component is a descent ray and is
    returned with ``curved = False``; otherwise ``d`` is the Newton step on
    the curved part. Returns ``(d, lam, curved)`` with ``Aw' lam = -(H d + g)``.
    """
    p = H.shape[0]
    k = Aw.shape[0]
    if k:
        _, s, Vt = np.linalg.svd(Aw)
        r = int(np.sum(s > 1e-12 * max(1.0, s[0])))
        Nz = Vt[r:].T
    else:
        Nz = np.eye(p)
    d = np.zeros(p)
    curved = True
    if Nz.shape[1]:
        gz = Nz.T @ g
        w, V = np.linalg.eigh(Nz.T @ H @ Nz)
        flat = w <= 1e-10 * max(np.abs(w).max(), 1.0)
        g_flat = V[:, flat].T @ gz
        if flat.any() and np.linalg.norm(g_flat) > 1e-10 * (1.0 + np.linalg.norm(g)):
            d = -Nz @ (V[:, flat] @ g_flat)
            curved = False
        else:
            Vc = V[:, ~flat]
            d = -Nz @ (Vc @ ((Vc.T @ gz) / w[~flat]))
    if k and curved:
        lam, *_ = np.linalg.lstsq(Aw.T, -(H @ d + g), rcond=None)
    else:
        lam = np.zeros(k)
    return d, lam, curved


def solve_qp(p: QPProblem, max_iter: int | None = None) -> SolveResult:
    nv = p.num_vars
    H, f, G, h, A, b = p.H, p.f, p.G_in, p.h_in, p.A_eq, p.b_eq

    # equality elimination
    zp, Z = _eliminate(A, b, nv)
    if A.shape[0] and np.abs(A @ zp - b).max() > 1e-9 * (1.0 + np.abs(b).max()):
        return SolveResult(Status.INFEASIBLE, message="inconsistent equality constraints")

    Hr = Z.T @ H @ Z
    fr = Z.T @ (H @ zp + f)
    Gr = G @ Z
    # rounding residue of the elimination, e.g. bounds on variables that the
    # equalities fix completely
    Gr[np.abs(Gr) <= 1e-13 * max(np.abs(G).max(initial=0.0), 1.0)] = 0.0
    hr = h - G @ zp
    pdim = Z.shape[1]
    q = G.shape[0]
    scale = 1.0 + np.abs(h).max(initial=0.0)
    ftol = 1e-9 * scale

    if pdim == 0:
        if q and np.max(-hr) > ftol:
            return SolveResult(Status.INFEASIBLE, message="equality solution violates inequalities")
        y = np.zeros(0)
        W: list = []
        iters = 0
    else:
        # feasible start: unconstrained minimiser if it is feasible, else phase-1 LP
        y = None
        try:
            cand = np.linalg.solve(Hr, -fr)
            if np.all(np.isfinite(cand)) and (q == 0 or np.max(Gr @ cand - hr) <= ftol):
                y = cand
        except np.linalg.LinAlgError:
            pass
        if y is None:
            lp = solve_lp(LPProblem(c=np.zeros(pdim), G=Gr, h=hr))
            if lp.status is Status.INFEASIBLE:
                return SolveResult(Status.INFEASIBLE, message="phase-1 LP infeasible: " + lp.message)
            if not lp.ok:
                return SolveResult(Status.NUMERICAL_FAILURE, message="phase-1 LP failed: " + lp.message)
            y = lp.x
        active = np.flatnonzero(np.abs(Gr @ y - hr) <= ftol) if q else np.zeros(0, dtype=int)
        W = _independent_subset(Gr, active, pdim)

        if max_iter is None:
            max_iter = 20 * (pdim + q) + 100
        iters = 0
        bland = False
        degenerate = 0
        while True:
            if iters >= max_iter:
                return SolveResult(Status.NUMERICAL_FAILURE, iterations=iters, message="active-set iteration limit")
            iters += 1
            g = Hr @ y + fr
            Aw = Gr[W] if W else np.zeros((0, pdim))
            d, lam, curved = _eqp_step(Hr, g, Aw)
            dnorm = np.abs(d).max(initial=0.0)
            if curved and dnorm <= 1e-11 * (1.0 + np.abs(y).max(initial=0.0)):
                if not W:
                    break
                neg = np.flatnonzero(lam < -1e-10 * (1.0 + np.abs(g).max(initial=0.0)))
                if neg.size == 0:
                    break
                if bland:
                    drop = int(neg[np.argmin(np.asarray(W)[neg])])
                else:
                    drop = int(neg[np.argmin(lam[neg])])
                W.pop(drop)
                continue
            # ratio test along d
            alpha = 1.0 if curved else np.inf
            block = -1
            if q:
                Gd = Gr @ d
                inW = np.zeros(q, dtype=bool)
                inW[W] = True
                idx = np.flatnonzero((Gd > 1e-12 * (1.0 + np.abs(Gr).max()) * (1.0 + dnorm)) & ~inW)
                if idx.size:
                    steps = np.maximum(hr[idx] - Gr[idx] @ y, 0.0) / Gd[idx]
                    k = int(np.argmin(steps))
                    smin = steps[k]
                    ties = idx[steps <= smin + 1e-14]
                    if smin < alpha:
                        alpha = smin
                        block = int(ties.min()) if bland else int(idx[k])
            if not np.isfinite(alpha):
                return SolveResult(Status.UNBOUNDED, iterations=iters, message="zero-curvature descent ray")
            y = y + alpha * d
            if block >= 0:
                W.append(block)
                if alpha <= 1e-14:
                    degenerate += 1
                    if degenerate > DEGENERATE_RUN:
                        bland = True
                else:
                    degenerate = 0

    z = zp + Z @ y
    # multipliers of the full problem, recovered by least squares
    grad = H @ z + f
    lam_full = np.zeros(q)
    if W:
        blocks = [G[W].T]
        if A.shape[0]:
            blocks.append(A.T)
        M = np.hstack(blocks)
        mult, *_ = np.linalg.lstsq(M, -grad, rcond=None)
        lam_full[W] = mult[: len(W)]
        nu = mult[len(W):] if A.shape[0] else np.zeros(0)
    elif A.shape[0]:
        nu, *_ = np.linalg.lstsq(A.T, -grad, rcond=None)
    else:
        nu = np.zeros(0)
    return SolveResult(
        Status.OPTIMAL,
        x=z,
        objective=p.objective(z),
        ineq_duals=lam_full,
        eq_duals=nu,
        iterations=iters,
    )
