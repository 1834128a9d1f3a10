"""Backend built on third-party solvers: HiGHS (via SciPy) for LPs and
cvxopt's interior-point QP. Used to cross-check the built-in solvers."""

from __future__ import annotations

import numpy as np

from .problems import LPProblem, QPProblem, SolveResult, Status


class ExternalBackend:
    name = "external"

    def solve_lp(self, p: LPProblem) -> SolveResult:
        from scipy.optimize import linprog

        res = linprog(
            -p.c,
            A_ub=p.G if p.G.shape[0] else None,
            b_ub=p.h if p.G.shape[0] else None,
            A_eq=p.A_eq if p.A_eq.shape[0] else None,
            b_eq=p.b_eq if p.A_eq.shape[0] else None,
            bounds=[(None, None)] * p.num_vars,
            method="highs",
        )
        if res.status == 0:
            return SolveResult(Status.OPTIMAL, x=res.x, objective=float(p.c @ res.x), iterations=int(res.nit))
        if res.status == 2:
            return SolveResult(Status.INFEASIBLE, message=res.message)
        if res.status == 3:
            return SolveResult(Status.UNBOUNDED, message=res.message)
        return SolveResult(Status.NUMERICAL_FAILURE, message=res.message)

    def solve_qp(self, p: QPProblem) -> SolveResult:
        import cvxopt
        from cvxopt import solvers

        opts = {"show_progress": False, "abstol": 1e-10, "reltol": 1e-10, "feastol": 1e-10}
        args = [cvxopt.matrix(p.H), cvxopt.matrix(p.f)]
        if p.G_in.shape[0]:
            args += [cvxopt.matrix(p.G_in), cvxopt.matrix(p.h_in)]
        else:
            args += [None, None]
        if p.A_eq.shape[0]:
            args += [cvxopt.matrix(p.A_eq), cvxopt.matrix(p.b_eq)]
        sol = solvers.qp(*args, options=opts)
        loose = False
        if sol["status"] == "unknown":
            # degenerate PSD problems stall short of the tight tolerances
            sol = solvers.qp(*args, options={"show_progress": False})
            loose = True
        if sol["status"] != "optimal":
            status = Status.INFEASIBLE if "infeasible" in sol["status"] else Status.NUMERICAL_FAILURE
            return SolveResult(status, message=sol["status"])
        z = np.array(sol["x"]).reshape(-1)
        lam = np.array(sol["z"]).reshape(-1) if p.G_in.shape[0] else np.zeros(0)
        nu = np.array(sol["y"]).reshape(-1) if p.A_eq.shape[0] else np.zeros(0)
        return SolveResult(Status.OPTIMAL, x=z, objective=p.objective(z), ineq_duals=lam, eq_duals=nu,
                           iterations=int(sol["iterations"]), extra={"loose_tolerance": loose})
