"""Solver seam for the support-function LPs and the receding-horizon QP.

Anything with ``solve_lp(LPProblem)`` and ``solve_qp(QPProblem)`` methods
returning :class:`SolveResult` can stand in for :class:`BuiltinBackend`.
"""

from __future__ import annotations

from typing import Protocol

from .activeset import solve_qp
from .problems import LPProblem, QPProblem, SolveResult, Status, kkt_residuals
from .simplex import solve_lp

__all__ = [
    "Backend",
    "BuiltinBackend",
    "ExternalBackend",
    "LPProblem",
    "QPProblem",
    "SolveResult",
    "Status",
    "default_backend",
    "kkt_residuals",
    "solve_lp",
    "solve_qp",
]


class Backend(Protocol):
    def solve_lp(self, p: LPProblem) -> SolveResult: ...

    def solve_qp(self, p: QPProblem) -> SolveResult: ...


class BuiltinBackend:
    """Dense simplex for LPs, dense active-set for QPs."""

    name = "builtin"

    def solve_lp(self, p: LPProblem) -> SolveResult:
        return solve_lp(p)

    def solve_qp(self, p: QPProblem) -> SolveResult:
        return solve_qp(p)


def default_backend() -> BuiltinBackend:
    return BuiltinBackend()


from .external import ExternalBackend  # noqa: E402
