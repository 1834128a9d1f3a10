from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import DimensionError


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    NUMERICAL_FAILURE = "NumericalFailure"


def _as_matrix(a, cols: int) -> np.ndarray:
    if a is None:
        return np.zeros((0, cols))
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.size == 0:
        return np.zeros((0, cols))
    return a


def _as_vector(v, size: int) -> np.ndarray:
    if v is None:
        return np.zeros(size)
    return np.asarray(v, dtype=float).reshape(-1)


@dataclass(frozen=True)
class LPProblem:
    """``maximize c @ x  subject to  G @ x <= h`` (and optionally ``A_eq @ x == b_eq``).

    The variables are free. Equalities are an extension used by the
    feasibility phase of the QP solver.
    """

    c: np.ndarray
    G: np.ndarray
    h: np.ndarray
    A_eq: Optional[np.ndarray] = None
    b_eq: Optional[np.ndarray] = None

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).reshape(-1)
        nv = c.size
        G = _as_matrix(self.G, nv)
        h = _as_vector(self.h, G.shape[0])
        A_eq = _as_matrix(self.A_eq, nv)
        b_eq = _as_vector(self.b_eq, A_eq.shape[0])
        if G.shape[1] != nv or h.size != G.shape[0]:
            raise DimensionError(f"LP inequality block {G.shape} does not match c ({nv}) / h ({h.size})")
        if A_eq.shape[1] != nv or b_eq.size != A_eq.shape[0]:
            raise DimensionError("LP equality block has inconsistent dimensions")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "A_eq", A_eq)
        object.__setattr__(self, "b_eq", b_eq)

    @property
    def num_vars(self) -> int:
        return self.c.size


@dataclass(frozen=True)
class QPProblem:
    """``minimize 1/2 z' H z + f' z  s.t.  G_in z <= h_in,  A_eq z == b_eq``."""

    H: np.ndarray
    f: np.ndarray
    G_in: Optional[np.ndarray] = None
    h_in: Optional[np.ndarray] = None
    A_eq: Optional[np.ndarray] = None
    b_eq: Optional[np.ndarray] = None

    def __post_init__(self):
        H = np.atleast_2d(np.asarray(self.H, dtype=float))
        f = np.asarray(self.f, dtype=float).reshape(-1)
        nv = f.size
        if H.shape != (nv, nv):
            raise DimensionError(f"H has shape {H.shape}, expected {(nv, nv)}")
        if not np.allclose(H, H.T, atol=1e-12 * (1.0 + np.abs(H).max(initial=0.0))):
            raise DimensionError("H must be symmetric")
        G = _as_matrix(self.G_in, nv)
        h = _as_vector(self.h_in, G.shape[0])
        A = _as_matrix(self.A_eq, nv)
        b = _as_vector(self.b_eq, A.shape[0])
        if G.shape[1] != nv or h.size != G.shape[0]:
            raise DimensionError("QP inequality block has inconsistent dimensions")
        if A.shape[1] != nv or b.size != A.shape[0]:
            raise DimensionError("QP equality block has inconsistent dimensions")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "G_in", G)
        object.__setattr__(self, "h_in", h)
        object.__setattr__(self, "A_eq", A)
        object.__setattr__(self, "b_eq", b)

    @property
    def num_vars(self) -> int:
        return self.f.size

    def objective(self, z: np.ndarray) -> float:
        return float(0.5 * z @ self.H @ z + self.f @ z)


@dataclass
class SolveResult:
    status: Status
    x: Optional[np.ndarray] = None
    objective: Optional[float] = None
    # multipliers for G x <= h (>= 0) and for the equalities; QP only
    ineq_duals: Optional[np.ndarray] = None
    eq_duals: Optional[np.ndarray] = None
    iterations: int = 0
    message: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status is Status.OPTIMAL


def kkt_residuals(p: QPProblem, r: SolveResult) -> dict:
    """Stationarity, primal feasibility, dual feasibility and complementarity."""
    z = r.x
    lam = r.ineq_duals if r.ineq_duals is not None else np.zeros(p.G_in.shape[0])
    nu = r.eq_duals if r.eq_duals is not None else np.zeros(p.A_eq.shape[0])
    grad = p.H @ z + p.f + p.G_in.T @ lam + p.A_eq.T @ nu
    slack = p.h_in - p.G_in @ z
    return {
        "stationarity": float(np.abs(grad).max(initial=0.0)),
        "primal_ineq": float(np.maximum(-slack, 0.0).max(initial=0.0)),
        "primal_eq": float(np.abs(p.A_eq @ z - p.b_eq).max(initial=0.0)),
        "dual": float(np.maximum(-lam, 0.0).max(initial=0.0)),
        "complementarity": float(np.abs(lam * slack).max(initial=0.0)),
    }
