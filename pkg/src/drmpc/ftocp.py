"""Finite-horizon optimal control problem with a terminal equality.

Decision vector ``z = [u_0, ..., u_{N-1}, x_1, ..., x_N]``; the initial
state is a parameter, not a variable. Dynamics and ``x_N = 0`` are equality
rows, stage sets are inequality rows. The DRMPC and nominal problems differ
only in the offsets of the stage sets, which is what makes their sizes equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DimensionError, NumericalFailure
from .linsys import LinearSystem, ProblemInstance
from .optbackend import Backend, QPProblem, Status, default_backend
from .tightening import TightenedSequences


@dataclass(frozen=True, eq=False)
class StageCost:
    """``l(x, u) = x'Qx + u'Ru``."""

    Q: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        R = np.atleast_2d(np.asarray(self.R, dtype=float))
        for name, W in (("Q", Q), ("R", R)):
            if W.shape[0] != W.shape[1] or not np.allclose(W, W.T):
                raise DimensionError(f"{name} must be square and symmetric")
        if np.linalg.eigvalsh(Q).min() <= 0.0:
            raise DimensionError("Q must be positive definite")
        if np.linalg.eigvalsh(R).min() < -1e-12:
            raise DimensionError("R must be positive semidefinite")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "R", R)

    @classmethod
    def identity(cls, n: int, m: int, q: float = 1.0, r: float = 1.0) -> "StageCost":
        """Scaled identity weights; ``r = 0`` drops the input penalty entirely."""
        return cls(q * np.eye(n), r * np.eye(m))

    def __call__(self, x, u) -> float:
        return float(x @ self.Q @ x + u @ self.R @ u)


@dataclass(frozen=True, eq=False)
class FTOCPSpec:
    kind: str
    N: int
    n: int
    m: int
    qp: QPProblem
    x0: np.ndarray
    constant: float
    A: np.ndarray = field(repr=False)
    Q: np.ndarray = field(repr=False)

    @property
    def num_vars(self) -> int:
        return self.qp.num_vars

    @property
    def num_eq(self) -> int:
        return self.qp.A_eq.shape[0]

    @property
    def num_ineq(self) -> int:
        return self.qp.G_in.shape[0]

    def counts(self):
        return self.num_vars, self.num_eq, self.num_ineq

    def u_slice(self, j: int) -> slice:
        return slice(j * self.m, (j + 1) * self.m)

    def x_slice(self, j: int) -> slice:
        """Slice of ``x_j`` for ``1 <= j <= N``."""
        base = self.N * self.m
        return slice(base + (j - 1) * self.n, base + j * self.n)

    def with_initial_state(self, x0) -> "FTOCPSpec":
        """Same problem from a different initial state (only ``b_eq`` moves)."""
        x0 = _vector(x0, self.n, "x0")
        b = self.qp.b_eq.copy()
        b[: self.n] = self.A @ x0
        qp = QPProblem(self.qp.H, self.qp.f, self.qp.G_in, self.qp.h_in, self.qp.A_eq, b)
        return FTOCPSpec(self.kind, self.N, self.n, self.m, qp, x0, float(x0 @ self.Q @ x0), self.A, self.Q)

    def to_dict(self) -> dict:
        qp = self.qp
        return {
            "kind": self.kind,
            "N": self.N,
            "n": self.n,
            "m": self.m,
            "x0": self.x0.tolist(),
            "constant": self.constant,
            "H": qp.H.tolist(),
            "f": qp.f.tolist(),
            "G": qp.G_in.tolist(),
            "h": qp.h_in.tolist(),
            "A_eq": qp.A_eq.tolist(),
            "b_eq": qp.b_eq.tolist(),
        }


@dataclass
class InputSequence:
    u: Optional[np.ndarray]
    x: Optional[np.ndarray]
    feasible: bool
    objective: float
    status: Status
    message: str = ""

    @property
    def first(self) -> np.ndarray:
        return self.u[0]


def _vector(v, size, name):
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.size != size:
        raise DimensionError(f"{name} has {v.size} entries, expected {size}")
    if not np.all(np.isfinite(v)):
        raise DimensionError(f"{name} must be finite")
    return v


def _assemble(kind: str, sys: LinearSystem, tight: TightenedSequences, cost: StageCost, x0) -> FTOCPSpec:
    n, m, N = sys.n, sys.m, tight.N
    x0 = _vector(x0, n, "x0")
    if cost.Q.shape != (n, n) or cost.R.shape != (m, m):
        raise DimensionError("cost weights do not match the system dimensions")
    if tight.input_set(0).dim != m or tight.state_set(1).dim != n:
        raise DimensionError("tightened sets do not match the system dimensions")
    nu, nx = N * m, N * n
    nz = nu + nx

    def ui(j):
        return slice(j * m, (j + 1) * m)

    def xi(j):
        return slice(nu + (j - 1) * n, nu + j * n)

    H = np.zeros((nz, nz))
    for j in range(N):
        H[ui(j), ui(j)] = 2.0 * cost.R
    for j in range(1, N):
        H[xi(j), xi(j)] = 2.0 * cost.Q

    # dynamics x_{j+1} - A x_j - B u_j = 0, then x_N = 0
    Aeq = np.zeros((nx + n, nz))
    beq = np.zeros(nx + n)
    for j in range(N):
        rows = slice(j * n, (j + 1) * n)
        Aeq[rows, xi(j + 1)] = np.eye(n)
        Aeq[rows, ui(j)] = -sys.B
        if j == 0:
            beq[rows] = sys.A @ x0
        else:
            Aeq[rows, xi(j)] = -sys.A
    Aeq[nx:, xi(N)] = np.eye(n)

    G_blocks, h_blocks = [], []
    for j in range(N):
        P = tight.input_set(j)
        g = np.zeros((P.num_facets, nz))
        g[:, ui(j)] = P.G
        G_blocks.append(g)
        h_blocks.append(P.h)
    for j in range(1, N + 1):
        P = tight.state_set(j)
        g = np.zeros((P.num_facets, nz))
        g[:, xi(j)] = P.G
        G_blocks.append(g)
        h_blocks.append(P.h)

    qp = QPProblem(H=H, f=np.zeros(nz), G_in=np.vstack(G_blocks), h_in=np.concatenate(h_blocks),
                   A_eq=Aeq, b_eq=beq)
    return FTOCPSpec(kind, N, n, m, qp, x0, float(x0 @ cost.Q @ x0), sys.A, cost.Q)


def build_drmpc(instance: ProblemInstance, tight: TightenedSequences, cost: StageCost, x0) -> FTOCPSpec:
    return _assemble("drmpc", instance.sys, tight, cost, x0)


def build_nominal(instance: ProblemInstance, cost: StageCost, x0, N: int) -> FTOCPSpec:
    """Same horizon and terminal condition, untightened ``U`` and ``X`` everywhere."""
    if N < 1:
        raise DimensionError("horizon must be positive")
    tight = TightenedSequences.untightened(instance.U, instance.X, N)
    return _assemble("nominal", instance.sys, tight, cost, x0)


def solve_ftocp(spec: FTOCPSpec, backend: Optional[Backend] = None) -> InputSequence:
    backend = backend or default_backend()
    res = backend.solve_qp(spec.qp)
    if res.status is Status.NUMERICAL_FAILURE:
        raise NumericalFailure(f"{spec.kind} FTOCP (N={spec.N}, x0={spec.x0.tolist()}): {res.message}")
    if res.status is not Status.OPTIMAL:
        return InputSequence(None, None, False, float("nan"), res.status, res.message)
    z = res.x
    u = z[: spec.N * spec.m].reshape(spec.N, spec.m)
    x = np.vstack([spec.x0, z[spec.N * spec.m:].reshape(spec.N, spec.n)])
    return InputSequence(u, x, True, res.objective + spec.constant, res.status)


def complexity_parity(a: FTOCPSpec, b: FTOCPSpec) -> bool:
    return a.counts() == b.counts()


def constraint_replay(sys: LinearSystem, tight: TightenedSequences, x0, u) -> dict:
    """Re-simulate a plan and measure how far it leaves its stage sets.

    Independent of the QP data: states come from the dynamics, memberships
    from the tightened sets.
    """
    u = np.atleast_2d(np.asarray(u, dtype=float))
    x = _vector(x0, sys.n, "x0")
    worst_u = worst_x = 0.0
    for j in range(tight.N):
        P = tight.input_set(j)
        worst_u = max(worst_u, float(np.max(P.G @ u[j] - P.h)))
        x = sys.step(x, u[j])
        S = tight.state_set(j + 1)
        worst_x = max(worst_x, float(np.max(S.G @ x - S.h)))
    return {"input": worst_u, "state": worst_x, "terminal": float(np.linalg.norm(x))}
