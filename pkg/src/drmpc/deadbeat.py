"""Deadbeat disturbance-feedback gains and the partial-compensation matrices.

The gains solve ``-A^M = P_M [K_0; ...; K_{M-1}]`` where ``P_M`` is the
controllability block ``[A^{M-1}B | ... | B]``. Each of the n columns of
``A^M`` is an independent right-hand side, so one SVD of ``P_M`` serves all
of them; when ``M m > n`` the pseudo-inverse picks the minimum Frobenius norm
solution.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .errors import ConsistencyError, DimensionError, IllConditioned, RankDeficient
from .linsys import EPS, LinearSystem, controllability_block, deadbeat_horizon

COND_LIMIT = 1.0 / np.sqrt(EPS)
RESIDUAL_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class DeadbeatPolicy:
    M: int
    gains: List[np.ndarray]
    aux: List[np.ndarray]
    residual: float
    cond: float = float("nan")

    @property
    def m(self) -> int:
        return self.gains[0].shape[0]

    @property
    def n(self) -> int:
        return self.gains[0].shape[1]

    def stacked(self) -> np.ndarray:
        return np.vstack(self.gains)

    def gain(self, j: int) -> np.ndarray:
        """``K_j``, zero beyond the deadbeat horizon."""
        if 0 <= j < self.M:
            return self.gains[j]
        return np.zeros((self.m, self.n))

    def transition(self, j: int) -> np.ndarray:
        """``Phi_j`` with ``Phi_{-1} = I`` and ``Phi_j = 0`` for ``j >= M - 1``."""
        if j == -1:
            return np.eye(self.n)
        if 0 <= j < self.M - 1:
            return self.aux[j]
        return np.zeros((self.n, self.n))


def residual_tolerance(sys: LinearSystem, M: int) -> float:
    return RESIDUAL_RTOL * (1.0 + np.linalg.norm(sys.A, "fro") ** M)


def synthesize_gains(sys: LinearSystem, M: Optional[int] = None) -> DeadbeatPolicy:
    """Gains ``K_0..K_{M-1}`` that return any initial state to the origin in M steps.

    ``M`` defaults to the deadbeat horizon; larger values are allowed and add
    freedom that the minimum-norm solution resolves.
    """
    n, m = sys.n, sys.m
    if M is None:
        M = deadbeat_horizon(sys)
    if M < 1:
        raise DimensionError("M must be a positive integer")
    P = controllability_block(sys, M)
    U, s, Vt = np.linalg.svd(P, full_matrices=False)
    rank = int(np.sum(s > max(P.shape) * EPS * s[0])) if s[0] > 0 else 0
    if rank < n:
        raise RankDeficient(f"controllability block for M={M} has rank {rank} < {n}")
    cond = float(s[0] / s[-1])
    if cond > COND_LIMIT:
        raise IllConditioned(f"cond(P_{M}) = {cond:.3e} exceeds {COND_LIMIT:.3e}")

    rhs = -np.linalg.matrix_power(sys.A, M)
    pinv = Vt.T @ (U.T / s[:, None])
    Kstack = pinv @ rhs
    # one refinement sweep; the correction stays in the row space of P
    Kstack += pinv @ (rhs - P @ Kstack)
    gains = [Kstack[i * m:(i + 1) * m] for i in range(M)]
    aux, last = _transitions(sys, gains)
    residual = float(np.linalg.norm(last, "fro"))
    if residual > residual_tolerance(sys, M):
        raise ConsistencyError(f"||Phi_(M-1)||_F = {residual:.3e} after synthesis")
    return DeadbeatPolicy(M=M, gains=gains, aux=aux, residual=residual, cond=cond)


def _transitions(sys: LinearSystem, gains):
    """``[Phi_0, ..., Phi_{M-2}]`` and the closing ``Phi_{M-1}``."""
    Phi = sys.A + sys.B @ gains[0]
    out = [Phi]
    for K in gains[1:]:
        Phi = sys.A @ Phi + sys.B @ K
        out.append(Phi)
    return out[:-1], out[-1]


def aux_matrices(sys: LinearSystem, gains) -> List[np.ndarray]:
    """``Phi_j = A^{j+1} + sum_{i<=j} A^{j-i} B K_i`` for ``j = 0..M-2``.

    Raises :class:`ConsistencyError` if the closing matrix ``Phi_{M-1}`` is
    not zero within tolerance, i.e. the gains are not deadbeat.
    """
    gains = list(gains)
    if not gains:
        raise DimensionError("at least one gain is required")
    for K in gains:
        if K.shape != (sys.m, sys.n):
            raise DimensionError(f"gain of shape {K.shape}, expected {(sys.m, sys.n)}")
    aux, last = _transitions(sys, gains)
    res = np.linalg.norm(last, "fro")
    tol = residual_tolerance(sys, len(gains))
    if res > tol:
        raise ConsistencyError(f"||Phi_(M-1)||_F = {res:.3e} exceeds {tol:.3e}")
    return aux


def open_loop_deadbeat_check(sys: LinearSystem, policy: DeadbeatPolicy, d0) -> np.ndarray:
    """States ``x_0..x_M`` of the undisturbed plant from ``x_0 = d0`` under ``u_k = K_k d0``."""
    d0 = np.asarray(d0, dtype=float).reshape(-1)
    if d0.size != sys.n:
        raise DimensionError(f"d0 has {d0.size} entries, expected {sys.n}")
    xs = [d0]
    for K in policy.gains:
        xs.append(sys.step(xs[-1], K @ d0))
    return np.array(xs)
