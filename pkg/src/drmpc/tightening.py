"""Offline constraint tightening for the nominal inputs and states.

Input sets shrink by ``K_j D`` per stage and state sets by ``Phi_{j-1} D``
(with ``Phi_{-1} = I``) up to the deadbeat horizon, then stay constant. Every
stage is a single Pontryagin difference applied to the previous stage, so the
stage-j batch only solves the LPs for the new offsets.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .deadbeat import DeadbeatPolicy
from .errors import DimensionError, EmptyTightening
from .linsys import ProblemInstance
from .optbackend import Backend, default_backend
from .polytope import HPolyhedron, pontryagin_diff_image


@dataclass(frozen=True, eq=False)
class TightenedSequences:
    """Per-stage sets ``U_0..U_{N-1}`` and ``X_1..X_N``.

    ``input_chain`` holds ``U_0..U_M`` and ``state_chain`` holds ``X_1..X_M``
    (the distinct sets); the per-stage lists are views onto these chains.
    """

    input_chain: List[HPolyhedron]
    state_chain: List[HPolyhedron]
    N: int
    lp_count: int = 0
    empty_stages: tuple = ()

    @property
    def M(self) -> int:
        return len(self.state_chain)

    @property
    def input_sets(self) -> List[HPolyhedron]:
        return [self.input_chain[min(j, self.M)] for j in range(self.N)]

    @property
    def state_sets(self) -> List[HPolyhedron]:
        return [self.state_chain[min(j, self.M) - 1] for j in range(1, self.N + 1)]

    def input_set(self, j: int) -> HPolyhedron:
        return self.input_chain[min(j, self.M)]

    def state_set(self, j: int) -> HPolyhedron:
        """``X_j`` for ``j >= 1``."""
        if j < 1:
            raise IndexError("state sets start at stage 1")
        return self.state_chain[min(j, self.M) - 1]

    def origin_admissible(self, tol: float = 0.0) -> bool:
        """Zero input and zero state satisfy the tail constraints.

        The shifted-plan argument for recursive feasibility parks the
        nominal trajectory at the origin after the horizon, so the constant
        tail sets ``U_M`` and ``X_M`` must contain 0.
        """
        return bool(np.all(self.input_chain[-1].h >= -tol) and np.all(self.state_chain[-1].h >= -tol))

    def with_horizon(self, N: int) -> "TightenedSequences":
        if N < self.M:
            raise DimensionError(f"horizon N = {N} is shorter than the deadbeat horizon M = {self.M}")
        return TightenedSequences(self.input_chain, self.state_chain, N, self.lp_count, self.empty_stages)

    @classmethod
    def untightened(cls, U: HPolyhedron, X: HPolyhedron, N: int, M: int = 1) -> "TightenedSequences":
        """The sets of the nominal problem: ``U`` and ``X`` at every stage."""
        return cls([U] * (M + 1), [X] * M, N)


def _chain(parent: HPolyhedron, D: HPolyhedron, maps, family: str, first_stage: int, strict: bool, backend):
    chain = [parent]
    empty = []
    for k, K in enumerate(maps):
        res = pontryagin_diff_image(chain[-1], K, D, backend)
        chain.append(res.poly)
        if res.empty:
            stage = first_stage + k
            if strict:
                raise EmptyTightening(family, stage)
            empty.append((family, stage))
    return chain, empty


def _check_horizon(M: int, N: int):
    if N < M:
        raise DimensionError(f"horizon N = {N} is shorter than the deadbeat horizon M = {M}")


def tighten_inputs(U: HPolyhedron, D: HPolyhedron, policy: DeadbeatPolicy, N: int,
                   backend: Optional[Backend] = None, strict: bool = True) -> List[HPolyhedron]:
    """``U_0 = U``, ``U_j = U_{j-1} - K_{j-1} D`` for ``j <= M``, constant afterwards."""
    _check_horizon(policy.M, N)
    chain, _ = _chain(U, D, policy.gains, "input", 1, strict, backend or default_backend())
    return [chain[min(j, policy.M)] for j in range(N)]


def tighten_states(X: HPolyhedron, D: HPolyhedron, aux, M: int, N: int,
                   backend: Optional[Backend] = None, strict: bool = True) -> List[HPolyhedron]:
    """``X_1 = X - D``, ``X_{j+1} = X_j - Phi_{j-1} D`` for ``j < M``, constant afterwards."""
    _check_horizon(M, N)
    if len(aux) != M - 1:
        raise DimensionError(f"expected {M - 1} auxiliary matrices, got {len(aux)}")
    maps = [np.eye(X.dim)] + list(aux)
    chain, _ = _chain(X, D, maps, "state", 1, strict, backend or default_backend())
    return [chain[min(j, M)] for j in range(1, N + 1)]


def tighten(instance: ProblemInstance, policy: DeadbeatPolicy, N: Optional[int] = None,
            backend: Optional[Backend] = None, strict: bool = True) -> TightenedSequences:
    """Both families at once; ``N`` defaults to the deadbeat horizon."""
    M = policy.M
    N = M if N is None else N
    _check_horizon(M, N)
    backend = backend or default_backend()
    U, X, D = instance.U, instance.X, instance.D
    uchain, uempty = _chain(U, D, policy.gains, "input", 1, strict, backend)
    xchain, xempty = _chain(X, D, [np.eye(X.dim)] + list(policy.aux), "state", 1, strict, backend)
    lp_count = M * (U.num_facets + X.num_facets)
    return TightenedSequences(uchain, xchain[1:], N, lp_count, tuple(uempty + xempty))
