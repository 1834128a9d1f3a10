"""Deadbeat robust MPC: gain synthesis, constraint tightening, closed-loop
simulation and the offline setup benchmark."""

from __future__ import annotations

from .deadbeat import DeadbeatPolicy, aux_matrices, open_loop_deadbeat_check, synthesize_gains
from .errors import (
    ConsistencyError,
    DimensionError,
    DimensionGuard,
    DRMPCError,
    EmptyTightening,
    IllConditioned,
    Infeasible,
    NotControllable,
    NumericalFailure,
    NumericallyUncontrollable,
    RankDeficient,
    Unbounded,
)
from .ftocp import FTOCPSpec, StageCost, build_drmpc, build_nominal, solve_ftocp
from .linsys import LinearSystem, ProblemInstance, deadbeat_horizon, generate_instance
from .polytope import HPolyhedron, VPolytope, box, pontryagin_diff_image
from .tightening import TightenedSequences, tighten

__version__ = "0.1.0"
