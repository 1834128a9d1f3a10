"""H-representation polyhedra and the LP-based Pontryagin difference.

A Pontryagin difference of a linear image, ``U - K D``, keeps the facet
matrix of ``U`` and lowers each offset by the support value of ``D`` in the
direction ``K' g_i``. Only right-hand sides ever change, so the facet count
of the result equals that of ``U``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import DimensionError, DimensionGuard, Infeasible, NumericalFailure, Unbounded
from .optbackend import Backend, LPProblem, Status, default_backend

TOL = 1e-9
VERTEX_ORACLE_MAX_DIM = 4


@dataclass(frozen=True, eq=False)
class HPolyhedron:
    """``{x : G x <= h}``."""

    G: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        G = np.atleast_2d(np.asarray(self.G, dtype=float))
        h = np.asarray(self.h, dtype=float).reshape(-1)
        if G.shape[0] != h.size:
            raise DimensionError(f"G has {G.shape[0]} rows but h has {h.size} entries")
        if np.isnan(G).any() or np.isnan(h).any() or not np.all(np.isfinite(G)):
            raise DimensionError("facet data must be finite")
        G.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "h", h)

    @property
    def dim(self) -> int:
        return self.G.shape[1]

    @property
    def num_facets(self) -> int:
        return self.G.shape[0]

    def with_offsets(self, h) -> "HPolyhedron":
        return HPolyhedron(self.G, h)

    def contains(self, x, tol: float = TOL) -> bool:
        return contains(self, x, tol)

    def __eq__(self, other):
        return (
            isinstance(other, HPolyhedron)
            and np.array_equal(self.G, other.G)
            and np.array_equal(self.h, other.h)
        )

    def __repr__(self):
        return f"HPolyhedron(dim={self.dim}, facets={self.num_facets})"


@dataclass(frozen=True)
class VPolytope:
    vertices: np.ndarray

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    def __len__(self):
        return self.vertices.shape[0]


class PontryaginDifference(NamedTuple):
    poly: HPolyhedron
    offsets: np.ndarray
    empty: bool


def box_facets(d: int) -> np.ndarray:
    return np.vstack([np.eye(d), -np.eye(d)])


def box(lo, hi) -> HPolyhedron:
    """Axis-aligned box ``lo <= x <= hi`` with facets ``[+I; -I]``."""
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    if lo.shape != hi.shape:
        raise DimensionError("box bounds differ in length")
    return HPolyhedron(box_facets(lo.size), np.concatenate([hi, -lo]))


def box_bounds(P: HPolyhedron):
    """``(lo, hi)`` if every facet is axis aligned, else ``None``."""
    G, h = P.G, P.h
    nz = G != 0.0
    if not np.all(nz.sum(axis=1) == 1):
        return None
    d = P.dim
    lo = np.full(d, -np.inf)
    hi = np.full(d, np.inf)
    for i, j in zip(*np.nonzero(nz)):
        bound = h[i] / G[i, j]
        if G[i, j] > 0:
            hi[j] = min(hi[j], bound)
        else:
            lo[j] = max(lo[j], bound)
    return lo, hi


def _check_point(P: HPolyhedron, x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (P.dim,):
        raise DimensionError(f"point of shape {x.shape} for a {P.dim}-dimensional set")
    return x


def contains(P: HPolyhedron, x, tol: float = TOL) -> bool:
    x = _check_point(P, x)
    return bool(np.all(P.G @ x <= P.h + tol))


def support_offset(D: HPolyhedron, g, backend: Optional[Backend] = None) -> float:
    """``max_{d in D} g' d`` by a single LP."""
    g = _check_point(D, g)
    backend = backend or default_backend()
    r = backend.solve_lp(LPProblem(c=g, G=D.G, h=D.h))
    if r.status is Status.OPTIMAL:
        return r.objective
    if r.status is Status.UNBOUNDED:
        raise Unbounded("support function is unbounded: the set is not bounded in this direction")
    if r.status is Status.INFEASIBLE:
        raise Infeasible("support function of an empty set")
    raise NumericalFailure(r.message)


def support_offsets(D: HPolyhedron, directions, backend: Optional[Backend] = None) -> np.ndarray:
    """Support values for every row of ``directions`` (one LP per row)."""
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    if directions.shape[1] != D.dim:
        raise DimensionError("direction dimension does not match the set")
    backend = backend or default_backend()
    return np.array([support_offset(D, g, backend) for g in directions])


def is_empty(P: HPolyhedron, backend: Optional[Backend] = None) -> bool:
    backend = backend or default_backend()
    r = backend.solve_lp(LPProblem(c=np.zeros(P.dim), G=P.G, h=P.h))
    if r.status is Status.NUMERICAL_FAILURE:
        raise NumericalFailure(r.message)
    return r.status is Status.INFEASIBLE


def pontryagin_diff_image(U: HPolyhedron, K, D: HPolyhedron, backend: Optional[Backend] = None) -> PontryaginDifference:
    """``U - K D = {u : G_u u <= h_u - s}`` with ``s_i = max_{d in D} G_u[i] K d``."""
    K = np.atleast_2d(np.asarray(K, dtype=float))
    if K.shape != (U.dim, D.dim):
        raise DimensionError(f"K has shape {K.shape}, expected {(U.dim, D.dim)}")
    backend = backend or default_backend()
    s = support_offsets(D, U.G @ K, backend)
    poly = U.with_offsets(U.h - s)
    return PontryaginDifference(poly, s, is_empty(poly, backend))


def _bounded(P: HPolyhedron, backend) -> bool:
    dirs = np.vstack([np.eye(P.dim), -np.eye(P.dim)])
    for g in dirs:
        r = backend.solve_lp(LPProblem(c=g, G=P.G, h=P.h))
        if r.status is Status.UNBOUNDED:
            return False
    return True


def vertex_oracle(P: HPolyhedron, tol: float = 1e-9, backend: Optional[Backend] = None) -> VPolytope:
    """Exact vertex list by brute-force facet intersection (test oracle, d <= 4)."""
    d = P.dim
    if d > VERTEX_ORACLE_MAX_DIM:
        raise DimensionGuard(f"vertex enumeration is limited to d <= {VERTEX_ORACLE_MAX_DIM}, got {d}")
    backend = backend or default_backend()
    if is_empty(P, backend):
        raise Infeasible("vertex enumeration of an empty set")
    if not _bounded(P, backend):
        raise Unbounded("vertex enumeration of an unbounded set")
    G, h = P.G, P.h
    scale = 1.0 + np.abs(h).max(initial=0.0)
    found: list = []
    for rows in itertools.combinations(range(G.shape[0]), d):
        Gs = G[list(rows)]
        if abs(np.linalg.det(Gs)) < 1e-12:
            continue
        v = np.linalg.solve(Gs, h[list(rows)])
        if np.all(G @ v <= h + tol * scale):
            if not any(np.allclose(v, w, atol=tol * scale) for w in found):
                found.append(v)
    return VPolytope(np.array(found).reshape(-1, d))
