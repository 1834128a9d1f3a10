"""Receding-horizon closed loop: re-solve the FTOCP at every measured state,
apply the first planned input, add a disturbance from ``D``, repeat."""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionError, DimensionGuard, Infeasible, NumericalFailure
from .ftocp import StageCost, build_drmpc, solve_ftocp
from .linsys import LinearSystem, ProblemInstance
from .optbackend import Backend, LPProblem, Status, default_backend
from .polytope import VERTEX_ORACLE_MAX_DIM, HPolyhedron, box_bounds, contains, support_offsets, vertex_oracle
from .tightening import TightenedSequences


class DisturbanceKind(str, enum.Enum):
    ZERO = "zero"
    UNIFORM = "uniform"
    VERTEX = "vertex"
    SEQUENCE = "sequence"


@dataclass(frozen=True)
class DisturbanceMode:
    kind: DisturbanceKind = DisturbanceKind.ZERO
    sequence: Optional[np.ndarray] = None
    zero_after: Optional[int] = None  # disturbances vanish from this step on

    def __post_init__(self):
        object.__setattr__(self, "kind", DisturbanceKind(self.kind))
        if self.kind is DisturbanceKind.SEQUENCE and self.sequence is None:
            raise ValueError("sequence mode needs disturbance data")


def _chebyshev_center(D: HPolyhedron) -> np.ndarray:
    norms = np.linalg.norm(D.G, axis=1)
    c = np.zeros(D.dim + 1)
    c[-1] = 1.0
    r = default_backend().solve_lp(LPProblem(c=c, G=np.hstack([D.G, norms[:, None]]), h=D.h))
    if r.status is not Status.OPTIMAL:
        raise Infeasible("disturbance set has no interior point")
    return r.x[:-1]


def _hit_and_run(D: HPolyhedron, rng: np.random.Generator, steps: int) -> np.ndarray:
    x = _chebyshev_center(D)
    for _ in range(steps):
        v = rng.standard_normal(D.dim)
        v /= np.linalg.norm(v)
        Gv = D.G @ v
        slack = D.h - D.G @ x
        with np.errstate(divide="ignore"):
            t = slack / Gv
        hi = t[Gv > 0].min(initial=np.inf)
        lo = t[Gv < 0].max(initial=-np.inf)
        if not (np.isfinite(lo) and np.isfinite(hi)):
            raise DimensionError("hit-and-run needs a bounded disturbance set")
        x = x + rng.uniform(lo, hi) * v
    return x


def sample_disturbance(D: HPolyhedron, mode: DisturbanceMode, rng: np.random.Generator, k: int = 0) -> np.ndarray:
    """One admissible disturbance for step ``k``."""
    if mode.zero_after is not None and k >= mode.zero_after:
        return np.zeros(D.dim)
    kind = mode.kind
    if kind is DisturbanceKind.ZERO:
        return np.zeros(D.dim)
    if kind is DisturbanceKind.SEQUENCE:
        d = np.asarray(mode.sequence[k], dtype=float)
        if not contains(D, d):
            raise ValueError(f"disturbance {d} at step {k} is outside D")
        return d
    bounds = box_bounds(D)
    if kind is DisturbanceKind.UNIFORM:
        if bounds is not None:
            return rng.uniform(bounds[0], bounds[1])
        return _hit_and_run(D, rng, steps=10 * D.dim + 20)
    if kind is DisturbanceKind.VERTEX:
        if bounds is not None:
            upper = rng.integers(0, 2, size=D.dim).astype(bool)
            return np.where(upper, bounds[1], bounds[0])
        if D.dim > VERTEX_ORACLE_MAX_DIM:
            raise DimensionGuard("random vertices of a non-box set need the vertex oracle (d <= 4)")
        V = vertex_oracle(D).vertices
        return V[rng.integers(0, V.shape[0])].copy()
    raise ValueError(f"unknown disturbance mode {kind}")


@dataclass
class ClosedLoopTrace:
    states: np.ndarray  # (T+1, n); shorter if a step was infeasible
    inputs: np.ndarray  # (T, m)
    disturbances: np.ndarray  # (T, n)
    feasible: np.ndarray  # (T,) per-step solve outcome
    objectives: np.ndarray
    solve_seconds: np.ndarray
    infeasible_step: Optional[int] = None
    message: str = ""

    @property
    def steps(self) -> int:
        return self.inputs.shape[0]

    @property
    def all_feasible(self) -> bool:
        return self.infeasible_step is None


@dataclass
class ISSMetrics:
    tail_max: float
    peak: float
    norms: np.ndarray
    running_max: np.ndarray
    decay: np.ndarray


def run_closed_loop(instance: ProblemInstance, tight: TightenedSequences, cost: StageCost, x0, steps: int,
                    mode: DisturbanceMode, seed: int = 0, backend: Optional[Backend] = None) -> ClosedLoopTrace:
    """Simulate ``steps`` receding-horizon steps from ``x0``.

    Infeasibility is recorded, not raised: the trace stops at the first step
    whose FTOCP has no solution and ``infeasible_step`` names it.
    """
    backend = backend or default_backend()
    sys = instance.sys
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))
    base = build_drmpc(instance, tight, cost, x0)
    x = base.x0
    xs, us, ds, feas, objs, secs = [x], [], [], [], [], []
    failed, message = None, ""
    for k in range(steps):
        spec = base.with_initial_state(x)
        t0 = time.perf_counter()
        try:
            plan = solve_ftocp(spec, backend)
        except NumericalFailure as exc:
            plan, message = None, str(exc)
        secs.append(time.perf_counter() - t0)
        if plan is None or not plan.feasible:
            feas.append(False)
            objs.append(np.nan)
            failed = k
            message = message or (plan.message if plan else "")
            break
        feas.append(True)
        objs.append(plan.objective)
        u = plan.first
        d = sample_disturbance(instance.D, mode, rng, k)
        x = sys.step(x, u, d)
        us.append(u)
        ds.append(d)
        xs.append(x)
    n, m = sys.n, sys.m
    return ClosedLoopTrace(
        states=np.array(xs).reshape(-1, n),
        inputs=np.array(us).reshape(-1, m),
        disturbances=np.array(ds).reshape(-1, n),
        feasible=np.array(feas, dtype=bool),
        objectives=np.array(objs, dtype=float),
        solve_seconds=np.array(secs, dtype=float),
        infeasible_step=failed,
        message=message,
    )


def replay(sys: LinearSystem, x0, inputs: Sequence, disturbances: Sequence) -> np.ndarray:
    """States reproduced from logged inputs and disturbances."""
    x = np.asarray(x0, dtype=float)
    xs = [x]
    for u, d in zip(inputs, disturbances):
        x = sys.step(x, u, d)
        xs.append(x)
    return np.array(xs)


def iss_metrics(trace: ClosedLoopTrace) -> ISSMetrics:
    """Observable surrogates of input-to-state stability for one trace."""
    norms = np.linalg.norm(trace.states, axis=1)
    if norms.size == 0:
        z = np.zeros(0)
        return ISSMetrics(0.0, 0.0, z, z, z)
    half = (norms.size - 1) // 2
    x0 = norms[0]
    decay = norms / x0 if x0 > 0 else np.zeros_like(norms)
    return ISSMetrics(
        tail_max=float(norms[half:].max()),
        peak=float(norms.max()),
        norms=norms,
        running_max=np.maximum.accumulate(norms),
        decay=decay,
    )


def one_step_bound(tight: TightenedSequences, D: HPolyhedron, backend: Optional[Backend] = None) -> float:
    """Upper bound on ``||x_{k+1}||_inf`` after any feasible step.

    The successor state is ``x_{1|k} + d`` with ``x_{1|k} in X_1``, so its
    coordinates are bounded by the support values of ``X_1`` and ``D``.
    """
    backend = backend or default_backend()
    X1 = tight.state_set(1)
    dirs = np.vstack([np.eye(X1.dim), -np.eye(X1.dim)])
    return float(np.max(support_offsets(X1, dirs, backend) + support_offsets(D, dirs, backend)))


def trace_header(n: int, m: int, timing: bool = True) -> list:
    cols = ["k"] + [f"x{i}" for i in range(n)] + [f"u{i}" for i in range(m)] + [f"d{i}" for i in range(n)]
    cols += ["feasible", "objective"]
    if timing:
        cols.append("solve_ms")
    return cols


def trace_rows(trace: ClosedLoopTrace, timing: bool = True) -> list:
    """One row per visited state; input, disturbance and solve fields are
    blank on the last state, which has no step after it."""
    n, m = trace.states.shape[1], trace.inputs.shape[1]
    rows = []
    for k in range(trace.states.shape[0]):
        row = [k] + [repr(float(v)) for v in trace.states[k]]
        if k < trace.steps:
            row += [repr(float(v)) for v in trace.inputs[k]] + [repr(float(v)) for v in trace.disturbances[k]]
        else:
            row += [""] * (m + n)
        if k < trace.feasible.size:
            row += [int(trace.feasible[k]), repr(float(trace.objectives[k]))]
            if timing:
                row.append(f"{1e3 * trace.solve_seconds[k]:.6f}")
        else:
            row += ["", ""] + ([""] if timing else [])
        rows.append(row)
    return rows


def write_trace(trace: ClosedLoopTrace, path, timing: bool = True) -> None:
    import csv

    n, m = trace.states.shape[1], trace.inputs.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(trace_header(n, m, timing))
        w.writerows(trace_rows(trace, timing))


def feasible_extent(spec, direction, start: float, bisections: int = 30,
                    backend: Optional[Backend] = None) -> float:
    """Largest ``t`` with a feasible FTOCP at ``t * direction`` (0 if none is found).

    The feasible initial states are convex, so when they contain the origin
    the feasible part of a ray is a segment; halving from ``start`` finds a
    feasible point and bisection then locates the segment's end.
    """
    backend = backend or default_backend()

    def feasible(t):
        return solve_ftocp(spec.with_initial_state(t * direction), backend).feasible

    lo, hi = 0.0, start
    for _ in range(60):
        if feasible(hi):
            lo = hi
            break
        hi *= 0.5
    if lo == 0.0:
        return 0.0
    if lo < start:
        hi = 2.0 * lo
        for _ in range(bisections):
            mid = 0.5 * (lo + hi)
            if feasible(mid):
                lo = mid
            else:
                hi = mid
    return lo


def pick_initial_state(instance: ProblemInstance, tight: TightenedSequences, cost: StageCost,
                       rng: np.random.Generator, fraction: float = 0.5, directions: int = 1,
                       backend: Optional[Backend] = None) -> Optional[np.ndarray]:
    """A random nonzero state from which the FTOCP is feasible.

    Draws ``directions`` random directions, keeps the one along which the
    feasible segment reaches farthest and returns the point at ``fraction``
    of its length. ``None`` if every direction is infeasible.
    """
    backend = backend or default_backend()
    bounds = box_bounds(instance.X)
    size = float(np.min(np.abs(np.concatenate(bounds)))) if bounds is not None else 1.0
    spec = build_drmpc(instance, tight, cost, np.zeros(instance.n))
    best, best_v = 0.0, None
    for _ in range(directions):
        v = rng.standard_normal(instance.n)
        v = v / np.linalg.norm(v)
        t = feasible_extent(spec, v, size * np.sqrt(instance.n), backend=backend)
        if t > best:
            best, best_v = t, v
    if best_v is None:
        return None
    return fraction * best * best_v
