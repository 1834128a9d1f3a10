"""Discrete-time LTI plant ``x+ = A x + B u + d``, controllability tests and
the random instance family used by the benchmark."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NotControllable, NumericallyUncontrollable
from .polytope import HPolyhedron, box_facets

EPS = np.finfo(float).eps
MAX_REDRAWS = 100


@dataclass(frozen=True, eq=False)
class LinearSystem:
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.asarray(self.B, dtype=float)
        if B.ndim == 1:
            B = B.reshape(-1, 1)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
            raise DimensionError(f"A must be square, got {A.shape}")
        if B.shape[0] != A.shape[0] or B.shape[1] < 1:
            raise DimensionError(f"B must be {A.shape[0]}xm with m >= 1, got {B.shape}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
            raise DimensionError("system matrices must be finite")
        A.setflags(write=False)
        B.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    def step(self, x, u, d=None):
        x_next = self.A @ x + self.B @ u
        return x_next if d is None else x_next + d

    def __eq__(self, other):
        return (
            isinstance(other, LinearSystem)
            and np.array_equal(self.A, other.A)
            and np.array_equal(self.B, other.B)
        )


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    sys: LinearSystem
    U: HPolyhedron
    X: HPolyhedron
    D: HPolyhedron
    seed: int | None = None

    def __post_init__(self):
        if self.U.dim != self.sys.m or self.X.dim != self.sys.n or self.D.dim != self.sys.n:
            raise DimensionError("constraint set dimensions do not match the system")

    @property
    def n(self) -> int:
        return self.sys.n

    @property
    def m(self) -> int:
        return self.sys.m

    def __eq__(self, other):
        return (
            isinstance(other, ProblemInstance)
            and self.sys == other.sys
            and self.U == other.U
            and self.X == other.X
            and self.D == other.D
            and self.seed == other.seed
        )


def controllability_block(sys: LinearSystem, M: int) -> np.ndarray:
    """``[A^{M-1}B | A^{M-2}B | ... | AB | B]``, highest power first."""
    if M < 1:
        raise DimensionError("M must be a positive integer")
    blocks = [sys.B]
    for _ in range(M - 1):
        blocks.append(sys.A @ blocks[-1])
    return np.hstack(blocks[::-1])


def numerical_rank(P: np.ndarray) -> int:
    s = np.linalg.svd(P, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    tol = max(P.shape) * EPS * s[0]
    return int(np.sum(s > tol))


def is_controllable(sys: LinearSystem) -> bool:
    """Eigenvector (PBH) test: ``[A - lambda I, B]`` has rank n at every
    eigenvalue of A.

    Unlike the Krylov rank test this stays well conditioned when A is close to
    a multiple of the identity.
    """
    n = sys.n
    scale = max(np.linalg.norm(sys.A, 2), np.linalg.norm(sys.B, 2), 1.0)
    for lam in np.linalg.eigvals(sys.A):
        pencil = np.hstack([sys.A - lam * np.eye(n), sys.B.astype(complex)])
        s = np.linalg.svd(pencil, compute_uv=False)
        if s[-1] <= (n + sys.m) * EPS * scale * 1e3:
            return False
    return True


def deadbeat_horizon(sys: LinearSystem) -> int:
    """Smallest M for which the controllability block has full row rank."""
    n = sys.n
    blocks = [sys.B]
    for M in range(1, n + 1):
        P = np.hstack(blocks[::-1])
        if numerical_rank(P) == n:
            return M
        blocks.append(sys.A @ blocks[-1])
    if is_controllable(sys):
        raise NumericallyUncontrollable(
            "controllability matrix is numerically rank deficient for a controllable pair"
        )
    raise NotControllable("rank of the n-step controllability matrix is below n")


def instance_rng(seed: int) -> np.random.Generator:
    """PCG64 stream for one instance; the seed is the whole identity."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def random_system(n: int, m: int, seed: int) -> LinearSystem:
    """Dense pair with ``A ~ N(0, 1/n)`` and ``B ~ N(0, 1)``, redrawn until controllable.

    The spectral radius of ``A`` stays near 1 for every n, which keeps the
    controllability blocks usable for a single input up to n of about 20;
    beyond that the single-input blocks are numerically rank deficient.
    """
    if n < 1 or m < 1:
        raise DimensionError("n and m must be positive")
    rng = instance_rng(seed)
    for _ in range(MAX_REDRAWS):
        sys = LinearSystem(rng.standard_normal((n, n)) / np.sqrt(n), rng.standard_normal((n, m)))
        if is_controllable(sys):
            return sys
    raise NotControllable(f"no controllable draw after {MAX_REDRAWS} attempts")


def generate_instance(n: int, m: int, seed: int) -> ProblemInstance:
    """Random benchmark instance: ``A = I + 0.01 N(0,1)``, ``B = N(0,1)`` and
    axis-aligned boxes for U, X, D with bounds ``10|N|``, ``100|N|``, ``0.1|N|``.

    Bounds use absolute values of the normal draws so every set contains the
    origin. The pair is redrawn (same stream) until it passes the eigenvector
    controllability test.
    """
    if n < 1 or m < 1:
        raise DimensionError("n and m must be positive")
    if m > n:
        raise DimensionError(f"m = {m} > n = {n} is not applicable")
    rng = instance_rng(seed)
    for _ in range(MAX_REDRAWS):
        A = np.eye(n) + 0.01 * rng.standard_normal((n, n))
        B = rng.standard_normal((n, m))
        sys = LinearSystem(A, B)
        if is_controllable(sys):
            break
    else:
        raise NotControllable(f"no controllable draw after {MAX_REDRAWS} attempts")
    hu = 10.0 * np.abs(rng.standard_normal(2 * m))
    hx = 100.0 * np.abs(rng.standard_normal(2 * n))
    hd = 0.1 * np.abs(rng.standard_normal(2 * n))
    return ProblemInstance(
        sys=sys,
        U=HPolyhedron(box_facets(m), hu),
        X=HPolyhedron(box_facets(n), hx),
        D=HPolyhedron(box_facets(n), hd),
        seed=int(seed),
    )


def double_integrator(u_max: float = 1.0, x_max: float = 10.0, d_max: float = 0.05) -> ProblemInstance:
    """``A = [[1, 1], [0, 1]]``, ``B = [0; 1]`` with symmetric boxes."""
    sys = LinearSystem(np.array([[1.0, 1.0], [0.0, 1.0]]), np.array([[0.0], [1.0]]))
    return ProblemInstance(
        sys=sys,
        U=HPolyhedron(box_facets(1), np.full(2, u_max)),
        X=HPolyhedron(box_facets(2), np.full(4, x_max)),
        D=HPolyhedron(box_facets(2), np.full(4, d_max)),
    )
