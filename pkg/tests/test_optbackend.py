"""Built-in LP/QP solvers against HiGHS and cvxopt."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from drmpc.errors import DimensionError
from drmpc.optbackend import (
    BuiltinBackend,
    ExternalBackend,
    LPProblem,
    QPProblem,
    Status,
    default_backend,
    kkt_residuals,
)
from drmpc.optbackend.simplex import solve_lp
from drmpc.optbackend.activeset import solve_qp

oracle = ExternalBackend()


def random_lp(seed, bounded=True, infeasible=False):
    rng = np.random.default_rng(seed)
    nv = int(rng.integers(1, 8))
    q = int(rng.integers(1, 16))
    G = rng.standard_normal((q, nv))
    x = rng.standard_normal(nv)
    h = G @ x + rng.uniform(0.0, 1.0, q)
    if bounded:
        G = np.vstack([G, np.eye(nv), -np.eye(nv)])
        h = np.concatenate([h, np.abs(x) + 3.0, np.abs(x) + 3.0])
    if infeasible:
        g = rng.standard_normal(nv)
        G = np.vstack([G, g, -g])
        h = np.concatenate([h, [-1.0, -1.0]])  # g'x <= -1 and g'x >= 1
    return LPProblem(rng.standard_normal(nv), G, h)


def random_qp(seed, psd=False):
    rng = np.random.default_rng(seed)
    nv = int(rng.integers(2, 10))
    L = rng.standard_normal((nv, int(rng.integers(1, nv + 1)) if psd else nv))
    H = L @ L.T + (0.0 if psd else 0.1) * np.eye(nv)
    x = rng.standard_normal(nv)
    q = int(rng.integers(1, 12))
    G = np.vstack([rng.standard_normal((q, nv)), np.eye(nv), -np.eye(nv)])
    h = np.concatenate([G[:q] @ x + rng.uniform(0.0, 1.0, q), np.abs(x) + 4.0, np.abs(x) + 4.0])
    e = int(rng.integers(0, nv))
    A = rng.standard_normal((e, nv))
    return QPProblem(H, 3.0 * rng.standard_normal(nv), G, h, A, A @ x)


@given(st.integers(0, 10**6))
def test_lp_matches_highs(seed):
    p = random_lp(seed)
    mine, ref = solve_lp(p), oracle.solve_lp(p)
    assert mine.status is ref.status is Status.OPTIMAL
    assert mine.objective == pytest.approx(ref.objective, rel=1e-7, abs=1e-7)
    assert np.max(p.G @ mine.x - p.h) <= 1e-8 * (1 + np.abs(p.h).max())


@given(st.integers(0, 10**6))
def test_lp_infeasible_detected(seed):
    p = random_lp(seed, infeasible=True)
    assert oracle.solve_lp(p).status is Status.INFEASIBLE
    assert solve_lp(p).status is Status.INFEASIBLE


def test_lp_unbounded_detected():
    p = LPProblem(c=[1.0, 0.0], G=[[0.0, 1.0], [0.0, -1.0]], h=[1.0, 1.0])
    assert solve_lp(p).status is Status.UNBOUNDED
    assert oracle.solve_lp(p).status is Status.UNBOUNDED


def test_lp_trivial_box():
    # max x + 2y over the unit box: (1, 1) with value 3
    G = np.vstack([np.eye(2), -np.eye(2)])
    r = solve_lp(LPProblem([1.0, 2.0], G, np.ones(4)))
    assert r.status is Status.OPTIMAL
    assert r.objective == pytest.approx(3.0)
    np.testing.assert_allclose(r.x, [1.0, 1.0])


def test_lp_with_equalities():
    # max x0 s.t. x0 + x1 == 1, x >= 0
    G = -np.eye(2)
    r = solve_lp(LPProblem([1.0, 0.0], G, np.zeros(2), A_eq=[[1.0, 1.0]], b_eq=[1.0]))
    assert r.ok
    np.testing.assert_allclose(r.x, [1.0, 0.0], atol=1e-12)


def test_lp_null_rows_are_constant_constraints():
    # rows that are zero up to rounding must not turn into facets
    G = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0], [1e-17, -3e-17]])
    p = LPProblem([1.0, 1.0], G, np.array([1.0, 1.0, 1.0, 1.0, 5.0]))
    assert solve_lp(p).objective == pytest.approx(2.0)
    bad = LPProblem([1.0, 1.0], G, np.array([1.0, 1.0, 1.0, 1.0, -5.0]))
    assert solve_lp(bad).status is Status.INFEASIBLE


def test_lp_nearly_infeasible_interval():
    # y >= 4.22840 and y <= 4.22838 with badly scaled companions
    G = np.array([[-0.401918], [0.538718], [0.018092], [-0.018092]])
    h = np.array([-1.69947, 2.27791, 98.39, 104.66])
    assert oracle.solve_lp(LPProblem([0.0], G, h)).status is Status.INFEASIBLE
    assert solve_lp(LPProblem([0.0], G, h)).status is Status.INFEASIBLE


def test_lp_dimension_checks():
    with pytest.raises(DimensionError):
        LPProblem([1.0, 2.0], np.eye(3), np.ones(3))


@given(st.integers(0, 10**6), st.booleans())
def test_qp_matches_cvxopt(seed, psd):
    p = random_qp(seed, psd)
    mine, ref = solve_qp(p), oracle.solve_qp(p)
    assert mine.status is ref.status is Status.OPTIMAL
    assert mine.objective == pytest.approx(ref.objective, rel=1e-6, abs=1e-6)
    res = kkt_residuals(p, mine)
    assert max(res.values()) <= 1e-7


def test_qp_unconstrained_minimiser():
    H = np.array([[2.0, 0.0], [0.0, 4.0]])
    f = np.array([-2.0, -4.0])
    r = solve_qp(QPProblem(H, f, np.zeros((0, 2)), np.zeros(0), np.zeros((0, 2)), np.zeros(0)))
    np.testing.assert_allclose(r.x, [1.0, 1.0])
    assert r.objective == pytest.approx(-3.0)


def test_qp_projection_onto_halfspace():
    # min |z - (2, 2)|^2 s.t. z0 + z1 <= 2 -> (1, 1), multiplier 2
    H = 2.0 * np.eye(2)
    f = np.array([-4.0, -4.0])
    r = solve_qp(QPProblem(H, f, [[1.0, 1.0]], [2.0], np.zeros((0, 2)), np.zeros(0)))
    np.testing.assert_allclose(r.x, [1.0, 1.0], atol=1e-12)
    np.testing.assert_allclose(r.ineq_duals, [2.0], atol=1e-10)


def test_qp_infeasible():
    G = np.array([[1.0], [-1.0]])
    r = solve_qp(QPProblem([[1.0]], [0.0], G, [-1.0, -1.0], np.zeros((0, 1)), np.zeros(0)))
    assert r.status is Status.INFEASIBLE


def test_qp_inconsistent_equalities():
    A = np.array([[1.0, 0.0], [1.0, 0.0]])
    r = solve_qp(QPProblem(np.eye(2), np.zeros(2), np.zeros((0, 2)), np.zeros(0), A, [1.0, 2.0]))
    assert r.status is Status.INFEASIBLE


def test_qp_zero_curvature_unbounded():
    # linear objective along a free direction
    r = solve_qp(QPProblem(np.zeros((1, 1)), [1.0], np.zeros((0, 1)), np.zeros(0), np.zeros((0, 1)), np.zeros(0)))
    assert r.status is Status.UNBOUNDED


def test_qp_psd_flat_face():
    # min (z0)^2 - z1 over the unit box: z1 runs to its bound along zero curvature
    H = np.diag([2.0, 0.0])
    G = np.vstack([np.eye(2), -np.eye(2)])
    r = solve_qp(QPProblem(H, [0.0, -1.0], G, np.ones(4), np.zeros((0, 2)), np.zeros(0)))
    np.testing.assert_allclose(r.x, [0.0, 1.0], atol=1e-12)


def test_qp_requires_symmetric_hessian():
    with pytest.raises(DimensionError):
        QPProblem([[1.0, 1.0], [0.0, 1.0]], [0.0, 0.0], np.zeros((0, 2)), np.zeros(0), np.zeros((0, 2)), np.zeros(0))


def test_backends_share_protocol():
    assert default_backend().name == "builtin"
    assert isinstance(default_backend(), BuiltinBackend)
    p = random_lp(3)
    assert default_backend().solve_lp(p).objective == pytest.approx(oracle.solve_lp(p).objective, rel=1e-7)
