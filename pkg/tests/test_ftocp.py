from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from drmpc.deadbeat import synthesize_gains
from drmpc.errors import DimensionError, DRMPCError
from drmpc.ftocp import (
    StageCost,
    build_drmpc,
    build_nominal,
    complexity_parity,
    constraint_replay,
    solve_ftocp,
)
from drmpc.linsys import generate_instance
from drmpc.optbackend import ExternalBackend, Status
from drmpc.tightening import tighten


@pytest.fixture
def di_problem(di):
    pol = synthesize_gains(di.sys)
    return di, tighten(di, pol, N=4), StageCost.identity(2, 1)


def test_stage_cost():
    c = StageCost.identity(2, 1, q=2.0, r=0.5)
    assert c(np.array([1.0, 1.0]), np.array([2.0])) == pytest.approx(2.0 * 2 + 0.5 * 4)
    assert StageCost.identity(2, 1, r=0.0).R[0, 0] == 0.0
    with pytest.raises(DimensionError):
        StageCost(np.zeros((2, 2)), np.eye(1))
    with pytest.raises(DimensionError):
        StageCost(np.eye(2), -np.eye(1))
    with pytest.raises(DimensionError):
        StageCost([[1.0, 2.0], [0.0, 1.0]], np.eye(1))


def test_counts(di_problem):
    inst, t, cost = di_problem
    spec = build_drmpc(inst, t, cost, [0.5, -0.2])
    N, n, m = 4, 2, 1
    assert spec.counts() == (N * (m + n), N * n + n, N * (2 * m + 2 * n))


def test_parity_with_nominal(di_problem):
    inst, t, cost = di_problem
    a = build_drmpc(inst, t, cost, [0.5, -0.2])
    b = build_nominal(inst, cost, [0.5, -0.2], t.N)
    assert complexity_parity(a, b)
    assert b.kind == "nominal" and a.kind == "drmpc"
    with pytest.raises(DimensionError):
        build_nominal(inst, cost, [0.0, 0.0], 0)


def test_solution_respects_sets_and_terminal(di_problem):
    inst, t, cost = di_problem
    plan = solve_ftocp(build_drmpc(inst, t, cost, [0.5, -0.2]))
    assert plan.feasible and plan.status is Status.OPTIMAL
    rep = constraint_replay(inst.sys, t, [0.5, -0.2], plan.u)
    assert rep["input"] <= 1e-9 and rep["state"] <= 1e-9 and rep["terminal"] <= 1e-9
    # the planned states are the dynamics applied to the planned inputs
    x = plan.x[0]
    for j in range(t.N):
        x = inst.sys.step(x, plan.u[j])
        np.testing.assert_allclose(plan.x[j + 1], x, atol=1e-10)


def test_objective_is_sum_of_stage_costs(di_problem):
    inst, t, cost = di_problem
    plan = solve_ftocp(build_drmpc(inst, t, cost, [0.5, -0.2]))
    total = sum(cost(plan.x[j], plan.u[j]) for j in range(t.N))
    assert plan.objective == pytest.approx(total, rel=1e-10)


def test_matches_external_qp(di_problem):
    inst, t, cost = di_problem
    spec = build_drmpc(inst, t, cost, [0.5, -0.2])
    a = solve_ftocp(spec)
    b = solve_ftocp(spec, ExternalBackend())
    assert a.objective == pytest.approx(b.objective, rel=1e-6)
    np.testing.assert_allclose(a.u, b.u, atol=1e-5)


def test_infeasible_initial_state(di_problem):
    inst, t, cost = di_problem
    plan = solve_ftocp(build_drmpc(inst, t, cost, [50.0, 0.0]))
    assert not plan.feasible
    assert plan.status is Status.INFEASIBLE


def test_with_initial_state_only_moves_rhs(di_problem):
    inst, t, cost = di_problem
    a = build_drmpc(inst, t, cost, [0.5, -0.2])
    b = a.with_initial_state([0.1, 0.1])
    c = build_drmpc(inst, t, cost, [0.1, 0.1])
    np.testing.assert_array_equal(b.qp.b_eq, c.qp.b_eq)
    np.testing.assert_array_equal(b.qp.G_in, c.qp.G_in)
    assert b.constant == c.constant
    assert set(a.to_dict()) >= {"H", "f", "G", "h", "A_eq", "b_eq", "x0", "N"}


def test_dimension_checks(di_problem):
    inst, t, cost = di_problem
    with pytest.raises(DimensionError):
        build_drmpc(inst, t, cost, [1.0, 2.0, 3.0])
    with pytest.raises(DimensionError):
        build_drmpc(inst, t, StageCost.identity(3, 1), [0.0, 0.0])
    with pytest.raises(DimensionError):
        build_drmpc(inst, t, cost, [np.nan, 0.0])


@given(st.integers(2, 8), st.integers(0, 10**6), st.integers(0, 3))
def test_parity_on_generated_instances(n, seed, extra):
    m = 1 + seed % n
    inst = generate_instance(n, m, seed)
    try:
        pol = synthesize_gains(inst.sys)
    except DRMPCError:
        return  # ill-conditioned draw, no spec to compare
    t = tighten(inst, pol, N=pol.M + extra, strict=False)
    cost = StageCost.identity(n, m)
    x0 = np.zeros(n)
    assert complexity_parity(build_drmpc(inst, t, cost, x0), build_nominal(inst, cost, x0, t.N))
