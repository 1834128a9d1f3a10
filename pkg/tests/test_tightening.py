from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from drmpc.deadbeat import synthesize_gains
from drmpc.errors import DimensionError, EmptyTightening
from drmpc.linsys import ProblemInstance, double_integrator, random_system
from drmpc.polytope import box, box_bounds, contains
from drmpc.tightening import TightenedSequences, tighten, tighten_inputs, tighten_states


def corners(P):
    lo, hi = box_bounds(P)
    return [np.where(b, hi, lo) for b in itertools.product([0, 1], repeat=lo.size)]


def test_double_integrator_offsets(di):
    # |K_0| row sum 3, |K_1| row sum 2, |Phi_0| row sums 2, all times 0.05
    pol = synthesize_gains(di.sys)
    t = tighten(di, pol, N=4)
    np.testing.assert_allclose(t.input_set(0).h, [1.0, 1.0])
    np.testing.assert_allclose(t.input_set(1).h, [0.85, 0.85], atol=1e-12)
    np.testing.assert_allclose(t.input_set(2).h, [0.75, 0.75], atol=1e-12)
    np.testing.assert_allclose(t.state_set(1).h, np.full(4, 9.95), atol=1e-12)
    np.testing.assert_allclose(t.state_set(2).h, np.full(4, 9.85), atol=1e-12)
    assert t.lp_count == 2 * (2 + 4)
    assert t.origin_admissible()


def test_tail_sets_are_constant(di):
    t = tighten(di, synthesize_gains(di.sys), N=6)
    assert len(t.input_sets) == 6 and len(t.state_sets) == 6
    assert all(P == t.input_set(2) for P in t.input_sets[2:])
    assert all(P == t.state_set(2) for P in t.state_sets[1:])
    with pytest.raises(IndexError):
        t.state_set(0)


def test_helpers_agree_with_tighten(di):
    pol = synthesize_gains(di.sys)
    t = tighten(di, pol, N=3)
    assert tighten_inputs(di.U, di.D, pol, 3) == t.input_sets
    assert tighten_states(di.X, di.D, pol.aux, pol.M, 3) == t.state_sets
    with pytest.raises(DimensionError):
        tighten_states(di.X, di.D, [], pol.M, 3)


def test_horizon_shorter_than_m(di):
    pol = synthesize_gains(di.sys)
    with pytest.raises(DimensionError):
        tighten(di, pol, N=1)
    with pytest.raises(DimensionError):
        tighten(di, pol).with_horizon(1)
    assert tighten(di, pol).with_horizon(5).N == 5


def test_empty_tightening_strict_and_recorded():
    inst = double_integrator(u_max=0.1, d_max=0.05)
    pol = synthesize_gains(inst.sys)
    with pytest.raises(EmptyTightening) as exc:
        tighten(inst, pol)
    assert exc.value.family == "input" and exc.value.stage == 1
    t = tighten(inst, pol, strict=False)
    assert ("input", 1) in t.empty_stages
    assert not t.origin_admissible()


def test_zero_disturbance_is_identity(di):
    inst = ProblemInstance(di.sys, di.U, di.X, box([0.0, 0.0], [0.0, 0.0]))
    t = tighten(inst, synthesize_gains(di.sys), N=3)
    u = TightenedSequences.untightened(di.U, di.X, 3)
    for a, b in zip(t.input_sets + t.state_sets, u.input_sets + u.state_sets):
        np.testing.assert_allclose(a.h, b.h, atol=1e-14)


@given(st.integers(2, 4), st.integers(0, 10**6))
def test_stage_robustness(n, seed):
    """Every point of a tightened stage survives the next disturbance response."""
    m = 1 + seed % n
    sys = random_system(n, m, seed)
    rng = np.random.default_rng(seed)
    U = box(-5.0 * np.ones(m), 5.0 * np.ones(m))
    X = box(-50.0 * np.ones(n), 50.0 * np.ones(n))
    D = box(-0.01 * rng.uniform(0.5, 1.0, n), 0.01 * rng.uniform(0.5, 1.0, n))
    pol = synthesize_gains(sys)
    t = tighten(ProblemInstance(sys, U, X, D), pol, strict=False)
    if t.empty_stages:
        return
    for j in range(1, pol.M + 1):
        K = pol.gain(j - 1)
        for u in corners(t.input_set(j)):
            assert all(contains(t.input_set(j - 1), u + K @ d, 1e-9) for d in corners(D))
    for j in range(1, pol.M):
        Phi = pol.transition(j - 1)
        for x in corners(t.state_set(j + 1)):
            assert all(contains(t.state_set(j), x + Phi @ d, 1e-9) for d in corners(D))
    for x in corners(t.state_set(1)):
        assert all(contains(X, x + d, 1e-9) for d in corners(D))
