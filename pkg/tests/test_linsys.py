from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from drmpc.errors import DimensionError, NotControllable, NumericallyUncontrollable
from drmpc.linsys import (
    LinearSystem,
    controllability_block,
    deadbeat_horizon,
    double_integrator,
    generate_instance,
    is_controllable,
    numerical_rank,
    random_system,
)
from drmpc.polytope import box_bounds


def test_system_validation():
    with pytest.raises(DimensionError):
        LinearSystem(np.ones((2, 3)), np.ones((2, 1)))
    with pytest.raises(DimensionError):
        LinearSystem(np.eye(2), np.ones((3, 1)))
    with pytest.raises(DimensionError):
        LinearSystem(np.eye(2), np.array([[np.inf], [0.0]]))
    sys = LinearSystem(np.eye(2), [1.0, 0.0])
    assert (sys.n, sys.m) == (2, 1)


def test_system_arrays_are_read_only():
    sys = LinearSystem(np.eye(2), np.ones((2, 1)))
    with pytest.raises(ValueError):
        sys.A[0, 0] = 5.0


def test_step():
    sys = double_integrator().sys
    np.testing.assert_array_equal(sys.step(np.array([1.0, 2.0]), np.array([0.5])), [3.0, 2.5])
    np.testing.assert_array_equal(sys.step(np.array([1.0, 2.0]), np.array([0.5]), np.array([0.1, 0.1])),
                                  [3.1, 2.6])


def test_controllability_block_order():
    sys = double_integrator().sys
    # [A B | B] with the highest power first
    np.testing.assert_array_equal(controllability_block(sys, 2), [[1.0, 0.0], [1.0, 1.0]])


def test_deadbeat_horizon_double_integrator():
    assert deadbeat_horizon(double_integrator().sys) == 2


def test_deadbeat_horizon_full_actuation():
    assert deadbeat_horizon(LinearSystem(np.diag([2.0, 3.0]), np.eye(2))) == 1


def test_uncontrollable_pair():
    sys = LinearSystem(np.diag([1.0, 2.0]), np.array([[1.0], [0.0]]))
    assert not is_controllable(sys)
    with pytest.raises(NotControllable):
        deadbeat_horizon(sys)


def test_numerically_uncontrollable_is_both_kinds():
    # A close to the identity: controllable, but the Krylov blocks are numerically singular
    sys = LinearSystem(np.eye(12) + 1e-6 * np.triu(np.ones((12, 12)), 1), np.eye(12)[:, :1] + 0.1)
    assert is_controllable(sys)
    with pytest.raises(NumericallyUncontrollable):
        deadbeat_horizon(sys)


@given(st.integers(2, 8), st.integers(0, 10**6))
def test_horizon_of_generic_pairs(n, seed):
    m = 1 + seed % n
    sys = random_system(n, m, seed)
    # generic pairs reach full rank as soon as the block has n columns
    assert deadbeat_horizon(sys) == -(-n // m)


def test_numerical_rank():
    assert numerical_rank(np.zeros((3, 3))) == 0
    assert numerical_rank(np.diag([1.0, 1e-20, 1.0])) == 2


def test_generate_instance_deterministic():
    a = generate_instance(6, 3, 11)
    b = generate_instance(6, 3, 11)
    assert a == b
    assert a != generate_instance(6, 3, 12)


def test_generate_instance_shapes_and_signs():
    inst = generate_instance(5, 2, 3)
    assert (inst.n, inst.m) == (5, 2)
    for P, d in ((inst.U, 2), (inst.X, 5), (inst.D, 5)):
        assert P.num_facets == 2 * d
        lo, hi = box_bounds(P)
        assert np.all(lo <= 0.0) and np.all(hi >= 0.0)
    # the dynamics are a small perturbation of the identity
    assert np.abs(inst.sys.A - np.eye(5)).max() < 0.1
    assert is_controllable(inst.sys)


def test_generate_instance_rejects_m_above_n():
    with pytest.raises(DimensionError):
        generate_instance(3, 4, 0)
    with pytest.raises(DimensionError):
        generate_instance(0, 1, 0)


def test_instance_dimension_check(di):
    from drmpc.linsys import ProblemInstance

    with pytest.raises(DimensionError):
        ProblemInstance(di.sys, di.X, di.X, di.D)
