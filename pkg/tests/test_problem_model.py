import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unibranch import mcbvp, systems
from unibranch._linalg import det_sign
from unibranch.errors import DomainError, EvaluationError
from unibranch.problem_model import (DomainSpec, Point, inside_domain, orientation,
                                     validate_consistency)


def test_point_is_immutable_and_validated():
    p = Point(0.5, [1.0, 2.0])
    assert p.n_state == 2
    with pytest.raises(ValueError):
        p.u[0] = 3.0
    with pytest.raises(EvaluationError):
        Point(np.nan, [1.0])
    with pytest.raises(EvaluationError):
        Point(0.0, [1.0, np.inf])
    q = Point.from_vector(p.vector())
    assert q.lam == p.lam and np.array_equal(q.u, p.u)


def test_domain_rejects_base_outside_window():
    with pytest.raises(ValueError):
        DomainSpec(base_lambda=3.0, lambda_window=(0.0, 1.0))


def test_linear_system_derivatives_exact(rng):
    A = rng.standard_normal((4, 4)) + 4 * np.eye(4)
    b = rng.standard_normal(4)
    sys_ = systems.linear(A, b)
    # differences of a linear map are exact for any step; a wide step keeps roundoff out
    rep = validate_consistency(sys_, Point(0.3, rng.standard_normal(4)), h_fd=1e-3)
    assert rep.err_u <= 1e-10 and rep.err_lambda <= 1e-10 and rep.ok


def test_fold_derivative_at_one():
    rep = validate_consistency(systems.fold().system, Point(1.0, [1.0]))
    assert rep.err_u <= 1e-9


def test_mcbvp_consistency_small_state():
    mesh = mcbvp.MeshProblem(m=50)
    system = mcbvp.make_system(mesh)
    rep = validate_consistency(system, Point(0.0, 0.1 * np.sin(np.pi * mesh.x)))
    assert rep.err_u <= 1e-6 and rep.err_lambda <= 1e-6


def test_consistency_outside_domain_raises():
    mesh = mcbvp.MeshProblem(m=20)
    system = mcbvp.make_system(mesh)
    u = 5.0 * np.sin(np.pi * mesh.x)
    with pytest.raises(DomainError):
        validate_consistency(system, Point(1.0, u))


@pytest.mark.parametrize("name", ["circle", "fold", "pitchfork", "line", "embedded_fold"])
def test_consistency_random_points_builtins(name, rng):
    problem = systems.BUILTINS[name]()
    for _ in range(100):
        p = Point(rng.uniform(-2, 2), problem.start.u + rng.standard_normal(problem.start.u.size))
        assert validate_consistency(problem.system, p).ok


def test_consistency_random_points_mcbvp(rng):
    mesh = mcbvp.MeshProblem(m=30)
    system = mcbvp.make_system(mesh)
    u0 = mcbvp.base_solution(mesh)
    count = 0
    while count < 100:
        p = Point(rng.uniform(-1.0, 0.01), u0 * (1 + 0.1 * rng.standard_normal(mesh.m)))
        if system.domain.margin(p.lam, p.u) <= 0.05:
            continue
        assert validate_consistency(system, p).ok
        count += 1


def test_inside_domain_examples():
    mesh = mcbvp.MeshProblem(m=9, mu=12.0, delta=0.1)
    dom = mcbvp.make_system(mesh).domain
    ok, m = inside_domain(dom, Point(-1.0, 3.0 * np.sin(np.pi * mesh.x)))
    assert ok and m >= 0.9
    ok, m = inside_domain(dom, Point(0.0, np.zeros(9)))
    assert ok and m == pytest.approx(0.9)
    # one half-node slope with p^2 = 0.95 at lambda = 1
    u = np.zeros(9)
    u[0] = np.sqrt(0.95) * mesh.h
    ok, m = inside_domain(dom, Point(1.0, u))
    assert not ok and m == pytest.approx(-0.05)


@settings(max_examples=50, deadline=None)
@given(st.floats(-0.9, 0.9), st.floats(-3, 3).filter(lambda x: abs(x) > 1e-3))
def test_orientation_is_sign_of_derivative(lam, u):
    system = systems.circle().system
    assert orientation(system, Point(lam, [u])) == np.sign(2 * u)
    assert orientation(system, Point(lam, [u])) == det_sign(system.Fu(Point(lam, [u])))
