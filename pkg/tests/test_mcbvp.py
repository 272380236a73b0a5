import numpy as np
import pytest

from unibranch import mcbvp
from unibranch.continuation import StepControl, trace
from unibranch.errors import ConfigError, DomainError
from unibranch.oracles import fd_jacobian, shooting_solve
from unibranch.problem_model import Point, scaled_error


def test_mesh_validation():
    with pytest.raises(ConfigError):
        mcbvp.MeshProblem(q_exp=1.0)
    with pytest.raises(ConfigError):
        mcbvp.MeshProblem(delta=1.0)
    with pytest.raises(ConfigError):
        mcbvp.MeshProblem(mu=9.0)
    mesh = mcbvp.MeshProblem(m=9)
    assert mesh.h == pytest.approx(0.1)
    assert np.allclose(mesh.x, np.arange(1, 10) * 0.1)


def test_principal_eigenvalue():
    assert mcbvp.principal_eigenvalue_of(9) == pytest.approx(9.7887, abs=1e-4)
    assert mcbvp.principal_eigenvalue_of(199) == pytest.approx(np.pi ** 2, abs=1e-3)
    m = 30
    h = 1.0 / (m + 1)
    L = (2 * np.eye(m) - np.eye(m, k=1) - np.eye(m, k=-1)) / h ** 2
    assert mcbvp.principal_eigenvalue_of(m) == pytest.approx(np.linalg.eigvalsh(L)[0], rel=1e-12)
    assert mcbvp.principal_eigenvalue_of(4000) == pytest.approx(np.pi ** 2, abs=1e-5)


def test_residual_zero_state():
    mesh = mcbvp.MeshProblem(m=40)
    for lam in (-2.0, 0.0, 0.5):
        assert np.all(mcbvp.residual(mesh, lam, np.zeros(40)) == 0.0)


def test_residual_sine_limit():
    """At lambda = 0, mu = pi^2, q = 2 the residual of sin(pi x) tends to sin^2(pi x)."""
    errs = []
    for m in (49, 99, 199, 399):
        mesh = mcbvp.MeshProblem(m=m, mu=np.pi ** 2 + 1e-9)
        s = np.sin(np.pi * mesh.x)
        errs.append(np.max(np.abs(mcbvp.residual(mesh, 0.0, s) - s ** 2)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all((orders >= 1.8) & (orders <= 2.2))


def test_manufactured_consistency_order():
    """Residual of an exact smooth solution of a forced problem is O(h^2)."""
    lam, mu, q = -0.5, 12.0, 2.0
    ue = lambda x: 0.6 * np.sin(np.pi * x) * (1 + 0.3 * x)
    errs = []
    for m in (50, 101, 203, 407):
        mesh = mcbvp.MeshProblem(m=m, mu=mu, q_exp=q)
        xf = np.linspace(0, 1, 20001)
        uf = ue(xf)
        p = np.gradient(uf, xf, edge_order=2)
        flux = p / np.sqrt(1 - lam * p ** 2)
        forcing = -np.gradient(flux, xf, edge_order=2) - mu * uf + uf ** q
        f = np.interp(mesh.x, xf, forcing)
        errs.append(np.max(np.abs(mcbvp.residual(mesh, lam, ue(mesh.x)) - f)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all((orders >= 1.8) & (orders <= 2.2)), orders


def test_residual_domain_violation():
    mesh = mcbvp.MeshProblem(m=9)
    u = np.zeros(9)
    u[0] = 2 * mesh.h   # slope 2 at the first half node
    with pytest.raises(DomainError):
        mcbvp.residual(mesh, 0.5, u)


def test_jacobian_laplacian_case(rng):
    mesh = mcbvp.MeshProblem(m=12)
    u = np.abs(rng.standard_normal(12))
    J = mcbvp.jacobian(mesh, 0.0, u)
    L = (2 * np.eye(12) - np.eye(12, k=1) - np.eye(12, k=-1)) / mesh.h ** 2
    assert np.allclose(J, L + np.diag(-mesh.mu + 2 * u), rtol=1e-14, atol=1e-9)


def test_jacobian_coefficient_at_unit_slope():
    mesh = mcbvp.MeshProblem(m=9)
    u = np.zeros(9)
    u[0] = mesh.h   # |p| = 1 at both half nodes around node 1
    J = mcbvp.jacobian(mesh, 0.5, u)
    L0 = mcbvp.jacobian(mesh, 0.0, u)
    a = 0.5 ** -1.5
    assert a == pytest.approx(2.82843, abs=1e-5)
    assert (J[0, 0] - L0[0, 0]) * mesh.h ** 2 == pytest.approx(2 * (a - 1.0), rel=1e-12)
    assert J[0, 1] * mesh.h ** 2 == pytest.approx(-a, rel=1e-12)
    Jfd = fd_jacobian(mcbvp.make_system(mesh), Point(0.5, u))
    assert scaled_error(mesh.h ** 2 * J, Jfd) <= 1e-6


def test_jacobian_matches_fd_random_states(rng):
    mesh = mcbvp.MeshProblem(m=40)
    system = mcbvp.make_system(mesh)
    u0 = mcbvp.base_solution(mesh)
    for _ in range(10):
        p = Point(rng.uniform(-1, 0.01), u0 * (1 + 0.1 * rng.standard_normal(40)))
        if system.domain.margin(p.lam, p.u) <= 0.05:
            continue
        assert scaled_error(system.Fu(p), fd_jacobian(system, p)) <= 1e-6


def test_margin_examples():
    mesh = mcbvp.MeshProblem(m=9, delta=0.1)
    u = np.zeros(9)
    u[0] = np.sqrt(0.85) * mesh.h
    assert mcbvp.margin(mesh, 1.0, u) == pytest.approx(0.05)
    u[0] = np.sqrt(0.5) * mesh.h
    assert mcbvp.margin(mesh, 2.0, u) == pytest.approx(-0.1)
    u[0] = mesh.h
    assert mcbvp.margin(mesh, 0.5, u) == pytest.approx(0.4)
    assert mcbvp.margin(mesh, -3.0, 5 * np.sin(np.pi * mesh.x)) >= 0.9


def test_positivity_check():
    x = np.linspace(0.01, 0.99, 50)
    assert not mcbvp.positivity_check(np.zeros(50))
    assert not mcbvp.positivity_check(np.sin(2 * np.pi * x))
    assert mcbvp.positivity_check(np.sin(np.pi * x))


def test_base_solution_default(mesh200, base200):
    system = mcbvp.make_system(mesh200)
    assert system.residual_norm(Point(0.0, base200)) <= 1e-12
    assert mcbvp.positivity_check(base200)
    assert np.max(base200) <= 12.0
    assert np.allclose(base200, base200[::-1], atol=1e-10)


def test_base_solution_bound_cubic():
    mesh = mcbvp.MeshProblem(m=100, mu=2 * np.pi ** 2, q_exp=3.0)
    u0 = mcbvp.base_solution(mesh)
    assert mesh.apriori_bound == pytest.approx(4.4429, abs=1e-4)
    assert mcbvp.positivity_check(u0) and np.max(u0) <= mesh.apriori_bound


def test_base_solution_index_stable():
    for m in (50, 100, 200):
        mesh = mcbvp.MeshProblem(m=m)
        u0 = mcbvp.base_solution(mesh)
        assert np.all(np.linalg.eigvalsh(mcbvp.jacobian(mesh, 0.0, u0)) > 0)


@pytest.mark.parametrize("mu", [11.0, 12.0, 15.0])
@pytest.mark.parametrize("q", [2.0, 3.0])
def test_base_solution_matches_shooting(mu, q):
    mesh = mcbvp.MeshProblem(m=200, mu=mu, q_exp=q)
    u0 = mcbvp.base_solution(mesh)
    sh = shooting_solve(mu, q, 0.0, mesh.x)
    err = np.max(np.abs(u0 - sh.u))
    assert err <= 10 * mesh.h ** 2
    if (mu, q) == (12.0, 2.0):
        assert err <= 5e-4


def test_discretization_order_against_shooting():
    errs = []
    for m in (49, 99, 199):
        mesh = mcbvp.MeshProblem(m=m)
        errs.append(np.max(np.abs(mcbvp.base_solution(mesh) - shooting_solve(12.0, 2.0, 0.0, mesh.x).u)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all((orders >= 1.8) & (orders <= 2.2))


def test_grad_monitor():
    mesh = mcbvp.MeshProblem(m=100)
    u0 = mcbvp.base_solution(mesh)
    vals, flag = mcbvp.grad_blowup_monitor(mesh, [Point(0.0, u0)])
    assert not flag and vals[0] == pytest.approx(np.max(np.abs(np.diff(np.r_[0, u0, 0]))) / mesh.h)
    u = np.zeros(100)
    u[50] = 2e3 * mesh.h
    _, flag = mcbvp.grad_blowup_monitor(mesh, [Point(0.0, u)])
    assert flag


def test_branches_respect_bounds(mesh200, base200):
    system = mcbvp.make_system(mesh200)
    ctl = StepControl(h_init=0.05, h_max=1.0)
    bound = mesh200.apriori_bound + 10 * mesh200.h ** 2
    for side in ("plus", "minus"):
        br = trace(system, None, Point(0.0, base200), side, ctl)
        for p in br.points:
            assert np.max(np.abs(p.u)) <= bound
            assert mcbvp.positivity_check(p.u)
            if p.lam > 0:
                assert mcbvp.grad_sup(mesh200, p.u) < np.sqrt((1 - mesh200.delta) / p.lam)
