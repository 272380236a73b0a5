"""Finite-difference model of -(u'/sqrt(1 - lam u'^2))' = mu u - u^q on (0, 1).

Homogeneous Dirichlet conditions, uniform mesh with ``m`` interior nodes.
``lam < 0`` is the prescribed mean curvature operator, ``lam > 0`` the
Minkowski (relativistic) operator, ``lam = 0`` the Laplacian. The admissible
set is ``1 - lam * max|u'|^2 > delta`` with the slope sup-norm taken over
half nodes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError, UnibranchError
from .problem_model import DomainSpec, ParameterizedSystem, Point

log = logging.getLogger(__name__)

GRAD_BLOWUP_THRESHOLD = 1e3


def principal_eigenvalue_of(m: int) -> float:
    h = 1.0 / (m + 1)
    return 2.0 / h ** 2 * (1.0 - np.cos(np.pi * h))


@dataclass(frozen=True)
class MeshProblem:
    m: int = 200
    mu: float = 12.0
    q_exp: float = 2.0
    delta: float = 0.1

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2:
            raise ConfigError("m must be an integer >= 2")
        if not self.q_exp > 1.0:
            raise ConfigError(f"q must exceed 1 (got {self.q_exp})")
        if not 0.0 < self.delta < 1.0:
            raise ConfigError(f"delta must lie in (0, 1) (got {self.delta})")
        sigma1 = principal_eigenvalue_of(self.m)
        if not self.mu > sigma1:
            raise ConfigError(
                f"mu={self.mu} must exceed the discrete principal eigenvalue {sigma1:.6f}")

    @property
    def h(self) -> float:
        return 1.0 / (self.m + 1)

    @property
    def x(self) -> np.ndarray:
        return np.arange(1, self.m + 1) * self.h

    @property
    def apriori_bound(self) -> float:
        """Sup-norm ceiling mu^(1/(q-1)) for positive solutions."""
        return self.mu ** (1.0 / (self.q_exp - 1.0))


def slopes(mesh: MeshProblem, u) -> np.ndarray:
    """Half-node slopes p_{i+1/2}, i = 0..m, with zero boundary values."""
    u = np.asarray(u, dtype=float)
    return np.diff(np.concatenate(([0.0], u, [0.0]))) / mesh.h


def _weights(mesh, lam, u):
    p = slopes(mesh, u)
    w = 1.0 - lam * p * p
    if np.any(w <= 0.0):
        raise DomainError(f"1 - lam*p^2 <= 0 at a half node (lam={lam})")
    return p, w


def _power(mesh, u):
    return np.sign(u) * np.abs(u) ** mesh.q_exp


def residual(mesh: MeshProblem, lam: float, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    p, w = _weights(mesh, lam, u)
    flux = p / np.sqrt(w)
    return -(flux[1:] - flux[:-1]) / mesh.h - mesh.mu * u + _power(mesh, u)


def jacobian(mesh: MeshProblem, lam: float, u) -> np.ndarray:
    """Tridiagonal D_u F; half-node coefficients (1 - lam p^2)^(-3/2)."""
    u = np.asarray(u, dtype=float)
    _, w = _weights(mesh, lam, u)
    a = w ** -1.5 / mesh.h ** 2
    m = mesh.m
    J = np.zeros((m, m))
    i = np.arange(m)
    J[i, i] = a[:-1] + a[1:] - mesh.mu + mesh.q_exp * np.abs(u) ** (mesh.q_exp - 1.0)
    J[i[:-1], i[:-1] + 1] = -a[1:-1]
    J[i[1:], i[1:] - 1] = -a[1:-1]
    return J


def jac_lambda(mesh: MeshProblem, lam: float, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    p, w = _weights(mesh, lam, u)
    dflux = 0.5 * p ** 3 * w ** -1.5
    return -(dflux[1:] - dflux[:-1]) / mesh.h


def margin(mesh: MeshProblem, lam: float, u) -> float:
    p = slopes(mesh, u)
    return float(1.0 - lam * np.max(p * p) - mesh.delta)


def positivity_check(u) -> bool:
    u = np.asarray(u)
    return bool(u.size > 0 and np.all(u > 0.0))


def principal_eigenvalue(mesh: MeshProblem) -> float:
    return principal_eigenvalue_of(mesh.m)


def grad_sup(mesh: MeshProblem, u) -> float:
    return float(np.max(np.abs(slopes(mesh, u))))


def grad_blowup_monitor(mesh: MeshProblem, points, threshold: float = GRAD_BLOWUP_THRESHOLD):
    """Max half-node slope per point and whether it ever exceeds ``threshold``."""
    values = np.array([grad_sup(mesh, p.u if isinstance(p, Point) else p) for p in points])
    return values, bool(values.size and np.max(values) > threshold)


# --------------------------------------------------------------------------
# the system seen by the continuation engine

def make_system(mesh: MeshProblem, lambda_window=(-5.0, 5.0),
                grad_threshold: float = GRAD_BLOWUP_THRESHOLD,
                boundary_threshold: float = 1e-3) -> ParameterizedSystem:
    """Wrap the discretization as a ParameterizedSystem.

    The residual handed to the engine is h^2 * F (the stencil form). It has
    the same zeros and determinant signs as F but a roundoff floor near
    machine epsilon instead of eps/h^2, so absolute Newton tolerances such
    as 1e-10 are attainable at m = 200.
    """
    h2 = mesh.h ** 2

    def size(lam, u):
        return max(abs(lam), float(np.max(np.abs(u))), grad_sup(mesh, u))

    domain = DomainSpec(
        margin=lambda lam, u: margin(mesh, lam, u),
        norm_cap=grad_threshold,
        base_lambda=0.0,
        lambda_window=tuple(lambda_window),
        boundary_threshold=boundary_threshold,
        size=size,
    )
    return ParameterizedSystem(
        n_state=mesh.m,
        residual=lambda lam, u: h2 * residual(mesh, lam, u),
        jac_u=lambda lam, u: h2 * jacobian(mesh, lam, u),
        jac_lambda=lambda lam, u: h2 * jac_lambda(mesh, lam, u),
        domain=domain,
        name=f"mcbvp(m={mesh.m},mu={mesh.mu},q={mesh.q_exp},delta={mesh.delta})",
    )


def scaled_residual_norm(mesh: MeshProblem, lam: float, u) -> float:
    return float(np.max(np.abs(mesh.h ** 2 * residual(mesh, lam, u))))


# --------------------------------------------------------------------------
# base state at lam = 0

class InitializationError(UnibranchError):
    """Newton for the lam = 0 logistic problem failed to find a positive state."""


def _newton_lam0(mesh, u, tol, max_iter=60):
    h2 = mesh.h ** 2
    F = h2 * residual(mesh, 0.0, u)
    nF = np.max(np.abs(F))
    for _ in range(max_iter):
        if nF <= tol:
            return u, nF
        du = np.linalg.solve(h2 * jacobian(mesh, 0.0, u), -F)
        step = 1.0
        while step > 1e-6:
            trial = u + step * du
            Ft = h2 * residual(mesh, 0.0, trial)
            nt = np.max(np.abs(Ft))
            if nt < (1.0 - 1e-4 * step) * nF or nt <= tol:
                break
            step *= 0.5
        else:
            return u, nF
        u, F, nF = trial, Ft, nt
    return u, nF


def base_solution(mesh: MeshProblem, tol: float = 1e-12) -> np.ndarray:
    """Unique positive solution of -u'' = mu u - u^q (lam = 0).

    Convergence is judged on the stencil-scaled residual max|h^2 F| <= tol.
    """
    x = mesh.x
    c = mesh.apriori_bound / 2.0
    for attempt in range(6):
        u, res = _newton_lam0(mesh, c * np.sin(np.pi * x), tol)
        if res <= tol and positivity_check(u):
            return u
        log.debug("base_solution attempt %d with c=%g: residual %.3g, positive=%s",
                  attempt, c, res, positivity_check(u))
        c *= 1.5
    # continuation in mu from just above the principal eigenvalue
    sigma1 = principal_eigenvalue(mesh)
    u = None
    for mu_k in np.linspace(sigma1 * 1.01, mesh.mu, 40):
        sub = MeshProblem(mesh.m, float(mu_k), mesh.q_exp, mesh.delta)
        guess = u if u is not None else sub.apriori_bound * 0.5 * np.sin(np.pi * x)
        u, res = _newton_lam0(sub, guess, tol)
        if res > tol or not positivity_check(u):
            break
    else:
        return u
    raise InitializationError(f"no positive base state found for {mesh}")
