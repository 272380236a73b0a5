"""Parameterized nonlinear systems F(lambda, u) = 0 and their admissible domains.

Everything downstream (degree, continuation, singular-point handling) talks
to a :class:`ParameterizedSystem`: a residual with analytic derivatives in
``u`` and ``lambda`` plus a :class:`DomainSpec` describing the open set where
the system is admissible. Orientation is the sign of ``det D_u F``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._linalg import det_sign
from .errors import DomainError, EvaluationError

ORIENTATION_CONVENTION = "sign-of-determinant"


@dataclass(frozen=True)
class Point:
    """A pair (lambda, u). ``u`` is stored as a read-only float array."""

    lam: float
    u: np.ndarray

    def __post_init__(self):
        u = np.array(self.u, dtype=float, copy=True).reshape(-1)
        u.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "lam", float(self.lam))
        if not np.isfinite(self.lam) or not np.all(np.isfinite(u)):
            raise EvaluationError("Point has non-finite entries")

    @property
    def n_state(self) -> int:
        return self.u.size

    def vector(self) -> np.ndarray:
        """The point as one vector ``(lambda, u_1, ..., u_n)``."""
        return np.concatenate(([self.lam], self.u))

    @classmethod
    def from_vector(cls, v) -> "Point":
        v = np.asarray(v, dtype=float)
        return cls(v[0], v[1:])

    def distance(self, other: "Point") -> float:
        return float(np.linalg.norm(self.vector() - other.vector()))


def _always_inside(lam, u):
    return 1.0


def _euclidean_size(lam, u):
    return float(np.sqrt(lam * lam + np.dot(u, u)))


@dataclass(frozen=True)
class DomainSpec:
    """Open admissible set ``{margin > 0}`` plus run limits.

    ``size`` is the quantity compared against ``norm_cap`` when deciding
    that a branch blows up; by default the Euclidean norm of (lambda, u).
    """

    margin: Callable[[float, np.ndarray], float] = _always_inside
    norm_cap: float = 1e6
    base_lambda: float = 0.0
    lambda_window: tuple[float, float] = (-np.inf, np.inf)
    boundary_threshold: float = 1e-3
    size: Callable[[float, np.ndarray], float] = _euclidean_size

    def __post_init__(self):
        lo, hi = self.lambda_window
        if not lo <= self.base_lambda <= hi:
            raise ValueError("base_lambda must lie in lambda_window")
        if self.norm_cap <= 0:
            raise ValueError("norm_cap must be positive")


@dataclass(frozen=True)
class ParameterizedSystem:
    n_state: int
    residual: Callable[[float, np.ndarray], np.ndarray]
    jac_u: Callable[[float, np.ndarray], np.ndarray]
    jac_lambda: Callable[[float, np.ndarray], np.ndarray]
    domain: DomainSpec = field(default_factory=DomainSpec)
    name: str = "system"

    def F(self, point: Point) -> np.ndarray:
        r = np.asarray(self.residual(point.lam, point.u), dtype=float).reshape(-1)
        if not np.all(np.isfinite(r)):
            raise EvaluationError(f"{self.name}: non-finite residual")
        return r

    def Fu(self, point: Point) -> np.ndarray:
        return np.atleast_2d(np.asarray(self.jac_u(point.lam, point.u), dtype=float))

    def Flam(self, point: Point) -> np.ndarray:
        return np.asarray(self.jac_lambda(point.lam, point.u), dtype=float).reshape(-1)

    def total_jacobian(self, point: Point) -> np.ndarray:
        """The n x (n+1) matrix ``[dF/dlambda | dF/du]``."""
        return np.column_stack((self.Flam(point), self.Fu(point)))

    def residual_norm(self, point: Point) -> float:
        return float(np.linalg.norm(self.F(point), np.inf))

    def with_domain(self, domain: DomainSpec) -> "ParameterizedSystem":
        return ParameterizedSystem(self.n_state, self.residual, self.jac_u,
                                   self.jac_lambda, domain, self.name)


def inside_domain(domain: DomainSpec, point: Point) -> tuple[bool, float]:
    """Return ``(margin > 0, margin)``."""
    m = float(domain.margin(point.lam, point.u))
    return m > 0.0, m


def orientation(system: ParameterizedSystem, point: Point) -> int:
    """epsilon(lambda, u) = sign det D_u F; 0 at numerically singular points."""
    return det_sign(system.Fu(point))


@dataclass(frozen=True)
class ConsistencyReport:
    err_u: float
    err_lambda: float
    tolerance: float = 1e-5

    @property
    def ok(self) -> bool:
        return self.err_u <= self.tolerance and self.err_lambda <= self.tolerance


def scaled_error(analytic, reference) -> float:
    """max |analytic - reference| divided by max(max|reference|, 1).

    Relative where the reference is O(1) or larger, absolute for
    near-zero references (e.g. dF/dlambda = 0 on a symmetric slice).
    """
    a = np.asarray(analytic, dtype=float)
    r = np.asarray(reference, dtype=float)
    scale = max(float(np.max(np.abs(r))) if r.size else 0.0, 1.0)
    return float(np.max(np.abs(a - r))) / scale


def validate_consistency(system: ParameterizedSystem, point: Point,
                         h_fd: float = 1e-6, tolerance: float = 1e-5) -> ConsistencyReport:
    """Compare analytic derivatives with central finite differences."""
    from .oracles import fd_jacobian, fd_jac_lambda

    if h_fd <= 0:
        raise ValueError("h_fd must be positive")
    ok, m = inside_domain(system.domain, point)
    if not ok:
        raise DomainError(f"point outside domain (margin={m:.3g})")
    system.F(point)
    eu = scaled_error(system.Fu(point), fd_jacobian(system, point, h_fd))
    el = scaled_error(system.Flam(point), fd_jac_lambda(system, point, h_fd))
    return ConsistencyReport(eu, el, tolerance)
