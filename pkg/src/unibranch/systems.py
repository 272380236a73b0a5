"""Analytic example systems with known solution sets.

These are the desk-scale anchors: every continuation event, degree value and
reduced normal form they produce has a closed-form answer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problem_model import DomainSpec, ParameterizedSystem, Point


@dataclass(frozen=True)
class Problem:
    """A system together with a regular starting zero on its base slice."""

    system: ParameterizedSystem
    start: Point
    description: str = ""


def _scalar(name, f, fu, fl, domain):
    return ParameterizedSystem(
        n_state=1,
        residual=lambda lam, u: np.array([f(lam, u[0])]),
        jac_u=lambda lam, u: np.array([[fu(lam, u[0])]]),
        jac_lambda=lambda lam, u: np.array([fl(lam, u[0])]),
        domain=domain,
        name=name,
    )


def circle(domain: DomainSpec | None = None) -> Problem:
    """u^2 + lambda^2 - 1 = 0; folds at (+-1, 0), base slice lambda=0."""
    domain = domain or DomainSpec(norm_cap=10.0, base_lambda=0.0, lambda_window=(-2.0, 2.0))
    system = _scalar("circle", lambda l, u: u * u + l * l - 1.0,
                     lambda l, u: 2.0 * u, lambda l, u: 2.0 * l, domain)
    lam0 = domain.base_lambda
    if not abs(lam0) < 1.0:
        raise ValueError("circle needs |base_lambda| < 1 for a regular start")
    return Problem(system, Point(lam0, [np.sqrt(1.0 - lam0 * lam0)]), "unit circle u^2+lambda^2=1")


def fold(domain: DomainSpec | None = None) -> Problem:
    """u^2 - lambda = 0; a quadratic fold at the origin."""
    domain = domain or DomainSpec(norm_cap=50.0, base_lambda=1.0, lambda_window=(-5.0, 10.0))
    system = _scalar("fold", lambda l, u: u * u - l,
                     lambda l, u: 2.0 * u, lambda l, u: -1.0, domain)
    if not domain.base_lambda > 0:
        raise ValueError("fold needs base_lambda > 0 for a regular start")
    start_u = np.sqrt(domain.base_lambda)
    return Problem(system, Point(domain.base_lambda, [start_u]), "fold u^2=lambda")


def pitchfork(domain: DomainSpec | None = None) -> Problem:
    """lambda*u - u^3 = 0; the trivial line crosses the parabola lambda=u^2 at the origin."""
    domain = domain or DomainSpec(norm_cap=50.0, base_lambda=-1.0, lambda_window=(-2.0, 2.0))
    system = _scalar("pitchfork", lambda l, u: l * u - u ** 3,
                     lambda l, u: l - 3.0 * u * u, lambda l, u: u, domain)
    if domain.base_lambda == 0.0:
        raise ValueError("pitchfork needs base_lambda != 0 for a regular start")
    return Problem(system, Point(domain.base_lambda, [0.0]), "pitchfork lambda*u-u^3")


def line(domain: DomainSpec | None = None) -> Problem:
    """u - lambda = 0; unbounded in both directions."""
    domain = domain or DomainSpec(norm_cap=5.0, base_lambda=0.0, lambda_window=(0.0, 10.0))
    system = _scalar("line", lambda l, u: u - l,
                     lambda l, u: 1.0, lambda l, u: -1.0, domain)
    return Problem(system, Point(domain.base_lambda, [domain.base_lambda]), "line u=lambda")


def linear(A, b, domain: DomainSpec | None = None) -> ParameterizedSystem:
    """F(lambda, u) = A u - lambda b."""
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    A.setflags(write=False)
    b.setflags(write=False)
    return ParameterizedSystem(
        n_state=A.shape[0],
        residual=lambda lam, u: A @ u - lam * b,
        jac_u=lambda lam, u: A,
        jac_lambda=lambda lam, u: -b,
        domain=domain or DomainSpec(),
        name="linear",
    )


def embedded_fold(domain: DomainSpec | None = None) -> Problem:
    """F(lambda, (u, v)) = (u^2 - lambda, v): the fold with one extra slaved state."""
    domain = domain or DomainSpec(norm_cap=50.0, base_lambda=1.0, lambda_window=(-5.0, 10.0))
    system = ParameterizedSystem(
        n_state=2,
        residual=lambda lam, w: np.array([w[0] * w[0] - lam, w[1]]),
        jac_u=lambda lam, w: np.array([[2.0 * w[0], 0.0], [0.0, 1.0]]),
        jac_lambda=lambda lam, w: np.array([-1.0, 0.0]),
        domain=domain,
        name="embedded_fold",
    )
    if not domain.base_lambda > 0:
        raise ValueError("embedded_fold needs base_lambda > 0 for a regular start")
    return Problem(system, Point(domain.base_lambda, [np.sqrt(domain.base_lambda), 0.0]),
                   "fold with slaved state v=0")


BUILTINS = {
    "circle": circle,
    "fold": fold,
    "pitchfork": pitchfork,
    "line": line,
    "embedded_fold": embedded_fold,
}
