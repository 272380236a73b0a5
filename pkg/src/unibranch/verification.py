"""Oracle cross-checks run by ``unibranch verify`` (and by ``run`` when verify = true)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import mcbvp
from ._linalg import det_sign
from .degree import box_degree, local_index, map_degree
from .errors import UnibranchError
from .oracles import (brute_force_degree, fd_jac_lambda, fd_jacobian,
                      random_polynomial_slice, shooting_solve)
from .problem_model import Point, scaled_error

JACOBIAN_TOL = 1e-6
SHOOTING_TOL = 5e-4


@dataclass
class Check:
    name: str
    passed: bool
    measured: dict = field(default_factory=dict)
    message: str = ""

    def to_dict(self):
        return {"name": self.name, "passed": bool(self.passed),
                "measured": self.measured, "message": self.message}


def sample_points(system, start: Point, rng, count: int, mesh=None, min_margin=0.05):
    """Random in-domain points near the start state (rejection sampling on the margin)."""
    domain = system.domain
    lo, hi = domain.lambda_window
    lo, hi = max(lo, start.lam - 2.0), min(hi, start.lam + 2.0)
    out = []
    for _ in range(200 * count):
        if len(out) == count:
            break
        if mesh is not None:
            lam = rng.uniform(-1.0, 0.01)
            u = start.u * (1.0 + 0.1 * rng.standard_normal(start.u.size))
        else:
            lam = rng.uniform(lo, hi)
            u = start.u + rng.standard_normal(start.u.size)
        try:
            if domain.margin(lam, u) > min_margin:
                out.append(Point(lam, u))
        except UnibranchError:
            continue
    return out


def jacobian_check(system, points) -> Check:
    worst_u = worst_l = 0.0
    for p in points:
        worst_u = max(worst_u, scaled_error(system.Fu(p), fd_jacobian(system, p)))
        worst_l = max(worst_l, scaled_error(system.Flam(p), fd_jac_lambda(system, p)))
    ok = bool(points) and max(worst_u, worst_l) <= JACOBIAN_TOL
    return Check("fd_jacobian", ok, {"points": len(points), "max_error_u": worst_u,
                                     "max_error_lambda": worst_l, "tolerance": JACOBIAN_TOL})


def shooting_check(mesh, u0) -> Check:
    sh = shooting_solve(mesh.mu, mesh.q_exp, 0.0, mesh.x)
    err = float(np.max(np.abs(sh.u - u0)))
    return Check("shooting_lambda0", err <= SHOOTING_TOL,
                 {"sup_error": err, "tolerance": SHOOTING_TOL, "slope": sh.slope})


def polynomial_degree_check(rng, count: int) -> Check:
    mismatches = []
    for k in range(count):
        ps = random_polynomial_slice(rng, 1 + k % 2)
        a = map_degree(ps.f, ps.jac, ps.box)
        b = brute_force_degree(ps.f, ps.box)
        if a != b:
            mismatches.append({"case": k, "kind": ps.kind, "newton": a, "brute_force": b})
    return Check("polynomial_degree", not mismatches, {"cases": count, "mismatches": mismatches})


def slice_box(start: Point, pad: float = 3.0):
    return [(x - pad * (1 + abs(x)), x + pad * (1 + abs(x))) for x in start.u]


def slice_degree_check(system, start: Point) -> Check:
    lam0 = system.domain.base_lambda
    box = slice_box(start)
    a = box_degree(system, lam0, box)
    b = brute_force_degree(lambda u: system.residual(lam0, u), box)
    return Check("base_slice_degree", a == b, {"box": box, "newton": a, "brute_force": b})


def eigen_index_check(system, start: Point) -> Check:
    """Local index from the spectrum of the (symmetric) slice Jacobian."""
    J = system.Fu(start)
    ev = np.linalg.eigvalsh(0.5 * (J + J.T))
    by_eigs = int(np.prod(np.sign(ev)))
    idx = local_index(system, start)
    return Check("local_index_spectrum", idx == by_eigs == det_sign(J),
                 {"index": idx, "from_eigenvalues": by_eigs, "min_eigenvalue": float(ev[0])})


def run_checks(system, start: Point, mesh, rng, n_points: int = 10, n_poly: int = 10) -> list[Check]:
    checks = []

    def guarded(name, fn, *args):
        try:
            checks.append(fn(*args))
        except UnibranchError as exc:
            checks.append(Check(name, False, message=f"{type(exc).__name__}: {exc}"))

    guarded("fd_jacobian", jacobian_check, system,
            sample_points(system, start, rng, n_points, mesh))
    if mesh is not None:
        guarded("shooting_lambda0", shooting_check, mesh, start.u)
        guarded("local_index_spectrum", eigen_index_check, system, start)
    elif system.n_state <= 2:
        guarded("base_slice_degree", slice_degree_check, system, start)
    guarded("polynomial_degree", polynomial_degree_check, rng, n_poly)
    return checks
