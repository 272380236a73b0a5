"""Lyapunov-Schmidt reduction at singular zeros and local branch structure.

At a zero (lambda1, u1) where D_u F has an n-dimensional kernel, split
state space as kernel (+) Y and target space as Z (+) range, with
orthonormal bases taken from the SVD of D_u F. Solving the range component
for y = psi(lambda, x) leaves the n-dimensional bifurcation equation
G(lambda, z) = 0, whose zero set near (lambda1, 0) is a finite union of
curves through the point. For n = 1 those curves are found by marching
around circles in the (lambda, z) plane.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from ._linalg import REGULARITY_RTOL, canonical_sign
from .errors import (AmbiguousPairingError, IsolatedPointError, NotAZeroError,
                     ReductionError, TrustRegionError, UnsupportedDimensionError)
from .problem_model import ParameterizedSystem, Point


@dataclass(frozen=True)
class KernelInfo:
    kernel_dim: int
    kernel_basis: np.ndarray      # N x n, orthonormal
    cokernel_basis: np.ndarray    # N x n, orthonormal complement of the range
    range_basis: np.ndarray       # N x (N - n)
    complement_basis: np.ndarray  # N x (N - n), basis of Y
    singular_values: np.ndarray


def kernel_analysis(system: ParameterizedSystem, point: Point, rank_tol: float = REGULARITY_RTOL,
                    tol: float = 1e-8) -> KernelInfo:
    r = system.residual_norm(point)
    if r > tol:
        raise NotAZeroError(f"residual {r:.3g} exceeds {tol:.1g}")
    A = system.Fu(point)
    U, s, Vt = np.linalg.svd(A)
    N = A.shape[0]
    smax = s[0] if s.size else 0.0
    n = N if smax == 0.0 else int(np.sum(s <= rank_tol * smax))
    r_ = N - n
    return KernelInfo(
        kernel_dim=n,
        kernel_basis=canonical_sign(Vt[r_:].T),
        cokernel_basis=canonical_sign(U[:, r_:]),
        range_basis=U[:, :r_],
        complement_basis=Vt[:r_].T,
        singular_values=s,
    )


@dataclass(frozen=True)
class ReducedProblem:
    system: ParameterizedSystem
    singular_point: Point
    kernel_basis: np.ndarray
    cokernel_basis: np.ndarray
    range_basis: np.ndarray
    complement_basis: np.ndarray
    psi_tolerance: float = 1e-12
    radius: float = 0.1
    psi_max_iter: int = 25

    @property
    def kernel_dim(self) -> int:
        return self.kernel_basis.shape[1]

    @property
    def projector_P(self) -> np.ndarray:
        """Projection onto the kernel along Y."""
        K = self.kernel_basis
        return K @ K.T

    @property
    def projector_Q(self) -> np.ndarray:
        """Projection onto the range of D_u F along Z."""
        W = self.cokernel_basis
        return np.eye(W.shape[0]) - W @ W.T

    def with_radius(self, radius: float) -> "ReducedProblem":
        return ReducedProblem(self.system, self.singular_point, self.kernel_basis,
                              self.cokernel_basis, self.range_basis, self.complement_basis,
                              self.psi_tolerance, radius, self.psi_max_iter)


def ls_reduce(system: ParameterizedSystem, point: Point, rank_tol: float = REGULARITY_RTOL,
              psi_tolerance: float = 1e-12, radius: float = 0.1) -> ReducedProblem:
    info = kernel_analysis(system, point, rank_tol)
    if info.kernel_dim == 0:
        raise ReductionError("D_u F is regular here; no reduction needed")
    C, B = info.range_basis, info.complement_basis
    if C.shape[1]:
        restricted = C.T @ system.Fu(point) @ B
        s = np.linalg.svd(restricted, compute_uv=False)
        if s[-1] <= rank_tol * max(s[0], 1e-300):
            raise ReductionError("Q D_u F restricted to Y is singular")
    red = ReducedProblem(system, point, info.kernel_basis, info.cokernel_basis, C, B,
                         psi_tolerance, radius)
    eta, _ = psi(red, point.lam, np.zeros(red.kernel_dim))
    if eta.size and np.max(np.abs(eta)) > 1e3 * psi_tolerance:
        raise ReductionError("psi(lambda1, 0) != 0; singular point is not a zero")
    return red


def psi(red: ReducedProblem, lam: float, z) -> tuple[np.ndarray, int]:
    """Coordinates eta of y = psi(lambda, x) in the Y basis, plus Newton iterations."""
    C, B = red.range_basis, red.complement_basis
    if C.shape[1] == 0:
        return np.zeros(0), 0
    base = red.singular_point.u + red.kernel_basis @ np.atleast_1d(z)
    sys_ = red.system
    eta = np.zeros(B.shape[1])
    for it in range(red.psi_max_iter):
        u = base + B @ eta
        try:
            H = C.T @ np.asarray(sys_.residual(lam, u), dtype=float)
        except Exception as exc:
            raise TrustRegionError(f"inner Newton left the domain: {exc}") from exc
        if np.linalg.norm(H, np.inf) <= red.psi_tolerance:
            return eta, it
        D = C.T @ np.atleast_2d(sys_.jac_u(lam, u)) @ B
        try:
            eta = eta - np.linalg.solve(D, H)
        except np.linalg.LinAlgError as exc:
            raise TrustRegionError("singular inner Jacobian") from exc
        if not np.all(np.isfinite(eta)):
            raise TrustRegionError("inner Newton diverged")
    raise TrustRegionError(f"inner Newton for psi did not converge at lambda={lam}")


def lift(red: ReducedProblem, lam: float, z) -> Point:
    """(lambda, z) -> (lambda, u1 + K z + psi(lambda, K z)).

    ``red.radius`` sizes the enumeration patch; evaluation itself only fails
    (TrustRegionError) when the inner Newton for psi does.
    """
    eta, _ = psi(red, lam, z)
    u = red.singular_point.u + red.kernel_basis @ np.atleast_1d(z) + red.complement_basis @ eta
    return Point(lam, u)


def project(red: ReducedProblem, point: Point) -> tuple[float, np.ndarray]:
    return point.lam, red.kernel_basis.T @ (point.u - red.singular_point.u)


def eval_reduced(red: ReducedProblem, lam: float, z) -> np.ndarray:
    """G(lambda, z) = W^T F(lambda, u1 + K z + psi(lambda, K z))."""
    p = lift(red, lam, z)
    return red.cokernel_basis.T @ red.system.F(p)


# --------------------------------------------------------------------------
# local branches for kernel dimension one

@dataclass(frozen=True)
class HalfBranch:
    reduced: np.ndarray           # k x 2 array of (lambda, z), ordered outward
    points: list                  # lifted Points, same order
    direction: np.ndarray         # unit (lambda, z) direction leaving the singular point

    @property
    def outer(self) -> Point:
        return self.points[-1]


def _g_scalar(red, lam, z):
    return float(eval_reduced(red, lam, np.array([z]))[0])


def _circle_zeros(red, r, thetas):
    lam1 = red.singular_point.lam

    def g(th):
        return _g_scalar(red, lam1 + r * np.cos(th), r * np.sin(th))

    vals = np.array([g(th) for th in thetas])
    zeros = []
    k = thetas.size
    for j in range(k):
        a, b = thetas[j], thetas[(j + 1) % k] + (2 * np.pi if j == k - 1 else 0.0)
        ga, gb = vals[j], vals[(j + 1) % k]
        if ga == 0.0:
            zeros.append(a % (2 * np.pi))
        elif ga * gb < 0:
            zeros.append(brentq(g, a, b, xtol=1e-15, rtol=1e-15) % (2 * np.pi))
    return np.array(sorted(zeros))


def _angle_gap(a, b):
    d = abs(a - b) % (2 * np.pi)
    return min(d, 2 * np.pi - d)


def enumerate_branches(red: ReducedProblem, radius: float | None = None, grid: int = 200,
                       decades: float = 3.0) -> list[HalfBranch]:
    """Half-branches of {G = 0} leaving (lambda1, 0), found on a polar patch.

    ``grid`` circles with geometrically spaced radii covering ``decades``
    decades up to ``radius``, each sampled at ``grid`` angles; sign changes
    are refined with Brent's method and linked circle to circle by nearest
    angle. The inner-Newton trust radius is halved on failure.
    """
    if red.kernel_dim != 1:
        raise UnsupportedDimensionError(f"kernel dimension {red.kernel_dim} unsupported (need 1)")
    radius = red.radius if radius is None else radius
    red = red.with_radius(radius)
    lam1 = red.singular_point.lam

    eps = 1e-6 * radius
    dGdz = (_g_scalar(red, lam1, eps) - _g_scalar(red, lam1, -eps)) / (2 * eps)
    if abs(dGdz) > 1e-6:
        raise ReductionError(f"D_z G(lambda1, 0) = {dGdz:.3g}: point is not singular")

    thetas = (np.arange(grid) + 0.5) * 2 * np.pi / grid
    for _ in range(6):
        try:
            radii = radius * 10.0 ** (-decades * (1 - np.arange(grid) / (grid - 1)))
            rings = [_circle_zeros(red, r, thetas) for r in radii]
            break
        except TrustRegionError:
            radius *= 0.5
            red = red.with_radius(radius)
    else:
        raise TrustRegionError("inner Newton fails even on a much smaller patch")

    if rings[-1].size == 0:
        raise IsolatedPointError("no sign change of G around the singular point")

    halves = []
    for th_out in rings[-1]:
        path = [th_out]
        cur = th_out
        for ring in reversed(rings[:-1]):
            if ring.size == 0:
                continue
            cur = ring[np.argmin([_angle_gap(cur, a) for a in ring])]
            path.append(cur)
        path.reverse()
        used_radii = [r for r, ring in zip(radii, rings) if ring.size][-len(path):]
        red_pts = np.array([(lam1 + r * np.cos(a), r * np.sin(a)) for r, a in zip(used_radii, path)])
        lifted = [lift(red, lam, np.array([z])) for lam, z in red_pts]
        d = np.array([np.cos(path[0]), np.sin(path[0])])
        halves.append(HalfBranch(red_pts, lifted, d))
    return halves


# --------------------------------------------------------------------------
# Puiseux exponent

@dataclass(frozen=True)
class PuiseuxFit:
    exponent: float       # estimate of 1/l in |u - u1| ~ |lambda - lambda1|^(1/l)
    residual: float       # RMS residual of the log-log fit
    flag: str             # "ok", "inverse", "vertical" or "degenerate"

    @property
    def ell(self):
        if not np.isfinite(self.exponent) or self.exponent <= 0:
            return None
        return int(round(1.0 / self.exponent))


def puiseux_exponent(half_branch, singular_point: Point) -> PuiseuxFit:
    pts = half_branch.points if isinstance(half_branch, HalfBranch) else list(half_branch)
    if len(pts) < 8:
        raise ValueError("need at least 8 points on the half-branch")
    du = np.array([np.linalg.norm(p.u - singular_point.u) for p in pts])
    dl = np.array([abs(p.lam - singular_point.lam) for p in pts])
    scale = 1.0 + np.linalg.norm(singular_point.u)
    if np.max(du) <= 1e-13 * scale:
        return PuiseuxFit(np.nan, 0.0, "degenerate")
    if np.max(dl) <= 1e-13 * (1.0 + abs(singular_point.lam)):
        return PuiseuxFit(0.0, 0.0, "vertical")

    def span(v):
        v = v[v > 0]
        return np.log10(v.max() / v.min()) if v.size >= 8 else 0.0

    def fit(x, y):
        keep = (x > 0) & (y > 0)
        lx, ly = np.log(x[keep]), np.log(y[keep])
        coef = np.polyfit(lx, ly, 1)
        res = float(np.sqrt(np.mean((np.polyval(coef, lx) - ly) ** 2)))
        return float(coef[0]), res

    if span(dl) >= 2.0:
        slope, res = fit(dl, du)
        return PuiseuxFit(slope, res, "ok")
    if span(du) >= 2.0:
        slope, res = fit(du, dl)
        return PuiseuxFit(1.0 / slope if slope != 0 else np.inf, res, "inverse")
    raise ValueError("|lambda - lambda1| must span at least two decades")


# --------------------------------------------------------------------------
# branch switching

@dataclass(frozen=True)
class SwitchResult:
    point: Point
    tangent: np.ndarray
    incoming: int
    outgoing: int
    half_branches: list = field(default_factory=list)

    @property
    def alternatives(self):
        return [i for i in range(len(self.half_branches)) if i not in (self.incoming, self.outgoing)]

    @property
    def info(self):
        return {
            "kernel_dim": 1,
            "half_branches": len(self.half_branches),
            "incoming": self.incoming,
            "outgoing": self.outgoing,
            "restart_lambda": self.point.lam,
            "alternatives": [
                {"index": i, "lambda": self.half_branches[i].outer.lam,
                 "direction": [float(v) for v in self.half_branches[i].direction]}
                for i in self.alternatives],
        }


def switch_branch(red: ReducedProblem, incoming_tangent, grid: int = 200,
                  pair_cos: float = 0.99) -> SwitchResult:
    """Continue an incoming branch through the singular point.

    The incoming half-branch is the one leaving the singular point most
    nearly along ``-incoming_tangent``. Its partner is the other half-branch
    of the same smooth curve: with two half-branches, simply the other one;
    with more, the unique one leaving in the opposite direction.
    """
    from .continuation import tangent as curve_tangent

    halves = enumerate_branches(red, grid=grid)
    if len(halves) < 2:
        raise ReductionError("need at least two half-branches to switch")
    t = np.asarray(incoming_tangent, dtype=float)
    v = np.concatenate(([t[0]], red.kernel_basis.T @ t[1:]))
    if np.linalg.norm(v) < 1e-12:
        raise ReductionError("incoming tangent has no component in reduced coordinates")
    d_in = -v / np.linalg.norm(v)
    incoming = int(np.argmax([h.direction @ d_in for h in halves]))
    if len(halves) == 2:
        outgoing = 1 - incoming
    else:
        opp = -halves[incoming].direction
        cands = [j for j, h in enumerate(halves) if j != incoming and h.direction @ opp >= pair_cos]
        if len(cands) != 1:
            raise AmbiguousPairingError(
                f"{len(cands)} candidate continuations for half-branch {incoming}",
                candidates=[(j, halves[j].outer) for j in range(len(halves)) if j != incoming])
        outgoing = cands[0]
    restart = halves[outgoing].outer
    away = restart.vector() - red.singular_point.vector()
    tan = curve_tangent(red.system, restart, away / np.linalg.norm(away))
    return SwitchResult(restart, tan, incoming, outgoing, halves)
