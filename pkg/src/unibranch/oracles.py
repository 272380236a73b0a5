"""Independent brute-force checks for the main computational paths.

None of these share code with the routines they validate: finite
differences stand in for analytic Jacobians, a fixed-step shooting method
for the finite-difference boundary value solver, and sign counting or
winding numbers for the Newton-based degree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np
from scipy.differentiate import derivative

from .errors import AdmissibilityError, DomainError, OracleError
from .problem_model import ParameterizedSystem, Point


def _eval(system, lam, u):
    ok = system.domain.margin(lam, u) > 0
    if not ok:
        raise DomainError("finite-difference stencil leaves the domain; shrink h_fd")
    try:
        return np.asarray(system.residual(lam, u), dtype=float).reshape(-1)
    except DomainError as exc:
        raise DomainError(f"finite-difference stencil leaves the domain; shrink h_fd ({exc})")


def fd_jacobian(system: ParameterizedSystem, point: Point, h_fd: float = 1e-6) -> np.ndarray:
    """Central differences of F in u, column by column, step h_fd*(1+|u_j|)."""
    u = np.array(point.u, dtype=float)
    n = u.size
    J = np.empty((n, n))
    for j in range(n):
        step = h_fd * (1.0 + abs(u[j]))
        up, um = u.copy(), u.copy()
        up[j] += step
        um[j] -= step
        J[:, j] = (_eval(system, point.lam, up) - _eval(system, point.lam, um)) / (2.0 * step)
    return J


def fd_jac_lambda(system: ParameterizedSystem, point: Point, h_fd: float = 1e-3) -> np.ndarray:
    """dF/dlambda by adaptive extrapolated differences (scipy.differentiate).

    A single central step is not enough here: on rough mcbvp states the
    flux depends on lambda through lam*p^2 with p in the hundreds, and the
    truncation error of a 1e-6 step reaches 1e-4. The starting step is cut
    by 10 until the stencil stays inside the domain.
    """
    u = np.array(point.u, dtype=float)
    n = u.size
    cache = {}

    def component(lam, idx):
        out = np.empty(lam.shape)
        idx = np.broadcast_to(idx, lam.shape)
        for val in np.unique(lam):
            if val not in cache:
                cache[val] = _eval(system, float(val), u)
            mask = lam == val
            out[mask] = cache[val][idx[mask].astype(int)]
        return out

    step = h_fd * (1.0 + abs(point.lam))
    for _ in range(6):
        try:
            res = derivative(component, np.full(n, float(point.lam)), args=(np.arange(n),),
                             initial_step=step)
            return np.asarray(res.df, dtype=float)
        except DomainError:
            step *= 0.1
            cache.clear()
    raise DomainError("finite-difference stencil leaves the domain; shrink h_fd")


# --------------------------------------------------------------------------
# shooting for -(u'/sqrt(1 - lam u'^2))' = mu u - u^q, u(0) = u(1) = 0

@dataclass(frozen=True)
class ShootingConfig:
    ode_step: float = 1e-5
    bisect_tol: float = 1e-10
    slope_bracket: tuple[float, float] = (1e-6, 60.0)
    overshoot_cap: float = 1e6

    def __post_init__(self):
        if self.ode_step <= 0:
            raise ValueError("ode_step must be positive")
        lo, hi = self.slope_bracket
        if not 0 < lo < hi:
            raise ValueError("slope_bracket must satisfy 0 < lo < hi")


class ShootingDomainError(OracleError):
    """The shot reached 1 - lam*u'^2 <= 0; evidence of boundary behaviour."""

    def __init__(self, message, lam, slope):
        super().__init__(message)
        self.lam = lam
        self.slope = slope


_OK, _CROSSED, _OVERSHOOT, _DOMAIN = 0, 1, 2, 3


@numba.njit(cache=True)
def _rhs(u, v, lam, mu, q):
    w = 1.0 - lam * v * v
    if w <= 0.0:
        return np.nan
    return w ** 1.5 * (np.sign(u) * np.abs(u) ** q - mu * u)


@numba.njit(cache=True)
def _integrate(s, lam, mu, q, n, cap, store):
    dx = 1.0 / n
    size = n + 1 if store else 1
    us = np.zeros(size)
    vs = np.zeros(size)
    u = 0.0
    v = s
    if store:
        vs[0] = s
    for k in range(n):
        a1 = _rhs(u, v, lam, mu, q)
        u2 = u + 0.5 * dx * v
        v2 = v + 0.5 * dx * a1
        a2 = _rhs(u2, v2, lam, mu, q)
        u3 = u + 0.5 * dx * v2
        v3 = v + 0.5 * dx * a2
        a3 = _rhs(u3, v3, lam, mu, q)
        u4 = u + dx * v3
        v4 = v + dx * a3
        a4 = _rhs(u4, v4, lam, mu, q)
        if np.isnan(a1) or np.isnan(a2) or np.isnan(a3) or np.isnan(a4):
            return _DOMAIN, k * dx, u, us, vs
        un = u + dx / 6.0 * (v + 2.0 * v2 + 2.0 * v3 + v4)
        vn = v + dx / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        if un <= 0.0 and k < n - 1:
            # linear interpolation of the first interior zero
            xc = (k + u / (u - un)) * dx
            return _CROSSED, xc, un, us, vs
        if un > cap:
            return _OVERSHOOT, (k + 1) * dx, un, us, vs
        u = un
        v = vn
        if store:
            us[k + 1] = u
            vs[k + 1] = v
    return _OK, 1.0, u, us, vs


def _terminal(s, lam, mu, q, n, cfg):
    status, x, u_end, _, _ = _integrate(s, lam, mu, q, n, cfg.overshoot_cap, False)
    if status == _DOMAIN:
        raise ShootingDomainError(
            f"1 - lam*u'^2 <= 0 at x={x:.4f} (lam={lam}, slope={s})", lam, s)
    if status == _CROSSED:
        return -(1.0 - x)
    if status == _OVERSHOOT:
        return cfg.overshoot_cap
    return u_end


def _hermite(xs, us, vs, nodes):
    dx = xs[1] - xs[0]
    k = np.clip(np.floor(nodes / dx).astype(int), 0, xs.size - 2)
    t = (nodes - xs[k]) / dx
    h00 = 2 * t ** 3 - 3 * t ** 2 + 1
    h10 = t ** 3 - 2 * t ** 2 + t
    h01 = -2 * t ** 3 + 3 * t ** 2
    h11 = t ** 3 - t ** 2
    return h00 * us[k] + h10 * dx * vs[k] + h01 * us[k + 1] + h11 * dx * vs[k + 1]


@dataclass(frozen=True)
class ShootingResult:
    slope: float
    nodes: np.ndarray
    u: np.ndarray
    terminal: float


def _bracket(lam, mu, q, n, cfg, scan=120):
    """Slopes lo < hi with terminal values g(lo) < 0 <= g(hi).

    Tries the configured endpoints first. The terminal value need not be
    monotone in the slope (and large slopes leave the domain when lam > 0),
    so otherwise scan a geometric grid for the first sign change.
    """
    lo, hi = cfg.slope_bracket
    try:
        glo, ghi = _terminal(lo, lam, mu, q, n, cfg), _terminal(hi, lam, mu, q, n, cfg)
        if glo < 0.0 <= ghi:
            return lo, hi, glo, ghi
    except ShootingDomainError:
        pass
    prev = None
    for s in np.geomspace(lo, hi, scan):
        try:
            g = _terminal(s, lam, mu, q, n, cfg)
        except ShootingDomainError:
            break
        if prev is not None and prev[1] < 0.0 <= g:
            return prev[0], s, prev[1], g
        prev = (s, g)
    raise OracleError(
        f"no sign change of the terminal value on slope bracket {cfg.slope_bracket}; "
        "no positive solution found")


def shooting_solve(mu: float, q: float, lam: float, nodes,
                   cfg: ShootingConfig = ShootingConfig()) -> ShootingResult:
    """Positive solution by bisection on the initial slope, sampled at ``nodes``."""
    n = int(round(1.0 / cfg.ode_step))
    lo, hi, glo, ghi = _bracket(lam, mu, q, n, cfg)
    g = ghi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        g = _terminal(mid, lam, mu, q, n, cfg)
        if g < 0.0:
            lo = mid
        else:
            hi, ghi = mid, g
        if (0.0 <= ghi <= cfg.bisect_tol) or hi - lo <= 4e-16 * hi:
            break
    status, _, u_end, us, vs = _integrate(hi, lam, mu, q, n, cfg.overshoot_cap, True)
    if status != _OK:
        raise OracleError("final shot did not reach x=1 with u > 0")
    xs = np.linspace(0.0, 1.0, n + 1)
    nodes = np.asarray(nodes, dtype=float)
    return ShootingResult(hi, nodes, _hermite(xs, us, vs, nodes), float(u_end))


# --------------------------------------------------------------------------
# brute-force degree

def brute_force_degree(f, box, grid_n: int = 10_000) -> int:
    """Degree by sign counting (1-D) or boundary winding number (2-D)."""
    arr = np.asarray(box, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, 2)
    dim = arr.shape[0]
    if dim == 1:
        return _degree_1d(f, arr[0, 0], arr[0, 1], grid_n)
    if dim == 2:
        return _winding_2d(f, arr[:, 0], arr[:, 1], grid_n)
    raise ValueError("brute-force degree supports dimension 1 or 2 only")


def _degree_1d(f, a, b, grid_n):
    xs = np.linspace(a, b, grid_n + 1)
    vals = np.array([float(np.ravel(f(np.array([x])))[0]) for x in xs])
    if vals[0] == 0.0 or vals[-1] == 0.0:
        raise AdmissibilityError("zero on the interval boundary")
    signs = np.sign(vals)
    signs = signs[signs != 0]
    # each - to + change is a zero of positive slope, + to - of negative slope
    return int(np.sum(np.diff(signs) / 2))


def _winding_2d(f, lo, hi, grid_n):
    t = np.linspace(0.0, 1.0, grid_n, endpoint=False)
    (x0, y0), (x1, y1) = lo, hi
    sides = [
        np.column_stack((x0 + t * (x1 - x0), np.full_like(t, y0))),
        np.column_stack((np.full_like(t, x1), y0 + t * (y1 - y0))),
        np.column_stack((x1 - t * (x1 - x0), np.full_like(t, y1))),
        np.column_stack((np.full_like(t, x0), y1 - t * (y1 - y0))),
    ]
    poly = np.vstack(sides + [sides[0][:1]])
    vals = np.array([np.ravel(f(p))[:2] for p in poly])
    if np.any(np.hypot(vals[:, 0], vals[:, 1]) == 0.0):
        raise AdmissibilityError("zero on the box boundary")
    ang = np.arctan2(vals[:, 1], vals[:, 0])
    d = np.diff(ang)
    d = (d + np.pi) % (2.0 * np.pi) - np.pi
    if np.any(np.abs(d) > np.pi / 2):
        raise OracleError("angle step exceeds pi/2 on a boundary segment; refine grid_n")
    return int(round(np.sum(d) / (2.0 * np.pi)))


# --------------------------------------------------------------------------
# random polynomial slice maps with well-separated zeros

@dataclass(frozen=True)
class PolySlice:
    f: object
    jac: object
    box: np.ndarray
    roots: tuple
    kind: str


def _horner(coef, x):
    acc = 0.0
    for c in coef:
        acc = acc * x + c
    return acc


def _coeffs(a):
    return [complex(c) if np.iscomplexobj(a) else float(c) for c in np.atleast_1d(a)]


def _separated(rng, k, sampler, min_sep, tries=1000):
    pts = []
    for _ in range(tries):
        if len(pts) == k:
            break
        c = sampler()
        if all(abs(c - p) >= min_sep for p in pts):
            pts.append(c)
    return pts


def random_polynomial_slice(rng: np.random.Generator, dim: int) -> PolySlice:
    """A random polynomial map on [-2, 2]^dim with simple zeros well inside the box.

    1-D: c * prod(u - r_k). 2-D: either c * g(z) * h(conj z) in complex
    notation (zeros of g have index +1, zeros of h index -1), or a product
    map (p(u), s(v)) whose indices are products of slope signs.
    """
    if dim == 1:
        roots = _separated(rng, int(rng.integers(1, 5)), lambda: rng.uniform(-1.6, 1.6), 0.15)
        coef = float(rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.0)) * np.poly(roots)
        coef, dcoef = _coeffs(coef), _coeffs(np.polyder(coef))
        return PolySlice(lambda u: np.array([_horner(coef, u[0])]),
                         lambda u: np.array([[_horner(dcoef, u[0])]]),
                         np.array([[-2.0, 2.0]]), tuple(roots), "1d")
    if dim != 2:
        raise ValueError("dim must be 1 or 2")
    if rng.random() < 0.7:
        total = int(rng.integers(1, 4))
        def disc():
            r, a = 1.4 * np.sqrt(rng.random()), rng.uniform(0, 2 * np.pi)
            return complex(r * np.cos(a), r * np.sin(a))
        pts = _separated(rng, total, disc, 0.25)
        n_plus = int(rng.integers(0, len(pts) + 1))
        plus, minus = pts[:n_plus], pts[n_plus:]
        c = complex(np.exp(1j * rng.uniform(0, 2 * np.pi)) * rng.uniform(0.5, 2.0))
        g, h = np.poly(plus) if plus else np.array([1.0]), np.poly(minus) if minus else np.array([1.0])
        g, h, dg, dh = (_coeffs(a) for a in (g, h, np.polyder(g), np.polyder(h)))

        def f(w):
            z = complex(w[0], w[1])
            val = c * _horner(g, z) * _horner(h, z.conjugate())
            return np.array([val.real, val.imag])

        def jac(w):
            z = complex(w[0], w[1])
            fz = c * _horner(dg, z) * _horner(h, z.conjugate())
            fzb = c * _horner(g, z) * _horner(dh, z.conjugate())
            dx, dy = fz + fzb, 1j * (fz - fzb)
            return np.array([[dx.real, dy.real], [dx.imag, dy.imag]])

        return PolySlice(f, jac, np.array([[-2.0, 2.0], [-2.0, 2.0]]),
                         (tuple(plus), tuple(minus)), "complex")
    ru = _separated(rng, int(rng.integers(1, 3)), lambda: rng.uniform(-1.5, 1.5), 0.3)
    rv = _separated(rng, int(rng.integers(1, 3)), lambda: rng.uniform(-1.5, 1.5), 0.3)
    pu = float(rng.choice([-1.0, 1.0])) * np.poly(ru)
    pv = float(rng.choice([-1.0, 1.0])) * np.poly(rv)
    pu, pv, du, dv = (_coeffs(a) for a in (pu, pv, np.polyder(pu), np.polyder(pv)))
    return PolySlice(
        lambda w: np.array([_horner(pu, w[0]), _horner(pv, w[1])]),
        lambda w: np.array([[_horner(du, w[0]), 0.0], [0.0, _horner(dv, w[1])]]),
        np.array([[-2.0, 2.0], [-2.0, 2.0]]), (tuple(ru), tuple(rv)), "product")
