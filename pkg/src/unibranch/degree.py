"""Brouwer degree, local indices and parity in finite dimensions.

With the sign-of-determinant orientation, the parity of a matrix path is the
product of its endpoint determinant signs, the index of a regular zero is the
sign of its Jacobian determinant, and the degree on a box is the sum of the
indices of the zeros inside it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ._linalg import REGULARITY_RTOL, det_sign, raw_det_sign
from .errors import (AdmissibilityError, DegeneracyError, NotAZeroError,
                     SingularPointError)
from .problem_model import ParameterizedSystem, Point

__all__ = [
    "det_sign", "MatrixPath", "parity", "sampled_parity", "concatenate",
    "local_index", "find_zeros", "map_degree", "box_degree",
    "SliceCrossing", "degree_balance", "is_balanced",
]

ZERO_TOL = 1e-8
BOUNDARY_TOL = 1e-8
DEDUP_RTOL = 1e-6


# --------------------------------------------------------------------------
# parity of matrix paths

@dataclass(frozen=True)
class MatrixPath:
    """Samples ``(t_k, L(t_k))`` of a continuous path of square matrices."""

    ts: np.ndarray
    mats: np.ndarray

    def __post_init__(self):
        ts = np.asarray(self.ts, dtype=float)
        mats = np.asarray(self.mats, dtype=float)
        if mats.ndim == 1:
            mats = mats.reshape(-1, 1, 1)
        if ts.ndim != 1 or ts.size < 2:
            raise ValueError("a matrix path needs at least two samples")
        if mats.shape[0] != ts.size or mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
            raise ValueError("mats must have shape (len(ts), n, n)")
        if np.any(np.diff(ts) <= 0):
            raise ValueError("ts must be strictly increasing")
        object.__setattr__(self, "ts", ts)
        object.__setattr__(self, "mats", mats)

    @classmethod
    def from_function(cls, L: Callable[[float], np.ndarray], a: float, b: float,
                      n_samples: int = 101) -> "MatrixPath":
        ts = np.linspace(a, b, n_samples)
        return cls(ts, np.array([np.atleast_2d(L(t)) for t in ts]))

    @property
    def interval(self) -> tuple[float, float]:
        return float(self.ts[0]), float(self.ts[-1])


def parity(path: MatrixPath) -> int:
    """sigma(L, [a, b]) = eps(L(a)) * eps(L(b)); raises on a singular endpoint."""
    sa = det_sign(path.mats[0])
    sb = det_sign(path.mats[-1])
    if sa == 0 or sb == 0:
        raise AdmissibilityError("path endpoints must be invertible")
    return sa * sb


def sampled_parity(path: MatrixPath) -> int:
    """(-1)^(number of determinant sign changes between consecutive samples).

    Independent of :func:`parity`: it never compares the endpoints directly,
    so agreement of the two is a genuine check that sampling resolved every
    crossing of the singular set.
    """
    if det_sign(path.mats[0]) == 0 or det_sign(path.mats[-1]) == 0:
        raise AdmissibilityError("path endpoints must be invertible")
    signs = [raw_det_sign(m) for m in path.mats]
    flips = 0
    last = signs[0]
    for s in signs[1:]:
        if s == 0:
            continue
        if s != last:
            flips += 1
        last = s
    return -1 if flips % 2 else 1


def concatenate(first: MatrixPath, second: MatrixPath) -> MatrixPath:
    if first.ts[-1] != second.ts[0] or not np.allclose(first.mats[-1], second.mats[0]):
        raise ValueError("paths do not share the junction sample")
    return MatrixPath(np.concatenate((first.ts, second.ts[1:])),
                      np.concatenate((first.mats, second.mats[1:])))


# --------------------------------------------------------------------------
# local index and degree on boxes

def local_index(system: ParameterizedSystem, point: Point, tol: float = 1e-8) -> int:
    r = system.residual_norm(point)
    if r > tol:
        raise NotAZeroError(f"residual {r:.3g} exceeds {tol:.1g}")
    s = det_sign(system.Fu(point))
    if s == 0:
        raise SingularPointError("singular Jacobian: route to the singular module", point)
    return s


def _as_box(box) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(box, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("box must be (lo, hi) or a sequence of (lo, hi) pairs")
    lo, hi = arr[:, 0].copy(), arr[:, 1].copy()
    if np.any(hi <= lo):
        raise ValueError("box must have positive extent in every direction")
    return lo, hi


def _newton(f, jac, u0, max_iter=60):
    u = np.array(u0, dtype=float)
    fu = np.asarray(f(u), dtype=float)
    nf = np.linalg.norm(fu)
    for _ in range(max_iter):
        if nf == 0.0:
            break
        try:
            du = np.linalg.solve(np.atleast_2d(jac(u)), -fu)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(du)):
            return None
        step = 1.0
        for _ in range(30):
            trial = u + step * du
            ft = np.asarray(f(trial), dtype=float)
            nt = np.linalg.norm(ft)
            if np.isfinite(nt) and nt < nf:
                break
            step *= 0.5
        else:
            # no decrease: either converged to roundoff or stuck
            return u
        u, fu, nf = trial, ft, nt
        if step * np.linalg.norm(du) <= 1e-15 * (1.0 + np.linalg.norm(u)):
            break
    return u


def _boundary_samples(lo, hi, per_axis):
    n = lo.size
    axes = [np.linspace(lo[k], hi[k], per_axis) for k in range(n)]
    for k in range(n):
        for end in (lo[k], hi[k]):
            grids = [axes[j] if j != k else np.array([end]) for j in range(n)]
            for p in itertools.product(*grids):
                yield np.array(p)


def find_zeros(f: Callable, jac: Callable, box, seeds_per_axis: int = 20,
               rng: np.random.Generator | None = None, extra_seeds: int = 0):
    """Multistart damped Newton; returns sorted ``[(u, index), ...]`` inside ``box``.

    Raises AdmissibilityError when a zero sits on (or within 1e-8 of) the
    boundary and DegeneracyError when a zero inside has a singular Jacobian.
    """
    lo, hi = _as_box(box)
    n = lo.size
    diam = float(np.linalg.norm(hi - lo))

    for p in _boundary_samples(lo, hi, max(seeds_per_axis * 4, 8)):
        if np.linalg.norm(f(p), np.inf) <= BOUNDARY_TOL:
            raise AdmissibilityError(f"zero on the box boundary near {p}")

    centers = [lo[k] + (np.arange(seeds_per_axis) + 0.5) * (hi[k] - lo[k]) / seeds_per_axis
               for k in range(n)]
    seeds = [np.array(p) for p in itertools.product(*centers)]
    if extra_seeds:
        rng = rng or np.random.default_rng(0)
        seeds.extend(lo + (hi - lo) * rng.random((extra_seeds, n)))

    zeros: list[np.ndarray] = []
    for s in seeds:
        u = _newton(f, jac, s)
        if u is None or np.linalg.norm(f(u), np.inf) > ZERO_TOL:
            continue
        if np.any(u < lo) or np.any(u > hi):
            continue
        clearance = float(min(np.min(u - lo), np.min(hi - u)))
        if clearance <= BOUNDARY_TOL * max(diam, 1.0):
            raise AdmissibilityError(f"zero {u} lies on the box boundary")
        if all(np.linalg.norm(u - z) > DEDUP_RTOL * diam for z in zeros):
            zeros.append(u)

    zeros.sort(key=tuple)
    # a 1x1 Jacobian is never rank deficient relative to itself, so also
    # measure it against the Jacobian scale over the box
    j_scale = max((np.linalg.norm(np.atleast_2d(jac(s)), 2) for s in seeds[::max(len(seeds) // 50, 1)]),
                  default=0.0)
    out = []
    for z in zeros:
        Jz = np.atleast_2d(jac(z))
        smin = np.linalg.svd(Jz, compute_uv=False)[-1]
        idx = det_sign(Jz) if smin > REGULARITY_RTOL * j_scale else 0
        if idx == 0:
            raise DegeneracyError(
                f"degenerate zero at {z}; compute deg(f - v) for a small regular value v")
        out.append((z, idx))
    return out


def map_degree(f: Callable, jac: Callable, box, seeds_per_axis: int = 20,
               rng: np.random.Generator | None = None, extra_seeds: int = 0) -> int:
    """deg(f, box) as the sum of indices of the zeros found in the box."""
    return sum(i for _, i in find_zeros(f, jac, box, seeds_per_axis, rng, extra_seeds))


def box_degree(system: ParameterizedSystem, lambda0: float, box,
               seeds_per_axis: int = 20, rng: np.random.Generator | None = None,
               extra_seeds: int = 0) -> int:
    """Degree of the frozen slice map ``u -> F(lambda0, u)`` on an axis-aligned box."""
    return map_degree(lambda u: system.residual(lambda0, u),
                      lambda u: system.jac_u(lambda0, u),
                      box, seeds_per_axis, rng, extra_seeds)


# --------------------------------------------------------------------------
# degree balance on the base slice

@dataclass(frozen=True)
class SliceCrossing:
    u: np.ndarray
    index: int
    lambda0: float

    def to_dict(self):
        return {"lambda0": self.lambda0, "u": [float(x) for x in np.ravel(self.u)],
                "index": int(self.index)}


def _check_common_slice(crossings: Sequence[SliceCrossing]):
    if crossings and len({c.lambda0 for c in crossings}) != 1:
        raise ValueError("all crossings must share lambda0")


def degree_balance(crossings: Sequence[SliceCrossing]) -> int:
    """Sum of the local indices of the base-slice crossings (0 for an empty list)."""
    _check_common_slice(crossings)
    return int(sum(c.index for c in crossings))


def is_balanced(crossings: Sequence[SliceCrossing]) -> bool:
    """Index sum is 0 with an even number (at least 2) of nonzero-index crossings.

    An empty list is the vacuous case and is reported as not balanced.
    """
    _check_common_slice(crossings)
    nonzero = sum(1 for c in crossings if c.index != 0)
    return degree_balance(crossings) == 0 and nonzero >= 2 and nonzero % 2 == 0
