"""Seeded random families shared by the degree tests and the acceptance suite."""

import numpy as np
from scipy.linalg import expm

from unibranch.degree import MatrixPath, map_degree
from unibranch.oracles import random_polynomial_slice


def random_invertible(rng, n):
    while True:
        A = rng.standard_normal((n, n))
        s = np.linalg.svd(A, compute_uv=False)
        if s[-1] > 0.1 * s[0]:
            return A


def linear_degree(A, seeds_per_axis=None):
    n = A.shape[0]
    spa = seeds_per_axis or {1: 20, 2: 12, 3: 5}[n]
    return map_degree(lambda u: A @ u, lambda u: A, [(-1.0, 1.0)] * n, seeds_per_axis=spa)


def random_matrix_family(rng, n):
    """L(t) = A0 + t A1 + t^2 A2, a smooth matrix path."""
    A0, A1, A2 = (rng.standard_normal((n, n)) for _ in range(3))
    return lambda t: A0 + t * A1 + t * t * A2


def split_paths(rng, n, samples=201):
    """Two sampled paths on [a, b] and [b, c] of one family, with regular endpoints."""
    from unibranch._linalg import det_sign

    while True:
        L = random_matrix_family(rng, n)
        a, b, c = np.sort(rng.uniform(-2, 2, 3))
        if b - a < 0.2 or c - b < 0.2:
            continue
        if 0 in (det_sign(L(a)), det_sign(L(b)), det_sign(L(c))):
            continue
        if min(abs(np.linalg.det(L(t))) for t in (a, b, c)) < 1e-3:
            continue
        return (MatrixPath.from_function(L, a, b, samples),
                MatrixPath.from_function(L, b, c, samples), L)


def split_point(roots_axis, lo=-2.0, hi=2.0, clearance=0.06):
    """A cut position strictly between zeros, away from all of them."""
    cands = np.linspace(lo + 0.5, hi - 0.5, 61)
    ok = [c for c in cands if all(abs(c - r) > clearance for r in roots_axis)]
    return float(ok[len(ok) // 2]) if ok else None


def zero_coordinates(ps):
    """Zeros of a random polynomial slice as an (k, dim) array."""
    if ps.kind == "1d":
        return np.array([[r] for r in ps.roots])
    if ps.kind == "complex":
        return np.array([[z.real, z.imag] for z in ps.roots[0] + ps.roots[1]])
    return np.array([[a, b] for a in ps.roots[0] for b in ps.roots[1]])


def moving_homotopy(rng, dim):
    """H(t, u) = M(t) p(u - t s): zeros translate, M(t) = expm(t B) stays invertible."""
    ps = random_polynomial_slice(rng, dim)
    s = rng.uniform(-0.3, 0.3, dim)
    B = rng.standard_normal((dim, dim))

    def H(t):
        M = expm(t * B)
        return (lambda u: M @ ps.f(np.asarray(u) - t * s),
                lambda u: M @ ps.jac(np.asarray(u) - t * s))
    return ps, H
