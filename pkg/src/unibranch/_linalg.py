"""Small dense linear-algebra helpers shared by several modules."""

import numpy as np

# smallest singular value must exceed this fraction of the largest
REGULARITY_RTOL = 1e-8


def as_square(matrix):
    a = np.atleast_2d(np.asarray(matrix, dtype=float))
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


def is_regular(matrix, rtol=REGULARITY_RTOL):
    a = as_square(matrix)
    s = np.linalg.svd(a, compute_uv=False)
    return bool(s[0] > 0.0 and s[-1] > rtol * s[0])


def raw_det_sign(matrix):
    """Sign of det from a pivoted LU factorization, with no regularity threshold."""
    a = as_square(matrix)
    sign, _ = np.linalg.slogdet(a)
    return int(sign)


def det_sign(matrix, rtol=REGULARITY_RTOL):
    """Sign of the determinant: -1, +1, or 0 when numerically singular.

    Singularity is judged by ``sigma_min <= rtol * sigma_max`` rather than by
    the raw determinant, whose magnitude scales badly with dimension.
    """
    a = as_square(matrix)
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    if not is_regular(a, rtol):
        return 0
    return raw_det_sign(a)


def canonical_sign(vectors):
    """Flip each column so that its largest-magnitude entry is positive."""
    v = np.array(vectors, dtype=float, copy=True)
    for j in range(v.shape[1]):
        col = v[:, j]
        k = int(np.argmax(np.abs(col)))
        if col[k] < 0:
            v[:, j] = -col
    return v
