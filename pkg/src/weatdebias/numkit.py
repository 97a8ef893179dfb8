"""Small linear-algebra kernels shared by both debiasers."""

import numpy as np


class DegenerateInputError(ValueError):
    """Input has no usable spread / direction."""


def _fix_sign(v, tol=1e-12):
    # first coordinate that is clearly nonzero becomes positive
    nz = np.flatnonzero(np.abs(v) > tol * max(1.0, np.abs(v).max()))
    if nz.size and v[nz[0]] < 0:
        return -v
    return v


def top_principal_component(rows):
    """Unit direction of largest variance of the mean-centred rows.

    Equivalent to the leading eigenvector of the population covariance
    ``X_c.T @ X_c / n``; computed from the SVD of ``X_c``.  The sign is fixed
    so the first nonzero coordinate is positive.
    """
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[0] < 2:
        raise DegenerateInputError("need at least two rows")
    centred = rows - rows.mean(axis=0)
    scale = np.abs(rows).max()
    if scale == 0 or np.abs(centred).max() <= 1e-12 * scale:
        raise DegenerateInputError("all rows are identical")
    _, s, vt = np.linalg.svd(centred, full_matrices=False)
    return _fix_sign(vt[0] / np.linalg.norm(vt[0]))


def nullspace_basis(a, tol=1e-8):
    """Orthonormal rows spanning the (numerical) nullspace of ``a``.

    Right singular vectors whose singular value is below ``tol`` times the
    largest one are kept, plus the ``d - n`` directions the rows cannot
    reach.  Returns an array of shape ``(k, d)`` with ``k >= d - n``.
    """
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    n, d = a.shape
    if n >= d:
        raise ValueError(f"matrix is {n}x{d}; need fewer rows than columns for a guaranteed nullspace")
    _, s, vt = np.linalg.svd(a, full_matrices=True)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > tol * smax)) if smax > 0 else 0
    basis = vt[rank:]
    return np.array([_fix_sign(b) for b in basis]).reshape(-1, d)


def reject(w, u):
    """Component of ``w`` orthogonal to ``u`` (exact rejection, ``u`` any scale)."""
    w = np.asarray(w, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    uu = float(np.dot(u, u))
    if uu == 0.0:
        raise ValueError("cannot reject against a zero vector")
    return w - (np.dot(w, u) / uu) * u


def reject_rows(w, u):
    """Row-wise :func:`reject` for a matrix ``w``."""
    u = np.asarray(u, dtype=np.float64)
    uu = float(np.dot(u, u))
    if uu == 0.0:
        raise ValueError("cannot reject against a zero vector")
    return w - np.outer(w @ u / uu, u)


def _check_orthonormal(v1, v2, tol=1e-8):
    if abs(np.linalg.norm(v1) - 1) > tol or abs(np.linalg.norm(v2) - 1) > tol:
        raise ValueError("plane vectors must be unit length")
    if abs(np.dot(v1, v2)) > tol:
        raise ValueError("plane vectors must be orthogonal")


def circle_points(center, radius, v1, v2, n, phase=0.0):
    """``n`` points spaced evenly on a circle in the plane of ``v1``, ``v2``.

    Point ``i`` (1-based) sits at angle ``2*pi*i/n + phase``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if radius <= 0:
        raise ValueError("radius must be positive")
    center = np.asarray(center, dtype=np.float64)
    v1 = np.asarray(v1, dtype=np.float64)
    v2 = np.asarray(v2, dtype=np.float64)
    _check_orthonormal(v1, v2)
    ang = 2.0 * np.pi * np.arange(1, n + 1) / n + phase
    return center + radius * (np.cos(ang)[:, None] * v1 + np.sin(ang)[:, None] * v2)


def orthonormal_pair_perpendicular_to(u, candidates=None, tol=1e-8):
    """Two orthonormal vectors perpendicular to ``u``.

    When ``candidates`` rows are given the pair is taken from the nullspace
    of ``[u; candidates]`` if that space is at least 2-dimensional, otherwise
    from the complement of ``u`` alone.
    """
    u = np.asarray(u, dtype=np.float64)
    d = u.shape[0]
    if d < 3:
        raise ValueError("need at least 3 dimensions for a perpendicular plane")
    if not np.any(u):
        raise ValueError("u must be nonzero")
    if candidates is not None and len(candidates):
        stacked = np.vstack([u, np.atleast_2d(candidates)])
        if stacked.shape[0] < d:
            basis = nullspace_basis(stacked, tol)
            if basis.shape[0] >= 2:
                return basis[0], basis[1]
    basis = nullspace_basis(u[None, :], tol)
    return basis[0], basis[1]
