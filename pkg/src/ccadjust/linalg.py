"""Dense symmetric-matrix kernels and truncated SVD.

Everything here is deterministic. Eigenvector and singular-vector signs
are fixed by making the entry of largest absolute value in each (left)
vector positive, so downstream coordinates and golden tests are
reproducible. Rank decisions use a relative eigenvalue threshold and
follow Moore-Penrose conventions: eigenvalues at or below the threshold
are treated as exactly zero and stay zero under negative powers.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NotPsdError, SymmetryError

SYM_TOL = 1e-10
RANK_TOL = 1e-10


@dataclass
class SvdFactors:
    """Leading singular triplets of a rectangular matrix.

    u : (m, k) orthonormal columns
    d : (k,) nonnegative singular values, non-increasing
    v : (n, k) orthonormal columns, so u @ diag(d) @ v.T approximates
        the decomposed matrix.
    """

    u: np.ndarray
    d: np.ndarray
    v: np.ndarray


def check_symmetric(m, tol=SYM_TOL):
    """Validate symmetry of a square matrix within tolerance.

    Returns the matrix as a float array. Raises SymmetryError reporting
    the maximum asymmetry otherwise.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square matrix, got shape %s" % (m.shape,))
    asym = float(np.max(np.abs(m - m.T))) if m.size else 0.0
    if asym > tol:
        raise SymmetryError(
            "matrix is not symmetric: max |a_ij - a_ji| = %.3e exceeds %.1e"
            % (asym, tol)
        )
    return m


def _fix_vector_signs(u, v=None):
    """Make the largest-magnitude entry of each column of u positive.

    When v is given its columns are flipped together with u's, which
    preserves any product u @ diag(d) @ v.T.
    """
    for j in range(u.shape[1]):
        col = u[:, j]
        idx = int(np.argmax(np.abs(col)))
        if col[idx] < 0:
            u[:, j] = -col
            if v is not None:
                v[:, j] = -v[:, j]
    return u, v


def sym_eig(m, tol=SYM_TOL):
    """Eigendecomposition of a symmetric matrix.

    Returns (eigenvalues, eigenvectors) with eigenvalues in descending
    order and orthonormal eigenvectors as columns, signs fixed.
    """
    m = check_symmetric(m, tol)
    vals, vecs = np.linalg.eigh((m + m.T) / 2.0)
    vals = vals[::-1].copy()
    vecs = vecs[:, ::-1].copy()
    _fix_vector_signs(vecs)
    return vals, vecs


def sym_power(m, exponent, rank_tol=RANK_TOL):
    """Matrix power of a symmetric PSD matrix with pseudoinverse rules.

    Supported exponents are 1/2, -1/2 and -1. Eigenvalues at or below
    rank_tol times the largest eigenvalue count as zero and map to zero
    in the output, so negative exponents produce the Moore-Penrose
    pseudoinverse (root). An eigenvalue below -1e-8 times the largest
    raises NotPsdError.
    """
    if exponent not in (0.5, -0.5, -1.0):
        raise ValueError("unsupported exponent %r" % (exponent,))
    vals, vecs = sym_eig(m)
    lam_max = float(vals[0]) if vals.size else 0.0
    neg_tol = 1e-8 * max(lam_max, 0.0)
    lam_min = float(vals[-1]) if vals.size else 0.0
    if lam_min < -neg_tol - 1e-300:
        raise NotPsdError(
            "matrix is not positive semidefinite: eigenvalue %.3e" % lam_min
        )
    keep = vals > rank_tol * lam_max
    out = np.zeros_like(vals)
    out[keep] = vals[keep] ** exponent
    result = (vecs * out) @ vecs.T
    return (result + result.T) / 2.0


def _svd_with_tail(m, k):
    """Leading k singular triplets plus the squared mass beyond them.

    The tail (sum of the squared singular values after the k-th) equals
    the squared Frobenius distance between m and its best rank-k
    approximation, which saves recomputing residuals in inner loops.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise ValueError("expected a matrix, got shape %s" % (m.shape,))
    if not 1 <= k <= min(m.shape):
        raise ValueError(
            "k must be between 1 and min(rows, cols) = %d, got %d"
            % (min(m.shape), k)
        )
    u, d, vt = np.linalg.svd(m, full_matrices=False)
    tail = float(d[k:] @ d[k:])
    u = u[:, :k].copy()
    v = vt[:k].T.copy()
    d = d[:k].copy()
    _fix_vector_signs(u, v)
    return SvdFactors(u=u, d=d, v=v), tail


def truncated_svd(m, k):
    """Leading k singular triplets of a rectangular matrix.

    The returned rank-k product u @ diag(d) @ v.T is the best rank-k
    approximation of m in the Frobenius norm. Signs follow the package
    convention on the left singular vectors.
    """
    factors, _tail = _svd_with_tail(m, k)
    return factors
