"""Classic canonical correlation analysis and biplot coordinates.

The between-set correlation matrix is whitened on both sides with
(pseudo)inverse square roots of the within-set matrices and decomposed
by SVD. Singular within-set matrices are handled with the Moore-Penrose
inverse; canonical correlations past the retained rank are structural
zeros and reported as exact zeros with a flag, so the output length is
always min(p, q).
"""

from dataclasses import dataclass

import numpy as np

from .agls import gls_loss
from .linalg import RANK_TOL, sym_power, truncated_svd

__all__ = [
    "CcaSolution",
    "BiplotCoordinates",
    "cca",
    "biplot_coordinates",
    "goodness_of_fit",
]


@dataclass
class CcaSolution:
    """Canonical correlations, weights and variates.

    canonical_correlations has length min(p, q); entries at and past
    min(rank_xx, rank_yy) are exact zeros flagged in structural_zero.
    Weights columns for flagged axes are reported as computed but carry
    no information.
    """

    canonical_correlations: np.ndarray
    structural_zero: np.ndarray
    a_weights: np.ndarray
    b_weights: np.ndarray
    u_variates: np.ndarray
    v_variates: np.ndarray
    rank: int


@dataclass
class BiplotCoordinates:
    """Row (X) and column (Y) biplot coordinates for one alpha.

    f @ g.T always equals the rank-k weighted-least-squares
    reconstruction of rxy, independent of alpha.
    """

    f: np.ndarray
    g: np.ndarray
    alpha: float
    scaling_tag: str


def cca(cs, xs, ys, rank_tol=RANK_TOL):
    """Classic CCA of a correlation structure.

    xs and ys are the standardized blocks consistent with cs; they are
    only used to compute the canonical variates.
    """
    p, q = cs.rxy.shape
    m = min(p, q)
    wx = sym_power(cs.rxx, -0.5, rank_tol)
    wy = sym_power(cs.ryy, -0.5, rank_tol)
    fac = truncated_svd(wx @ cs.rxy @ wy, m)
    rank = min(cs.rank_xx, cs.rank_yy, m)
    corrs = fac.d.copy()
    flags = np.zeros(m, dtype=bool)
    corrs[rank:] = 0.0
    flags[rank:] = True
    a = wx @ fac.u
    b = wy @ fac.v
    return CcaSolution(
        canonical_correlations=corrs,
        structural_zero=flags,
        a_weights=a,
        b_weights=b,
        u_variates=np.asarray(xs, dtype=float) @ a,
        v_variates=np.asarray(ys, dtype=float) @ b,
        rank=rank,
    )


def _factors(source, cs):
    """Reconstruction factors (a, d, b) from a CCA solution or a fit.

    For a CcaSolution the factors are rxx @ A and ryy @ B, which equal
    the back-transformed singular vectors of the whitened problem. Fit
    results already carry them as attributes a, b, d.
    """
    if hasattr(source, "a_weights"):
        a = cs.rxx @ source.a_weights
        b = cs.ryy @ source.b_weights
        d = source.canonical_correlations
        return a, d, b
    return source.a, source.d, source.b


def biplot_coordinates(source, cs, alpha=1.0, k=2):
    """Biplot coordinates F = a d^alpha and G = b d^(1-alpha).

    source is a CcaSolution or a FitResult. At alpha = 0 the row
    coordinates are standard (unit weighted sum of squares per axis) and
    the column coordinates principal; at alpha = 1 the reverse. The
    product F @ G.T does not depend on alpha.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must be in [0, 1]")
    a, d, b = _factors(source, cs)
    if not 1 <= k <= d.shape[0]:
        raise ValueError(
            "k must be between 1 and %d, got %d" % (d.shape[0], k)
        )
    a = a[:, :k]
    b = b[:, :k]
    d = d[:k]
    f = a * d**alpha
    g = b * d ** (1.0 - alpha)
    if alpha == 1.0:
        tag = "standard"
    elif alpha == 0.0:
        tag = "principal"
    else:
        tag = "other"
    return BiplotCoordinates(f=f, g=g, alpha=float(alpha), scaling_tag=tag)


def goodness_of_fit(cs, khat, rank_tol=RANK_TOL):
    """Explained fraction of the total weighted sum of squares.

    Returns 1 - sigma(khat) / sigma(0) for the GLS loss of the rank-k
    reconstruction khat against rxy.
    """
    khat = np.asarray(khat, dtype=float)
    if khat.shape != cs.rxy.shape:
        raise ValueError(
            "khat shape %s does not match rxy shape %s"
            % (khat.shape, cs.rxy.shape)
        )
    rw = sym_power(cs.rxx, -1.0, rank_tol)
    cw = sym_power(cs.ryy, -1.0, rank_tol)
    total = gls_loss(cs.rxy, np.zeros_like(khat), rw, cw)
    if total <= 0:
        return 1.0
    return 1.0 - gls_loss(cs.rxy, khat, rw, cw) / total
