"""Fit diagnostics: RMSE, permutation tests, adjusted variates.

The permutation test permutes the rows of the Y block only, which
preserves both within-set correlation matrices; only the between-set
matrix changes per replicate, so the whitening matrices are computed
once. Replicate RNG streams derive from (seed, replicate index), making
p-values reproducible bit for bit and independent of execution order.
"""

from dataclasses import dataclass

import numpy as np

from .correlation import correlations, standardize
from .errors import NumericalError
from .linalg import RANK_TOL, sym_power

__all__ = [
    "RmsePair",
    "PermutationTestResult",
    "AdjustedVariates",
    "rmse",
    "permutation_test",
    "adjusted_variates",
]


@dataclass
class RmsePair:
    """Root mean squared error under GLS and OLS weighting."""

    gls: float
    ols: float


@dataclass
class PermutationTestResult:
    observed: np.ndarray
    p_values: np.ndarray
    n_permutations: int
    seed: int


@dataclass
class AdjustedVariates:
    """Adjusted canonical variates and their per-axis correlations.

    pseudo_inverse_used records whether a rank-deficient Gram matrix
    forced a pseudoinverse in either regression.
    """

    u_adj: np.ndarray
    v_adj: np.ndarray
    adjusted_canonical_correlations: np.ndarray
    pseudo_inverse_used: bool


def rmse(e, rw, cw):
    """RMSE of an error matrix under given and under identity weights.

    gls is sqrt(trace(RW E CW E') / (p q)); ols replaces both weight
    matrices with identities, which reduces to the plain root mean
    square of the entries.
    """
    e = np.asarray(e, dtype=float)
    rw = np.asarray(rw, dtype=float)
    cw = np.asarray(cw, dtype=float)
    if e.ndim != 2:
        raise ValueError("e must be a matrix")
    p, q = e.shape
    if rw.shape != (p, p) or cw.shape != (q, q):
        raise ValueError("weight shapes do not match the error matrix")
    gls_sq = float(np.sum((rw @ e) * (e @ cw)))
    ols_sq = float(np.sum(e * e))
    return RmsePair(
        gls=float(np.sqrt(max(gls_sq, 0.0) / (p * q))),
        ols=float(np.sqrt(ols_sq / (p * q))),
    )


def _canonical_correlations(wx, wy, rxy, rank):
    vals = np.linalg.svd(wx @ rxy @ wy, compute_uv=False)
    vals = vals[: min(rxy.shape)].copy()
    vals[rank:] = 0.0
    return vals


def permutation_test(data, n_permutations=999, seed=0, rank_tol=RANK_TOL):
    """Permutation test for the canonical correlations.

    Permutes Y-block rows jointly, keeping X fixed, and recomputes all
    canonical correlations per replicate. The p-value for axis i is
    (1 + #{replicates >= observed_i}) / (n_permutations + 1). A
    replicate whose decomposition fails is retried with a fresh
    permutation, at most 10 times.
    """
    if n_permutations < 99:
        raise ValueError("n_permutations must be at least 99")
    xs, ys = standardize(data)
    cs = correlations(data, rank_tol)
    n = data.n
    rank = min(cs.rank_xx, cs.rank_yy, min(cs.rxy.shape))
    wx = sym_power(cs.rxx, -0.5, rank_tol)
    wy = sym_power(cs.ryy, -0.5, rank_tol)
    observed = _canonical_correlations(wx, wy, cs.rxy, rank)
    xs_t = xs.T / (n - 1)
    counts = np.zeros(observed.shape[0])
    for rep in range(n_permutations):
        rng = np.random.default_rng([seed, rep])
        for _ in range(11):
            perm = rng.permutation(n)
            try:
                vals = _canonical_correlations(wx, wy, xs_t @ ys[perm], rank)
            except np.linalg.LinAlgError:
                continue
            break
        else:
            raise NumericalError(
                "replicate %d failed to decompose after 10 retries" % rep
            )
        counts += vals >= observed
    p_values = (1.0 + counts) / (n_permutations + 1.0)
    return PermutationTestResult(
        observed=observed,
        p_values=p_values,
        n_permutations=int(n_permutations),
        seed=int(seed),
    )


def _column_corr(u, v):
    out = np.zeros(u.shape[1])
    for i in range(u.shape[1]):
        a = u[:, i] - u[:, i].mean()
        b = v[:, i] - v[:, i].mean()
        denom = np.sqrt(float(a @ a) * float(b @ b))
        out[i] = float(a @ b) / denom if denom > 0 else 0.0
    return out


def adjusted_variates(xs, ys, cs, fs, gs, rank_tol=RANK_TOL):
    """Adjusted canonical variates from standard biplot coordinates.

    Regresses the standardized data onto the standard row and column
    coordinates of a converged fit:

        u_adj = Xs Rxx^+ Fs (Fs' Rxx^+ Fs)^+
        v_adj = Ys Ryy^+ Gs (Gs' Ryy^+ Gs)^+

    For the unadjusted model this reproduces the classic canonical
    variates. Per-axis correlations of the paired adjusted variates are
    the adjusted canonical correlations.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    fs = np.asarray(fs, dtype=float)
    gs = np.asarray(gs, dtype=float)
    rxx_inv = sym_power(cs.rxx, -1.0, rank_tol)
    ryy_inv = sym_power(cs.ryy, -1.0, rank_tol)
    pseudo = False
    out = []
    for block, w_inv, coords in ((xs, rxx_inv, fs), (ys, ryy_inv, gs)):
        proj = w_inv @ coords
        gram = coords.T @ proj
        gram = (gram + gram.T) / 2.0
        vals = np.linalg.eigvalsh(gram)
        lam_max = float(vals[-1]) if vals.size else 0.0
        if vals.size and float(vals[0]) <= rank_tol * lam_max:
            pseudo = True
            gram_inv = sym_power(gram, -1.0, rank_tol)
            out.append(block @ proj @ gram_inv)
        else:
            out.append(block @ np.linalg.solve(gram, proj.T).T)
    u_adj, v_adj = out
    return AdjustedVariates(
        u_adj=u_adj,
        v_adj=v_adj,
        adjusted_canonical_correlations=_column_corr(u_adj, v_adj),
        pseudo_inverse_used=pseudo,
    )
