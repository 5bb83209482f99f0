"""Alternating generalized least squares fits with offset adjustments.

Fits a rank-k approximation yhat to a matrix x under the weighted loss

    sigma = trace( RW (x - yhat - offsets) CW (x - yhat - offsets)' )

where RW and CW are symmetric PSD row and column weight matrices and
the offsets are one of: nothing, a single scalar delta, a row vector
r 1', a column vector 1 c', or both. Each iteration applies the exact
coordinate minimizer for the enabled offsets followed by a weighted
truncated SVD for yhat, so the loss never increases. For correlation
input the weights are the (pseudo)inverses of the within-set
correlation matrices and the unadjusted model is classic CCA.
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import CcadjustError, DegenerateWeightsError
from .linalg import RANK_TOL, _svd_with_tail, sym_power

__all__ = [
    "AdjustmentModel",
    "AglsConfig",
    "FitResult",
    "FitFailure",
    "MODEL_ORDER",
    "gls_loss",
    "update_column_adjustment",
    "update_row_adjustment",
    "update_scalar_adjustment",
    "fit_matrix",
    "fit_matrix_all",
    "fit",
    "fit_all",
]


class AdjustmentModel(enum.Enum):
    """Which offsets are fitted alongside the low-rank term."""

    NONE = "none"
    SCALAR = "scalar"
    ROW = "row"
    COLUMN = "column"
    ROW_COLUMN = "row_column"

    @classmethod
    def from_string(cls, name):
        try:
            return cls(str(name).lower())
        except ValueError:
            raise ValueError(
                "unknown adjustment model %r; expected one of %s"
                % (name, ", ".join(m.value for m in cls))
            ) from None

    @property
    def has_scalar(self):
        return self is AdjustmentModel.SCALAR

    @property
    def has_row(self):
        return self in (AdjustmentModel.ROW, AdjustmentModel.ROW_COLUMN)

    @property
    def has_column(self):
        return self in (AdjustmentModel.COLUMN, AdjustmentModel.ROW_COLUMN)

    @property
    def label(self):
        return {
            AdjustmentModel.NONE: "CCA",
            AdjustmentModel.SCALAR: "CCA-d",
            AdjustmentModel.ROW: "CCA-r",
            AdjustmentModel.COLUMN: "CCA-c",
            AdjustmentModel.ROW_COLUMN: "CCA-rc",
        }[self]


MODEL_ORDER = (
    AdjustmentModel.NONE,
    AdjustmentModel.SCALAR,
    AdjustmentModel.ROW,
    AdjustmentModel.COLUMN,
    AdjustmentModel.ROW_COLUMN,
)


@dataclass
class AglsConfig:
    """Algorithm settings.

    epsilon is the convergence threshold on the per-iteration loss
    decrease. init selects the starting point: "zero" starts from
    yhat = 0 with zero offsets, "classic_cca" warm-starts yhat at the
    unadjusted rank-k fit.
    """

    k: int = 2
    epsilon: float = 1e-10
    max_iter: int = 10000
    init: str = "zero"
    rank_tol: float = RANK_TOL

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("rank k must be at least 1")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.init not in ("zero", "classic_cca"):
            raise ValueError("init must be 'zero' or 'classic_cca'")


@dataclass
class FitResult:
    """Converged (or stopped) fit of one adjustment model.

    yhat is the rank-k term only; reconstruction() adds the fitted
    offsets back. loss_trace[0] is the loss at initialization and entry
    t the loss after iteration t, so iterations == len(loss_trace) - 1.
    """

    model: AdjustmentModel
    yhat: np.ndarray
    a: np.ndarray
    b: np.ndarray
    d: np.ndarray
    delta: float | None
    r_adj: np.ndarray | None
    c_adj: np.ndarray | None
    loss_trace: np.ndarray
    rmse_gls: float
    rmse_ols: float
    iterations: int
    converged: bool
    warning: str | None = None

    @property
    def loss(self):
        return float(self.loss_trace[-1])

    @property
    def k(self):
        return int(self.d.shape[0])

    def offsets(self):
        """The fitted offset matrix (zeros for the unadjusted model)."""
        p, q = self.yhat.shape
        off = np.zeros((p, q))
        if self.delta is not None:
            off += self.delta
        if self.c_adj is not None:
            off += self.c_adj[None, :]
        if self.r_adj is not None:
            off += self.r_adj[:, None]
        return off

    def reconstruction(self):
        """Full approximation yhat plus offsets."""
        return self.yhat + self.offsets()


@dataclass
class FitFailure:
    """Placeholder returned by fit_all when one model raises."""

    model: AdjustmentModel
    error: str


def _residual(x, yhat, delta=0.0, r_adj=None, c_adj=None):
    x = np.asarray(x, dtype=float)
    yhat = np.asarray(yhat, dtype=float)
    if x.shape != yhat.shape:
        raise ValueError("x and yhat shapes differ: %s vs %s" % (x.shape, yhat.shape))
    e = x - yhat
    if delta:
        e = e - delta
    if c_adj is not None:
        c_adj = np.asarray(c_adj, dtype=float)
        if c_adj.shape != (x.shape[1],):
            raise ValueError("c_adj must have length %d" % x.shape[1])
        e = e - c_adj[None, :]
    if r_adj is not None:
        r_adj = np.asarray(r_adj, dtype=float)
        if r_adj.shape != (x.shape[0],):
            raise ValueError("r_adj must have length %d" % x.shape[0])
        e = e - r_adj[:, None]
    return e


def gls_loss(x, yhat, rw, cw, delta=0.0, r_adj=None, c_adj=None):
    """Weighted squared reconstruction error.

    Computes trace(RW E CW E') for the residual E of x against yhat
    plus the given offsets. With identity weights this is the plain sum
    of squared residuals.
    """
    e = _residual(x, yhat, delta, r_adj, c_adj)
    rw = np.asarray(rw, dtype=float)
    cw = np.asarray(cw, dtype=float)
    if rw.shape != (e.shape[0], e.shape[0]):
        raise ValueError("row weight matrix must be %d x %d" % (e.shape[0], e.shape[0]))
    if cw.shape != (e.shape[1], e.shape[1]):
        raise ValueError(
            "column weight matrix must be %d x %d" % (e.shape[1], e.shape[1])
        )
    return float(np.sum((rw @ e) * (e @ cw)))


def _ones_weight(w, side):
    w = np.asarray(w, dtype=float)
    w1 = w @ np.ones(w.shape[0])
    total = float(w1.sum())
    scale = max(1.0, float(np.trace(w)))
    if total <= 1e-12 * scale:
        raise DegenerateWeightsError(
            "the %s weight matrix annihilates the ones vector (1'W1 = %.3e)"
            % (side, total)
        )
    return w1, total


def update_column_adjustment(x, yhat, r_adj, rw):
    """Exact minimizer of the loss over the column offsets c.

    Solves for c in x ~ yhat + 1 c' + r 1' holding yhat and r fixed,
    under row weights rw. Pass r_adj=None when no row offsets are in
    the model.
    """
    e = _residual(x, yhat)
    r1, total = _ones_weight(rw, "row")
    c = e.T @ r1
    if r_adj is not None:
        c = c - float(r1 @ np.asarray(r_adj, dtype=float))
    return c / total


def update_row_adjustment(x, yhat, c_adj, cw):
    """Exact minimizer of the loss over the row offsets r.

    Mirror of update_column_adjustment with rows and columns exchanged;
    cw weights the columns.
    """
    e = _residual(x, yhat)
    c1, total = _ones_weight(cw, "column")
    r = e @ c1
    if c_adj is not None:
        r = r - float(c1 @ np.asarray(c_adj, dtype=float))
    return r / total


def update_scalar_adjustment(x, yhat, rw, cw):
    """Exact minimizer of the loss over a single scalar offset."""
    e = _residual(x, yhat)
    r1, rtotal = _ones_weight(rw, "row")
    c1, ctotal = _ones_weight(cw, "column")
    return float(r1 @ e @ c1) / (rtotal * ctotal)


class _Kernels:
    """Precomputed square roots of the weight matrices."""

    def __init__(self, rw, cw, rank_tol):
        self.rw = rw
        self.cw = cw
        self.rw_half = sym_power(rw, 0.5, rank_tol)
        self.cw_half = sym_power(cw, 0.5, rank_tol)
        self.rw_ihalf = sym_power(rw, -0.5, rank_tol)
        self.cw_ihalf = sym_power(cw, -0.5, rank_tol)


def _svd_step(target, kernels, k):
    """Weighted rank-k SVD step.

    Returns (a, d, b, yhat, loss) where loss is the GLS loss of yhat
    against the target, read off the discarded singular values.
    """
    fac, tail = _svd_with_tail(kernels.rw_half @ target @ kernels.cw_half, k)
    a = kernels.rw_ihalf @ fac.u
    b = kernels.cw_ihalf @ fac.v
    return a, fac.d, b, (a * fac.d) @ b.T, tail


def _fit_single(x, kernels, model, config, y0=None, r0=None):
    """One AGLS run from a given starting point.

    y0 is the initial rank-k term (zeros by default) and r0 the initial
    row offsets used by the first column-offset update of a row_column
    run. Each update is the exact minimizer of the loss in its block,
    so the loss trace cannot increase.
    """
    rw, cw = kernels.rw, kernels.cw
    p, q = x.shape
    delta = 0.0
    r_adj = (np.zeros(p) if r0 is None else np.array(r0, dtype=float)) \
        if model.has_row else None
    c_adj = np.zeros(q) if model.has_column else None
    a = np.zeros((p, config.k))
    b = np.zeros((q, config.k))
    d = np.zeros(config.k)
    yhat = np.zeros((p, q)) if y0 is None else np.array(y0, dtype=float)
    trace = [gls_loss(x, yhat, rw, cw, delta, r_adj, c_adj)]

    converged = False
    warning = None
    for _ in range(config.max_iter):
        if model.has_scalar:
            delta = update_scalar_adjustment(x, yhat, rw, cw)
        if model.has_column:
            c_adj = update_column_adjustment(x, yhat, r_adj, rw)
        if model.has_row:
            r_adj = update_row_adjustment(x, yhat, c_adj, cw)
        target = x - _offset_only(p, q, delta, r_adj, c_adj)
        a, d, b, yhat, step_loss = _svd_step(target, kernels, config.k)
        trace.append(step_loss)
        if model is AdjustmentModel.NONE:
            converged = True
            break
        if trace[-2] - trace[-1] <= config.epsilon:
            converged = True
            break
    if not converged:
        warning = "no convergence within %d iterations" % config.max_iter

    loss_trace = np.array(trace)
    final = float(loss_trace[-1])
    e_final = _residual(x, yhat, delta, r_adj, c_adj)
    return FitResult(
        model=model,
        yhat=yhat,
        a=a,
        b=b,
        d=d,
        delta=delta if model.has_scalar else None,
        r_adj=r_adj,
        c_adj=c_adj,
        loss_trace=loss_trace,
        rmse_gls=float(np.sqrt(max(final, 0.0) / (p * q))),
        rmse_ols=float(np.sqrt(np.sum(e_final * e_final) / (p * q))),
        iterations=len(trace) - 1,
        converged=converged,
        warning=warning,
    )


def _scalar_profile_seeds(x, kernels, config):
    """Starting values of delta near each basin of the profile loss.

    The profile g(delta) = min over rank-k yhat of the loss at a fixed
    delta equals the discarded singular-value mass of the weighted,
    shifted matrix, so scanning it needs one SVD per grid point and no
    iteration. Alternating descent only explores the basin it starts
    in; seeding a run at each local minimum of the coarse profile lets
    the scalar model find the globally best basin deterministically.
    """
    grid = np.linspace(-2.0, 2.0, 161)
    base = kernels.rw_half @ x @ kernels.cw_half
    step = kernels.rw_half @ np.ones(x.shape) @ kernels.cw_half
    stack = base[None, :, :] - grid[:, None, None] * step[None, :, :]
    s = np.linalg.svd(stack, compute_uv=False)
    values = np.sum(s[:, config.k:] ** 2, axis=1)
    seeds = []
    for i in range(1, len(grid) - 1):
        if values[i] < values[i - 1] and values[i] < values[i + 1]:
            seeds.append(float(grid[i]))
    return seeds


def _cascade(x, kernels, model, config, cache):
    """Fit one model, warm-starting from the models it dominates.

    Every model runs from its configured base start; richer models also
    run from the best solution of each model whose offsets they can
    represent (scalar from none, row and column from scalar, row_column
    from row and from column). Because each run's first updates are
    exact block minimizers, a warm-started run can never end above the
    loss of its donor, so the best run per model keeps the hierarchy's
    final losses nested. The scalar model additionally starts from each
    basin of its profile loss (see _scalar_profile_seeds). The best
    (first, on ties) run is returned.
    """
    if model in cache:
        return cache[model]
    starts = []
    if config.init == "classic_cca" and model is not AdjustmentModel.NONE:
        _a, _d, _b, y0, _loss = _svd_step(x, kernels, config.k)
        starts.append({"y0": y0})
    else:
        starts.append({})
    if model is AdjustmentModel.SCALAR:
        ones = np.ones(x.shape)
        for delta0 in _scalar_profile_seeds(x, kernels, config):
            _a, _d, _b, y0, _loss = _svd_step(x - delta0 * ones, kernels, config.k)
            starts.append({"y0": y0})

    def donor(parent):
        try:
            return _cascade(x, kernels, parent, config, cache)
        except CcadjustError:
            return None

    if model is AdjustmentModel.SCALAR:
        parents = [(AdjustmentModel.NONE, False)]
    elif model in (AdjustmentModel.ROW, AdjustmentModel.COLUMN):
        parents = [(AdjustmentModel.SCALAR, False)]
    elif model is AdjustmentModel.ROW_COLUMN:
        parents = [(AdjustmentModel.ROW, True), (AdjustmentModel.COLUMN, False)]
    else:
        parents = []
    for parent, carry_r in parents:
        prev = donor(parent)
        if prev is not None:
            start = {"y0": prev.yhat}
            if carry_r:
                start["r0"] = prev.r_adj
            starts.append(start)

    best = None
    for start in starts:
        res = _fit_single(x, kernels, model, config, **start)
        if best is None or res.loss < best.loss:
            best = res
    cache[model] = best
    return best


def _prepare(x, rw, cw, config):
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError("x must be a matrix")
    p, q = x.shape
    if config.k > min(p, q):
        raise ValueError(
            "rank k = %d exceeds min(p, q) = %d" % (config.k, min(p, q))
        )
    rw = np.asarray(rw, dtype=float)
    cw = np.asarray(cw, dtype=float)
    return x, _Kernels(rw, cw, config.rank_tol)


def fit_matrix(x, rw, cw, model=AdjustmentModel.NONE, config=None):
    """Fit one adjustment model to a matrix under explicit weights.

    This is the general engine; fit() wraps it for correlation input.
    rw and cw must be symmetric PSD. Non-convergence within max_iter is
    reported through converged=False and a warning string, not raised.
    """
    if config is None:
        config = AglsConfig()
    if isinstance(model, str):
        model = AdjustmentModel.from_string(model)
    x, kernels = _prepare(x, rw, cw, config)
    return _cascade(x, kernels, model, config, {})


def fit_matrix_all(x, rw, cw, config=None):
    """Fit all five adjustment models under explicit weights.

    Same results as separate fit_matrix calls but the warm-start chain
    is computed once and shared, which is much cheaper. Per-model
    failures come back as FitFailure entries.
    """
    if config is None:
        config = AglsConfig()
    try:
        x, kernels = _prepare(x, rw, cw, config)
    except Exception as exc:  # noqa: BLE001 - reported per model
        return [FitFailure(model=model, error=str(exc)) for model in MODEL_ORDER]
    cache = {}
    results = []
    for model in MODEL_ORDER:
        try:
            results.append(_cascade(x, kernels, model, config, cache))
        except Exception as exc:  # noqa: BLE001 - reported per model
            results.append(FitFailure(model=model, error=str(exc)))
    return results


def _offset_only(p, q, delta, r_adj, c_adj):
    off = np.zeros((p, q))
    if delta:
        off += delta
    if c_adj is not None:
        off += np.asarray(c_adj, dtype=float)[None, :]
    if r_adj is not None:
        off += np.asarray(r_adj, dtype=float)[:, None]
    return off


def fit(cs, model=AdjustmentModel.NONE, config=None):
    """Fit one adjustment model to a between-set correlation matrix.

    The weights are the Moore-Penrose inverses of the within-set
    correlation matrices, so the unadjusted model reproduces classic
    CCA of the correlation structure.
    """
    if config is None:
        config = AglsConfig()
    rw = sym_power(cs.rxx, -1.0, config.rank_tol)
    cw = sym_power(cs.ryy, -1.0, config.rank_tol)
    return fit_matrix(cs.rxy, rw, cw, model, config)


def fit_all(cs, config=None):
    """Fit all five adjustment models in a fixed order.

    Returns a list of FitResult in the order none, scalar, row, column,
    row_column. A model that raises is reported as a FitFailure entry
    and the remaining models still run. The warm-start cache is shared
    across the models, so the results are identical to separate fit()
    calls.
    """
    if config is None:
        config = AglsConfig()
    try:
        rw = sym_power(cs.rxx, -1.0, config.rank_tol)
        cw = sym_power(cs.ryy, -1.0, config.rank_tol)
    except Exception as exc:  # noqa: BLE001 - reported per model
        return [FitFailure(model=model, error=str(exc)) for model in MODEL_ORDER]
    return fit_matrix_all(cs.rxy, rw, cw, config)


def comparison_rows(results, rank=None):
    """Flat comparison-table rows for a fit_all result list."""
    rows = []
    for res in results:
        if isinstance(res, FitFailure):
            rows.append(
                {
                    "rank": rank,
                    "method": res.model.label,
                    "error": res.error,
                }
            )
            continue
        row = {
            "rank": rank if rank is not None else res.k,
            "method": res.model.label,
            "loss": res.loss,
            "rmse_gls": res.rmse_gls,
            "rmse_ols": res.rmse_ols,
            "iterations": res.iterations,
            "converged": res.converged,
        }
        rows.append(row)
    return rows
