"""Unit tests for the alternating GLS fitting engine."""

import numpy as np
import pytest

from ccadjust.agls import (
    AdjustmentModel,
    AglsConfig,
    FitFailure,
    FitResult,
    MODEL_ORDER,
    comparison_rows,
    fit,
    fit_all,
    fit_matrix,
    fit_matrix_all,
    gls_loss,
    update_column_adjustment,
    update_row_adjustment,
    update_scalar_adjustment,
)
from ccadjust.correlation import TwoBlockData, correlations
from ccadjust.errors import DegenerateWeightsError
from ccadjust.linalg import sym_power

from conftest import random_psd, random_two_block


def test_model_from_string_and_labels():
    assert AdjustmentModel.from_string("ROW") is AdjustmentModel.ROW
    assert AdjustmentModel.NONE.label == "CCA"
    assert AdjustmentModel.SCALAR.label == "CCA-d"
    assert AdjustmentModel.ROW_COLUMN.label == "CCA-rc"
    with pytest.raises(ValueError, match="unknown adjustment model"):
        AdjustmentModel.from_string("bogus")


def test_config_validation():
    with pytest.raises(ValueError):
        AglsConfig(k=0)
    with pytest.raises(ValueError):
        AglsConfig(epsilon=0.0)
    with pytest.raises(ValueError):
        AglsConfig(max_iter=0)
    with pytest.raises(ValueError):
        AglsConfig(init="warm")


def test_gls_loss_identity_weights_is_sse():
    rng = np.random.default_rng(40)
    x = rng.normal(size=(4, 5))
    loss = gls_loss(x, np.zeros_like(x), np.eye(4), np.eye(5))
    assert np.isclose(loss, float(np.sum(x * x)), atol=1e-12)


def test_gls_loss_shape_validation():
    x = np.zeros((3, 4))
    with pytest.raises(ValueError):
        gls_loss(x, np.zeros((3, 3)), np.eye(3), np.eye(4))
    with pytest.raises(ValueError):
        gls_loss(x, x, np.eye(2), np.eye(4))


def test_none_model_matches_truncated_weighted_svd():
    rng = np.random.default_rng(41)
    x = rng.uniform(-1, 1, (5, 4))
    rw = random_psd(rng, 5)
    cw = random_psd(rng, 4)
    res = fit_matrix(x, rw, cw, "none", AglsConfig(k=2))
    assert res.iterations == 1 and res.converged
    tail = np.linalg.svd(
        sym_power(rw, 0.5) @ x @ sym_power(cw, 0.5), compute_uv=False
    )[2:]
    assert np.isclose(res.loss, float(tail @ tail), atol=1e-10)
    assert np.isclose(res.loss, gls_loss(x, res.yhat, rw, cw), atol=1e-10)


def test_reconstruction_and_offsets_composition():
    rng = np.random.default_rng(42)
    x = rng.uniform(-1, 1, (4, 5))
    res = fit_matrix(x, np.eye(4), np.eye(5), "row_column", AglsConfig(k=1))
    off = res.offsets()
    assert np.allclose(off, res.r_adj[:, None] + res.c_adj[None, :], atol=1e-14)
    assert np.allclose(res.reconstruction(), res.yhat + off, atol=1e-14)
    assert res.delta is None


def test_planted_scalar_offset_recovered():
    rng = np.random.default_rng(43)
    low = np.outer(rng.normal(size=5), rng.normal(size=4))
    x = low + 0.6
    res = fit_matrix(x, np.eye(5), np.eye(4), "scalar", AglsConfig(k=1))
    assert res.converged
    assert abs(res.delta - 0.6) < 1e-6
    assert res.loss < 1e-10


def test_planted_row_and_column_offsets_recovered():
    rng = np.random.default_rng(44)
    low = np.outer(rng.normal(size=5), rng.normal(size=6))
    r = rng.normal(size=5)
    c = rng.normal(size=6)
    x = low + r[:, None] + c[None, :]
    res = fit_matrix(x, np.eye(5), np.eye(6), "row_column", AglsConfig(k=1))
    assert res.loss < 1e-10
    assert np.allclose(res.reconstruction(), x, atol=1e-5)


def test_loss_traces_non_increasing_and_dominance():
    rng = np.random.default_rng(45)
    for _ in range(10):
        p = int(rng.integers(3, 7))
        q = int(rng.integers(3, 7))
        x = rng.uniform(-1, 1, (p, q))
        rw = random_psd(rng, p)
        cw = random_psd(rng, q)
        k = int(rng.integers(1, min(p, q)))
        results = fit_matrix_all(x, rw, cw, AglsConfig(k=k))
        assert not any(isinstance(r, FitFailure) for r in results)
        losses = {r.model.value: r.loss for r in results}
        for r in results:
            assert np.all(np.diff(r.loss_trace) <= 1e-12)
        slack = 1e-9
        assert losses["scalar"] <= losses["none"] + slack
        assert losses["row"] <= losses["scalar"] + slack
        assert losses["column"] <= losses["scalar"] + slack
        assert losses["row_column"] <= losses["row"] + slack
        assert losses["row_column"] <= losses["column"] + slack


def test_fit_matrix_all_matches_individual_fits():
    rng = np.random.default_rng(46)
    x = rng.uniform(-1, 1, (5, 4))
    rw = random_psd(rng, 5)
    cw = random_psd(rng, 4)
    config = AglsConfig(k=2)
    shared = fit_matrix_all(x, rw, cw, config)
    for model, res in zip(MODEL_ORDER, shared):
        single = fit_matrix(x, rw, cw, model, config)
        assert single.loss == res.loss
        assert np.array_equal(single.yhat, res.yhat)
        assert np.array_equal(single.loss_trace, res.loss_trace)


def test_rank_out_of_range_rejected():
    x = np.zeros((3, 4)) + np.eye(3, 4)
    with pytest.raises(ValueError, match="exceeds"):
        fit_matrix(x, np.eye(3), np.eye(4), "none", AglsConfig(k=4))


def test_degenerate_weights_reported_per_model():
    rng = np.random.default_rng(47)
    x1 = rng.normal(size=40)
    data = TwoBlockData(
        x=np.column_stack([x1, -x1]),
        y=rng.normal(size=(40, 3)),
        x_names=("up", "down"),
        y_names=("a", "b", "c"),
    )
    cs = correlations(data)
    assert cs.rank_xx == 1
    results = fit_all(cs, AglsConfig(k=1))
    by_model = {r.model: r for r in results}
    assert isinstance(by_model[AdjustmentModel.NONE], FitResult)
    assert isinstance(by_model[AdjustmentModel.ROW], FitResult)
    for model in (AdjustmentModel.SCALAR, AdjustmentModel.COLUMN,
                  AdjustmentModel.ROW_COLUMN):
        failure = by_model[model]
        assert isinstance(failure, FitFailure)
        assert "ones vector" in failure.error
    with pytest.raises(DegenerateWeightsError):
        fit(cs, AdjustmentModel.SCALAR, AglsConfig(k=1))


def test_non_convergence_sets_warning():
    rng = np.random.default_rng(48)
    data = random_two_block(rng, 50, 3, 4)
    cs = correlations(data)
    res = fit(cs, "scalar", AglsConfig(k=1, epsilon=1e-300, max_iter=1))
    assert res.converged is False
    assert "no convergence within 1" in res.warning
    assert res.iterations == 1


def test_update_operations_are_block_minimizers():
    rng = np.random.default_rng(49)
    x = rng.uniform(-1, 1, (5, 4))
    yhat = np.outer(rng.normal(size=5), rng.normal(size=4))
    rw = random_psd(rng, 5)
    cw = random_psd(rng, 4)
    delta = update_scalar_adjustment(x, yhat, rw, cw)
    base = gls_loss(x, yhat, rw, cw, delta=delta)
    for h in (-1e-4, 1e-4):
        assert gls_loss(x, yhat, rw, cw, delta=delta + h) >= base - 1e-12
    r0 = rng.normal(size=5)
    c = update_column_adjustment(x, yhat, r0, rw)
    base = gls_loss(x, yhat, rw, cw, r_adj=r0, c_adj=c)
    for j in range(4):
        for h in (-1e-4, 1e-4):
            bumped = c.copy()
            bumped[j] += h
            assert gls_loss(x, yhat, rw, cw, r_adj=r0, c_adj=bumped) >= base - 1e-12
    r = update_row_adjustment(x, yhat, c, cw)
    base = gls_loss(x, yhat, rw, cw, r_adj=r, c_adj=c)
    for i in range(5):
        for h in (-1e-4, 1e-4):
            bumped = r.copy()
            bumped[i] += h
            assert gls_loss(x, yhat, rw, cw, r_adj=bumped, c_adj=c) >= base - 1e-12


def test_comparison_rows_layout():
    rng = np.random.default_rng(50)
    data = random_two_block(rng, 40, 3, 3)
    cs = correlations(data)
    results = fit_all(cs, AglsConfig(k=2))
    rows = comparison_rows(results, rank=2)
    assert [row["method"] for row in rows] == ["CCA", "CCA-d", "CCA-r", "CCA-c", "CCA-rc"]
    for row in rows:
        assert row["rank"] == 2
        assert set(row) >= {"loss", "rmse_gls", "rmse_ols", "iterations", "converged"}
    failed = comparison_rows([FitFailure(AdjustmentModel.SCALAR, "boom")], rank=1)
    assert failed[0]["error"] == "boom"
    assert failed[0]["method"] == "CCA-d"


def test_fit_on_correlations_equals_fit_matrix_with_pinv_weights():
    rng = np.random.default_rng(51)
    data = random_two_block(rng, 45, 3, 4)
    cs = correlations(data)
    config = AglsConfig(k=2)
    via_cs = fit(cs, "column", config)
    rw = sym_power(cs.rxx, -1.0)
    cw = sym_power(cs.ryy, -1.0)
    via_matrix = fit_matrix(cs.rxy, rw, cw, "column", config)
    assert via_cs.loss == via_matrix.loss
    assert np.array_equal(via_cs.yhat, via_matrix.yhat)
