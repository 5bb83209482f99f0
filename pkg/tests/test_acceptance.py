"""Acceptance tests, one per release criterion.

Golden values are published reference results (4 decimals) for the
datasets described in data/README.md. The sandstone and cardiovascular
files are not committed, so the tests that need them fail with a
pointer to the README rather than skip; the remaining criteria run on
the committed psychology data and on synthetic problems.

A summary with one PASS/FAIL line per criterion is printed at the end
of the pytest run (see conftest.py).
"""

import time

import numpy as np
import pytest

from ccadjust.agls import (
    AdjustmentModel,
    AglsConfig,
    FitFailure,
    fit,
    fit_all,
    fit_matrix,
    fit_matrix_all,
    gls_loss,
    update_column_adjustment,
    update_row_adjustment,
    update_scalar_adjustment,
)
from ccadjust.biplot import (
    build_scene,
    calibrate_axis,
    predict_correlation,
    predicted_matrix,
)
from ccadjust.cca import cca, goodness_of_fit
from ccadjust.cli import main
from ccadjust.correlation import TwoBlockData, correlations, standardize
from ccadjust.diagnostics import adjusted_variates, permutation_test, rmse

from conftest import (
    dataset_or_none,
    random_psd,
    random_two_block,
    require_dataset,
    sign_align,
)
from test_cli import write_dataset


PSYCHOLOGY_RANK2 = {
    "CCA": (0.0108, 0.0269, 0.0188),
    "CCA-d": (0.0004, 0.0052, 0.0030),
    "CCA-r": (0.0004, 0.0052, 0.0030),
    "CCA-c": (0.0000, 0.0000, 0.0000),
    "CCA-rc": (0.0000, 0.0000, 0.0000),
}


def test_criterion_01_psychology_model_table(psychology):
    cs = correlations(psychology)
    start = time.perf_counter()
    results = fit_all(cs, AglsConfig(k=2))
    elapsed = time.perf_counter() - start
    for res in results:
        assert not isinstance(res, FitFailure)
        loss, rmse_gls, rmse_ols = PSYCHOLOGY_RANK2[res.model.label]
        assert abs(res.loss - loss) <= 5e-4, res.model.label
        assert abs(res.rmse_gls - rmse_gls) <= 5e-4, res.model.label
        assert abs(res.rmse_ols - rmse_ols) <= 5e-4, res.model.label
    assert elapsed < 5.0


def test_criterion_02_canonical_correlations(psychology):
    cs = correlations(psychology)
    sol = cca(cs, *standardize(psychology))
    assert np.allclose(
        sol.canonical_correlations, (0.4641, 0.1675, 0.1040), atol=5e-4
    )

    sandstone = require_dataset("sandstone")
    sol = cca(correlations(sandstone), *standardize(sandstone))
    assert np.allclose(sol.canonical_correlations[:2], (0.9018, 0.5989), atol=5e-4)
    assert sol.canonical_correlations[2] == 0.0
    assert sol.structural_zero[2]

    cardio = require_dataset("cardiovascular")
    sol = cca(correlations(cardio), *standardize(cardio))
    assert np.allclose(sol.canonical_correlations[:2], (0.6082, 0.5383), atol=5e-4)


def test_criterion_03_psychology_delta_estimate(psychology):
    res = fit(correlations(psychology), "scalar", AglsConfig(k=2))
    assert res.converged
    assert abs(res.delta - (-0.27)) <= 0.005


SANDSTONE_RANK1 = {
    "CCA": (0.3587, 0.1546),
    "CCA-d": (0.1212, 0.0899),
    "CCA-r": (0.0000, 0.0000),
    "CCA-c": (0.1212, 0.0899),
    "CCA-rc": (0.0000, 0.0000),
}
SANDSTONE_RANK1_OLS = {"CCA-d": 3.3484, "CCA-r": 2.1553, "CCA-rc": 1.8183}
SANDSTONE_COLUMN_ADJ = (-0.15, 0.06, 0.10)


def test_criterion_04_sandstone_model_table():
    sandstone = require_dataset("sandstone")
    cs = correlations(sandstone)
    for res in fit_all(cs, AglsConfig(k=1)):
        assert not isinstance(res, FitFailure)
        loss, rmse_gls = SANDSTONE_RANK1[res.model.label]
        assert abs(res.loss - loss) <= 5e-4, res.model.label
        assert abs(res.rmse_gls - rmse_gls) <= 5e-4, res.model.label
        if res.model.label in SANDSTONE_RANK1_OLS:
            assert abs(res.rmse_ols - SANDSTONE_RANK1_OLS[res.model.label]) <= 0.05
        if res.model is AdjustmentModel.COLUMN:
            assert np.allclose(res.c_adj, SANDSTONE_COLUMN_ADJ, atol=0.01)
    for res in fit_all(cs, AglsConfig(k=2)):
        assert not isinstance(res, FitFailure)
        assert abs(res.loss) <= 5e-4, res.model.label
        assert abs(res.rmse_gls) <= 5e-4, res.model.label


CARDIO_RANK2 = {
    "CCA": (0.2480, 0.1016, 0.0827),
    "CCA-d": (0.1974, 0.0907, 0.0768),
    "CCA-r": (0.1948, 0.0901, 0.0774),
    "CCA-c": (0.1029, 0.0655, 0.0656),
    "CCA-rc": (0.1004, 0.0647, 0.0660),
}
CARDIO_COLUMN_ADJ = (0.104, 0.045, 0.016, 0.062, -0.041, 0.144)


def test_criterion_05_cardiovascular_model_table():
    cardio = require_dataset("cardiovascular")
    cs = correlations(cardio)
    for res in fit_all(cs, AglsConfig(k=2)):
        assert not isinstance(res, FitFailure)
        loss, rmse_gls, rmse_ols = CARDIO_RANK2[res.model.label]
        assert abs(res.loss - loss) <= 5e-4, res.model.label
        assert abs(res.rmse_gls - rmse_gls) <= 5e-4, res.model.label
        assert abs(res.rmse_ols - rmse_ols) <= 5e-4, res.model.label
        if res.model is AdjustmentModel.COLUMN:
            assert np.allclose(res.c_adj, CARDIO_COLUMN_ADJ, atol=0.01)
        if res.model is AdjustmentModel.NONE:
            assert abs(goodness_of_fit(cs, res.yhat) - 0.727) <= 0.005


def test_criterion_06_monotone_descent_and_dominance():
    rng = np.random.default_rng(7)
    start = time.perf_counter()
    for _ in range(200):
        p = int(rng.integers(3, 13))
        q = int(rng.integers(3, 13))
        x = rng.uniform(-1.0, 1.0, (p, q))
        rw = random_psd(rng, p)
        cw = random_psd(rng, q)
        k = int(rng.integers(1, min(p, q)))
        results = fit_matrix_all(x, rw, cw, AglsConfig(k=k, epsilon=1e-10))
        assert not any(isinstance(r, FitFailure) for r in results)
        losses = {}
        for res in results:
            assert np.all(np.diff(np.asarray(res.loss_trace)) <= 1e-12)
            losses[res.model.value] = res.loss
        slack = 1e-9
        assert losses["scalar"] <= losses["none"] + slack
        assert losses["row"] <= losses["scalar"] + slack
        assert losses["column"] <= losses["scalar"] + slack
        assert losses["row_column"] <= losses["row"] + slack
        assert losses["row_column"] <= losses["column"] + slack
    assert time.perf_counter() - start < 60.0


def test_criterion_07_scalar_oracle_equivalence():
    rng = np.random.default_rng(321)
    grid = np.arange(-3.0, 3.0 + 1e-9, 1e-3)
    checked = 0
    while checked < 20:
        x = rng.normal(size=(50, 3))
        y = x @ rng.normal(size=(3, 3)) + rng.normal(size=(50, 3))
        data = TwoBlockData(x=x, y=y, x_names=("a", "b", "c"),
                            y_names=("d", "e", "f"))
        rxy = correlations(data).rxy
        shifted = rxy[None, :, :] - grid[:, None, None] * np.ones((1, 3, 3))
        svals = np.linalg.svd(shifted, compute_uv=False)
        profile = np.sum(svals[:, 1:] ** 2, axis=1)
        best = int(np.argmin(profile))
        if best in (0, len(grid) - 1):
            # grid minimum on the boundary: the scalar offset runs away
            # on this instance and no finite optimum exists to compare to
            continue
        res = fit_matrix(rxy, np.eye(3), np.eye(3), "scalar",
                         AglsConfig(k=1, epsilon=1e-13, max_iter=200000))
        assert res.converged
        assert abs(res.loss - float(profile[best])) <= 1e-5
        checked += 1


def test_criterion_08_update_coordinate_minimizers():
    rng = np.random.default_rng(88)
    for _ in range(50):
        p = int(rng.integers(3, 9))
        q = int(rng.integers(3, 9))
        x = rng.uniform(-1.0, 1.0, (p, q))
        yhat = np.outer(rng.normal(size=p), rng.normal(size=q))
        rw = random_psd(rng, p)
        cw = random_psd(rng, q)

        delta = update_scalar_adjustment(x, yhat, rw, cw)
        base = gls_loss(x, yhat, rw, cw, delta=delta)
        for h in (-1e-4, 1e-4):
            assert gls_loss(x, yhat, rw, cw, delta=delta + h) >= base - 1e-10

        r0 = rng.normal(size=p)
        c = update_column_adjustment(x, yhat, r0, rw)
        base = gls_loss(x, yhat, rw, cw, r_adj=r0, c_adj=c)
        for j in range(q):
            for h in (-1e-4, 1e-4):
                bumped = c.copy()
                bumped[j] += h
                assert gls_loss(x, yhat, rw, cw, r_adj=r0, c_adj=bumped) \
                    >= base - 1e-10

        r = update_row_adjustment(x, yhat, c, cw)
        base = gls_loss(x, yhat, rw, cw, r_adj=r, c_adj=c)
        for i in range(p):
            for h in (-1e-4, 1e-4):
                bumped = r.copy()
                bumped[i] += h
                assert gls_loss(x, yhat, rw, cw, r_adj=bumped, c_adj=c) \
                    >= base - 1e-10


def test_criterion_09_rmse_loss_consistency():
    rng = np.random.default_rng(99)
    for _ in range(30):
        p = int(rng.integers(3, 8))
        q = int(rng.integers(3, 8))
        x = rng.uniform(-1.0, 1.0, (p, q))
        rw = random_psd(rng, p)
        cw = random_psd(rng, q)
        k = int(rng.integers(1, min(p, q)))
        for res in fit_matrix_all(x, rw, cw, AglsConfig(k=k)):
            assert not isinstance(res, FitFailure)
            assert abs(res.rmse_gls ** 2 * p * q - res.loss) <= 1e-10

        pair = rmse(rng.normal(size=(p, q)), np.eye(p), np.eye(q))
        assert pair.gls == pair.ols
        ident = fit_matrix(x, np.eye(p), np.eye(q), "scalar", AglsConfig(k=k))
        final = rmse(x - ident.reconstruction(), np.eye(p), np.eye(q))
        assert final.gls == final.ols
        assert abs(ident.rmse_gls - final.gls) <= 1e-12
        assert abs(ident.rmse_ols - final.ols) <= 1e-12


def _adjusted_variates_reproduce_classic(data, tol=1e-8):
    cs = correlations(data)
    xs, ys = standardize(data)
    sol = cca(cs, xs, ys)
    k = sol.rank
    fs = cs.rxx @ sol.a_weights[:, :k]
    gs = cs.ryy @ sol.b_weights[:, :k]
    av = adjusted_variates(xs, ys, cs, fs, gs)
    u = sign_align(sol.u_variates[:, :k], av.u_adj)
    v = sign_align(sol.v_variates[:, :k], av.v_adj)
    assert np.max(np.abs(u - sol.u_variates[:, :k])) <= tol
    assert np.max(np.abs(v - sol.v_variates[:, :k])) <= tol
    assert np.allclose(
        av.adjusted_canonical_correlations,
        sol.canonical_correlations[:k],
        atol=tol,
    )


def test_criterion_10_adjusted_variates_identity(psychology):
    _adjusted_variates_reproduce_classic(psychology)
    rng = np.random.default_rng(1010)
    for _ in range(20):
        n = int(rng.integers(30, 80))
        p = int(rng.integers(2, 6))
        q = int(rng.integers(2, 6))
        _adjusted_variates_reproduce_classic(random_two_block(rng, n, p, q))
    _adjusted_variates_reproduce_classic(require_dataset("sandstone"))
    _adjusted_variates_reproduce_classic(require_dataset("cardiovascular"))


def _assert_indicator_block_properties(data, corrs=None):
    cs = correlations(data)
    assert cs.rank_yy == 2
    sol = cca(cs, *standardize(data))
    nonzero = sol.canonical_correlations[~sol.structural_zero]
    assert nonzero.shape[0] == 2
    assert np.all(nonzero > 0)
    assert np.all(sol.canonical_correlations[sol.structural_zero] == 0.0)
    if corrs is not None:
        assert np.allclose(nonzero, corrs, atol=5e-4)
    res = fit(cs, "none", AglsConfig(k=2))
    assert res.loss < 1e-6
    assert res.rmse_gls < 1e-3


def test_criterion_11_pseudoinverse_indicator_block():
    rng = np.random.default_rng(1111)
    labels = np.array([i % 3 for i in range(60)])
    rng.shuffle(labels)
    y = np.zeros((60, 3))
    y[np.arange(60), labels] = 1.0
    data = TwoBlockData(
        x=rng.normal(size=(60, 5)) + 0.8 * labels[:, None],
        y=y,
        x_names=tuple("vwxyz"),
        y_names=("g=a", "g=b", "g=c"),
    )
    _assert_indicator_block_properties(data)
    sandstone = dataset_or_none("sandstone")
    if sandstone is not None:
        _assert_indicator_block_properties(sandstone, corrs=(0.9018, 0.5989))


def test_criterion_12_permutation_calibration(psychology):
    hits = 0
    for seed in range(100):
        rng = np.random.default_rng([977, seed])
        data = TwoBlockData(
            x=rng.normal(size=(100, 3)),
            y=rng.normal(size=(100, 3)),
            x_names=("a", "b", "c"),
            y_names=("d", "e", "f"),
        )
        res = permutation_test(data, n_permutations=999, seed=seed)
        if res.p_values[0] < 0.05:
            hits += 1
    assert hits <= 10
    observed = permutation_test(psychology, n_permutations=19999, seed=0)
    assert observed.p_values[0] <= 5e-3


def test_criterion_13_biplot_scene_fidelity(psychology):
    rng = np.random.default_rng(1313)
    data = random_two_block(rng, 70, 3, 4)
    cs = correlations(data)
    for res in fit_all(cs, AglsConfig(k=2)):
        assert not isinstance(res, FitFailure)
        scene = build_scene(res, data.x_names, data.y_names)
        recon = res.reconstruction()
        kind = res.model.value
        from_scene = predicted_matrix(scene)
        pred = np.empty_like(recon)
        for i in range(cs.p):
            for j in range(cs.q):
                if kind in ("none", "scalar", "column"):
                    pred[i, j] = predict_correlation(
                        scene.x_axes[i].vector, scene.y_axes[j]
                    )
                elif kind == "row":
                    pred[i, j] = predict_correlation(
                        scene.y_axes[j].vector, scene.x_axes[i]
                    )
                else:
                    pred[i, j] = from_scene[i, j]
        assert np.max(np.abs(pred - recon)) <= 1e-10, kind
        assert np.max(np.abs(from_scene - recon)) <= 1e-10, kind

    cs = correlations(psychology)
    res = fit(cs, "scalar", AglsConfig(k=2))
    scene = build_scene(res, psychology.x_names, psychology.y_names)
    pred = np.empty((cs.p, cs.q))
    for i in range(cs.p):
        for j in range(cs.q):
            pred[i, j] = predict_correlation(
                scene.x_axes[i].vector, scene.y_axes[j]
            )
    assert np.max(np.abs(pred - cs.rxy)) < 0.01

    g = np.array([0.44, -0.19])
    one = calibrate_axis(g, clip_radius=50.0)
    two = calibrate_axis(2.0 * g, clip_radius=50.0)
    assert 1.0 / float((2.0 * g) @ (2.0 * g)) == (1.0 / float(g @ g)) / 4.0
    by_value = {t.value: t for t in one.ticks}
    for tick in two.ticks:
        ref = by_value[tick.value]
        assert tick.position == (ref.position[0] / 2.0, ref.position[1] / 2.0)


def test_criterion_14_cli_determinism(tmp_path):
    data, spec = write_dataset(tmp_path, n=25, p=3, q=3, seed=14,
                               supplementary=True)
    commands = {
        "fit": ["fit", "--data", data, "--spec", spec, "--model", "delta",
                "--format", "both"],
        "compare": ["compare", "--data", data, "--spec", spec,
                    "--rank", "1", "--rank", "2"],
        "permtest": ["permtest", "--data", data, "--spec", spec,
                     "--permutations", "99", "--seed", "3"],
        "biplot": ["biplot", "--data", data, "--spec", spec,
                   "--model", "row", "--format", "both"],
        "report": ["report", "--data", data, "--spec", spec, "--rank", "1"],
    }
    for name, argv in commands.items():
        out_dirs = []
        for run in ("one", "two"):
            out = tmp_path / name / run
            assert main(argv + ["--out", str(out)]) == 0, name
            out_dirs.append(out)
        first = sorted(p.name for p in out_dirs[0].iterdir())
        second = sorted(p.name for p in out_dirs[1].iterdir())
        assert first == second
        compared = 0
        for fname in first:
            if fname.endswith((".json", ".svg", ".csv", ".txt")):
                assert (out_dirs[0] / fname).read_bytes() == \
                    (out_dirs[1] / fname).read_bytes(), (name, fname)
                compared += 1
        assert compared > 0, name
