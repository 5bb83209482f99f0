"""Command line interface.

Subcommands: fit (one model), compare (all five models), permtest
(permutation test of the canonical correlations), biplot (calibrated
scene as SVG and/or JSON) and report (figures plus delimited outputs
for all models). All outputs land in the --out directory. Exit codes:
0 success, 1 data problems, 2 numerical problems.
"""

import argparse
import json
import os
import sys

from . import __version__
from .agls import AdjustmentModel, AglsConfig, FitFailure, comparison_rows, fit, fit_all
from .biplot import build_scene, render
from .cca import biplot_coordinates
from .correlation import correlations, standardize
from .diagnostics import adjusted_variates, permutation_test
from .errors import CcadjustError, DataError, NumericalError
from .ingest import load_block_spec, load_csv, save_csv
from .report import save_comparison_png, save_scene_png

MODEL_FLAGS = {
    "cca": AdjustmentModel.NONE,
    "delta": AdjustmentModel.SCALAR,
    "row": AdjustmentModel.ROW,
    "col": AdjustmentModel.COLUMN,
    "rowcol": AdjustmentModel.ROW_COLUMN,
}
FLAG_FOR_MODEL = {model: flag for flag, model in MODEL_FLAGS.items()}

ROWCOL_WARNING = (
    "warning: row and column adjusted biplots do not have a unique origin; "
    "correlation scales are omitted"
)


def _add_data_args(p):
    p.add_argument("--data", required=True, help="CSV data file")
    p.add_argument("--spec", required=True, help="JSON block spec file")


def _add_fit_args(p):
    p.add_argument("--model", choices=sorted(MODEL_FLAGS), default="cca",
                   help="adjustment model (default cca)")
    p.add_argument("--rank", type=int, default=2, help="approximation rank (default 2)")
    p.add_argument("--alpha", type=float, default=1.0,
                   help="biplot coordinate scaling exponent (default 1)")
    _add_iter_args(p)


def _add_iter_args(p):
    p.add_argument("--epsilon", type=float, default=1e-10,
                   help="convergence threshold on the loss decrease (default 1e-10)")
    p.add_argument("--max-iter", type=int, default=10000,
                   help="iteration cap (default 10000)")


def _add_out_args(p, default_format):
    p.add_argument("--out", default=".", help="output directory (default .)")
    p.add_argument("--format", choices=("json", "svg", "both"), default=default_format,
                   help="biplot output format (default %s)" % default_format)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ccadjust",
        description="Classic and adjusted canonical correlation analysis "
        "of two-block data, with calibrated biplots.",
    )
    parser.add_argument("--version", action="version", version="ccadjust " + __version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit one adjustment model")
    _add_data_args(p)
    _add_fit_args(p)
    p.add_argument("--seed", type=int, default=0, help="unused by fit; accepted "
                   "so scripted flag sets work across subcommands")
    _add_out_args(p, "json")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("compare", help="fit all five models and tabulate")
    _add_data_args(p)
    p.add_argument("--rank", type=int, action="append",
                   help="approximation rank; repeat for several (default 2)")
    _add_iter_args(p)
    p.add_argument("--out", default=".", help="output directory (default .)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("permtest", help="permutation test of the canonical correlations")
    _add_data_args(p)
    p.add_argument("--permutations", type=int, default=999,
                   help="number of permutation replicates (default 999)")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--out", default=".", help="output directory (default .)")
    p.set_defaults(func=cmd_permtest)

    p = sub.add_parser("biplot", help="render a calibrated biplot")
    _add_data_args(p)
    _add_fit_args(p)
    p.add_argument("--clip-radius", type=float, default=1.5,
                   help="plot radius beyond which axes are truncated (default 1.5)")
    _add_out_args(p, "both")
    p.set_defaults(func=cmd_biplot)

    p = sub.add_parser("report", help="figures and tables for all models")
    _add_data_args(p)
    p.add_argument("--rank", type=int, action="append",
                   help="approximation rank; repeat for several (default 2)")
    p.add_argument("--alpha", type=float, default=1.0,
                   help="biplot coordinate scaling exponent (default 1)")
    _add_iter_args(p)
    _add_out_args(p, "both")
    p.set_defaults(func=cmd_report)

    return parser


def _load(args):
    spec = load_block_spec(args.spec)
    data = load_csv(args.data, spec)
    cs = correlations(data)
    return data, cs


def _config(args, rank=None):
    return AglsConfig(
        k=rank if rank is not None else args.rank,
        epsilon=args.epsilon,
        max_iter=args.max_iter,
    )


def _check_rank(cs, rank):
    limit = min(cs.p, cs.q)
    if not 1 <= rank <= limit:
        raise DataError(
            "rank %d out of range for %d x %d correlation matrix (1..%d)"
            % (rank, cs.p, cs.q, limit)
        )


def _write_json(obj, path):
    text = json.dumps(obj, indent=2) + "\n"
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise DataError("cannot write %r: %s" % (path, exc)) from exc
    return path


def _outdir(args):
    out = args.out or "."
    try:
        os.makedirs(out, exist_ok=True)
    except OSError as exc:
        raise DataError("cannot create output directory %r: %s" % (out, exc)) from exc
    return out


def _summary_line(flag, res):
    line = (
        "model=%s k=%d loss=%.4f rmse_gls=%.4f rmse_ols=%.4f "
        "iterations=%d converged=%s"
        % (
            flag,
            res.k,
            res.loss,
            res.rmse_gls,
            res.rmse_ols,
            res.iterations,
            "true" if res.converged else "false",
        )
    )
    if res.delta is not None:
        line += " delta=%.2f" % res.delta
    return line


def _fit_payload(flag, res, data, alpha):
    coords = biplot_coordinates(res, None, alpha=alpha, k=res.k)
    return {
        "schema_version": "1",
        "model": flag,
        "adjustment": res.model.value,
        "method": res.model.label,
        "rank": res.k,
        "alpha": alpha,
        "x_names": list(data.x_names),
        "y_names": list(data.y_names),
        "converged": res.converged,
        "iterations": res.iterations,
        "loss": res.loss,
        "loss_trace": [float(v) for v in res.loss_trace],
        "rmse_gls": res.rmse_gls,
        "rmse_ols": res.rmse_ols,
        "delta": res.delta,
        "row_adjustments": None if res.r_adj is None else [float(v) for v in res.r_adj],
        "column_adjustments": None if res.c_adj is None else [float(v) for v in res.c_adj],
        "singular_values": [float(v) for v in res.d],
        "f": [[float(v) for v in row] for row in coords.f],
        "g": [[float(v) for v in row] for row in coords.g],
        "approximation": [[float(v) for v in row] for row in res.reconstruction()],
        "warning": res.warning,
    }


def _scene_for(res, data, cs, alpha, clip_radius=1.5):
    """Build the scene for a fit, overlaying individuals when the data
    carry supplementary columns (grouped by the first one)."""
    points = None
    groups = None
    if data.supplementary:
        xs, ys = standardize(data)
        av = adjusted_variates(xs, ys, cs, res.a, res.b)
        points = av.u_adj[:, : min(2, res.k)]
        first = next(iter(data.supplementary))
        groups = ["%s=%g" % (first, v) for v in data.supplementary[first]]
    return build_scene(
        res,
        x_names=data.x_names,
        y_names=data.y_names,
        alpha=alpha,
        clip_radius=clip_radius,
        points=points,
        point_groups=groups,
    )


def cmd_fit(args):
    data, cs = _load(args)
    _check_rank(cs, args.rank)
    model = MODEL_FLAGS[args.model]
    res = fit(cs, model, _config(args))
    out = _outdir(args)
    _write_json(_fit_payload(args.model, res, data, args.alpha),
                os.path.join(out, "fit.json"))
    if args.format in ("svg", "both"):
        if model is AdjustmentModel.ROW_COLUMN:
            print(ROWCOL_WARNING, file=sys.stderr)
        scene = _scene_for(res, data, cs, args.alpha)
        render(scene, "svg", os.path.join(out, "biplot.svg"))
    if res.warning:
        print("warning: %s" % res.warning, file=sys.stderr)
    print(_summary_line(args.model, res))
    return 0


def _enriched_rows(results, rank):
    rows = comparison_rows(results, rank)
    for row, res in zip(rows, results):
        row["model"] = FLAG_FOR_MODEL[res.model]
        if not isinstance(res, FitFailure):
            row["delta"] = res.delta
    return rows


def _format_table(rank, rows):
    lines = ["rank %d" % rank]
    lines.append("%-8s %9s %9s %9s" % ("Method", "σ", "RMSE-GLS", "RMSE-OLS"))
    for row in rows:
        if "error" in row:
            lines.append("%-8s failed: %s" % (row["method"], row["error"]))
        else:
            lines.append(
                "%-8s %9.4f %9.4f %9.4f"
                % (row["method"], row["loss"], row["rmse_gls"], row["rmse_ols"])
            )
    return "\n".join(lines)


def _ranks(args):
    ranks = args.rank if args.rank else [2]
    seen = []
    for rank in ranks:
        if rank not in seen:
            seen.append(rank)
    return seen


def _compare_blocks(args, data, cs):
    blocks = []
    for rank in _ranks(args):
        _check_rank(cs, rank)
        results = fit_all(cs, _config(args, rank))
        blocks.append((rank, results, _enriched_rows(results, rank)))
    return blocks


def _compare_payload(blocks):
    return {
        "schema_version": "1",
        "ranks": [
            {"rank": rank, "rows": rows} for rank, _results, rows in blocks
        ],
    }


def _compare_csv_rows(blocks):
    csv_rows = []
    for rank, _results, rows in blocks:
        for row in rows:
            if "error" in row:
                csv_rows.append([rank, row["method"], "", "", "", row["error"]])
            else:
                csv_rows.append(
                    [
                        rank,
                        row["method"],
                        repr(row["loss"]),
                        repr(row["rmse_gls"]),
                        repr(row["rmse_ols"]),
                        "",
                    ]
                )
    return csv_rows


def cmd_compare(args):
    data, cs = _load(args)
    blocks = _compare_blocks(args, data, cs)
    out = _outdir(args)
    for i, (rank, results, rows) in enumerate(blocks):
        if i:
            print()
        print(_format_table(rank, rows))
        for res in results:
            if not isinstance(res, FitFailure) and res.warning:
                print("warning: %s: %s" % (res.model.label, res.warning),
                      file=sys.stderr)
    _write_json(_compare_payload(blocks), os.path.join(out, "compare.json"))
    save_csv(
        os.path.join(out, "compare.csv"),
        ["rank", "method", "sigma", "rmse_gls", "rmse_ols", "error"],
        _compare_csv_rows(blocks),
    )
    return 0


def cmd_permtest(args):
    data, _cs = _load(args)
    try:
        res = permutation_test(data, n_permutations=args.permutations, seed=args.seed)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    out = _outdir(args)
    payload = {
        "schema_version": "1",
        "seed": res.seed,
        "n_permutations": res.n_permutations,
        "observed": [float(v) for v in res.observed],
        "p_values": [float(v) for v in res.p_values],
    }
    _write_json(payload, os.path.join(out, "permtest.json"))
    for i, (obs, pval) in enumerate(zip(res.observed, res.p_values)):
        print("axis %d: correlation=%.4f p=%.6f" % (i + 1, obs, pval))
    return 0


def cmd_biplot(args):
    data, cs = _load(args)
    _check_rank(cs, args.rank)
    model = MODEL_FLAGS[args.model]
    res = fit(cs, model, _config(args))
    if model is AdjustmentModel.ROW_COLUMN:
        print(ROWCOL_WARNING, file=sys.stderr)
    if res.warning:
        print("warning: %s" % res.warning, file=sys.stderr)
    scene = _scene_for(res, data, cs, args.alpha, args.clip_radius)
    out = _outdir(args)
    written = []
    if args.format in ("svg", "both"):
        written.append(render(scene, "svg", os.path.join(out, "biplot.svg")))
    if args.format in ("json", "both"):
        written.append(render(scene, "json", os.path.join(out, "biplot.json")))
    print("wrote %s" % ", ".join(written))
    return 0


def cmd_report(args):
    data, cs = _load(args)
    blocks = _compare_blocks(args, data, cs)
    out = _outdir(args)
    tables = []
    for rank, results, rows in blocks:
        tables.append(_format_table(rank, rows))
        save_comparison_png(rows, os.path.join(out, "comparison_rank%d.png" % rank),
                            rank=rank)
        for res in results:
            if isinstance(res, FitFailure):
                print("warning: %s failed: %s" % (res.model.label, res.error),
                      file=sys.stderr)
                continue
            if res.model is AdjustmentModel.ROW_COLUMN:
                print(ROWCOL_WARNING, file=sys.stderr)
            if res.warning:
                print("warning: %s: %s" % (res.model.label, res.warning),
                      file=sys.stderr)
            flag = FLAG_FOR_MODEL[res.model]
            scene = _scene_for(res, data, cs, args.alpha)
            stem = os.path.join(out, "biplot_%s_rank%d" % (flag, rank))
            if args.format in ("svg", "both"):
                render(scene, "svg", stem + ".svg")
            if args.format in ("json", "both"):
                render(scene, "json", stem + ".json")
            save_scene_png(scene, stem + ".png")
    _write_json(_compare_payload(blocks), os.path.join(out, "compare.json"))
    save_csv(
        os.path.join(out, "compare.csv"),
        ["rank", "method", "sigma", "rmse_gls", "rmse_ols", "error"],
        _compare_csv_rows(blocks),
    )
    text = "\n\n".join(tables) + "\n"
    try:
        with open(os.path.join(out, "report.txt"), "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise DataError("cannot write report.txt: %s" % exc) from exc
    print(text, end="")
    print("report written to %s" % out)
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DataError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    except NumericalError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except CcadjustError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
