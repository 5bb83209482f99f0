"""Classic and adjusted canonical correlation analysis.

ccadjust fits low-rank approximations to the between-set correlation
matrix of two-block data under generalized least squares, with
optional scalar, row and/or column adjustments estimated by
alternating GLS. It renders the fits as calibrated biplots (SVG and
JSON scenes) and provides model-comparison and permutation-test
diagnostics.
"""

__version__ = "0.1.0"

from .agls import (
    AdjustmentModel,
    AglsConfig,
    FitFailure,
    FitResult,
    comparison_rows,
    fit,
    fit_all,
    fit_matrix,
    fit_matrix_all,
    gls_loss,
)
from .biplot import (
    BiplotScene,
    CalibratedAxis,
    Tick,
    build_scene,
    calibrate_axis,
    predict_correlation,
    predicted_matrix,
    render,
    scene_from_json,
    scene_to_json,
    scene_to_svg,
)
from .cca import (
    BiplotCoordinates,
    CcaSolution,
    biplot_coordinates,
    cca,
    goodness_of_fit,
)
from .correlation import (
    CorrelationStructure,
    TwoBlockData,
    correlations,
    standardize,
)
from .diagnostics import (
    AdjustedVariates,
    PermutationTestResult,
    adjusted_variates,
    permutation_test,
    rmse,
)
from .errors import (
    CcadjustError,
    DataError,
    DegenerateAxisError,
    DegenerateWeightsError,
    NotPsdError,
    NumericalError,
    SymmetryError,
)
from .ingest import (
    BlockSpec,
    apply_transforms,
    load_block_spec,
    load_csv,
    load_dataset,
)
from .linalg import SvdFactors, sym_eig, sym_power, truncated_svd

__all__ = [
    "__version__",
    "AdjustmentModel",
    "AglsConfig",
    "FitFailure",
    "FitResult",
    "comparison_rows",
    "fit",
    "fit_all",
    "fit_matrix",
    "fit_matrix_all",
    "gls_loss",
    "BiplotScene",
    "CalibratedAxis",
    "Tick",
    "build_scene",
    "calibrate_axis",
    "predict_correlation",
    "predicted_matrix",
    "render",
    "scene_from_json",
    "scene_to_json",
    "scene_to_svg",
    "BiplotCoordinates",
    "CcaSolution",
    "biplot_coordinates",
    "cca",
    "goodness_of_fit",
    "CorrelationStructure",
    "TwoBlockData",
    "correlations",
    "standardize",
    "AdjustedVariates",
    "PermutationTestResult",
    "adjusted_variates",
    "permutation_test",
    "rmse",
    "CcadjustError",
    "DataError",
    "DegenerateAxisError",
    "DegenerateWeightsError",
    "NotPsdError",
    "NumericalError",
    "SymmetryError",
    "BlockSpec",
    "apply_transforms",
    "load_block_spec",
    "load_csv",
    "load_dataset",
    "SvdFactors",
    "sym_eig",
    "sym_power",
    "truncated_svd",
]
