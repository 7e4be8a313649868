"""Magnitude-shape analytics for functional data.

Computes directional outlyingness of discretized curves (univariate or
multivariate), aggregates it into per-curve magnitude/shape/total summaries,
detects outliers with a robust-distance rule, generates the benchmark
contamination models, and emits the associated plots.  A CLI (``msplot``)
and a FastAPI service (:mod:`msplot.service`) wrap the same core.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    ArrayNeedsMultivariate,
    DegenerateCrossSection,
    DegenerateSample,
    DomainError,
    DuplicateId,
    InputError,
    InsufficientData,
    InvalidGrid,
    MSPlotError,
    NoBoundaryGeometry,
    NonFiniteValue,
    NotPositiveDefinite,
    NumericalError,
    ParseError,
    RaggedGrid,
    ShapeMismatch,
    SingularScatter,
    UnknownModel,
    UseClosedForm,
)
from .fdmodel import (  # noqa: F401
    FunctionalSample,
    Grid,
    LabeledSample,
    trapezoid_grid,
    uniform_grid,
    validate,
)
from .pointwise import (  # noqa: F401
    DirectionSet,
    PointwiseField,
    deepest_point,
    directional_outlyingness_1d,
    pointwise_field,
    sample_directions,
    sdo_md,
)
from .functional import (  # noqa: F401
    OutlyingnessSummary,
    array_summaries,
    ms_coordinates,
    summarize,
    summarize_sample,
)
from .robustdet import (  # noqa: F401
    BoundaryGeometry,
    DetectionResult,
    DetectorConfig,
    RobustFit,
    c_step,
    cutoff,
    detect_outliers,
    ellipsoid_boundary,
    estimate_df_mc,
    fast_mcd,
    srmd,
)
from .simulate import (  # noqa: F401
    MaternParams,
    ModelSpec,
    bessel_k,
    gp_sample,
    matern,
    model_sample,
    substream_seed,
)
from .evalbench import RateSummary, detection_rates, run_benchmark  # noqa: F401
from .plotout import (  # noqa: F401
    PlotDocument,
    emit_msplot,
    emit_msplot_array,
    emit_outliergram,
)
from .dataio import (  # noqa: F401
    format_long_csv,
    format_result_csv,
    format_truth_csv,
    parse_long_csv,
)
