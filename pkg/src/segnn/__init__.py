"""Nearest-neighbor methods for testing spatial segregation and association
in labeled point patterns: NNCT tests, Cuzick-Edwards k-NN tests, Ripley's
K/L, pair correlation and Diggle's D."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    AnalyticMomentsUnavailable,
    DegenerateTableError,
    InvalidInputError,
    SegnnError,
    UnsupportedError,
)
from .geometry import EUCLIDEAN, Metric, PointSet, Rectangle, knn_index, nn_index  # noqa: E402
from .knn_tests import case_control, ce_all, ce_combined, ce_tk  # noqa: E402
from .moments import analytic_moments, permutation_cov  # noqa: E402
from .nnct import Nnct, build_nnct, build_nngraph  # noqa: E402
from .nnct_tests import (  # noqa: E402
    OVERALL_METHODS,
    TestResult,
    analyze,
    dixon_cell,
    dixon_overall,
    pielou,
    pielou_mc,
    summary_tests,
    version1,
    version2,
    version3,
)
