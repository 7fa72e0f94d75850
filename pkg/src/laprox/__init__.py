"""Sampling estimators for the Laplacian pseudo-inverse diagonal and Kemeny's constant."""

__version__ = "0.1.0"

from .ecc import (DiagEstimate, derived_metrics, ecc_scores, estimate_lewalk,  # noqa: E402
                  estimate_spantree, hoeffding_sample_size_ecc)
from .errors import (GraphParseError, GraphTooSmallError, LaproxError,  # noqa: E402
                     NumericError, OracleCapError, UsageError, WalkLimitError)
from .graph import (Graph, RootedTree, bfs_tree, parse_edge_list, read_edge_list,  # noqa: E402
                    select_landmark, stationary_distribution)
from .kc import (KcEstimate, estimate_kc_lewalk, estimate_kc_spantree,  # noqa: E402
                 hoeffding_sample_size_kc)
from .sampling import RngStream, make_stream, wilson_tree, wilson_with_tallies  # noqa: E402

__all__ = [
    "DiagEstimate", "Graph", "GraphParseError", "GraphTooSmallError", "KcEstimate",
    "LaproxError", "NumericError", "OracleCapError", "RngStream", "RootedTree", "UsageError",
    "WalkLimitError", "bfs_tree", "derived_metrics", "ecc_scores", "estimate_kc_lewalk",
    "estimate_kc_spantree", "estimate_lewalk", "estimate_spantree", "hoeffding_sample_size_ecc",
    "hoeffding_sample_size_kc", "make_stream", "parse_edge_list", "read_edge_list",
    "select_landmark", "stationary_distribution", "wilson_tree", "wilson_with_tallies",
]
