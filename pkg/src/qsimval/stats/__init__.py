"""Statistical analysis: correlations, mutual information, factor
analysis, bootstrap robustness, and cluster-averaged correlations."""

from .correlation import CorrelationMatrix, correlation_matrix, kendall_tau_b, pearson
from .information import NmiReport, flag_nonlinear, nmi, nmi_matrix
from .factor import FactorSolution, efa, varimax
from .bootstrap import BootstrapReport, bootstrap_correlations
from .clusters import ClusterAverages, cluster_average_correlation

__all__ = [
    "CorrelationMatrix",
    "correlation_matrix",
    "pearson",
    "kendall_tau_b",
    "NmiReport",
    "nmi",
    "nmi_matrix",
    "flag_nonlinear",
    "FactorSolution",
    "efa",
    "varimax",
    "BootstrapReport",
    "bootstrap_correlations",
    "ClusterAverages",
    "cluster_average_correlation",
]
