"""qsimval: measure how closely simulated search queries track real ones.

The package computes a taxonomy of per-pair measures (query statistics,
query similarity, IR effectiveness, SERP overlap) over paired real and
simulated sessions, then analyzes the relationships among those measures
with correlation matrices, normalized mutual information, exploratory
factor analysis, cluster-averaged correlations, and a bootstrap over
candidate query selection.
"""

from ._version import __version__
from .config import RunConfig, load_config
from .errors import AnalysisError, ConfigError, DataError, EmptyQueryError
from .matrix import MeasureMatrix
from .measures import Resources, compute_measures, report_lines
from .pipeline import (
    AnalysisBundle,
    augment_sessions,
    run_analysis,
    run_bootstrap,
    run_measures,
    run_report,
)
from .sessions import (
    PairingMode,
    PairingResult,
    Session,
    SessionCorpus,
    SessionPair,
    build_corpus,
    pair_sessions,
    parse_sessions,
    serialize_sessions,
)

__all__ = [
    "__version__",
    "AnalysisBundle",
    "AnalysisError",
    "ConfigError",
    "DataError",
    "EmptyQueryError",
    "MeasureMatrix",
    "PairingMode",
    "PairingResult",
    "Resources",
    "RunConfig",
    "Session",
    "SessionCorpus",
    "SessionPair",
    "augment_sessions",
    "build_corpus",
    "compute_measures",
    "load_config",
    "pair_sessions",
    "parse_sessions",
    "report_lines",
    "run_analysis",
    "run_bootstrap",
    "run_measures",
    "run_report",
    "serialize_sessions",
]
