"""End-to-end orchestration: SERP augmentation, measure computation,
statistical analysis, bootstrap, and artifact writing.

Analysis artifacts are written independently: one failing step is
recorded and the remaining files are still produced. All writers go
through serialize.py, so two runs on identical inputs yield byte-
identical JSONL/CSV/JSON.
"""

from __future__ import annotations

import dataclasses
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import requests

from ._version import __version__
from .config import RunConfig, default_clusters
from .embeddings import open_provider
from .errors import AnalysisError, ConfigError, DataError
from .heatmap import svg_heatmap
from .matrix import MeasureMatrix
from .measures import Resources, compute_measures, report_lines
from .retrieval import parse_qrels
from .serialize import (
    dump_json,
    dump_jsonl,
    measure_matrix_to_csv,
    square_matrix_to_csv,
    table_to_csv,
)
from .sessions import (
    PairingMode,
    Session,
    SessionCorpus,
    build_corpus,
    pair_sessions,
    parse_sessions,
    serialize_sessions,
)
from .stats import (
    bootstrap_correlations,
    cluster_average_correlation,
    correlation_matrix,
    efa,
    flag_nonlinear,
    nmi_matrix,
)
from .wordnet import load_wndb_dir

__all__ = [
    "AnalysisBundle",
    "augment_sessions",
    "load_corpus",
    "load_resources",
    "run_measures",
    "run_analysis",
    "run_bootstrap",
    "run_report",
]

_RETRY_ATTEMPTS = 3
_BACKOFF_START_SECONDS = 0.25


# ---------------------------------------------------------------------------
# step 0: SERP augmentation


def _post_search(
    session: requests.Session,
    endpoint: str,
    query: str,
    k: int,
    timeout: float,
    sleeper: Callable[[float], None],
) -> list[str]:
    last_error: Exception | None = None
    for attempt in range(_RETRY_ATTEMPTS):
        if attempt:
            sleeper(_BACKOFF_START_SECONDS * (2 ** (attempt - 1)))
        try:
            response = session.post(
                endpoint, json={"query": query, "k": k}, timeout=timeout
            )
            if response.status_code == 200:
                payload = response.json()
                doc_ids = payload.get("doc_ids") if isinstance(payload, dict) else None
                if not isinstance(doc_ids, list) or not all(
                    isinstance(d, str) for d in doc_ids
                ):
                    raise DataError(f"malformed search response for query '{query}'")
                if len(set(doc_ids)) != len(doc_ids):
                    raise DataError(f"duplicate in SERP returned for query '{query}'")
                return doc_ids[:k]
            last_error = DataError(f"search API returned HTTP {response.status_code}")
        except requests.RequestException as exc:
            last_error = exc
    raise DataError(
        f"search API failed after {_RETRY_ATTEMPTS} attempts: {last_error}"
    ) from last_error


def augment_sessions(
    sessions: list[Session],
    endpoint: str,
    k: int,
    timeout: float = 30.0,
    max_in_flight: int = 4,
    http_session: requests.Session | None = None,
    sleeper: Callable[[float], None] = time.sleep,
) -> list[Session]:
    """Fill every empty SERP by querying the search API; interactions that
    already have SERPs pass through untouched."""
    if k < 1:
        raise ConfigError(f"augmentation k must be >= 1, got {k}")
    if max_in_flight < 1:
        raise ConfigError(f"max_in_flight must be >= 1, got {max_in_flight}")
    http = http_session or requests.Session()
    jobs = []  # (session index, interaction index, query)
    for si, session in enumerate(sessions):
        for ii, interaction in enumerate(session.interactions):
            if not interaction.serp:
                jobs.append((si, ii, interaction.query))
    if not jobs:
        return list(sessions)

    with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
        results = list(
            pool.map(
                lambda job: _post_search(http, endpoint, job[2], k, timeout, sleeper),
                jobs,
            )
        )

    filled: dict[tuple[int, int], list[str]] = {
        (si, ii): doc_ids for (si, ii, _q), doc_ids in zip(jobs, results)
    }
    updated = []
    for si, session in enumerate(sessions):
        interactions = []
        for ii, interaction in enumerate(session.interactions):
            if (si, ii) in filled:
                interactions.append(
                    dataclasses.replace(
                        interaction, serp=tuple(filled[(si, ii)]), augmented=True
                    )
                )
            else:
                interactions.append(interaction)
        updated.append(dataclasses.replace(session, interactions=tuple(interactions)))
    return updated


def augment_file(
    sessions_path: str,
    kind: str,
    endpoint: str,
    k: int,
    out_path: str,
    timeout: float = 30.0,
    max_in_flight: int = 4,
    http_session: requests.Session | None = None,
    sleeper: Callable[[float], None] = time.sleep,
) -> int:
    """Augment a sessions file on disk; returns the number of SERPs
    filled. The output appears atomically (temp file + rename)."""
    sessions = parse_sessions(_read_file(sessions_path), kind)
    augmented = augment_sessions(
        sessions, endpoint, k, timeout, max_in_flight, http_session, sleeper
    )
    filled = sum(
        1
        for before, after in zip(sessions, augmented)
        for b, a in zip(before.interactions, after.interactions)
        if not b.serp and a.serp
    )
    target = Path(out_path)
    target.parent.mkdir(parents=True, exist_ok=True)
    tmp = target.with_name(target.name + ".tmp")
    tmp.write_text(serialize_sessions(augmented), "utf-8")
    tmp.replace(target)
    return filled


# ---------------------------------------------------------------------------
# input loading


def _read_file(path: str) -> bytes:
    p = Path(path)
    if not p.is_file():
        raise DataError(f"input file not found: {path}")
    return p.read_bytes()


def load_corpus(config: RunConfig) -> SessionCorpus:
    if not config.real or not config.simulated:
        raise ConfigError("both 'real' and 'simulated' session paths are required")
    real = parse_sessions(_read_file(config.real), "real")
    simulated = parse_sessions(_read_file(config.simulated), "simulated")
    return build_corpus(real, simulated)


def load_resources(config: RunConfig) -> Resources:
    resources = Resources()
    if config.qrels is not None:
        resources.qrels = parse_qrels(_read_file(config.qrels))
    if config.wordnet_dir is not None:
        resources.graph = load_wndb_dir(config.wordnet_dir)
    if config.embeddings is not None:
        resources.provider = open_provider(config.embeddings)
    if config.annotations is not None:
        raw = json.loads(_read_file(config.annotations).decode("utf-8"))
        if not isinstance(raw, dict) or not all(
            isinstance(v, list) for v in raw.values()
        ):
            raise DataError(
                "annotations file must map record or session ids to entity lists"
            )
        resources.annotations = raw
    return resources


def _write(out_dir: Path, name: str, content: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    path.write_text(content, "utf-8")
    return path


# ---------------------------------------------------------------------------
# step 1: measures


def run_measures(
    config: RunConfig,
    corpus: SessionCorpus | None = None,
    resources: Resources | None = None,
) -> MeasureMatrix:
    """Pair sessions, evaluate all enabled measures, and write
    measures.jsonl + measure_matrix.csv + resolved_config.json."""
    corpus = corpus if corpus is not None else load_corpus(config)
    resources = resources if resources is not None else load_resources(config)
    pairing = pair_sessions(corpus, config.pairing)
    matrix = compute_measures(pairing, config, resources)
    digest = config.digest()
    out_dir = Path(config.out)
    _write(out_dir, "measures.jsonl", dump_jsonl(report_lines(matrix, digest, __version__)))
    _write(out_dir, "measure_matrix.csv", measure_matrix_to_csv(matrix, digest, __version__))
    _write(
        out_dir,
        "resolved_config.json",
        dump_json({"config": config.resolved_dict(), "digest": digest, "version": __version__}),
    )
    return matrix


# ---------------------------------------------------------------------------
# steps 2-4: analysis


@dataclass
class AnalysisBundle:
    written: dict[str, Path] = field(default_factory=dict)
    errors: dict[str, str] = field(default_factory=dict)

    def ok(self) -> bool:
        return not self.errors


def run_analysis(matrix: MeasureMatrix, config: RunConfig) -> AnalysisBundle:
    """Correlations, NMI + flags, EFA, cluster averages, optional heatmap.

    Artifacts are independent: a failing step is recorded in the bundle
    and the rest are still written."""
    if matrix.n_columns < 2:
        raise AnalysisError(
            f"analysis requires at least 2 measure columns, found {matrix.n_columns}"
        )
    digest = config.digest()
    out_dir = Path(config.out)
    bundle = AnalysisBundle()

    correlations = {}
    for method, filename in (("pearson", "pearson.csv"), ("kendall", "kendall.csv")):
        try:
            corr = correlation_matrix(matrix, method)
            correlations[method] = corr
            bundle.written[filename] = _write(
                out_dir,
                filename,
                square_matrix_to_csv(
                    corr.names, corr.values, digest, __version__, method=method
                ),
            )
        except Exception as exc:  # per-artifact isolation
            bundle.errors[filename] = str(exc)

    nmi_report = None
    try:
        nmi_report = nmi_matrix(matrix, config.nmi_bins)
        bundle.written["nmi.csv"] = _write(
            out_dir,
            "nmi.csv",
            square_matrix_to_csv(
                nmi_report.names,
                nmi_report.values,
                digest,
                __version__,
                bins=str(nmi_report.bins),
                method="nmi",
            ),
        )
    except Exception as exc:
        bundle.errors["nmi.csv"] = str(exc)

    try:
        if nmi_report is None or "pearson" not in correlations or "kendall" not in correlations:
            raise AnalysisError("flagging needs both correlation matrices and NMI")
        flags = flag_nonlinear(
            correlations["pearson"],
            correlations["kendall"],
            nmi_report,
            config.t_nmi,
            config.t_lin,
        )
        bundle.written["flags.json"] = _write(
            out_dir,
            "flags.json",
            dump_json(
                {
                    "config_digest": digest,
                    "version": __version__,
                    "thresholds": {"t_nmi": config.t_nmi, "t_lin": config.t_lin},
                    "bins": flags.bins,
                    "flagged": [
                        {
                            "pair": [a, b],
                            "nmi": nmi_value,
                            "pearson": rp,
                            "kendall": rk,
                        }
                        for a, b, nmi_value, rp, rk in flags.flagged_pairs
                    ],
                }
            ),
        )
    except Exception as exc:
        bundle.errors["flags.json"] = str(exc)

    try:
        solution = efa(matrix, config.efa_n_factors, config.efa_max_iter, config.efa_tol)
        factor_names = [f"factor_{i + 1}" for i in range(solution.n_factors)]
        header_names = [*factor_names, "communality", "uniqueness"]
        rows = []
        for i in range(len(solution.names)):
            rows.append(
                [
                    *solution.loadings[i],
                    solution.communalities[i],
                    solution.uniquenesses[i],
                ]
            )
        bundle.written["efa_loadings.csv"] = _write(
            out_dir,
            "efa_loadings.csv",
            table_to_csv(solution.names, header_names, rows, digest, __version__),
        )
        bundle.written["efa_summary.json"] = _write(
            out_dir,
            "efa_summary.json",
            dump_json(
                {
                    "config_digest": digest,
                    "version": __version__,
                    "estimator": "principal-axis + varimax",
                    "n_factors": solution.n_factors,
                    "converged": solution.converged,
                    "eigenvalues": [float(v) for v in solution.eigenvalues],
                    "explained_variance": [float(v) for v in solution.explained_variance],
                    "n_rows_used": solution.n_rows_used,
                    "dropped_columns": list(solution.dropped_columns),
                }
            ),
        )
    except Exception as exc:
        bundle.errors["efa_loadings.csv"] = str(exc)

    try:
        clusters = (
            {name: list(members) for name, members in config.clusters.items()}
            if config.clusters is not None
            else {
                name: list(members)
                for name, members in default_clusters(
                    list(matrix.column_names), config.cutoff_k
                ).items()
            }
        )
        averages = cluster_average_correlation(list(correlations.values()), clusters)
        bundle.written["cluster_averages.json"] = _write(
            out_dir,
            "cluster_averages.json",
            dump_json(
                {
                    "config_digest": digest,
                    "version": __version__,
                    **averages.to_dict(),
                }
            ),
        )
    except Exception as exc:
        bundle.errors["cluster_averages.json"] = str(exc)

    if config.heatmap:
        try:
            if "pearson" not in correlations:
                raise AnalysisError("heatmap needs the Pearson matrix")
            bundle.written["heatmap.svg"] = _write(
                out_dir,
                "heatmap.svg",
                svg_heatmap(
                    correlations["pearson"],
                    title="Pearson correlation",
                    digest=digest,
                    version=__version__,
                ),
            )
        except Exception as exc:
            bundle.errors["heatmap.svg"] = str(exc)

    return bundle


# ---------------------------------------------------------------------------
# robustness: bootstrap


def run_bootstrap(
    config: RunConfig,
    corpus: SessionCorpus | None = None,
    resources: Resources | None = None,
    full_matrix: MeasureMatrix | None = None,
) -> dict:
    """Bootstrap over the one-to-many candidate pool for each configured
    mode; writes bootstrap.json."""
    if full_matrix is None:
        corpus = corpus if corpus is not None else load_corpus(config)
        resources = resources if resources is not None else load_resources(config)
        pairing = pair_sessions(corpus, PairingMode.ONE_TO_MANY)
        full_matrix = compute_measures(pairing, config, resources)
    digest = config.digest()
    reports = {}
    for mode in config.bootstrap_modes:
        report = bootstrap_correlations(
            full_matrix,
            iterations=config.bootstrap_iterations,
            seed=config.bootstrap_seed,
            mode=mode,
        )
        reports[mode] = report.to_dict()
    payload = {"config_digest": digest, "version": __version__, "modes": reports}
    _write(Path(config.out), "bootstrap.json", dump_json(payload))
    return payload


# ---------------------------------------------------------------------------
# everything


def run_report(config: RunConfig) -> AnalysisBundle:
    """measure + analyze + bootstrap in one pass, sharing loaded inputs."""
    corpus = load_corpus(config)
    resources = load_resources(config)
    matrix = run_measures(config, corpus, resources)
    bundle = run_analysis(matrix, config)
    full = matrix if config.pairing is PairingMode.ONE_TO_MANY else None
    try:
        run_bootstrap(config, corpus, resources, full_matrix=full)
    except Exception as exc:
        bundle.errors["bootstrap.json"] = str(exc)
    return bundle
