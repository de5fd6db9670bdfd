"""Run configuration: JSON file + CLI overrides -> one resolved, hashable
config object.

The measure registry lives here so that toggle resolution ("auto" means
on-iff-dependency-present) and the dependency checks happen before any
computation. The sha256 digest of the resolved config is embedded in
every output file, making reports self-describing.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from .embeddings import ProviderConfig
from .errors import ConfigError
from .serp import RBO_VARIANTS, RboParams
from .sessions import PairingMode
from .stats.bootstrap import MODES as BOOTSTRAP_MODES

__all__ = [
    "RunConfig",
    "load_config",
    "MEASURE_BASES",
    "DEPENDENCY_OF",
    "column_name",
    "default_clusters",
]

# Base measure names in canonical column order. Cutoff-parametrized
# columns get the k suffix applied by column_name().
MEASURE_BASES: tuple[str, ...] = (
    "query_length_chars",
    "query_length_terms",
    "unique_term_count",
    "type_token_ratio",
    "flesch_kincaid_grade",
    "named_entity_count",
    "jaccard_similarity",
    "cosine_similarity",
    "bert_score",
    "wordnet_similarity",
    "precision_at_k",
    "recall_at_k",
    "average_precision",
    "reciprocal_rank",
    "ndcg_at_k",
    "serp_jaccard",
    "rbo",
)

# measure base -> config field that must be set for it to run
DEPENDENCY_OF: dict[str, str] = {
    "cosine_similarity": "embeddings",
    "bert_score": "embeddings",
    "wordnet_similarity": "wordnet_dir",
    "precision_at_k": "qrels",
    "recall_at_k": "qrels",
    "average_precision": "qrels",
    "reciprocal_rank": "qrels",
    "ndcg_at_k": "qrels",
}

_DEFAULTS: dict = {
    "real": None,
    "simulated": None,
    "qrels": None,
    "wordnet_dir": None,
    "embeddings": None,
    "annotations": None,
    "out": "out",
    "pairing": "one-to-one",
    "seed": 13,
    "measures": {},
    "cutoff_k": 10,
    "serp_jaccard_cutoff": None,
    "rbo": {"p": 0.9, "depth": 10, "variant": "extrapolated"},
    "nmi": {"bins": None, "t_nmi": 0.5, "t_lin": 0.3},
    "efa": {"n_factors": None, "max_iter": 200, "tol": 1e-5},
    "bootstrap": {"iterations": 1000, "seed": None, "modes": list(BOOTSTRAP_MODES)},
    "clusters": None,
    "heatmap": False,
}

_EMBEDDING_KEYS = {"kind", "location", "model_id", "cache_dir", "timeout"}


def column_name(base: str, cutoff_k: int) -> str:
    if base.endswith("_at_k"):
        return f"{base[:-2]}_{cutoff_k}"
    if base == "bert_score":
        return "bert_score_f1"
    return base


@dataclass(frozen=True)
class RunConfig:
    real: str | None
    simulated: str | None
    qrels: str | None
    wordnet_dir: str | None
    embeddings: ProviderConfig | None
    annotations: str | None
    out: str
    pairing: PairingMode
    seed: int
    measures: dict[str, bool]
    cutoff_k: int
    serp_jaccard_cutoff: int | None
    rbo: RboParams
    nmi_bins: int | None
    t_nmi: float
    t_lin: float
    efa_n_factors: int | None
    efa_max_iter: int
    efa_tol: float
    bootstrap_iterations: int
    bootstrap_seed: int
    bootstrap_modes: tuple[str, ...]
    clusters: dict[str, tuple[str, ...]] | None
    heatmap: bool

    def enabled_bases(self) -> list[str]:
        return [base for base in MEASURE_BASES if self.measures[base]]

    def column_names(self) -> list[str]:
        return [column_name(base, self.cutoff_k) for base in self.enabled_bases()]

    def resolved_dict(self) -> dict:
        emb = None
        if self.embeddings is not None:
            emb = {
                "kind": self.embeddings.kind,
                "location": self.embeddings.location,
                "model_id": self.embeddings.model_id,
                "cache_dir": self.embeddings.cache_dir,
                "timeout": self.embeddings.timeout,
            }
        return {
            "real": self.real,
            "simulated": self.simulated,
            "qrels": self.qrels,
            "wordnet_dir": self.wordnet_dir,
            "embeddings": emb,
            "annotations": self.annotations,
            "out": self.out,
            "pairing": self.pairing.value,
            "seed": self.seed,
            "measures": dict(self.measures),
            "cutoff_k": self.cutoff_k,
            "serp_jaccard_cutoff": self.serp_jaccard_cutoff,
            "rbo": {"p": self.rbo.p, "depth": self.rbo.depth, "variant": self.rbo.variant},
            "nmi": {"bins": self.nmi_bins, "t_nmi": self.t_nmi, "t_lin": self.t_lin},
            "efa": {
                "n_factors": self.efa_n_factors,
                "max_iter": self.efa_max_iter,
                "tol": self.efa_tol,
            },
            "bootstrap": {
                "iterations": self.bootstrap_iterations,
                "seed": self.bootstrap_seed,
                "modes": list(self.bootstrap_modes),
            },
            "clusters": None
            if self.clusters is None
            else {name: list(members) for name, members in self.clusters.items()},
            "heatmap": self.heatmap,
        }

    def digest(self) -> str:
        canonical = json.dumps(
            self.resolved_dict(), sort_keys=True, separators=(",", ":")
        )
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def default_clusters(columns: list[str], cutoff_k: int) -> dict[str, tuple[str, ...]]:
    """Built-in measure clusters, pruned to the columns actually present."""
    raw = {
        "ir_metrics": [
            column_name(b, cutoff_k)
            for b in (
                "precision_at_k",
                "recall_at_k",
                "average_precision",
                "reciprocal_rank",
                "ndcg_at_k",
            )
        ],
        "query_statistics": [
            "query_length_chars",
            "query_length_terms",
            "unique_term_count",
            "type_token_ratio",
            "flesch_kincaid_grade",
            "named_entity_count",
        ],
        "query_similarity": [
            "jaccard_similarity",
            "cosine_similarity",
            "bert_score_f1",
            "wordnet_similarity",
        ],
        "serp_overlap": ["serp_jaccard", "rbo"],
    }
    pruned = {}
    for name, members in raw.items():
        present = tuple(m for m in members if m in columns)
        if present:
            pruned[name] = present
    return pruned


def _merge(defaults: dict, overrides: dict, path: str) -> dict:
    merged = dict(defaults)
    for key, value in overrides.items():
        if key not in defaults:
            raise ConfigError(f"unknown configuration key '{path}{key}'")
        # Non-empty default dicts are config sections to merge into; empty
        # ones (like "measures") take user content wholesale.
        if isinstance(defaults[key], dict) and isinstance(value, dict) and defaults[key]:
            merged[key] = _merge(defaults[key], value, f"{path}{key}.")
        else:
            merged[key] = value
    return merged


def _require_int(raw, name: str, minimum: int | None = None, optional: bool = False):
    if raw is None and optional:
        return None
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise ConfigError(f"'{name}' must be an integer, got {raw!r}")
    if minimum is not None and raw < minimum:
        raise ConfigError(f"'{name}' must be >= {minimum}, got {raw}")
    return raw


def _require_number(raw, name: str) -> float:
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ConfigError(f"'{name}' must be a number, got {raw!r}")
    return float(raw)


def _resolve_toggles(raw_measures: dict, resolved: dict) -> dict[str, bool]:
    for name in raw_measures:
        if name not in MEASURE_BASES:
            raise ConfigError(f"unknown measure '{name}'")
    toggles: dict[str, bool] = {}
    for base in MEASURE_BASES:
        setting = raw_measures.get(base, "auto")
        dependency = DEPENDENCY_OF.get(base)
        satisfied = dependency is None or resolved.get(dependency) is not None
        if setting is True:
            if not satisfied:
                raise ConfigError(
                    f"measure '{base}' is enabled but requires '{dependency}' to be configured"
                )
            toggles[base] = True
        elif setting is False:
            toggles[base] = False
        elif setting == "auto":
            toggles[base] = satisfied
        else:
            raise ConfigError(
                f"measure toggle for '{base}' must be true, false, or \"auto\", got {setting!r}"
            )
    return toggles


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> RunConfig:
    """Defaults <- config file <- CLI overrides, then validate and freeze."""
    raw: dict = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text("utf-8"))
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
    merged = _merge(_DEFAULTS, raw, "")
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key == "k":
            merged["cutoff_k"] = value
        elif key == "rbo_p":
            merged["rbo"] = {**merged["rbo"], "p": value}
        elif key == "bootstrap_iterations":
            merged["bootstrap"] = {**merged["bootstrap"], "iterations": value}
        elif key in _DEFAULTS:
            merged[key] = value
        else:
            raise ConfigError(f"unknown override '{key}'")

    for field in ("real", "simulated", "qrels", "wordnet_dir", "annotations", "out"):
        if merged[field] is not None and not isinstance(merged[field], str):
            raise ConfigError(f"'{field}' must be a path string")

    embeddings = None
    if merged["embeddings"] is not None:
        emb = merged["embeddings"]
        if not isinstance(emb, dict):
            raise ConfigError("'embeddings' must be an object")
        unknown = set(emb) - _EMBEDDING_KEYS
        if unknown:
            raise ConfigError(f"unknown embeddings keys: {', '.join(sorted(unknown))}")
        if "kind" not in emb or "location" not in emb or "model_id" not in emb:
            raise ConfigError("'embeddings' requires kind, location, and model_id")
        embeddings = ProviderConfig(
            kind=emb["kind"],
            location=emb["location"],
            model_id=emb["model_id"],
            cache_dir=emb.get("cache_dir"),
            timeout=_require_number(emb.get("timeout", 30.0), "embeddings.timeout"),
        )

    try:
        pairing = PairingMode.from_string(merged["pairing"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    seed = _require_int(merged["seed"], "seed")
    cutoff_k = _require_int(merged["cutoff_k"], "cutoff_k", minimum=1)
    serp_cutoff = _require_int(
        merged["serp_jaccard_cutoff"], "serp_jaccard_cutoff", minimum=1, optional=True
    )

    rbo_raw = merged["rbo"]
    if rbo_raw["variant"] not in RBO_VARIANTS:
        raise ConfigError(f"unknown RBO variant '{rbo_raw['variant']}'")
    rbo = RboParams(
        p=_require_number(rbo_raw["p"], "rbo.p"),
        depth=_require_int(rbo_raw["depth"], "rbo.depth", minimum=1),
        variant=rbo_raw["variant"],
    )

    nmi_raw = merged["nmi"]
    nmi_bins = _require_int(nmi_raw["bins"], "nmi.bins", minimum=1, optional=True)
    t_nmi = _require_number(nmi_raw["t_nmi"], "nmi.t_nmi")
    t_lin = _require_number(nmi_raw["t_lin"], "nmi.t_lin")

    efa_raw = merged["efa"]
    efa_n_factors = _require_int(efa_raw["n_factors"], "efa.n_factors", minimum=1, optional=True)
    efa_max_iter = _require_int(efa_raw["max_iter"], "efa.max_iter", minimum=1)
    efa_tol = _require_number(efa_raw["tol"], "efa.tol")
    if efa_tol <= 0:
        raise ConfigError(f"'efa.tol' must be positive, got {efa_tol}")

    boot_raw = merged["bootstrap"]
    iterations = _require_int(boot_raw["iterations"], "bootstrap.iterations", minimum=1)
    boot_seed = _require_int(boot_raw["seed"], "bootstrap.seed", optional=True)
    modes = boot_raw["modes"]
    if not isinstance(modes, list) or not modes:
        raise ConfigError("'bootstrap.modes' must be a non-empty list")
    for mode in modes:
        if mode not in BOOTSTRAP_MODES:
            raise ConfigError(f"unknown bootstrap mode '{mode}'")

    clusters = None
    if merged["clusters"] is not None:
        if not isinstance(merged["clusters"], dict):
            raise ConfigError("'clusters' must map cluster names to column lists")
        clusters = {}
        for name, members in merged["clusters"].items():
            if not isinstance(members, list) or not all(
                isinstance(m, str) for m in members
            ):
                raise ConfigError(f"cluster '{name}' must be a list of column names")
            clusters[name] = tuple(members)

    if not isinstance(merged["heatmap"], bool):
        raise ConfigError("'heatmap' must be a boolean")

    resolved_paths = {
        "qrels": merged["qrels"],
        "wordnet_dir": merged["wordnet_dir"],
        "embeddings": embeddings,
    }
    if not isinstance(merged["measures"], dict):
        raise ConfigError("'measures' must be an object of toggles")
    toggles = _resolve_toggles(merged["measures"], resolved_paths)

    return RunConfig(
        real=merged["real"],
        simulated=merged["simulated"],
        qrels=merged["qrels"],
        wordnet_dir=merged["wordnet_dir"],
        embeddings=embeddings,
        annotations=merged["annotations"],
        out=merged["out"],
        pairing=pairing,
        seed=seed,
        measures=toggles,
        cutoff_k=cutoff_k,
        serp_jaccard_cutoff=serp_cutoff,
        rbo=rbo,
        nmi_bins=nmi_bins,
        t_nmi=t_nmi,
        t_lin=t_lin,
        efa_n_factors=efa_n_factors,
        efa_max_iter=efa_max_iter,
        efa_tol=efa_tol,
        bootstrap_iterations=iterations,
        bootstrap_seed=boot_seed if boot_seed is not None else seed,
        bootstrap_modes=tuple(modes),
        clusters=clusters,
        heatmap=merged["heatmap"],
    )
