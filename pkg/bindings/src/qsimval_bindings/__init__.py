"""Scripting bindings for the qsimval pipeline.

One function per CLI subcommand — augment, compute_measures (the
``measure`` subcommand), analyze, bootstrap, report — each returning
the subcommand's artifacts as plain dicts and lists. Every number
observable here is produced by qsimval itself: the bindings run its
pipeline and parse the files it writes, so re-serializing a result
reproduces the artifact bytes exactly. Config mappings go through the
same loader as ``--config`` files; CLI flag overrides are spelled as
their config keys in the mapping (``cutoff_k``, ``rbo.p``, ...).
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from collections.abc import Mapping
from pathlib import Path

from qsimval import pipeline
from qsimval.config import RunConfig, load_config
from qsimval.errors import AnalysisError, ConfigError, DataError
from qsimval.serialize import measure_matrix_from_csv

__version__ = "0.1.0"

__all__ = [
    "augment",
    "compute_measures",
    "analyze",
    "bootstrap",
    "report",
    "AnalysisError",
    "ConfigError",
    "DataError",
]


def augment(sessions_path, kind, endpoint, out_file, *, k=10, timeout=30.0,
            max_in_flight=4) -> int:
    """Fill empty SERPs through a search API; returns the fill count."""
    return pipeline.augment_file(
        sessions_path, kind, endpoint, k, out_file,
        timeout=timeout, max_in_flight=max_in_flight,
    )


def compute_measures(real_sessions_path, simulated_sessions_path,
                     config_mapping=None) -> list[dict]:
    """Compute the measure matrix; returns one report line per simulator.

    Writes measures.jsonl, measure_matrix.csv, and resolved_config.json
    to the configured output directory exactly like ``qsimval measure``,
    then returns the parsed JSONL lines.
    """
    config = _resolve(config_mapping, real_sessions_path, simulated_sessions_path)
    pipeline.run_measures(config)
    return _read_jsonl(Path(config.out) / "measures.jsonl")


def analyze(matrix_csv_path, config_mapping=None) -> dict:
    """Run the analysis bundle over a measure matrix CSV.

    Returns the written artifacts keyed by stem (pearson, kendall, nmi,
    flags, efa_loadings, efa_summary, cluster_averages) plus an
    ``errors`` mapping naming any artifact that failed — the same
    per-artifact isolation the CLI reports through its exit code.
    """
    path = Path(matrix_csv_path)
    if not path.is_file():
        raise DataError(f"matrix file not found: {matrix_csv_path}")
    matrix = measure_matrix_from_csv(path.read_text("utf-8"))
    config = _resolve(config_mapping)
    bundle = pipeline.run_analysis(matrix, config)
    return _bundle_mirror(bundle)


def bootstrap(real_sessions_path, simulated_sessions_path,
              config_mapping=None) -> dict:
    """Bootstrap the correlation matrices; returns the bootstrap.json payload."""
    config = _resolve(config_mapping, real_sessions_path, simulated_sessions_path)
    pipeline.run_bootstrap(config)
    return _read_json(Path(config.out) / "bootstrap.json")


def report(real_sessions_path, simulated_sessions_path,
           config_mapping=None) -> dict:
    """measure + analyze + bootstrap; returns the stages keyed by name."""
    config = _resolve(config_mapping, real_sessions_path, simulated_sessions_path)
    bundle = pipeline.run_report(config)
    out = Path(config.out)
    result = {
        "measures": _read_jsonl(out / "measures.jsonl"),
        "analysis": _bundle_mirror(bundle),
    }
    if "bootstrap.json" not in bundle.errors:
        result["bootstrap"] = _read_json(out / "bootstrap.json")
    return result


# ---------------------------------------------------------------------------
# plumbing


def _resolve(config_mapping, real=None, simulated=None) -> RunConfig:
    """Hand the mapping to the config loader the CLI uses for --config files."""
    overrides = {}
    if real is not None:
        overrides["real"] = os.fspath(real)
    if simulated is not None:
        overrides["simulated"] = os.fspath(simulated)
    if config_mapping is None:
        return load_config(None, overrides)
    if not isinstance(config_mapping, Mapping):
        raise ConfigError("config_mapping must be a mapping or None")
    with tempfile.TemporaryDirectory(prefix="qsimval-bindings-") as tmp:
        path = Path(tmp) / "config.json"
        try:
            path.write_text(json.dumps(dict(config_mapping)), "utf-8")
        except TypeError as exc:
            raise ConfigError(f"config_mapping is not JSON-serializable: {exc}") from exc
        return load_config(path, overrides)


def _bundle_mirror(bundle) -> dict:
    result = {"errors": dict(bundle.errors)}
    for filename, written_path in bundle.written.items():
        stem = Path(filename).stem
        if filename.endswith(".csv"):
            result[stem] = _read_table_csv(written_path)
        elif filename.endswith(".json"):
            result[stem] = _read_json(written_path)
    return result


def _read_json(path: Path):
    return json.loads(path.read_text("utf-8"))


def _read_jsonl(path: Path) -> list[dict]:
    return [json.loads(line) for line in path.read_text("utf-8").splitlines()]


def _read_table_csv(path: Path) -> dict:
    """Parse a table artifact back into names/columns/values, None for blanks.

    float() of the emitted shortest-round-trip decimals recovers every
    value bit-exactly, so re-serializing reproduces the file.
    """
    comment, _, body = path.read_text("utf-8").partition("\n")
    reader = csv.reader(io.StringIO(body))
    header = next(reader)
    names: list[str] = []
    values: list[list[float | None]] = []
    for row in reader:
        if not row:
            continue
        names.append(row[0])
        values.append([None if cell == "" else float(cell) for cell in row[1:]])
    return {
        "names": names,
        "columns": header[1:],
        "values": values,
        **_parse_comment(comment),
    }


def _parse_comment(line: str) -> dict:
    parts = line.lstrip("# ").split()
    meta = {"version": parts[1]}
    for part in parts[2:]:
        key, _, value = part.partition("=")
        meta["config_digest" if key == "config" else key] = value
    return meta
