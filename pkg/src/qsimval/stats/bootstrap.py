"""Bootstrap over candidate query selection: how much do the correlation
matrices move when, per topic, a random simulated query replaces the
top-ranked one?

Each iteration draws one candidate per (simulator, session) slot - from
that simulator's pool or, in cross mode, from every simulator's pool for
the session - rebuilds both correlation matrices from cached measure
rows, and records entrywise absolute deviations from the top-1 baseline.
The per-iteration RNG substream is derived from (seed, iteration), so
runs are reproducible and iterations independent of execution order.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from ..matrix import MeasureMatrix
from .correlation import CorrelationMatrix, correlation_matrix

__all__ = ["BootstrapReport", "bootstrap_correlations"]

MODES = ("within_simulator", "cross_simulator")
GENERATOR_ID = "pcg64"
_QUANTILES = (0.5, 0.9, 0.99)


@dataclass(frozen=True)
class BootstrapReport:
    iterations: int
    seed: int
    mode: str
    generator: str
    degenerate: bool
    n_slots: int
    measure_names: tuple[str, ...]
    max_abs_deviation: dict[str, float]
    pair_summaries: tuple[dict, ...]

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "seed": self.seed,
            "mode": self.mode,
            "generator": self.generator,
            "degenerate": self.degenerate,
            "n_slots": self.n_slots,
            "measure_names": list(self.measure_names),
            "max_abs_deviation": dict(self.max_abs_deviation),
            "pair_summaries": [dict(s) for s in self.pair_summaries],
        }


def _type1_quantile(sorted_values: np.ndarray, q: float) -> float:
    idx = max(math.ceil(q * sorted_values.size) - 1, 0)
    return float(sorted_values[idx])


def _summarize(deviations: np.ndarray) -> dict:
    defined = deviations[~np.isnan(deviations)]
    if defined.size == 0:
        return {"max": None, "defined": 0, **{f"q{int(q * 100)}": None for q in _QUANTILES}}
    ordered = np.sort(defined)
    summary = {"max": float(ordered[-1]), "defined": int(defined.size)}
    for q in _QUANTILES:
        summary[f"q{int(q * 100)}"] = _type1_quantile(ordered, q)
    return summary


def bootstrap_correlations(
    full_matrix: MeasureMatrix,
    iterations: int = 1000,
    seed: int = 13,
    mode: str = "within_simulator",
) -> BootstrapReport:
    """Deviation report for both correlation methods; requires the full
    one-to-many measure matrix (rows keyed (simulator, session, rank))."""
    if mode not in MODES:
        raise ConfigError(f"unknown bootstrap mode '{mode}'")
    if iterations < 1:
        raise ConfigError(f"bootstrap iterations must be >= 1, got {iterations}")

    slots: list[tuple[str, str]] = []
    own_pool: dict[tuple[str, str], list[int]] = {}
    session_pool: dict[str, list[int]] = {}
    for index, (simulator_id, session_id, _rank) in enumerate(full_matrix.row_keys):
        slot = (simulator_id, session_id)
        if slot not in own_pool:
            slots.append(slot)
            own_pool[slot] = []
        own_pool[slot].append(index)
        session_pool.setdefault(session_id, []).append(index)
    slots.sort()
    if not slots:
        raise ConfigError("bootstrap requires a non-empty measure matrix")

    pools = [
        own_pool[slot] if mode == "within_simulator" else session_pool[slot[1]]
        for slot in slots
    ]
    degenerate = all(len(pool) == 1 for pool in pools)
    if degenerate:
        warnings.warn(
            "every (simulator, session) slot has a single candidate; "
            "bootstrap deviations are all zero",
            stacklevel=2,
        )

    baseline_rows = [own_pool[slot][0] for slot in slots]
    base = {
        method: correlation_matrix(full_matrix.select_rows(baseline_rows), method)
        for method in ("pearson", "kendall")
    }
    names = full_matrix.column_names
    p = len(names)
    upper = np.triu_indices(p, k=1)
    pair_index = list(zip(upper[0].tolist(), upper[1].tolist()))
    deviations = {
        method: np.full((len(pair_index), iterations), np.nan)
        for method in ("pearson", "kendall")
    }

    for iteration in range(iterations):
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(iteration,)))
        )
        rows = [pool[rng.integers(len(pool))] for pool in pools]
        sample = full_matrix.select_rows(rows)
        for method in ("pearson", "kendall"):
            sampled: CorrelationMatrix = correlation_matrix(sample, method)
            delta = np.abs(sampled.values - base[method].values)
            deviations[method][:, iteration] = delta[upper]

    max_abs = {}
    for method in ("pearson", "kendall"):
        defined = deviations[method][~np.isnan(deviations[method])]
        max_abs[method] = float(defined.max()) if defined.size else 0.0

    summaries = []
    for slot_idx, (i, j) in enumerate(pair_index):
        summaries.append(
            {
                "pair": [names[i], names[j]],
                "pearson": _summarize(deviations["pearson"][slot_idx]),
                "kendall": _summarize(deviations["kendall"][slot_idx]),
            }
        )

    return BootstrapReport(
        iterations=iterations,
        seed=seed,
        mode=mode,
        generator=GENERATOR_ID,
        degenerate=degenerate,
        n_slots=len(slots),
        measure_names=tuple(names),
        max_abs_deviation=max_abs,
        pair_summaries=tuple(summaries),
    )
