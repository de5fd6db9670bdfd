"""Cluster-averaged correlations: mean correlation within each named
cluster of measures and across cluster pairs, averaged first over measure
pairs inside one matrix and then (unweighted) across matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import AnalysisError
from .correlation import CorrelationMatrix

__all__ = ["ClusterAverages", "cluster_average_correlation"]


@dataclass(frozen=True)
class ClusterAverages:
    clusters: dict[str, tuple[str, ...]]
    within: dict[str, dict[str, float | None]]
    cross: dict[str, dict[str, float | None]]
    excluded: dict[str, dict[str, int]]

    def to_dict(self) -> dict:
        return {
            "clusters": {name: list(members) for name, members in self.clusters.items()},
            "within": self.within,
            "cross": self.cross,
            "excluded_masked_pairs": self.excluded,
        }


def _pair_set(members_a, members_b) -> list[tuple[str, str]]:
    pairs = set()
    for a in members_a:
        for b in members_b:
            if a != b:
                pairs.add((a, b) if a < b else (b, a))
    return sorted(pairs)


def _mean_over_matrices(
    matrices: list[CorrelationMatrix], pairs: list[tuple[str, str]]
) -> tuple[float | None, int]:
    per_matrix = []
    excluded = 0
    for matrix in matrices:
        index = {name: i for i, name in enumerate(matrix.names)}
        values = []
        for a, b in pairs:
            value = matrix.values[index[a], index[b]]
            if np.isnan(value):
                excluded += 1
            else:
                values.append(float(value))
        if values:
            per_matrix.append(sum(values) / len(values))
    if not per_matrix:
        return None, excluded
    return sum(per_matrix) / len(per_matrix), excluded


def cluster_average_correlation(
    corrs: list[CorrelationMatrix],
    clusters: dict[str, list[str]],
) -> ClusterAverages:
    """Within- and cross-cluster mean correlations per method; matrices of
    the same method are averaged unweighted, masked entries are skipped
    and counted."""
    if not corrs:
        raise AnalysisError("cluster averaging requires at least one correlation matrix")
    if not clusters:
        raise AnalysisError("no clusters defined")
    for name, members in clusters.items():
        if not members:
            raise AnalysisError(f"cluster '{name}' has no members")
        for matrix in corrs:
            unknown = [m for m in members if m not in matrix.names]
            if unknown:
                raise AnalysisError(
                    f"cluster '{name}' references unknown columns: {', '.join(unknown)}"
                )

    by_method: dict[str, list[CorrelationMatrix]] = {}
    for matrix in corrs:
        by_method.setdefault(matrix.method, []).append(matrix)

    frozen = {name: tuple(members) for name, members in clusters.items()}
    within: dict[str, dict[str, float | None]] = {}
    cross: dict[str, dict[str, float | None]] = {}
    excluded: dict[str, dict[str, int]] = {}

    for name, members in frozen.items():
        pairs = _pair_set(members, members)
        within[name] = {}
        excluded[name] = {}
        for method, matrices in sorted(by_method.items()):
            mean, skipped = _mean_over_matrices(matrices, pairs)
            within[name][method] = mean
            excluded[name][method] = skipped

    names_sorted = sorted(frozen)
    for i, name_a in enumerate(names_sorted):
        for name_b in names_sorted[i + 1 :]:
            key = f"{name_a}|{name_b}"
            pairs = _pair_set(frozen[name_a], frozen[name_b])
            cross[key] = {}
            excluded[key] = {}
            for method, matrices in sorted(by_method.items()):
                mean, skipped = _mean_over_matrices(matrices, pairs)
                cross[key][method] = mean
                excluded[key][method] = skipped

    return ClusterAverages(clusters=frozen, within=within, cross=cross, excluded=excluded)
