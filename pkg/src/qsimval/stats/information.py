"""Normalized mutual information over equal-frequency bins, plus the
nonlinearity flag that combines NMI with both correlation matrices.

Everything runs on integer cell counts and math.fsum, which buys exact
symmetry, nmi(x,x) == 1.0, and an exact 0.0 on independent uniform
splits — no epsilon comparisons needed downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from ..matrix import MeasureMatrix
from .correlation import CorrelationMatrix

__all__ = ["NmiReport", "nmi", "nmi_matrix", "flag_nonlinear", "default_bins"]


@dataclass(frozen=True)
class NmiReport:
    names: tuple[str, ...]
    values: np.ndarray  # p x p, NaN where undefined
    bins: int
    flagged_pairs: tuple[tuple[str, str, float, float, float], ...] = ()


def default_bins(n: int) -> int:
    return max(1, math.isqrt(n - 1) + 1) if n > 1 else 1


def _equal_frequency_bins(values: np.ndarray, bins: int) -> np.ndarray:
    """Bin index floor(min_rank * bins / n) per value; ties share the
    min-rank of their value, hence the lower bin."""
    n = values.size
    order = np.sort(values)
    min_rank = np.searchsorted(order, values, side="left")
    return (min_rank * bins) // n


def _entropy(counts: np.ndarray, n: int) -> float:
    return math.fsum(
        (int(c) / n) * math.log(n / int(c)) for c in counts if c > 0
    )


def _mutual_information(joint: np.ndarray, n: int) -> float:
    row = joint.sum(axis=1)
    col = joint.sum(axis=0)
    terms = []
    for i in range(joint.shape[0]):
        for j in range(joint.shape[1]):
            c = int(joint[i, j])
            if c > 0:
                terms.append((c / n) * math.log((c * n) / (int(row[i]) * int(col[j]))))
    return math.fsum(terms)


def nmi(x, y, bins: int | None = None) -> float | None:
    """MI over the joint equal-frequency histogram, normalized by the
    arithmetic mean of the marginal entropies (natural log throughout).
    None when fewer complete observations than bins, or a side is
    constant."""
    xv = np.asarray(x, dtype=float)
    yv = np.asarray(y, dtype=float)
    keep = ~(np.isnan(xv) | np.isnan(yv))
    xv, yv = xv[keep], yv[keep]
    n = xv.size
    if bins is None:
        bins = default_bins(n)
    if bins < 1:
        raise ConfigError(f"bin count must be >= 1, got {bins}")
    if n < bins or n == 0:
        return None
    if np.all(xv == xv[0]) or np.all(yv == yv[0]):
        return None
    bx = _equal_frequency_bins(xv, bins)
    by = _equal_frequency_bins(yv, bins)
    joint = np.zeros((bins, bins), dtype=np.int64)
    np.add.at(joint, (bx, by), 1)
    hx = _entropy(joint.sum(axis=1), n)
    hy = _entropy(joint.sum(axis=0), n)
    if hx + hy == 0.0:
        return 0.0
    return _mutual_information(joint, n) / ((hx + hy) / 2.0)


def nmi_matrix(m: MeasureMatrix, bins: int | None = None) -> NmiReport:
    p = m.n_columns
    values = np.full((p, p), np.nan)
    n_complete = int(np.sum(~np.isnan(m.values).any(axis=1))) if p else 0
    resolved_bins = bins if bins is not None else default_bins(max(n_complete, 2))
    for i in range(p):
        for j in range(i, p):
            score = nmi(m.values[:, i], m.values[:, j], resolved_bins)
            if score is not None:
                values[i, j] = values[j, i] = score
    return NmiReport(names=m.column_names, values=values, bins=resolved_bins)


def flag_nonlinear(
    corr_p: CorrelationMatrix,
    corr_k: CorrelationMatrix,
    nmi_report: NmiReport,
    t_nmi: float = 0.5,
    t_lin: float = 0.3,
) -> NmiReport:
    """Pairs with high shared information but weak linear/monotonic
    correlation, sorted by NMI descending."""
    if not (corr_p.names == corr_k.names == nmi_report.names):
        raise ConfigError("correlation and NMI matrices must share column names")
    names = nmi_report.names
    flagged = []
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            score = nmi_report.values[i, j]
            rp = corr_p.values[i, j]
            rk = corr_k.values[i, j]
            if np.isnan(score) or np.isnan(rp) or np.isnan(rk):
                continue
            if score >= t_nmi and abs(rp) < t_lin and abs(rk) < t_lin:
                flagged.append((names[i], names[j], float(score), float(rp), float(rk)))
    flagged.sort(key=lambda item: (-item[2], item[0], item[1]))
    return NmiReport(
        names=nmi_report.names,
        values=nmi_report.values,
        bins=nmi_report.bins,
        flagged_pairs=tuple(flagged),
    )
