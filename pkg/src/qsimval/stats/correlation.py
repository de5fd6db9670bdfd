"""Pearson and Kendall tau-b correlations with pairwise-complete deletion.

The Pearson matrix is filled cell by cell through the scalar operation,
so matrix entries are bit-identical to scalar calls (duplicated columns
land on exactly 1.0). The Kendall path instead reduces pair counting to
integer-valued matrix products (sign-difference rows x columns), so the
result is bit-identical to an explicit O(n^2) enumeration while staying
vectorized across columns. Entries without at least 3 complete
observations, or with a constant/fully tied variable, are undefined and
surface as NaN with the pairwise sample size recorded separately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from ..matrix import MeasureMatrix

__all__ = ["CorrelationMatrix", "pearson", "kendall_tau_b", "correlation_matrix"]

METHODS = ("pearson", "kendall")

# Row-pair blocks are capped so the sign matrices never balloon on long
# inputs (the count is pairs-per-block, not bytes).
_PAIR_BLOCK = 200_000


@dataclass(frozen=True)
class CorrelationMatrix:
    method: str
    names: tuple[str, ...]
    values: np.ndarray  # p x p, NaN where undefined
    pair_counts: np.ndarray  # p x p, int64 pairwise-complete sizes


def _complete_pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    xv = np.asarray(x, dtype=float)
    yv = np.asarray(y, dtype=float)
    if xv.shape != yv.shape or xv.ndim != 1:
        raise ConfigError("correlation inputs must be 1-d series of equal length")
    keep = ~(np.isnan(xv) | np.isnan(yv))
    return xv[keep], yv[keep]


def pearson(x, y) -> float | None:
    """Sample Pearson r over pairwise-complete observations; None when
    fewer than 3 remain or either side is constant."""
    xv, yv = _complete_pair(x, y)
    if xv.size < 3:
        return None
    xc = xv - xv.mean()
    yc = yv - yv.mean()
    sxx = float(xc @ xc)
    syy = float(yc @ yc)
    if sxx == 0.0 or syy == 0.0:
        return None
    r = float(xc @ yc) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def _kendall_accumulate(values: np.ndarray):
    """Accumulate, over all row pairs, the three integer matrices behind
    tau-b: sign products (C−D), untied-and-valid counts, and valid-pair
    counts. All entries are exact integers stored as float64."""
    n, p = values.shape
    num = np.zeros((p, p))
    untied = np.zeros((p, p))  # [a,b] = #pairs untied in a and valid in b
    pairs = np.zeros((p, p))
    block_z: list[np.ndarray] = []
    block_v: list[np.ndarray] = []
    pending = 0

    def flush() -> None:
        nonlocal pending
        if not block_z:
            return
        z = np.concatenate(block_z, axis=0)
        v = np.concatenate(block_v, axis=0)
        u = np.abs(z)
        num[...] += z.T @ z
        untied[...] += u.T @ v
        pairs[...] += v.T @ v
        block_z.clear()
        block_v.clear()
        pending = 0

    for i in range(n - 1):
        diff = values[i + 1 :] - values[i]
        z = np.sign(diff)
        v = (~np.isnan(diff)).astype(float)
        np.nan_to_num(z, copy=False)
        block_z.append(z)
        block_v.append(v)
        pending += z.shape[0]
        if pending >= _PAIR_BLOCK:
            flush()
    flush()
    return num, untied, pairs


def kendall_tau_b(x, y) -> float | None:
    """Tau-b with tie correction: (C−D)/sqrt((n0−Tx)(n0−Ty)); None when
    fewer than 3 complete pairs remain or a side is fully tied."""
    xv, yv = _complete_pair(x, y)
    if xv.size < 3:
        return None
    stacked = np.column_stack([xv, yv])
    num, untied, _pairs = _kendall_accumulate(stacked)
    dx, dy = untied[0, 1], untied[1, 0]
    if dx == 0.0 or dy == 0.0:
        return None
    return float(num[0, 1]) / math.sqrt(dx * dy)


def _pearson_matrix(values: np.ndarray, valid: np.ndarray) -> np.ndarray:
    # Entry by entry through the scalar operation: each cell then carries
    # the scalar contract verbatim, including exact 1.0 on duplicated
    # columns, which expanded-sum matrix formulas miss by an ulp.
    p = values.shape[1]
    out = np.full((p, p), np.nan)
    for i in range(p):
        for j in range(i, p):
            r = pearson(values[:, i], values[:, j])
            if r is not None:
                out[i, j] = out[j, i] = r
    return out


def _kendall_matrix(values: np.ndarray, valid: np.ndarray) -> np.ndarray:
    num, untied, _pairs = _kendall_accumulate(values)
    n = valid.astype(float).T @ valid.astype(float)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = num / np.sqrt(untied * untied.T)
    out[(n < 3) | (untied == 0.0) | (untied.T == 0.0)] = np.nan
    defined = ~np.isnan(out)
    out[defined] = np.clip(out[defined], -1.0, 1.0)
    return out


def correlation_matrix(m: MeasureMatrix, method: str) -> CorrelationMatrix:
    """All-pairs correlation with pairwise-complete deletion; undefined
    entries are NaN and pair_counts carries the complete sample sizes."""
    if method not in METHODS:
        raise ConfigError(f"unknown correlation method '{method}'")
    if m.n_columns < 2:
        raise ConfigError("correlation matrix requires at least 2 columns")
    values = np.asarray(m.values, dtype=float)
    valid = ~np.isnan(values)
    if method == "pearson":
        out = _pearson_matrix(values, valid)
    else:
        out = _kendall_matrix(values, valid)
    counts = (valid.astype(np.int64).T @ valid.astype(np.int64)).astype(np.int64)
    return CorrelationMatrix(
        method=method, names=m.column_names, values=out, pair_counts=counts
    )
