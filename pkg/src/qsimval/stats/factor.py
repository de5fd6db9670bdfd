"""Exploratory factor analysis: principal-axis extraction with iterated
communalities, Kaiser retention, and varimax rotation.

Columns with more than 20% missing cells are dropped (with a warning),
the rest is analyzed listwise-complete. A singular correlation matrix is
an analysis error that names the near-duplicate column pairs, since that
is almost always the actual cause.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ..errors import AnalysisError
from ..matrix import MeasureMatrix

__all__ = ["FactorSolution", "efa", "varimax"]

_MISSING_CUTOFF = 0.2
_SINGULAR_EIG = 1e-12
_NEAR_DUPLICATE_R = 0.999
_VARIMAX_GAIN_TOL = 1e-6
_VARIMAX_MAX_SWEEPS = 100


@dataclass(frozen=True)
class FactorSolution:
    names: tuple[str, ...]
    loadings: np.ndarray  # measures x factors
    uniquenesses: np.ndarray  # per measure, in [0,1]
    n_factors: int
    explained_variance: np.ndarray  # per factor (sum of squared loadings)
    converged: bool
    eigenvalues: np.ndarray  # full spectrum of R, descending
    n_rows_used: int
    dropped_columns: tuple[str, ...] = field(default=())

    @property
    def communalities(self) -> np.ndarray:
        return 1.0 - self.uniquenesses


def _varimax_criterion(w: np.ndarray) -> float:
    p = w.shape[0]
    return float(np.sum(np.sum(w**4, axis=0) - np.sum(w**2, axis=0) ** 2 / p))


def varimax(loadings: np.ndarray) -> np.ndarray:
    """Kaiser-normalized pairwise varimax; single-factor input comes back
    unchanged. Each factor's largest-magnitude loading ends up positive."""
    lam = np.array(loadings, dtype=float)
    if lam.ndim != 2:
        raise AnalysisError("loadings must be a 2-d matrix")
    p, k = lam.shape
    if k < 2:
        return lam
    h = np.sqrt(np.sum(lam**2, axis=1))
    scale = np.where(h > 0, h, 1.0)
    w = lam / scale[:, None]
    criterion = _varimax_criterion(w)
    for _sweep in range(_VARIMAX_MAX_SWEEPS):
        for j in range(k - 1):
            for l in range(j + 1, k):
                x = w[:, j]
                y = w[:, l]
                u = x * x - y * y
                v = 2.0 * x * y
                a = np.sum(u)
                b = np.sum(v)
                c = np.sum(u * u - v * v)
                d = 2.0 * np.sum(u * v)
                num = d - 2.0 * a * b / p
                den = c - (a * a - b * b) / p
                theta = 0.25 * np.arctan2(num, den)
                if theta == 0.0:
                    continue
                cos_t = np.cos(theta)
                sin_t = np.sin(theta)
                # compute both columns before writing: x and y alias w
                new_j = cos_t * x + sin_t * y
                new_l = -sin_t * x + cos_t * y
                w[:, j] = new_j
                w[:, l] = new_l
        updated = _varimax_criterion(w)
        if updated - criterion < _VARIMAX_GAIN_TOL:
            break
        criterion = updated
    rotated = w * scale[:, None]
    return _fix_signs(rotated)


def _fix_signs(loadings: np.ndarray) -> np.ndarray:
    out = loadings.copy()
    for j in range(out.shape[1]):
        anchor = np.argmax(np.abs(out[:, j]))
        if out[anchor, j] < 0:
            out[:, j] = -out[:, j]
    return out


def _complete_submatrix(m: MeasureMatrix) -> tuple[np.ndarray, tuple[str, ...], tuple[str, ...]]:
    values = np.asarray(m.values, dtype=float)
    missing_share = np.mean(np.isnan(values), axis=0)
    dropped = [
        name
        for name, share in zip(m.column_names, missing_share)
        if share > _MISSING_CUTOFF
    ]
    if dropped:
        warnings.warn(
            f"dropping columns with >{_MISSING_CUTOFF:.0%} missing cells: "
            + ", ".join(dropped),
            stacklevel=3,
        )
    keep = [i for i, name in enumerate(m.column_names) if name not in dropped]
    kept_names = tuple(m.column_names[i] for i in keep)
    sub = values[:, keep]
    rows = ~np.isnan(sub).any(axis=1)
    sub = sub[rows]

    constant = [
        kept_names[i] for i in range(sub.shape[1]) if sub.shape[0] and np.all(sub[:, i] == sub[0, i])
    ]
    if constant:
        warnings.warn(
            "dropping constant columns: " + ", ".join(constant), stacklevel=3
        )
        keep2 = [i for i, name in enumerate(kept_names) if name not in constant]
        kept_names = tuple(kept_names[i] for i in keep2)
        sub = sub[:, keep2]
        dropped.extend(constant)
    return sub, kept_names, tuple(dropped)


def _correlation_of(standardized: np.ndarray) -> np.ndarray:
    n = standardized.shape[0]
    r = (standardized.T @ standardized) / n
    r = (r + r.T) / 2.0
    np.fill_diagonal(r, 1.0)
    return r


def efa(
    m: MeasureMatrix,
    n_factors: int | None = None,
    max_iter: int = 200,
    tol: float = 1e-5,
) -> FactorSolution:
    """Principal-axis factoring on the listwise-complete correlation
    matrix, Kaiser retention when n_factors is not given, varimax
    rotation, factors ordered by explained variance."""
    data, names, dropped = _complete_submatrix(m)
    p = len(names)
    if p < 2:
        raise AnalysisError(
            f"factor analysis needs at least 2 usable columns, found {p}"
        )
    n = data.shape[0]
    if n < 3:
        raise AnalysisError(
            f"factor analysis needs at least 3 complete rows, found {n}"
        )
    if n < 5 * p:
        warnings.warn(
            f"only {n} complete rows for {p} columns; fewer than 5 rows per column",
            stacklevel=2,
        )
    standardized = (data - data.mean(axis=0)) / data.std(axis=0)
    r = _correlation_of(standardized)

    spectrum = np.linalg.eigvalsh(r)[::-1]
    if spectrum[-1] < _SINGULAR_EIG * p:
        pairs = []
        for i in range(p):
            for j in range(i + 1, p):
                if abs(r[i, j]) > _NEAR_DUPLICATE_R:
                    pairs.append(f"{names[i]}~{names[j]} (r={r[i, j]:.4f})")
        detail = "; near-duplicate columns: " + ", ".join(pairs) if pairs else ""
        raise AnalysisError("correlation matrix is singular" + detail)

    if n_factors is None:
        k = int(np.sum(spectrum > 1.0))
        if k == 0:
            raise AnalysisError(
                "no factor with eigenvalue > 1; set the factor count explicitly"
            )
    else:
        if not 1 <= n_factors <= p:
            raise AnalysisError(
                f"factor count must lie in [1, {p}], got {n_factors}"
            )
        k = n_factors

    # Initial communalities: squared multiple correlations.
    inv_diag = np.diag(np.linalg.inv(r))
    communalities = np.clip(1.0 - 1.0 / inv_diag, 0.0, 1.0)

    converged = False
    loadings = np.zeros((p, k))
    for _iteration in range(max_iter):
        adjusted = r.copy()
        np.fill_diagonal(adjusted, communalities)
        eigvals, eigvecs = np.linalg.eigh(adjusted)
        top = np.argsort(-eigvals, kind="stable")[:k]
        lam = np.clip(eigvals[top], 0.0, None)
        loadings = eigvecs[:, top] * np.sqrt(lam)
        updated = np.clip(np.sum(loadings**2, axis=1), 0.0, 1.0)
        delta = float(np.max(np.abs(updated - communalities)))
        communalities = updated
        if delta < tol:
            converged = True
            break

    rotated = varimax(loadings) if k >= 2 else _fix_signs(loadings)
    ss = np.sum(rotated**2, axis=0)
    order = np.argsort(-ss, kind="stable")
    rotated = rotated[:, order]
    ss = ss[order]
    final_communalities = np.clip(np.sum(rotated**2, axis=1), 0.0, 1.0)
    return FactorSolution(
        names=names,
        loadings=rotated,
        uniquenesses=1.0 - final_communalities,
        n_factors=k,
        explained_variance=ss,
        converged=converged,
        eigenvalues=spectrum,
        n_rows_used=n,
        dropped_columns=dropped,
    )
