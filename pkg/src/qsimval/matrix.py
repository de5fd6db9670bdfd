"""Rectangular measure matrix: one row per evaluated pair, one column per
measure, with NaN marking undefined cells."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError

__all__ = ["MeasureMatrix", "RowKey"]

# (simulator_id, session_id, rank)
RowKey = tuple[str, str, int]


@dataclass(frozen=True)
class MeasureMatrix:
    row_keys: tuple[RowKey, ...]
    column_names: tuple[str, ...]
    values: np.ndarray  # float64, shape (len(row_keys), len(column_names))

    def __post_init__(self) -> None:
        if len(set(self.column_names)) != len(self.column_names):
            raise DataError("duplicate column name in measure matrix")
        expected = (len(self.row_keys), len(self.column_names))
        if self.values.shape != expected:
            raise DataError(
                f"measure matrix shape {self.values.shape} does not match keys {expected}"
            )

    @property
    def n_rows(self) -> int:
        return len(self.row_keys)

    @property
    def n_columns(self) -> int:
        return len(self.column_names)

    def column(self, name: str) -> np.ndarray:
        try:
            index = self.column_names.index(name)
        except ValueError:
            raise DataError(f"unknown measure column '{name}'") from None
        return self.values[:, index]

    def select_columns(self, names: list[str]) -> "MeasureMatrix":
        indices = []
        for name in names:
            if name not in self.column_names:
                raise DataError(f"unknown measure column '{name}'")
            indices.append(self.column_names.index(name))
        return MeasureMatrix(
            row_keys=self.row_keys,
            column_names=tuple(names),
            values=self.values[:, indices].copy(),
        )

    def select_rows(self, indices) -> "MeasureMatrix":
        idx = list(indices)
        return MeasureMatrix(
            row_keys=tuple(self.row_keys[i] for i in idx),
            column_names=self.column_names,
            values=self.values[idx, :],
        )
