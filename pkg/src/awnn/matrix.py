"""Partially observed matrices and their CSV representation."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np

MISSING_TOKEN = "NaN"


class MatrixParseError(ValueError):
    """Raised when a CSV file cannot be read as a rectangular numeric matrix."""


def _frozen(a):
    a = np.array(a, dtype=np.float64 if a.dtype != bool else bool, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class MaskedMatrix:
    """An ``n x m`` matrix of float64 values with a boolean observation mask.

    Unobserved cells hold NaN in ``values``. Both arrays are read-only.
    """

    values: np.ndarray
    observed: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        observed = np.asarray(self.observed, dtype=bool)
        if values.ndim != 2 or values.shape != observed.shape:
            raise ValueError("values and observed must be 2-D arrays of equal shape")
        if values.shape[0] < 1 or values.shape[1] < 1:
            raise ValueError("empty matrix")
        if not np.all(np.isfinite(values[observed])):
            raise ValueError("observed entries must be finite")
        values = np.where(observed, values, np.nan)
        object.__setattr__(self, "values", _frozen(values))
        object.__setattr__(self, "observed", _frozen(observed))

    @classmethod
    def from_array(cls, X) -> "MaskedMatrix":
        """Build from an array where NaN marks a missing entry."""
        X = np.asarray(X, dtype=np.float64)
        return cls(X, ~np.isnan(X))

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self):
        return self.values.shape

    def filled(self, fill=0.0) -> np.ndarray:
        """Copy of ``values`` with unobserved cells replaced by ``fill``."""
        return np.where(self.observed, self.values, fill)

    def __eq__(self, other):
        if not isinstance(other, MaskedMatrix):
            return NotImplemented
        return (self.shape == other.shape
                and np.array_equal(self.observed, other.observed)
                and np.array_equal(self.values[self.observed],
                                   other.values[other.observed]))


@dataclass(frozen=True, eq=False)
class DenseMatrix:
    """A fully defined ``n x m`` float64 matrix.

    Estimator outputs may carry NaN in cells that could not be imputed;
    everything else must be finite.
    """

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise ValueError("DenseMatrix needs a non-empty 2-D array")
        if np.any(np.isinf(values)):
            raise ValueError("DenseMatrix entries must be finite")
        object.__setattr__(self, "values", _frozen(values))

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self):
        return self.values.shape

    def __eq__(self, other):
        if not isinstance(other, DenseMatrix):
            return NotImplemented
        return np.array_equal(self.values, other.values, equal_nan=True)


def observed_fraction(matrix: MaskedMatrix) -> float:
    """Fraction of observed cells."""
    return float(np.count_nonzero(matrix.observed)) / matrix.observed.size


def load_csv(path, missing_token: str = MISSING_TOKEN) -> MaskedMatrix:
    """Read a rectangular CSV file into a :class:`MaskedMatrix`.

    Cells equal to ``missing_token`` (case-insensitive) or empty are treated
    as unobserved. Row and column numbers in error messages are 1-based.
    """
    token = missing_token.strip().lower()
    rows = []
    with open(path, newline="") as fh:
        for line in csv.reader(fh):
            if not line or (len(line) == 1 and line[0].strip() == ""):
                continue
            rows.append(line)
    if not rows:
        raise MatrixParseError("empty matrix")

    n, m = len(rows), len(rows[0])
    values = np.full((n, m), np.nan)
    observed = np.zeros((n, m), dtype=bool)
    for r, line in enumerate(rows):
        if len(line) != m:
            raise MatrixParseError(f"ragged row {r + 1}")
        for c, cell in enumerate(line):
            cell = cell.strip()
            if cell == "" or cell.lower() == token:
                continue
            try:
                x = float(cell)
            except ValueError:
                raise MatrixParseError(
                    f"non-numeric cell {cell!r} at ({r + 1}, {c + 1})") from None
            if not np.isfinite(x):
                raise MatrixParseError(f"non-finite cell {cell!r} at ({r + 1}, {c + 1})")
            values[r, c] = x
            observed[r, c] = True
    return MaskedMatrix(values, observed)


def _format(x: float) -> str:
    return MISSING_TOKEN if np.isnan(x) else repr(float(x))


def save_csv(matrix, path) -> None:
    """Write a :class:`MaskedMatrix` or :class:`DenseMatrix` as CSV.

    Values are written with ``repr`` (shortest round-tripping decimal, at
    most 17 significant digits); unobserved or NaN cells become ``NaN``.
    """
    if isinstance(matrix, MaskedMatrix):
        values = matrix.values
    elif isinstance(matrix, DenseMatrix):
        values = matrix.values
    else:
        values = np.asarray(matrix, dtype=np.float64)
    try:
        with open(path, "w", newline="") as fh:
            for row in values:
                fh.write(",".join(_format(x) for x in row))
                fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write {os.fspath(path)}: {exc.strerror}") from exc
