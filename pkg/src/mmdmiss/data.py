"""Observations with missingness masks, pattern grouping, CSV ingestion.

Mask convention: bit 1 means the coordinate is MISSING, bit 0 observed.
Rows with every coordinate missing are invalid everywhere in the package;
they are rejected at construction/ingestion time.

Unobserved value slots always carry NaN, so any code path that reads a
masked entry poisons its output and is caught by the finiteness checks in
the test-suite.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .exceptions import DataError, ShapeError


@dataclass(frozen=True)
class Pattern:
    """A missingness pattern; hashable grouping key.

    ``bits[j] == 1`` means coordinate j is missing.
    """

    bits: tuple[int, ...]

    def __post_init__(self):
        if not self.bits:
            raise ShapeError("pattern must have positive dimension")
        if any(b not in (0, 1) for b in self.bits):
            raise DataError(f"pattern bits must be 0/1, got {self.bits}")
        if all(b == 1 for b in self.bits):
            raise DataError("fully-missing pattern is not allowed")

    @property
    def d(self) -> int:
        return len(self.bits)

    @property
    def n_observed(self) -> int:
        return self.bits.count(0)

    def observed_indices(self) -> np.ndarray:
        return np.flatnonzero(np.asarray(self.bits) == 0)

    @staticmethod
    def from_mask(mask) -> "Pattern":
        return Pattern(tuple(int(b) for b in np.asarray(mask).astype(bool)))

    @staticmethod
    def complete(d: int) -> "Pattern":
        return Pattern((0,) * d)

    @staticmethod
    def missing_at(d: int, missing: tuple[int, ...]) -> "Pattern":
        bits = [0] * d
        for j in missing:
            bits[j] = 1
        return Pattern(tuple(bits))


@dataclass(frozen=True)
class Observation:
    """One record: a value vector plus its missingness mask."""

    values: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        mask = np.asarray(self.mask, dtype=bool)
        if values.ndim != 1 or mask.shape != values.shape:
            raise ShapeError(
                f"values and mask must be 1-d of equal length, got "
                f"{values.shape} and {mask.shape}"
            )
        if values.size == 0:
            raise ShapeError("empty observation")
        if mask.all():
            raise DataError("observation with all coordinates missing")
        values = values.copy()
        values[mask] = np.nan  # poison unobserved slots
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)

    @property
    def d(self) -> int:
        return self.values.size

    def pattern(self) -> Pattern:
        return Pattern.from_mask(self.mask)


def project(obs: Observation) -> np.ndarray:
    """Subvector of the observed coordinates, in ascending coordinate order."""
    return obs.values[~obs.mask]


def project_to_pattern(x, pattern: Pattern) -> np.ndarray:
    """Project a complete vector onto a pattern's observed coordinates."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size != pattern.d:
        raise ShapeError(f"expected vector of length {pattern.d}, got shape {x.shape}")
    return x[pattern.observed_indices()]


class Dataset:
    """Immutable collection of observations sharing one dimension.

    Internally stored as an (n, d) value matrix with NaN at missing slots
    plus the boolean mask matrix; ``pattern_index`` maps each distinct
    pattern to the row indices carrying it (original order preserved).
    """

    def __init__(self, observations):
        observations = list(observations)
        if observations:
            d = observations[0].d
            for i, obs in enumerate(observations):
                if obs.d != d:
                    raise ShapeError(
                        f"observation {i} has dimension {obs.d}, expected {d}"
                    )
            values = np.stack([o.values for o in observations])
            mask = np.stack([o.mask for o in observations])
        else:
            d = 0
            values = np.empty((0, 0))
            mask = np.empty((0, 0), dtype=bool)
        self._init_arrays(values, mask)

    def _init_arrays(self, values: np.ndarray, mask: np.ndarray) -> None:
        self.values = values
        self.mask = mask
        self.n_dropped_rows = 0
        index: dict[Pattern, list[int]] = {}
        for i in range(values.shape[0]):
            index.setdefault(Pattern.from_mask(mask[i]), []).append(i)
        self.pattern_index = {p: np.asarray(ix) for p, ix in index.items()}

    @classmethod
    def from_arrays(cls, values, mask, n_dropped_rows: int = 0) -> "Dataset":
        """Build from an (n, d) value matrix and a same-shape mask matrix."""
        values = np.array(values, dtype=float)
        mask = np.array(mask, dtype=bool)
        if values.ndim != 2 or mask.shape != values.shape:
            raise ShapeError(
                f"need matching (n, d) matrices, got {values.shape} and {mask.shape}"
            )
        if values.shape[0] and values.shape[1] == 0:
            raise ShapeError("zero-dimensional rows")
        rows_all_missing = np.flatnonzero(mask.all(axis=1))
        if rows_all_missing.size:
            raise DataError(
                f"row {rows_all_missing[0] + 1} has all coordinates missing"
            )
        ds = cls.__new__(cls)
        values[mask] = np.nan
        ds._init_arrays(values, mask)
        ds.n_dropped_rows = n_dropped_rows
        return ds

    @classmethod
    def complete(cls, values) -> "Dataset":
        values = np.asarray(values, dtype=float)
        return cls.from_arrays(values, np.zeros_like(values, dtype=bool))

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def observations(self) -> list[Observation]:
        return [Observation(self.values[i], self.mask[i]) for i in range(len(self))]

    def row(self, i: int) -> Observation:
        return Observation(self.values[i], self.mask[i])


def group_by_pattern(dataset: Dataset) -> dict[Pattern, list[Observation]]:
    """Partition the observations by missingness pattern (order preserved)."""
    return {
        p: [dataset.row(i) for i in idx] for p, idx in dataset.pattern_index.items()
    }


def _looks_like_header(cells: list[str], na_token: str) -> bool:
    for cell in cells:
        cell = cell.strip()
        if cell == na_token:
            return False
        try:
            float(cell)
            return False
        except ValueError:
            continue
    return True


def load_csv(path, na_token: str = "NA", drop_empty_rows: bool = False) -> Dataset:
    """Load a rectangular numeric CSV with ``na_token`` marking missing cells.

    A single header row is auto-detected (first row containing no numeric
    cell and no na_token). Ragged rows, unparsable cells and fully-missing
    rows raise :class:`DataError` naming the offending row (1-based over
    data rows) and column. With ``drop_empty_rows`` fully-missing rows are
    dropped instead and counted in ``Dataset.n_dropped_rows``.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return _parse_csv(fh, na_token, drop_empty_rows)


def loads_csv(text: str, na_token: str = "NA", drop_empty_rows: bool = False) -> Dataset:
    """Parse CSV content from a string; same contract as :func:`load_csv`."""
    return _parse_csv(io.StringIO(text), na_token, drop_empty_rows)


def _parse_csv(fh, na_token: str, drop_empty_rows: bool = False) -> Dataset:
    reader = csv.reader(fh)
    rows = [r for r in reader if r and not all(c.strip() == "" for c in r)]
    if not rows:
        raise DataError("no data rows in CSV input")
    if _looks_like_header(rows[0], na_token):
        rows = rows[1:]
        if not rows:
            raise DataError("CSV has a header but no data rows")
    d = len(rows[0])
    values = np.empty((len(rows), d))
    mask = np.zeros((len(rows), d), dtype=bool)
    for i, row in enumerate(rows):
        if len(row) != d:
            raise DataError(
                f"row {i + 1} has {len(row)} cells, expected {d} (ragged table)"
            )
        for j, cell in enumerate(row):
            cell = cell.strip()
            if cell == na_token:
                mask[i, j] = True
                values[i, j] = np.nan
            else:
                try:
                    values[i, j] = float(cell)
                except ValueError:
                    raise DataError(
                        f"row {i + 1}, column {j + 1}: cannot parse {cell!r}"
                    ) from None
        if mask[i].all() and not drop_empty_rows:
            raise DataError(f"row {i + 1} has all coordinates missing")
    keep = ~mask.all(axis=1)
    n_dropped = int((~keep).sum())
    return Dataset.from_arrays(values[keep], mask[keep], n_dropped_rows=n_dropped)


def save_csv(dataset: Dataset, path, na_token: str = "NA", header=None) -> None:
    """Write a dataset back to CSV; values round-trip exactly via repr."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        if header is not None:
            writer.writerow(header)
        for i in range(len(dataset)):
            writer.writerow(
                na_token if dataset.mask[i, j] else repr(float(dataset.values[i, j]))
                for j in range(dataset.d)
            )
