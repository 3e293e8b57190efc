"""Typed tabular data: CSV ingest, column typing, numeric encoding, cell similarity.

A DataTable keeps the raw cell text exactly as ingested (so exports are
byte-faithful) next to parsed numeric caches. The EncodedMatrix is the
single numeric representation every clustering algorithm consumes: numeric
columns are z-normalized, categorical columns are one-hot encoded with a
1/sqrt(c) group scale so a category group carries about as much variance
as one numeric column, and per-feature weights multiply in after
normalization.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    CsvParseError,
    EmptyCellError,
    EmptyFeatureError,
    EmptyInputError,
    UnknownFeatureError,
    UnknownTargetError,
)

MISSING_TOKENS = {"", "na", "nan"}

NUMERIC = "numeric"
CATEGORICAL = "categorical"


def is_missing(cell: str) -> bool:
    return cell.strip().lower() in MISSING_TOKENS


def _parse_number(cell: str) -> Optional[float]:
    """Finite float value of a cell, or None if it is not a plain number."""
    try:
        value = float(cell.strip())
    except ValueError:
        return None
    return value if math.isfinite(value) else None


@dataclass(frozen=True)
class NumericStats:
    minimum: float
    maximum: float
    mean: float
    stddev: float  # population convention (divide by n)


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    kind: str  # NUMERIC or CATEGORICAL
    numeric_stats: Optional[NumericStats]
    categories: Optional[tuple[str, ...]]  # deduplicated, sorted
    missing_count: int


class DataTable:
    """Immutable ingested dataset. Row ids are dense 0..n_rows-1 in file order."""

    def __init__(self, table_id: str, columns: list[ColumnSpec], raw_rows: list[tuple[str, ...]]):
        self.table_id = table_id
        self.columns = columns
        self.raw_rows = raw_rows
        self.n_rows = len(raw_rows)
        self._index = {c.name: i for i, c in enumerate(columns)}
        self._numeric_values: dict[str, np.ndarray] = {}
        self._missing_masks: dict[str, np.ndarray] = {}
        for spec in columns:
            col = self._index[spec.name]
            mask = np.array([is_missing(r[col]) for r in raw_rows], dtype=bool)
            self._missing_masks[spec.name] = mask
            if spec.kind == NUMERIC:
                vals = np.array(
                    [0.0 if mask[i] else float(raw_rows[i][col]) for i in range(self.n_rows)]
                )
                self._numeric_values[spec.name] = vals

    def column(self, name: str) -> ColumnSpec:
        if name not in self._index:
            raise UnknownFeatureError(f"unknown column {name!r}")
        return self.columns[self._index[name]]

    def column_names(self) -> list[str]:
        return [c.name for c in self.columns]

    def cell(self, item_id: int, name: str) -> str:
        if not 0 <= item_id < self.n_rows:
            raise UnknownTargetError(f"item_id {item_id} out of range")
        return self.raw_rows[item_id][self._index[name]]

    def numeric_values(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        """(values, missing_mask) for a numeric column; missing slots hold 0."""
        spec = self.column(name)
        if spec.kind != NUMERIC:
            raise UnknownFeatureError(f"column {name!r} is not numeric")
        return self._numeric_values[name], self._missing_masks[name]

    def missing_mask(self, name: str) -> np.ndarray:
        self.column(name)
        return self._missing_masks[name]

    def row_record(self, item_id: int) -> dict[str, str]:
        if not 0 <= item_id < self.n_rows:
            raise UnknownTargetError(f"item_id {item_id} out of range")
        row = self.raw_rows[item_id]
        return {c.name: row[i] for i, c in enumerate(self.columns)}


@dataclass(frozen=True)
class EncodedDim:
    """Provenance of one encoded dimension."""

    column: str
    category: Optional[str]  # set only for one-hot dimensions


@dataclass
class EncodedMatrix:
    """n_rows x d_enc matrix in the weighted, normalized space."""

    values: np.ndarray
    feature_map: list[EncodedDim]
    scaling: list[tuple[float, float]]  # per-dim (offset, scale), weight excluded
    weights: np.ndarray  # per-dim weight, after group expansion
    item_ids: np.ndarray | None = None  # row -> item id; defaults to 0..n-1

    def __post_init__(self) -> None:
        if self.item_ids is None:
            self.item_ids = np.arange(self.values.shape[0], dtype=int)

    @property
    def n_rows(self) -> int:
        return int(self.values.shape[0])

    @property
    def d_enc(self) -> int:
        return int(self.values.shape[1])

    @property
    def n_active_dims(self) -> int:
        """Dimensions with a nonzero weight; drives RBF bandwidth choices."""
        return int(np.count_nonzero(self.weights))

    def restrict(self, item_ids) -> "EncodedMatrix":
        """Sub-matrix holding only the given item ids, in the given order."""
        wanted = np.asarray(list(item_ids), dtype=int)
        lookup = {int(item): row for row, item in enumerate(self.item_ids)}
        try:
            rows = np.array([lookup[int(i)] for i in wanted], dtype=int)
        except KeyError as exc:
            raise UnknownTargetError(f"item {exc.args[0]} not in matrix") from None
        return EncodedMatrix(
            values=self.values[rows],
            feature_map=self.feature_map,
            scaling=self.scaling,
            weights=self.weights,
            item_ids=wanted,
        )


@dataclass(frozen=True)
class SelectionSet:
    item_ids: frozenset[int]
    provenance: str  # cell_click, row_click, lasso, cluster_pick

    def __len__(self) -> int:
        return len(self.item_ids)

    def sorted_ids(self) -> list[int]:
        return sorted(self.item_ids)


def ingest_csv(document: bytes | str, table_id: str = "table", delimiter: str = ",") -> DataTable:
    """Parse an RFC 4180 CSV document with a header row into a DataTable.

    A column is numeric iff every non-missing cell parses as a finite real
    number; otherwise it is categorical. Missing tokens are the empty
    string, NA and NaN (case-insensitive).
    """
    if isinstance(document, bytes):
        try:
            text = document.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CsvParseError(f"document is not valid UTF-8: {exc}") from exc
    else:
        text = document
    reader = csv.reader(io.StringIO(text, newline=""), delimiter=delimiter)
    try:
        rows = list(reader)
    except csv.Error as exc:
        raise CsvParseError(f"malformed CSV near line {reader.line_num}: {exc}", row=reader.line_num) from exc

    rows = [r for r in rows if r]  # drop fully empty lines (trailing newline)
    if not rows:
        raise EmptyInputError("document has no header row")
    header = [h for h in rows[0]]
    if not header or all(h.strip() == "" for h in header):
        raise EmptyInputError("header row has no columns")
    if len(set(header)) != len(header):
        raise CsvParseError("duplicate column names in header", row=1)
    data = rows[1:]
    if not data:
        raise EmptyInputError("document has a header but no data rows")
    for i, row in enumerate(data):
        if len(row) != len(header):
            raise CsvParseError(
                f"row {i + 2} has {len(row)} fields, expected {len(header)}",
                row=i + 2,
                column=min(len(row), len(header)) + 1,
            )

    raw_rows = [tuple(r) for r in data]
    columns = [_infer_column(name, ci, raw_rows) for ci, name in enumerate(header)]
    return DataTable(table_id, columns, raw_rows)


def _infer_column(name: str, col: int, raw_rows: list[tuple[str, ...]]) -> ColumnSpec:
    cells = [r[col] for r in raw_rows]
    present = [c for c in cells if not is_missing(c)]
    missing_count = len(cells) - len(present)
    parsed = [_parse_number(c) for c in present]
    if present and all(v is not None for v in parsed):
        arr = np.array(parsed, dtype=float)
        stats = NumericStats(
            minimum=float(arr.min()),
            maximum=float(arr.max()),
            mean=float(arr.mean()),
            stddev=float(arr.std()),
        )
        return ColumnSpec(name, NUMERIC, stats, None, missing_count)
    categories = tuple(sorted(set(present)))
    return ColumnSpec(name, CATEGORICAL, None, categories, missing_count)


def encode(table: DataTable, weighted_columns: Sequence[tuple[str, float]]) -> EncodedMatrix:
    """Build the weighted numeric matrix for a list of (column, weight) pairs.

    Numeric columns z-normalize with the population stddev (constant
    columns become all-zero). Categorical columns expand to one-hot groups
    scaled by 1/sqrt(c). Missing numerics impute to the column mean (0
    after normalization); missing categoricals encode as an all-zero group.
    Weights multiply after normalization, so weight 0 zeroes a dimension
    without changing anyone else's scale.
    """
    if not weighted_columns:
        raise EmptyFeatureError("no features selected")
    blocks: list[np.ndarray] = []
    feature_map: list[EncodedDim] = []
    scaling: list[tuple[float, float]] = []
    dim_weights: list[float] = []
    for name, weight in weighted_columns:
        spec = table.column(name)
        if weight < 0:
            raise EmptyFeatureError(f"negative weight for {name!r}")
        if spec.kind == NUMERIC:
            vals, mask = table.numeric_values(name)
            stats = spec.numeric_stats
            scale = 0.0 if stats.stddev == 0 else 1.0 / stats.stddev
            col = (vals - stats.mean) * scale
            col[mask] = 0.0  # mean imputation lands exactly at 0
            blocks.append((col * weight)[:, None])
            feature_map.append(EncodedDim(name, None))
            scaling.append((stats.mean, scale))
            dim_weights.append(weight)
        else:
            cats = spec.categories or ()
            c = len(cats)
            group_scale = 1.0 / math.sqrt(c) if c else 0.0
            raw_col = [table.cell(i, name) for i in range(table.n_rows)]
            mask = table.missing_mask(name)
            onehot = np.zeros((table.n_rows, c))
            cat_index = {v: j for j, v in enumerate(cats)}
            for i, cell in enumerate(raw_col):
                if not mask[i]:
                    onehot[i, cat_index[cell]] = 1.0
            blocks.append(onehot * (group_scale * weight))
            for v in cats:
                feature_map.append(EncodedDim(name, v))
                scaling.append((0.0, group_scale))
                dim_weights.append(weight)
    values = np.hstack(blocks) if blocks else np.zeros((table.n_rows, 0))
    return EncodedMatrix(values, feature_map, scaling, np.array(dim_weights))


def similar_by_cell(
    table: DataTable,
    item_id: int,
    column: str,
    active_selection: Optional[SelectionSet] = None,
    eps: Optional[float] = None,
    eps_fraction: float = 0.05,
) -> SelectionSet:
    """Items whose value in `column` is similar to the clicked item's value.

    Numeric columns match within a threshold (default: eps_fraction of the
    column's raw range); categorical columns match exactly. With an active
    selection the result is the intersection, which never grows.
    """
    spec = table.column(column)
    clicked = table.cell(item_id, column)
    if is_missing(clicked):
        raise EmptyCellError(f"item {item_id} has no value in column {column!r}")
    if spec.kind == NUMERIC:
        vals, mask = table.numeric_values(column)
        stats = spec.numeric_stats
        if eps is None:
            eps = eps_fraction * (stats.maximum - stats.minimum)
        center = float(clicked)
        hit = (np.abs(vals - center) <= eps) & ~mask
        ids = frozenset(int(i) for i in np.flatnonzero(hit))
    else:
        mask = table.missing_mask(column)
        ids = frozenset(
            i
            for i in range(table.n_rows)
            if not mask[i] and table.cell(i, column) == clicked
        )
    if active_selection is not None:
        ids = ids & active_selection.item_ids
    return SelectionSet(ids, provenance="cell_click")
