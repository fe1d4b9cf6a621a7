"""Tabular data core: load, describe, filter, subset, normalize, export.

A loaded :class:`DataTable` is immutable and acts as the single source of
truth for a session; views select rows and features without copying or
mutating the base table. All per-feature statistics use the population
convention (divisor ``n``) so the same sigma feeds normalization and the
feature-sweep interactions.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import DataFormatError, UnknownFeatureError, ValidationError
from .filterlang import FilterExpr, eval_expr, referenced_features

_NUMBER_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")

NUMERIC = "numeric"
CATEGORICAL = "categorical"


def _parses_as_number(cell: str) -> bool:
    return bool(_NUMBER_RE.match(cell.strip()))


def _render_number(x: float) -> str:
    """Compact string rendering used for keyword search (14.0 -> "14")."""
    return format(x, "g")


@dataclass(frozen=True)
class FeatureMeta:
    """Per-feature descriptive statistics (population std, divisor n)."""

    name: str
    kind: str  # NUMERIC or CATEGORICAL
    mean: float | None = None
    std: float | None = None
    min: float | None = None
    max: float | None = None
    missing_count: int = 0

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "mean": self.mean,
            "std": self.std,
            "min": self.min,
            "max": self.max,
            "missing_count": self.missing_count,
        }


@dataclass(frozen=True)
class DataTable:
    """Immutable rectangular table of observations x features.

    ``values`` holds the numeric columns (n x d, mean-imputed); categorical
    columns are kept as string columns aside and excluded from d.
    """

    row_ids: tuple[str, ...]
    features: tuple[FeatureMeta, ...]
    values: np.ndarray
    categorical: dict[str, tuple[str, ...]] = field(default_factory=dict)
    id_name: str | None = None

    def __post_init__(self):
        self.values.setflags(write=False)

    @property
    def n_rows(self) -> int:
        return len(self.row_ids)

    @property
    def numeric_feature_names(self) -> list[str]:
        return [f.name for f in self.features if f.kind == NUMERIC]

    @property
    def feature_names(self) -> list[str]:
        return [f.name for f in self.features]

    def feature_meta(self, name: str) -> FeatureMeta:
        for f in self.features:
            if f.name == name:
                return f
        raise UnknownFeatureError([name])

    def column_index(self, name: str) -> int:
        """Index of a numeric feature into the values matrix."""
        try:
            return self.numeric_feature_names.index(name)
        except ValueError:
            raise UnknownFeatureError([name]) from None

    def row_mapping(self, i: int) -> dict[str, float | str]:
        """Feature name -> value mapping for row i (filter evaluation)."""
        numeric = self.numeric_feature_names
        row: dict[str, float | str] = {
            name: float(self.values[i, j]) for j, name in enumerate(numeric)
        }
        for name, col in self.categorical.items():
            row[name] = col[i]
        return row

    def default_view(self) -> "TableView":
        return TableView(
            base=self,
            row_mask=np.ones(self.n_rows, dtype=bool),
            feature_subset=tuple(self.numeric_feature_names),
        )

    def to_metadata_json(self) -> dict:
        return {
            "n_rows": self.n_rows,
            "n_numeric": int(self.values.shape[1]),
            "id_name": self.id_name,
            "features": [f.to_json_dict() for f in self.features],
        }


@dataclass(frozen=True)
class TableView:
    """Row mask + numeric feature subset over an immutable base table."""

    base: DataTable
    row_mask: np.ndarray
    feature_subset: tuple[str, ...]

    def __post_init__(self):
        if self.row_mask.shape != (self.base.n_rows,):
            raise ValidationError("row mask length does not match table")
        unknown = [
            n for n in self.feature_subset if n not in self.base.numeric_feature_names
        ]
        if unknown:
            raise UnknownFeatureError(unknown)
        self.row_mask.setflags(write=False)

    @property
    def row_indices(self) -> np.ndarray:
        return np.flatnonzero(self.row_mask)

    @property
    def n_selected(self) -> int:
        return int(self.row_mask.sum())

    def matrix(self) -> np.ndarray:
        """Selected rows x selected numeric features, as a fresh array."""
        cols = [self.base.column_index(n) for n in self.feature_subset]
        return self.base.values[np.ix_(self.row_indices, cols)].copy()

    def selected_row_ids(self) -> list[str]:
        return [self.base.row_ids[i] for i in self.row_indices]

    def with_row_mask(self, mask: np.ndarray) -> "TableView":
        return TableView(self.base, mask.astype(bool).copy(), self.feature_subset)

    def with_features(self, names: Iterable[str]) -> "TableView":
        return TableView(self.base, self.row_mask.copy(), tuple(names))


def _decode(source) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str):
        return source
    data = source.read()
    if isinstance(data, bytes):
        return data.decode("utf-8")
    return data


def load_csv(
    source,
    delimiter: str = ",",
    header_row: bool = True,
    id_column: str | None = None,
) -> DataTable:
    """Parse UTF-8 CSV into a DataTable.

    A column is numeric iff every non-empty cell parses as a decimal number;
    missing numeric cells are imputed with the column mean and tallied in
    ``missing_count``. The id column defaults to the first column when it is
    non-numeric and unique, otherwise row ids are a synthesized 0-based index.
    """
    text = _decode(source)
    rows = [row for row in csv.reader(io.StringIO(text), delimiter=delimiter)]
    rows = [r for r in rows if r]  # drop fully empty lines
    if not rows:
        raise DataFormatError("no parsable rows in input")

    if header_row:
        header = [h.strip() for h in rows[0]]
        body = rows[1:]
        first_body_line = 2
    else:
        header = [f"col{j}" for j in range(len(rows[0]))]
        body = rows
        first_body_line = 1
    if not body:
        raise DataFormatError("no parsable rows in input")

    width = len(header)
    for i, row in enumerate(body):
        if len(row) != width:
            raise DataFormatError(
                f"row has {len(row)} cells, expected {width}",
                line=first_body_line + i,
            )

    seen: set[str] = set()
    for name in header:
        if name in seen:
            raise DataFormatError(f"duplicate feature name: {name!r}")
        seen.add(name)

    columns: dict[str, list[str]] = {
        name: [row[j].strip() for row in body] for j, name in enumerate(header)
    }

    def is_numeric_column(cells: list[str]) -> bool:
        return all(_parses_as_number(c) for c in cells if c != "")

    # Resolve the id column before typing the rest.
    id_name: str | None = None
    if id_column is not None:
        if id_column not in columns:
            raise DataFormatError(f"id column {id_column!r} not found")
        id_name = id_column
    elif header and not is_numeric_column(columns[header[0]]):
        first = columns[header[0]]
        if len(set(first)) == len(first):
            id_name = header[0]

    if id_name is not None:
        row_ids = tuple(columns[id_name])
        if len(set(row_ids)) != len(row_ids):
            raise DataFormatError(f"id column {id_name!r} has duplicate values")
    else:
        row_ids = tuple(str(i) for i in range(len(body)))

    feature_names = [n for n in header if n != id_name]
    metas: list[FeatureMeta] = []
    numeric_cols: list[np.ndarray] = []
    categorical: dict[str, tuple[str, ...]] = {}

    for name in feature_names:
        cells = columns[name]
        missing = sum(1 for c in cells if c == "")
        if is_numeric_column(cells):
            present = [float(c) for c in cells if c != ""]
            mean = float(np.mean(present)) if present else 0.0
            col = np.array([float(c) if c != "" else mean for c in cells])
            metas.append(
                FeatureMeta(
                    name=name,
                    kind=NUMERIC,
                    mean=float(col.mean()),
                    std=float(col.std()),  # population, divisor n
                    min=float(col.min()),
                    max=float(col.max()),
                    missing_count=missing,
                )
            )
            numeric_cols.append(col)
        else:
            metas.append(FeatureMeta(name=name, kind=CATEGORICAL, missing_count=missing))
            categorical[name] = tuple(cells)

    values = (
        np.column_stack(numeric_cols)
        if numeric_cols
        else np.empty((len(body), 0), dtype=float)
    )
    return DataTable(
        row_ids=row_ids,
        features=tuple(metas),
        values=values,
        categorical=categorical,
        id_name=id_name,
    )


def keyword_filter(table: DataTable, query: str) -> np.ndarray:
    """Case-insensitive substring search over ids, feature names, and cells.

    A row is selected iff the query occurs in its id, in any cell's string
    rendering, or in any feature name (a name hit selects every row).
    The empty query selects all rows.
    """
    n = table.n_rows
    if query == "":
        return np.ones(n, dtype=bool)
    q = query.lower()
    if any(q in name.lower() for name in table.feature_names):
        return np.ones(n, dtype=bool)

    mask = np.zeros(n, dtype=bool)
    rendered = [
        [_render_number(v).lower() for v in table.values[i]] for i in range(n)
    ]
    cat_cols = list(table.categorical.values())
    for i in range(n):
        if q in table.row_ids[i].lower():
            mask[i] = True
            continue
        if any(q in cell for cell in rendered[i]):
            mask[i] = True
            continue
        if any(q in col[i].lower() for col in cat_cols):
            mask[i] = True
    return mask


def apply_filter(table: DataTable, expr: FilterExpr) -> np.ndarray:
    """Evaluate a parsed filter expression against every row."""
    known = set(table.feature_names)
    unknown = sorted(referenced_features(expr) - known)
    if unknown:
        raise UnknownFeatureError(unknown)
    mask = np.zeros(table.n_rows, dtype=bool)
    for i in range(table.n_rows):
        mask[i] = eval_expr(expr, table.row_mapping(i))
    return mask


def normalize(view: TableView, method: str) -> np.ndarray:
    """Column-wise minmax ([0,1], constant -> 0.5) or zscore (constant -> 0).

    Statistics are computed over the view, not the base table.
    """
    X = view.matrix()
    if X.shape[0] < 1:
        raise DataFormatError("normalize requires at least one selected row")
    if method == "minmax":
        lo, hi = X.min(axis=0), X.max(axis=0)
        span = hi - lo
        out = np.empty_like(X)
        const = span == 0
        out[:, const] = 0.5
        out[:, ~const] = (X[:, ~const] - lo[~const]) / span[~const]
        return out
    if method == "zscore":
        mu, sd = X.mean(axis=0), X.std(axis=0)
        out = np.zeros_like(X)
        active = sd > 0
        out[:, active] = (X[:, active] - mu[active]) / sd[active]
        return out
    raise DataFormatError(f"unknown normalization method: {method!r}")


def export_csv(view: TableView) -> bytes:
    """Render the view as RFC-4180 CSV (UTF-8).

    Emits the id column only when the source table had one; numeric features
    are restricted to the view's subset, categorical columns always ride
    along in base order so a full view round-trips its original header.
    """
    table = view.base
    subset = set(view.feature_subset)
    cols = [
        f.name
        for f in table.features
        if (f.kind == CATEGORICAL) or (f.name in subset)
    ]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    header = ([table.id_name] if table.id_name else []) + cols
    writer.writerow(header)
    for i in view.row_indices:
        row: list[str] = [table.row_ids[i]] if table.id_name else []
        for name in cols:
            if name in table.categorical:
                row.append(table.categorical[name][int(i)])
            else:
                row.append(repr(float(table.values[i, table.column_index(name)])))
        writer.writerow(row)
    return buf.getvalue().encode("utf-8")


def point_stats_matrix(X: np.ndarray) -> dict[str, np.ndarray]:
    """count/mean/std/min/max per column of a matrix (population std)."""
    if X.shape[0] == 0:
        raise DataFormatError("statistics require at least one selected row")
    return {
        "count": np.full(X.shape[1], X.shape[0]),
        "mean": X.mean(axis=0),
        "std": X.std(axis=0),
        "min": X.min(axis=0),
        "max": X.max(axis=0),
    }
