"""Tabular data model: declarative schema, encoding, splits, correlations.

A DataTable is an immutable numeric matrix plus the bookkeeping needed to
trace every encoded column back to its declared source column. Categorical
columns expand to one-hot indicator blocks; binary columns map to {0,1}
using the positive label declared in the schema (never inferred). The
protected column's positive value marks the privileged group.
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import RowError, SchemaError, StratificationError

KINDS = ("numeric", "categorical", "binary")
ROLES = ("feature", "protected", "target", "stratum", "ignored")

# roles whose encoded columns are visible to learners
MODEL_INPUT_ROLES = ("feature", "protected", "stratum")


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    kind: str
    role: str = "feature"
    positive: str | None = None  # raw value mapped to 1 (binary columns only)
    negative: str | None = None  # optional; inferred from data when omitted

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"column {self.name}: unknown kind {self.kind!r}")
        if self.role not in ROLES:
            raise SchemaError(f"column {self.name}: unknown role {self.role!r}")
        if self.kind == "binary" and self.positive is None:
            raise SchemaError(
                f"column {self.name}: binary columns must declare their positive value"
            )


@dataclass(frozen=True)
class EncodedColumn:
    name: str  # encoded name, e.g. "income" or "purpose=car"
    source: str  # declared column this came from
    role: str
    kind: str
    category: str | None = None  # raw category for one-hot indicators


def _check_schema(schema: list[ColumnSpec]) -> None:
    names = [c.name for c in schema]
    if len(set(names)) != len(names):
        raise SchemaError("duplicate column names in schema")
    targets = [c for c in schema if c.role == "target"]
    if len(targets) != 1:
        raise SchemaError(f"schema must declare exactly one target column, got {len(targets)}")
    if targets[0].kind != "binary":
        raise SchemaError("target column must be binary")
    for c in schema:
        if c.role == "protected" and c.kind != "binary":
            raise SchemaError(f"protected column {c.name} must be binary after encoding")


@dataclass(frozen=True)
class DataTable:
    schema: tuple[ColumnSpec, ...]
    encoded: tuple[EncodedColumn, ...]
    data: np.ndarray  # (n, d) float64, read-only
    # binary column name -> (positive raw value, negative raw value)
    value_maps: dict[str, tuple[str, str]] = field(default_factory=dict)
    # categorical column name -> ordered raw categories
    categories: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        self.data.setflags(write=False)

    # -- basic shape -------------------------------------------------------

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def column_names(self) -> list[str]:
        return [c.name for c in self.encoded]

    def column_index(self, name: str) -> int:
        for i, c in enumerate(self.encoded):
            if c.name == name:
                return i
        raise SchemaError(f"unknown column {name!r}")

    def column(self, name: str) -> np.ndarray:
        return self.data[:, self.column_index(name)]

    def source_indices(self, source: str) -> list[int]:
        idx = [i for i, c in enumerate(self.encoded) if c.source == source]
        if not idx:
            raise SchemaError(f"unknown column {source!r}")
        return idx

    def spec_for(self, name: str) -> ColumnSpec:
        for c in self.schema:
            if c.name == name:
                return c
        raise SchemaError(f"unknown column {name!r}")

    # -- role accessors ----------------------------------------------------

    def _single_role(self, role: str) -> ColumnSpec:
        cols = [c for c in self.schema if c.role == role]
        if not cols:
            raise SchemaError(f"no column with role {role!r}")
        if len(cols) > 1:
            raise SchemaError(f"multiple columns with role {role!r}")
        return cols[0]

    @property
    def target_name(self) -> str:
        return self._single_role("target").name

    @property
    def protected_name(self) -> str:
        return self._single_role("protected").name

    @property
    def stratum_name(self) -> str | None:
        cols = [c for c in self.schema if c.role == "stratum"]
        return cols[0].name if cols else None

    def y(self) -> np.ndarray:
        return self.column(self.target_name)

    def groups(self) -> np.ndarray:
        """Protected column as {0,1}; 1 is the privileged group."""
        return self.column(self.protected_name)

    def strata(self) -> np.ndarray:
        name = self.stratum_name
        if name is None:
            raise SchemaError("no stratum column declared")
        idx = self.source_indices(name)
        if len(idx) == 1:
            return self.data[:, idx[0]]
        # one-hot stratum: label = index of the active indicator
        return np.argmax(self.data[:, idx], axis=1).astype(float)

    def model_input_names(self) -> list[str]:
        return [c.name for c in self.encoded if c.role in MODEL_INPUT_ROLES]

    def matrix(self, names: list[str]) -> np.ndarray:
        idx = [self.column_index(n) for n in names]
        return self.data[:, idx]

    # -- derived tables ----------------------------------------------------

    def subset(self, rows: np.ndarray | list[int]) -> "DataTable":
        rows = np.asarray(rows, dtype=int)
        return replace(self, data=self.data[rows].copy())

    def drop_sources(self, sources: list[str]) -> "DataTable":
        drop = set(sources)
        for s in drop:
            self.source_indices(s)  # raises on unknown column
        keep = [i for i, c in enumerate(self.encoded) if c.source not in drop]
        return DataTable(
            schema=tuple(c for c in self.schema if c.name not in drop),
            encoded=tuple(self.encoded[i] for i in keep),
            data=self.data[:, keep].copy(),
            value_maps={k: v for k, v in self.value_maps.items() if k not in drop},
            categories={k: v for k, v in self.categories.items() if k not in drop},
        )

    def replace_column(self, name: str, values: np.ndarray) -> "DataTable":
        j = self.column_index(name)
        data = self.data.copy()
        data[:, j] = values
        return replace(self, data=data)

    # -- decode / identity -------------------------------------------------

    def decode(self) -> list[dict]:
        """Rows as {declared column: raw value}; inverse of from_records."""
        out = []
        for i in range(self.n):
            row = {}
            for spec in self.schema:
                idx = self.source_indices(spec.name)
                if spec.kind == "numeric":
                    row[spec.name] = float(self.data[i, idx[0]])
                elif spec.kind == "binary":
                    pos, neg = self.value_maps[spec.name]
                    row[spec.name] = pos if self.data[i, idx[0]] == 1.0 else neg
                else:
                    cats = self.categories[spec.name]
                    j = int(np.argmax(self.data[i, idx]))
                    row[spec.name] = cats[j]
            out.append(row)
        return out

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update("|".join(self.column_names).encode())
        h.update(np.ascontiguousarray(self.data).tobytes())
        return h.hexdigest()

    def equals(self, other: "DataTable") -> bool:
        return (
            self.schema == other.schema
            and self.encoded == other.encoded
            and np.array_equal(self.data, other.data)
        )

    def to_csv(self, path, delimiter: str = ",") -> None:
        rows = self.decode()
        names = [c.name for c in self.schema]
        with open(path, "w", newline="") as f:
            w = csv.writer(f, delimiter=delimiter)
            w.writerow(names)
            for row in rows:
                w.writerow([_format_cell(row[n]) for n in names])


def _format_cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


# -- construction ------------------------------------------------------------


def from_records(schema: list[ColumnSpec], records: list[dict]) -> DataTable:
    """Encode raw row dicts into a DataTable. Values may be str or numeric."""
    _check_schema(schema)
    schema = [c for c in schema if c.role != "ignored"]
    n = len(records)

    encoded: list[EncodedColumn] = []
    columns: list[np.ndarray] = []
    value_maps: dict[str, tuple[str, str]] = {}
    categories: dict[str, tuple[str, ...]] = {}

    for spec in schema:
        raw = []
        for i, rec in enumerate(records):
            if spec.name not in rec:
                raise SchemaError(f"missing column {spec.name!r}")
            raw.append(rec[spec.name])

        if spec.kind == "numeric":
            vals = np.empty(n)
            for i, v in enumerate(raw):
                if isinstance(v, str):
                    v = v.strip()
                    if v == "":
                        raise RowError(i + 1, f"empty cell in column {spec.name!r}")
                    try:
                        vals[i] = float(v)
                    except ValueError:
                        raise RowError(
                            i + 1, f"cannot parse {v!r} in numeric column {spec.name!r}"
                        ) from None
                elif v is None:
                    raise RowError(i + 1, f"empty cell in column {spec.name!r}")
                else:
                    vals[i] = float(v)
            if not np.all(np.isfinite(vals)):
                bad = int(np.flatnonzero(~np.isfinite(vals))[0])
                raise RowError(bad + 1, f"non-finite value in column {spec.name!r}")
            encoded.append(EncodedColumn(spec.name, spec.name, spec.role, spec.kind))
            columns.append(vals)

        elif spec.kind == "binary":
            labels = [_clean_label(v, i, spec.name) for i, v in enumerate(raw)]
            positive = spec.positive
            negative = spec.negative
            if negative is None:
                others = sorted({s for s in labels if s != positive})
                if len(others) > 1:
                    raise SchemaError(
                        f"binary column {spec.name!r} has values {others} besides "
                        f"positive {positive!r}"
                    )
                negative = others[0] if others else f"not_{positive}"
            vals = np.empty(n)
            for i, s in enumerate(labels):
                if s == positive:
                    vals[i] = 1.0
                elif s == negative:
                    vals[i] = 0.0
                else:
                    raise RowError(
                        i + 1,
                        f"value {s!r} in binary column {spec.name!r} is neither "
                        f"{positive!r} nor {negative!r}",
                    )
            value_maps[spec.name] = (positive, negative)
            encoded.append(EncodedColumn(spec.name, spec.name, spec.role, spec.kind))
            columns.append(vals)

        else:  # categorical -> one-hot block in sorted category order
            labels = [_clean_label(v, i, spec.name) for i, v in enumerate(raw)]
            cats = tuple(sorted(set(labels)))
            categories[spec.name] = cats
            pos_of = {c: k for k, c in enumerate(cats)}
            block = np.zeros((n, len(cats)))
            for i, s in enumerate(labels):
                block[i, pos_of[s]] = 1.0
            for k, c in enumerate(cats):
                encoded.append(
                    EncodedColumn(f"{spec.name}={c}", spec.name, spec.role, spec.kind, c)
                )
                columns.append(block[:, k])

    data = np.column_stack(columns) if columns else np.zeros((n, 0))
    return DataTable(
        schema=tuple(schema),
        encoded=tuple(encoded),
        data=data,
        value_maps=value_maps,
        categories=categories,
    )


def _clean_label(v, i: int, col: str) -> str:
    if v is None:
        raise RowError(i + 1, f"empty cell in column {col!r}")
    s = str(v).strip()
    if s == "":
        raise RowError(i + 1, f"empty cell in column {col!r}")
    return s


def load_table(path, schema: list[ColumnSpec], delimiter: str = ",") -> DataTable:
    """Read a delimited text file with a header row and encode it."""
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError("empty file: no header row") from None
        header = [h.strip() for h in header]
        missing = [c.name for c in schema if c.role != "ignored" and c.name not in header]
        if missing:
            raise SchemaError(f"header is missing columns {missing}")
        pos = {h: i for i, h in enumerate(header)}
        records = []
        for i, cells in enumerate(reader):
            if len(cells) != len(header):
                raise RowError(i + 1, f"expected {len(header)} cells, got {len(cells)}")
            records.append({c.name: cells[pos[c.name]] for c in schema if c.role != "ignored"})
    return from_records(schema, records)


# -- splitting ----------------------------------------------------------------


@dataclass(frozen=True)
class Split:
    train: DataTable
    test: DataTable
    seed: int
    fraction: float


def stratified_split(table: DataTable, fraction: float, seed: int) -> Split:
    """Deterministic split stratified jointly on (protected group, target).

    Each (group, label) cell contributes round(fraction * cell size) rows to
    train, clamped so both sides keep at least one row per cell.
    """
    if not 0.0 < fraction < 1.0:
        raise StratificationError(f"fraction must be in (0,1), got {fraction}")
    if table.n < 4:
        raise StratificationError("need at least 4 rows to split")
    groups = table.groups()
    y = table.y()
    rng = np.random.default_rng(seed)
    train_idx: list[np.ndarray] = []
    test_idx: list[np.ndarray] = []
    for g in (0.0, 1.0):
        for label in (0.0, 1.0):
            cell = np.flatnonzero((groups == g) & (y == label))
            if cell.size == 0:
                continue
            if cell.size < 2:
                raise StratificationError(
                    f"(group={int(g)}, label={int(label)}) cell has {cell.size} row(s); "
                    "need at least 2"
                )
            k = int(np.floor(fraction * cell.size + 0.5))
            k = min(max(k, 1), cell.size - 1)
            perm = rng.permutation(cell)
            train_idx.append(np.sort(perm[:k]))
            test_idx.append(np.sort(perm[k:]))
    train_rows = np.sort(np.concatenate(train_idx))
    test_rows = np.sort(np.concatenate(test_idx))
    return Split(
        train=table.subset(train_rows),
        test=table.subset(test_rows),
        seed=seed,
        fraction=fraction,
    )


# -- correlation --------------------------------------------------------------


@dataclass(frozen=True)
class CorrelationReport:
    target_column: str
    by_column: dict[str, float]  # per encoded column
    by_feature: dict[str, float]  # per declared column, max-|r| indicator
    degenerate: tuple[str, ...]  # zero-variance encoded columns (r reported as 0)


def pearson(a: np.ndarray, b: np.ndarray) -> float:
    """Plain Pearson r; 0.0 for zero-variance inputs (flagged by callers)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    da = a - a.mean()
    db = b - b.mean()
    denom = np.sqrt(np.dot(da, da) * np.dot(db, db))
    if denom == 0.0:
        return 0.0
    return float(np.dot(da, db) / denom)


def correlation_with(table: DataTable, column: str) -> CorrelationReport:
    """Pearson correlation of every model-input column against `column`.

    One-hot blocks are reported per indicator and summarized per declared
    column by the indicator with the largest |r|.
    """
    idx = table.source_indices(column)
    if len(idx) != 1:
        raise SchemaError(
            f"column {column!r} encodes to {len(idx)} columns; "
            "correlation target must be a single encoded column"
        )
    ref = table.data[:, idx[0]]
    by_column: dict[str, float] = {}
    degenerate: list[str] = []
    for i, col in enumerate(table.encoded):
        if col.source == column or col.role not in ("feature", "stratum"):
            continue
        vals = table.data[:, i]
        if np.ptp(vals) == 0.0 or np.ptp(ref) == 0.0:
            by_column[col.name] = 0.0
            degenerate.append(col.name)
        else:
            by_column[col.name] = pearson(vals, ref)
    by_feature: dict[str, float] = {}
    for col in table.encoded:
        if col.name not in by_column:
            continue
        prev = by_feature.get(col.source)
        r = by_column[col.name]
        if prev is None or abs(r) > abs(prev):
            by_feature[col.source] = r
    return CorrelationReport(
        target_column=column,
        by_column=by_column,
        by_feature=by_feature,
        degenerate=tuple(degenerate),
    )
