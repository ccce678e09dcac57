"""Core data model for labeled multidimensional sequence datasets, plus CSV io.

A dataset is a list of trajectories sharing one ordered dimension set. Each
trajectory is an ordered, non-empty sequence of points, and every point
carries exactly one value per dimension. Three dimension kinds are supported:

- ``spatial``: a planar (x, y) coordinate pair, in dataset units
- ``numeric``: a real number
- ``categorical``: a symbol, interned to an integer code at load time

On disk a dataset is a UTF-8 CSV with header ``tid,label,<dim1>,<dim2>,...``.
A spatial dimension is encoded as a single space-separated column ``"x y"``
so that every dimension occupies one column. Point order within a tid is
file order; no reordering is applied. A plain-text sidecar manifest
(``name=kind`` lines) records the dimension kinds.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

KINDS = ("spatial", "numeric", "categorical")


class SchemaError(ValueError):
    """Dimension schema is unknown, inconsistent, or does not match the file."""


class IngestionError(ValueError):
    """A dataset file contains a malformed or incomplete row."""


@dataclass(frozen=True)
class DimensionDescriptor:
    """One dimension of the dataset: name, kind, and column position.

    Names must be unique within a dataset and the kind is fixed for all
    points of all trajectories.
    """

    name: str
    kind: str
    index: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(
                f"unknown dimension kind {self.kind!r} for {self.name!r} "
                f"(expected one of {KINDS})"
            )


@dataclass(frozen=True)
class Point:
    """One trajectory element: one value per dimension, positionally aligned.

    A spatial value is an (x, y) tuple, a numeric value a float, and a
    categorical value the interned integer code of its symbol.
    """

    values: tuple


class Trajectory:
    """A labeled, ordered, non-empty sequence of multidimensional points.

    Values are stored column-wise per dimension for fast vectorized access:
    float arrays of shape (n,) for numeric, (n, 2) for spatial, and integer
    code arrays of shape (n,) for categorical dimensions.
    """

    __slots__ = ("tid", "label", "columns")

    def __init__(self, tid: str, label: str, columns: Sequence[np.ndarray]):
        if not tid:
            raise ValueError("trajectory tid must be non-empty")
        if not label:
            raise ValueError(f"trajectory {tid!r} has an empty label")
        if not columns:
            raise ValueError(f"trajectory {tid!r} has no dimensions")
        n = len(columns[0])
        if n < 1:
            raise ValueError(f"trajectory {tid!r} has no points")
        for col in columns:
            if len(col) != n:
                raise ValueError(f"trajectory {tid!r} has ragged columns")
        self.tid = tid
        self.label = label
        self.columns = tuple(np.asarray(col) for col in columns)

    def __len__(self) -> int:
        return int(len(self.columns[0]))

    def __repr__(self) -> str:
        return f"Trajectory(tid={self.tid!r}, label={self.label!r}, n={len(self)})"

    def point(self, i: int) -> Point:
        vals = []
        for col in self.columns:
            if col.ndim == 2:
                vals.append((float(col[i, 0]), float(col[i, 1])))
            elif col.dtype.kind in "iu":
                vals.append(int(col[i]))
            else:
                vals.append(float(col[i]))
        return Point(tuple(vals))

    @property
    def points(self) -> list[Point]:
        return [self.point(i) for i in range(len(self))]


@dataclass(frozen=True)
class Subtrajectory:
    """A contiguous slice [start, stop) of a source trajectory."""

    trajectory: Trajectory
    start: int
    stop: int

    def __post_init__(self):
        if not (0 <= self.start < self.stop <= len(self.trajectory)):
            raise ValueError(
                f"invalid slice [{self.start}, {self.stop}) of a "
                f"{len(self.trajectory)}-point trajectory"
            )

    def __len__(self) -> int:
        return self.stop - self.start

    def values(self, dim_index: int) -> np.ndarray:
        return self.trajectory.columns[dim_index][self.start : self.stop]

    def overlaps(self, other: "Subtrajectory") -> bool:
        """True when both slices share at least one point index of the same trajectory."""
        if self.trajectory is not other.trajectory:
            return False
        return self.start < other.stop and other.start < self.stop


class Dataset:
    """Immutable container of trajectories sharing one dimension set.

    ``vocab`` maps each categorical dimension name to its symbol table
    (code -> symbol). Trajectory columns hold the codes; the table is only
    needed to serialize or display values.
    """

    __slots__ = ("dimensions", "trajectories", "vocab", "_by_class")

    def __init__(
        self,
        dimensions: Sequence[DimensionDescriptor],
        trajectories: Sequence[Trajectory],
        vocab: Mapping[str, Sequence[str]] | None = None,
    ):
        names = [d.name for d in dimensions]
        if len(set(names)) != len(names):
            raise SchemaError(f"duplicate dimension names: {names}")
        for i, dim in enumerate(dimensions):
            if dim.index != i:
                raise SchemaError(f"dimension {dim.name!r} has index {dim.index}, expected {i}")
        self.dimensions = tuple(dimensions)
        self.trajectories = tuple(trajectories)
        self.vocab = {name: list(symbols) for name, symbols in (vocab or {}).items()}
        for dim in self.dimensions:
            if dim.kind == "categorical" and dim.name not in self.vocab:
                raise SchemaError(f"categorical dimension {dim.name!r} has no symbol table")
        seen = set()
        by_class: dict[str, list[Trajectory]] = {}
        for t in self.trajectories:
            if len(t.columns) != len(self.dimensions):
                raise SchemaError(f"trajectory {t.tid!r} has {len(t.columns)} columns, expected {len(self.dimensions)}")
            if t.tid in seen:
                raise SchemaError(f"duplicate trajectory id {t.tid!r}")
            seen.add(t.tid)
            by_class.setdefault(t.label, []).append(t)
        self._by_class = {label: tuple(ts) for label, ts in by_class.items()}

    def __len__(self) -> int:
        return len(self.trajectories)

    @property
    def classes(self) -> tuple[str, ...]:
        """Distinct labels, in order of first appearance."""
        return tuple(self._by_class)

    def by_class(self, label: str) -> tuple[Trajectory, ...]:
        return self._by_class[label]

    def decode(self, dim_index: int, code: int) -> str:
        """Symbol string for a categorical code."""
        return self.vocab[self.dimensions[dim_index].name][int(code)]


def _parse_value(raw: str, kind: str, lineno: int, name: str):
    if raw == "":
        raise IngestionError(f"line {lineno}: missing value for dimension {name!r}")
    if kind == "categorical":
        return raw
    if kind == "numeric":
        try:
            return float(raw)
        except ValueError:
            raise IngestionError(f"line {lineno}: bad numeric value {raw!r} for dimension {name!r}") from None
    parts = raw.split(" ")
    if len(parts) != 2:
        raise IngestionError(f"line {lineno}: spatial value {raw!r} for dimension {name!r} is not 'x y'")
    try:
        return (float(parts[0]), float(parts[1]))
    except ValueError:
        raise IngestionError(f"line {lineno}: bad spatial value {raw!r} for dimension {name!r}") from None


def load_dataset(
    path,
    schema: Mapping[str, str],
    vocab: Mapping[str, Sequence[str]] | None = None,
) -> Dataset:
    """Load and validate a dataset CSV.

    Parameters
    ----------
    path : str or Path
        CSV file with header ``tid,label,<dim1>,...``.
    schema : mapping
        Dimension name -> kind. Must cover exactly the header's dimensions.
    vocab : mapping, optional
        Existing symbol tables (e.g. from a training dataset) so that shared
        categorical symbols get identical codes across files. Unseen symbols
        are appended; the input mapping is not modified.

    Raises
    ------
    SchemaError
        Header and schema disagree, or a kind is unknown.
    IngestionError
        A row is malformed; the message names the offending line.
    """
    for name, kind in schema.items():
        if kind not in KINDS:
            raise SchemaError(f"unknown dimension kind {kind!r} for {name!r} (expected one of {KINDS})")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestionError(f"{path}: empty file, header required") from None
        if len(header) < 2 or header[0] != "tid" or header[1] != "label":
            raise IngestionError(f"{path}: header must start with 'tid,label', got {header[:2]}")
        names = header[2:]
        if set(names) != set(schema):
            missing = sorted(set(schema) - set(names))
            extra = sorted(set(names) - set(schema))
            raise SchemaError(f"header does not match schema (missing {missing}, unexpected {extra})")
        if len(set(names)) != len(names):
            raise SchemaError(f"duplicate dimension columns in header: {names}")
        dims = [DimensionDescriptor(n, schema[n], i) for i, n in enumerate(names)]

        order: list[str] = []
        labels: dict[str, str] = {}
        rows: dict[str, list[list]] = {}
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 2 + len(dims):
                raise IngestionError(f"line {lineno}: expected {2 + len(dims)} fields, got {len(row)}")
            tid, label = row[0], row[1]
            if tid == "":
                raise IngestionError(f"line {lineno}: missing tid")
            if label == "":
                raise IngestionError(f"line {lineno}: missing label")
            if tid not in labels:
                order.append(tid)
                labels[tid] = label
                rows[tid] = []
            elif labels[tid] != label:
                raise IngestionError(
                    f"line {lineno}: tid {tid!r} has label {label!r} but earlier rows say {labels[tid]!r}"
                )
            rows[tid].append([_parse_value(row[2 + i], d.kind, lineno, d.name) for i, d in enumerate(dims)])

    tables: dict[str, list[str]] = {}
    lookup: dict[str, dict[str, int]] = {}
    for dim in dims:
        if dim.kind == "categorical":
            base = list((vocab or {}).get(dim.name, ()))
            tables[dim.name] = base
            lookup[dim.name] = {s: i for i, s in enumerate(base)}

    def intern(name: str, symbol: str) -> int:
        codes = lookup[name]
        if symbol not in codes:
            codes[symbol] = len(tables[name])
            tables[name].append(symbol)
        return codes[symbol]

    trajectories = []
    for tid in order:
        pts = rows[tid]
        cols = []
        for dim in dims:
            raw = [p[dim.index] for p in pts]
            if dim.kind == "categorical":
                cols.append(np.array([intern(dim.name, s) for s in raw], dtype=np.int64))
            elif dim.kind == "numeric":
                cols.append(np.array(raw, dtype=np.float64))
            else:
                cols.append(np.array(raw, dtype=np.float64))
        trajectories.append(Trajectory(tid, labels[tid], cols))
    return Dataset(dims, trajectories, tables)


def serialize_dataset(dataset: Dataset) -> str:
    """Render a dataset back to its CSV form (deterministic bytes)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["tid", "label"] + [d.name for d in dataset.dimensions])
    for t in dataset.trajectories:
        for i in range(len(t)):
            fields = [t.tid, t.label]
            for dim in dataset.dimensions:
                col = t.columns[dim.index]
                if dim.kind == "categorical":
                    fields.append(dataset.decode(dim.index, col[i]))
                elif dim.kind == "numeric":
                    fields.append(repr(float(col[i])))
                else:
                    fields.append(f"{float(col[i, 0])!r} {float(col[i, 1])!r}")
            writer.writerow(fields)
    return buf.getvalue()


def write_dataset(dataset: Dataset, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(serialize_dataset(dataset))


def write_manifest(dataset: Dataset, path) -> None:
    """Write the ``name=kind`` sidecar manifest for a dataset."""
    with open(path, "w", encoding="utf-8") as fh:
        for dim in dataset.dimensions:
            fh.write(f"{dim.name}={dim.kind}\n")


def read_manifest(path) -> dict[str, str]:
    """Read a ``name=kind`` manifest into a schema mapping (file order)."""
    schema: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise SchemaError(f"{path}:{lineno}: expected 'name=kind', got {line!r}")
            name, kind = line.split("=", 1)
            schema[name.strip()] = kind.strip()
    return schema
