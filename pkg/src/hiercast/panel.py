"""Data model for time-series panels, groupings and summing matrices.

A panel holds a T x n observation matrix over monthly-style period indices,
with every series tagged as the single top aggregate, a middle-level
aggregate, or a bottom-level series.  A :class:`Grouping` encodes how bottom
series aggregate into middle series as a binary k x m matrix; a
:class:`HierarchySpec` wraps a grouping together with the bottom dimension
and a label, and yields the (m+k+1) x m summing matrix.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, FormatError, MetadataError, ParseError

TOP = "top"
MIDDLE = "middle"
BOTTOM = "bottom"

_DATE_RE = re.compile(r"^(\d{4})-(\d{2})$")


def month_index(date: str) -> int:
    """Convert an ISO year-month string to a flat month index."""
    m = _DATE_RE.match(date.strip())
    if m is None:
        raise FormatError(f"expected YYYY-MM date, got {date!r}")
    year, month = int(m.group(1)), int(m.group(2))
    if not 1 <= month <= 12:
        raise FormatError(f"month out of range in {date!r}")
    return year * 12 + (month - 1)


def month_label(index: int) -> str:
    """Inverse of :func:`month_index`."""
    return f"{index // 12:04d}-{index % 12 + 1:02d}"


def _fmt(x: float) -> str:
    return f"{x:.12g}"


@dataclass(frozen=True)
class SeriesPanel:
    """Immutable panel of aligned series with level tags.

    ``values`` is T x n with one column per series; ``timestamps`` are
    consecutive integer period indices.  Exactly one series carries the
    ``top`` tag and at least two carry ``bottom``.
    """

    values: np.ndarray
    ids: tuple[str, ...]
    timestamps: np.ndarray
    seasonal_period: int
    level_tags: tuple[str, ...]
    synthetic_top: bool = False  # top created by summation, omitted on write

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        timestamps = np.asarray(self.timestamps, dtype=np.int64)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "timestamps", timestamps)
        object.__setattr__(self, "ids", tuple(self.ids))
        object.__setattr__(self, "level_tags", tuple(self.level_tags))
        if values.ndim != 2:
            raise ArgumentError("values must be a T x n matrix")
        T, n = values.shape
        if len(self.ids) != n or len(self.level_tags) != n:
            raise ArgumentError("ids/level_tags must have one entry per column")
        if len(set(self.ids)) != n:
            raise ArgumentError("series ids must be unique")
        if np.isnan(values).any():
            raise ParseError("panel contains missing values")
        if timestamps.shape != (T,):
            raise ArgumentError("timestamps must have one entry per row")
        if T > 1 and not np.all(np.diff(timestamps) == 1):
            raise FormatError("timestamps must increase by exactly one period")
        if self.seasonal_period < 1:
            raise ArgumentError("seasonal_period must be positive")
        for tag in self.level_tags:
            if tag not in (TOP, MIDDLE, BOTTOM):
                raise ArgumentError(f"unknown level tag {tag!r}")
        if self.level_tags.count(TOP) != 1:
            raise ArgumentError("exactly one series must be tagged top")
        if self.level_tags.count(BOTTOM) < 2:
            raise ArgumentError("panel needs at least two bottom series")
        values.setflags(write=False)
        timestamps.setflags(write=False)

    @property
    def n_obs(self) -> int:
        return self.values.shape[0]

    @property
    def n_series(self) -> int:
        return self.values.shape[1]

    @property
    def n_bottom(self) -> int:
        return self.level_tags.count(BOTTOM)

    def _indices(self, tag: str) -> list[int]:
        return [i for i, t in enumerate(self.level_tags) if t == tag]

    @property
    def bottom_ids(self) -> tuple[str, ...]:
        return tuple(self.ids[i] for i in self._indices(BOTTOM))

    @property
    def top_id(self) -> str:
        return self.ids[self._indices(TOP)[0]]

    def bottom_values(self) -> np.ndarray:
        """T x m block of bottom-level observations."""
        return self.values[:, self._indices(BOTTOM)]

    def top_values(self) -> np.ndarray:
        return self.values[:, self._indices(TOP)[0]]

    def slice_rows(self, stop: int, start: int = 0) -> "SeriesPanel":
        """Panel restricted to rows ``start:stop`` (training windows)."""
        return SeriesPanel(
            self.values[start:stop],
            self.ids,
            self.timestamps[start:stop],
            self.seasonal_period,
            self.level_tags,
            self.synthetic_top,
        )


@dataclass(frozen=True)
class Grouping:
    """Binary k x m aggregation matrix plus middle-series identifiers.

    ``k = 0`` encodes the plain two-level hierarchy.  Rows must be unique
    and non-empty; columns follow the panel's bottom-series order.
    """

    matrix: np.ndarray
    middle_ids: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=float)
        if matrix.ndim != 2:
            raise ArgumentError("grouping matrix must be 2-D (use shape (0, m) for k=0)")
        object.__setattr__(self, "matrix", matrix)
        k, m = matrix.shape
        mids = tuple(self.middle_ids) if self.middle_ids else tuple(f"M{i + 1}" for i in range(k))
        object.__setattr__(self, "middle_ids", mids)
        if len(mids) != k:
            raise ArgumentError("need one middle id per grouping row")
        if not np.isin(matrix, (0.0, 1.0)).all():
            raise ArgumentError("grouping entries must be 0 or 1")
        if k and (matrix.sum(axis=1) == 0).any():
            raise ArgumentError("grouping rows must not be all zero")
        if k and len({tuple(row) for row in matrix.astype(int)}) != k:
            raise ArgumentError("grouping rows must be unique")
        matrix.setflags(write=False)

    @property
    def k(self) -> int:
        return self.matrix.shape[0]

    @property
    def m(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True)
class HierarchySpec:
    """A grouping plus the implied top row and identity block."""

    grouping: Grouping
    m: int
    label: str = ""

    def __post_init__(self):
        if self.grouping.m != self.m:
            raise ArgumentError("grouping width does not match m")
        if self.m < 2:
            raise ArgumentError("need at least two bottom series")

    @property
    def n_series(self) -> int:
        return self.m + self.grouping.k + 1


def summing_matrix(spec: HierarchySpec) -> np.ndarray:
    """Stack the all-ones top row, the grouping rows and the identity block."""
    m = spec.m
    return np.vstack([np.ones((1, m)), spec.grouping.matrix, np.eye(m)])


def two_level(m: int, label: str = "two-level") -> HierarchySpec:
    """Hierarchy with no middle series (k = 0)."""
    return HierarchySpec(Grouping(np.zeros((0, m))), m, label)


def read_panel(path, seasonal_period: int, hierarchy_path=None) -> SeriesPanel:
    """Read a wide CSV panel (first column ``date``, one column per series).

    Without hierarchy metadata every series is tagged bottom and a synthetic
    top is appended by summation.  With metadata (the hierarchy JSON format),
    columns named as middle series are tagged middle, their members bottom,
    and at most one remaining column becomes the top.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise FormatError(f"{path}: empty file")
    header = rows[0]
    if len(header) < 3:
        raise FormatError(f"{path}: need a date column and at least two series")
    ids = [c.strip() for c in header[1:]]
    timestamps = []
    data = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise FormatError(f"{path}:{lineno}: expected {len(header)} cells, got {len(row)}")
        timestamps.append(month_index(row[0]))
        vals = []
        for col, cell in zip(ids, row[1:]):
            cell = cell.strip()
            if cell == "":
                raise ParseError(f"{path}:{lineno}: missing value in column {col!r}")
            try:
                vals.append(float(cell))
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: bad number {cell!r} in column {col!r}") from exc
        data.append(vals)
    ts = np.array(timestamps, dtype=np.int64)
    if len(ts) > 1 and not np.all(np.diff(ts) == 1):
        raise FormatError(f"{path}: timestamps are not consecutive periods")
    values = np.array(data, dtype=float)

    synthetic = False
    if hierarchy_path is None:
        tags = [BOTTOM] * len(ids)
        top = values.sum(axis=1, keepdims=True)
        values = np.hstack([top, values])
        ids = ["total"] + ids
        tags = [TOP] + tags
        synthetic = True
    else:
        with open(hierarchy_path) as fh:
            mapping = json.load(fh)
        middle = set(mapping)
        bottom = {b for members in mapping.values() for b in members}
        tags = []
        rest = []
        for name in ids:
            if name in middle:
                tags.append(MIDDLE)
            elif name in bottom:
                tags.append(BOTTOM)
            else:
                tags.append(TOP)
                rest.append(name)
        if len(rest) > 1:
            raise MetadataError(f"multiple untagged columns look like tops: {rest}")
        if not rest:
            top = values[:, [t == BOTTOM for t in tags]].sum(axis=1, keepdims=True)
            values = np.hstack([top, values])
            ids = ["total"] + ids
            tags = [TOP] + tags
            synthetic = True
    return SeriesPanel(values, tuple(ids), ts, seasonal_period, tuple(tags), synthetic)


def write_panel(panel: SeriesPanel, path) -> None:
    """Write a panel back to the wide CSV format (12 significant digits).

    A summation-synthesized top column is omitted so that write(read(f))
    round-trips.
    """
    cols = [
        i for i, tag in enumerate(panel.level_tags)
        if not (panel.synthetic_top and tag == TOP)
    ]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["date", *(panel.ids[i] for i in cols)])
        for t in range(panel.n_obs):
            writer.writerow(
                [month_label(int(panel.timestamps[t]))]
                + [_fmt(panel.values[t, i]) for i in cols]
            )


def read_natural_hierarchy(path, panel: SeriesPanel) -> HierarchySpec:
    """Build a grouping from a JSON object mapping middle ids to members."""
    with open(path) as fh:
        mapping = json.load(fh)
    if not isinstance(mapping, dict):
        raise MetadataError(f"{path}: expected a JSON object of arrays")
    bottom = list(panel.bottom_ids)
    index = {name: j for j, name in enumerate(bottom)}
    rows = []
    for mid, members in mapping.items():
        if not members:
            raise MetadataError(f"middle series {mid!r} has no members")
        row = np.zeros(len(bottom))
        for b in members:
            if b not in index:
                raise MetadataError(f"middle series {mid!r} references unknown id {b!r}")
            row[index[b]] = 1.0
        rows.append(row)
    matrix = np.array(rows) if rows else np.zeros((0, len(bottom)))
    return HierarchySpec(Grouping(matrix, tuple(mapping)), len(bottom), "natural")


def write_hierarchy(grouping: Grouping, bottom_ids, path) -> None:
    """Write a grouping in the JSON metadata format."""
    bottom_ids = list(bottom_ids)
    mapping = {
        mid: [bottom_ids[j] for j in np.flatnonzero(row)]
        for mid, row in zip(grouping.middle_ids, grouping.matrix)
    }
    with open(path, "w") as fh:
        json.dump(mapping, fh, indent=1)
        fh.write("\n")
