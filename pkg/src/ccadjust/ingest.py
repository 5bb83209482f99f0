"""Loading two-block datasets from delimited files.

A dataset is a CSV file with a header row plus a small JSON block spec
naming which columns form the x block and which the y block. Columns
listed as indicators are categorical and get expanded into one 0/1
column per level before the blocks are assembled; transforms (sqrt,
reciprocal) are applied to named columns afterwards.
"""

import csv
import json
import os

import numpy as np

from .correlation import TwoBlockData
from .errors import DataError

__all__ = [
    "BlockSpec",
    "load_block_spec",
    "load_csv",
    "load_dataset",
    "apply_transforms",
    "indicators_from_categorical",
    "save_csv",
]

MISSING_TOKENS = ("", "NA", "NaN", "nan", "na")

TRANSFORMS = ("sqrt", "reciprocal", "identity")


class BlockSpec:
    """Column roles for a two-block dataset.

    x_columns and y_columns name the variables of each block;
    indicator_columns are categorical columns to expand into 0/1
    indicator variables; transforms is a list of (column, name) pairs
    applied after expansion; supplementary_columns are carried along
    without entering either block.
    """

    def __init__(self, x_columns, y_columns, indicator_columns=None,
                 transforms=None, supplementary_columns=None):
        self.x_columns = list(x_columns)
        self.y_columns = list(y_columns)
        self.indicator_columns = list(indicator_columns or [])
        self.transforms = [tuple(t) for t in (transforms or [])]
        self.supplementary_columns = list(supplementary_columns or [])
        self._validate()

    def _validate(self):
        if not self.x_columns:
            raise DataError("block spec has an empty x_columns list")
        if not self.y_columns:
            raise DataError("block spec has an empty y_columns list")
        overlap = set(self.x_columns) & set(self.y_columns)
        if overlap:
            raise DataError(
                "columns %s appear in both blocks" % ", ".join(sorted(overlap))
            )
        for block in (self.x_columns, self.y_columns, self.supplementary_columns):
            seen = set()
            for name in block:
                if name in seen:
                    raise DataError("column %r listed twice in block spec" % name)
                seen.add(name)
        for name, kind in self.transforms:
            if kind not in TRANSFORMS:
                raise DataError(
                    "unknown transform %r for column %r (expected one of %s)"
                    % (kind, name, ", ".join(TRANSFORMS))
                )


def load_block_spec(path):
    """Read a block spec from a JSON file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise DataError("cannot read block spec %r: %s" % (path, exc)) from exc
    except json.JSONDecodeError as exc:
        raise DataError("block spec %r is not valid JSON: %s" % (path, exc)) from exc
    if not isinstance(raw, dict):
        raise DataError("block spec %r must be a JSON object" % path)
    known = {
        "x_columns",
        "y_columns",
        "indicator_columns",
        "transforms",
        "supplementary_columns",
    }
    unknown = set(raw) - known
    if unknown:
        raise DataError(
            "block spec %r has unknown keys: %s" % (path, ", ".join(sorted(unknown)))
        )
    for key in ("x_columns", "y_columns"):
        if key not in raw:
            raise DataError("block spec %r is missing %r" % (path, key))
    return BlockSpec(
        raw["x_columns"],
        raw["y_columns"],
        raw.get("indicator_columns"),
        raw.get("transforms"),
        raw.get("supplementary_columns"),
    )


def _read_table(path):
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            rows = list(reader)
    except OSError as exc:
        raise DataError("cannot read data file %r: %s" % (path, exc)) from exc
    rows = [row for row in rows if row and any(cell.strip() for cell in row)]
    if not rows:
        raise DataError("data file %r is empty" % path)
    header = [cell.strip() for cell in rows[0]]
    if len(set(header)) != len(header):
        raise DataError("data file %r has duplicate column names" % path)
    body = rows[1:]
    for line_no, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise DataError(
                "%s line %d has %d fields, expected %d"
                % (path, line_no, len(row), len(header))
            )
    return header, body


def _parse_numeric(cell, path, line_no, column):
    token = cell.strip()
    if token in MISSING_TOKENS:
        raise DataError(
            "%s line %d column %r has a missing value" % (path, line_no, column)
        )
    try:
        return float(token)
    except ValueError:
        raise DataError(
            "%s line %d column %r is not numeric: %r" % (path, line_no, column, token)
        ) from None


def indicators_from_categorical(values, column_name):
    """Expand a categorical column into indicator variables.

    Levels are taken in order of first appearance; each produces a 0/1
    column named column=level. Returns (level_names, matrix).
    """
    levels = []
    for v in values:
        if v not in levels:
            levels.append(v)
    if len(levels) < 2:
        raise DataError(
            "indicator column %r has only %d level" % (column_name, len(levels))
        )
    if len(levels) > 50:
        raise DataError(
            "indicator column %r has %d levels, which looks non-categorical"
            % (column_name, len(levels))
        )
    names = ["%s=%s" % (column_name, lvl) for lvl in levels]
    matrix = np.zeros((len(values), len(levels)))
    for i, v in enumerate(values):
        matrix[i, levels.index(v)] = 1.0
    return names, matrix


def load_csv(path, spec):
    """Load a CSV file into a TwoBlockData per the given block spec.

    Indicator columns are expanded first and their generated names
    substituted into the block lists; transforms are applied last.
    Missing and non-numeric cells are hard errors that report the file
    line and column.
    """
    header, body = _read_table(path)
    index = {name: i for i, name in enumerate(header)}
    needed = spec.x_columns + spec.y_columns + spec.supplementary_columns
    for name in needed:
        if name not in index:
            raise DataError("data file %r has no column %r" % (path, name))
    if len(body) < 3:
        raise DataError(
            "data file %r has %d data rows; at least 3 are required"
            % (path, len(body))
        )

    indicator_set = set(spec.indicator_columns)
    columns = {}
    for name in needed:
        col = index[name]
        if name in indicator_set:
            raw = []
            for line_no, row in enumerate(body, start=2):
                token = row[col].strip()
                if token in MISSING_TOKENS:
                    raise DataError(
                        "%s line %d column %r has a missing value"
                        % (path, line_no, name)
                    )
                raw.append(token)
            columns[name] = raw
        else:
            vals = np.empty(len(body))
            for i, (line_no, row) in enumerate(zip(range(2, len(body) + 2), body)):
                vals[i] = _parse_numeric(row[col], path, line_no, name)
            columns[name] = vals

    def expand(block):
        names = []
        arrays = []
        for name in block:
            if name in indicator_set:
                level_names, matrix = indicators_from_categorical(columns[name], name)
                names.extend(level_names)
                arrays.append(matrix)
            else:
                names.append(name)
                arrays.append(np.asarray(columns[name]).reshape(-1, 1))
        return names, np.hstack(arrays)

    for name in indicator_set:
        if name not in spec.x_columns and name not in spec.y_columns:
            raise DataError(
                "indicator column %r is not in either block" % name
            )

    x_names, x = expand(spec.x_columns)
    y_names, y = expand(spec.y_columns)
    supplementary = {}
    for name in spec.supplementary_columns:
        supplementary[name] = np.asarray(columns[name], dtype=float)

    data = TwoBlockData(x=x, y=y, x_names=x_names, y_names=y_names,
                        supplementary=supplementary)
    if spec.transforms:
        data = apply_transforms(data, spec.transforms)
    return data


def apply_transforms(data, transforms):
    """Apply named column transforms to a TwoBlockData.

    sqrt renames the column to sqrt_name and requires non-negative
    values, reciprocal renames to recip_name and requires non-zero
    values, identity leaves the column alone. Domain violations report
    the offending data row (1-based, excluding the header).
    """
    x = data.x.copy()
    y = data.y.copy()
    x_names = list(data.x_names)
    y_names = list(data.y_names)

    def locate(name):
        if name in x_names:
            return x, x_names, x_names.index(name)
        if name in y_names:
            return y, y_names, y_names.index(name)
        raise DataError("transform names unknown column %r" % name)

    for name, kind in transforms:
        if kind == "identity":
            locate(name)
            continue
        block, names, j = locate(name)
        col = block[:, j]
        if kind == "sqrt":
            bad = np.flatnonzero(col < 0)
            if bad.size:
                raise DataError(
                    "sqrt transform of %r fails at data row %d (value %g)"
                    % (name, bad[0] + 1, col[bad[0]])
                )
            block[:, j] = np.sqrt(col)
            names[j] = "sqrt_" + name
        elif kind == "reciprocal":
            bad = np.flatnonzero(col == 0)
            if bad.size:
                raise DataError(
                    "reciprocal transform of %r fails at data row %d (value 0)"
                    % (name, bad[0] + 1)
                )
            block[:, j] = 1.0 / col
            names[j] = "recip_" + name
        else:
            raise DataError("unknown transform %r for column %r" % (kind, name))

    return TwoBlockData(x=x, y=y, x_names=x_names, y_names=y_names,
                        supplementary=dict(data.supplementary))


def load_dataset(data_path, spec_path):
    """Convenience wrapper: read the spec, then the data."""
    spec = load_block_spec(spec_path)
    return load_csv(data_path, spec)


def save_csv(path, header, rows):
    """Write a delimited table; used by the compare and report outputs."""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        raise DataError("cannot write %r: %s" % (path, exc)) from exc
    return path
