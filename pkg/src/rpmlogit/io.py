"""CSV ingestion, config parsing, result formatting, and the bundled fixture.

Input files are plain comma-separated text with a header row.  A dataset is
described by a :class:`DatasetSpec`: which columns are predictors and where
the response lives, either as one label column with an explicit category
order (the last listed category is the reference) or as d+1 one-hot columns.
Loaded designs always carry a leading intercept column.

The diabetes fixture (145 patients, columns sspg, insulin, class) is looked
up in the package data directory; it is not redistributed with the source,
so the loader explains how to supply it when missing.
"""
from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .simulate import SCHEME_FORWARD, RelabelScheme, relabel

__all__ = [
    "DatasetSpec",
    "LoadedData",
    "load_csv",
    "write_rows_csv",
    "format_value",
    "parse_config_file",
    "DIABETES_CATEGORIES",
    "diabetes_spec",
    "load_diabetes",
    "modified_diabetes_response",
    "content_digest",
]

DIABETES_CATEGORIES = ("normal", "chemical", "overt")
DIABETES_PREDICTORS = ("sspg", "insulin")
MODIFIED_ROW_COUNT = 14


@dataclass
class DatasetSpec:
    """Where to find the design and response inside a CSV file.

    Exactly one of ``response`` (a label column, with ``categories`` giving
    the order; the last is the reference) or ``response_columns`` (existing
    one-hot indicator columns, in category order) must be set.
    """

    path: str
    predictors: tuple
    response: str | None = None
    categories: tuple | None = None
    response_columns: tuple | None = None

    def __post_init__(self) -> None:
        self.predictors = tuple(self.predictors)
        if not self.predictors:
            raise ValueError("at least one predictor column is required")
        has_label = self.response is not None
        has_onehot = self.response_columns is not None
        if has_label == has_onehot:
            raise ValueError("set exactly one of response or response_columns")
        if has_label and not self.categories:
            raise ValueError("a label response needs an explicit category order")
        if self.categories is not None:
            self.categories = tuple(self.categories)
            if len(set(self.categories)) != len(self.categories):
                raise ValueError("category names must be distinct")
        if has_onehot:
            self.response_columns = tuple(self.response_columns)
            if len(self.response_columns) < 2:
                raise ValueError("one-hot response needs at least 2 columns")


@dataclass
class LoadedData:
    design: np.ndarray
    response: np.ndarray
    categories: tuple
    digest: str


def _parse_number(raw: str, line: int, column: str) -> float:
    text = raw.strip()
    if not text:
        raise ValueError(f"line {line}: missing value in column {column!r}")
    try:
        return float(text)
    except ValueError as exc:
        raise ValueError(
            f"line {line}: non-numeric value {raw!r} in column {column!r}"
        ) from exc


def load_csv(spec: DatasetSpec) -> LoadedData:
    """Read the file into (intercept-augmented design, one-hot response).

    Errors cite the 1-based file line and the offending column.
    """
    with open(spec.path, "r", encoding="utf-8", newline="") as handle:
        raw = handle.read()
    reader = csv.reader(raw.splitlines())
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError(f"{spec.path}: empty file") from None
    header = [h.strip() for h in header]
    col = {name: i for i, name in enumerate(header)}

    needed = list(spec.predictors)
    if spec.response is not None:
        needed.append(spec.response)
        categories = spec.categories
    else:
        needed.extend(spec.response_columns)
        categories = spec.categories or spec.response_columns
    for name in needed:
        if name not in col:
            raise ValueError(
                f"{spec.path}: column {name!r} not in header {header}"
            )

    cat_index = {c: j for j, c in enumerate(categories)}
    xs, ys = [], []
    for line_no, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != len(header):
            raise ValueError(
                f"line {line_no}: expected {len(header)} fields, got {len(row)}"
            )
        xs.append(
            [_parse_number(row[col[c]], line_no, c) for c in spec.predictors]
        )
        if spec.response is not None:
            label = row[col[spec.response]].strip()
            if label not in cat_index:
                raise ValueError(
                    f"line {line_no}: unknown label {label!r} in column "
                    f"{spec.response!r} (expected one of {list(categories)})"
                )
            onehot = [0.0] * len(categories)
            onehot[cat_index[label]] = 1.0
        else:
            onehot = [
                _parse_number(row[col[c]], line_no, c) for c in spec.response_columns
            ]
            if sorted(set(onehot)) not in ([0.0, 1.0], [1.0]) or sum(onehot) != 1.0:
                raise ValueError(
                    f"line {line_no}: response columns must be one-hot indicators"
                )
        ys.append(onehot)
    if not xs:
        raise ValueError(f"{spec.path}: no data rows")
    X = np.column_stack([np.ones(len(xs)), np.asarray(xs, dtype=float)])
    Y = np.asarray(ys, dtype=float)
    return LoadedData(
        design=X,
        response=Y,
        categories=tuple(categories),
        digest=content_digest(raw),
    )


def content_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def format_value(x, raw: bool = False) -> str:
    """Render a float with 6 significant digits, or full precision with raw."""
    if raw:
        return repr(float(x))
    return f"{float(x):.6g}"


def write_rows_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def parse_config_file(path) -> dict:
    """key = value lines; blank lines and #-comments ignored; keys unique."""
    out: dict = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ValueError(f"line {line_no}: expected 'key = value', got {line!r}")
            key, value = (part.strip() for part in text.split("=", 1))
            if not key or not value:
                raise ValueError(f"line {line_no}: empty key or value")
            if key in out:
                raise ValueError(f"line {line_no}: duplicate key {key!r}")
            out[key] = value
    return out


# ---------------------------------------------------------------------------
# bundled fixture


def diabetes_spec(path: str) -> DatasetSpec:
    return DatasetSpec(
        path=path,
        predictors=DIABETES_PREDICTORS,
        response="class",
        categories=DIABETES_CATEGORIES,
    )


def _bundled_diabetes_path() -> str | None:
    try:
        candidate = resources.files("rpmlogit").joinpath("data/diabetes.csv")
        if candidate.is_file():
            return str(candidate)
    except (ModuleNotFoundError, FileNotFoundError):
        pass
    return None


def load_diabetes(path: str | None = None) -> LoadedData:
    """Load the diabetes dataset (sspg, insulin, class; reference = overt).

    Looks for a bundled copy first, then the supplied path.  The original
    data (145 patients: 76 normal, 36 chemical, 33 overt, in that row order)
    is distributed with the R package rrcov; export it with
    ``write.csv(diabetes[, c("sspg", "insulin", "class")], "diabetes.csv",
    row.names=FALSE)`` and either pass its path or install it as
    ``rpmlogit/data/diabetes.csv``.
    """
    where = path or _bundled_diabetes_path()
    if where is None:
        raise FileNotFoundError(
            "diabetes fixture not bundled: supply the CSV exported from the "
            "rrcov R package (columns sspg, insulin, class with labels "
            "normal/chemical/overt) via the path argument or install it as "
            "rpmlogit/data/diabetes.csv"
        )
    data = load_csv(diabetes_spec(where))
    if data.response.shape[1] != 3:
        raise ValueError("diabetes data must have exactly 3 categories")
    return data


def modified_diabetes_response(response) -> np.ndarray:
    """The small-example variant: the last 14 rows recorded as 'normal'.

    With the canonical row order (normal, chemical, overt blocks) the last
    14 patients are overt diabetics, and pushing them through the forward
    3-cycle (normal->chemical->overt->normal) records them as normal.
    """
    out, _ = relabel(
        response,
        RelabelScheme(mapping=SCHEME_FORWARD, m=MODIFIED_ROW_COUNT, selection="last_m"),
    )
    return out
