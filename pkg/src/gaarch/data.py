"""
Monthly return series and on-disk formats.

Series are read from CSV with a header row. Parameter and fit files are flat
JSON documents in monthly decimal units; annualization only happens when a
report is rendered.
"""

from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import InitVar, dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Sequence

import numpy as np

from gaarch.exceptions import ContinuityError, InputError, ParseError, SchemaError

if TYPE_CHECKING:
    from gaarch.estimate import FitResult
    from gaarch.model import GaarchParams

__all__ = [
    "ReturnSeries",
    "load_csv",
    "load_fit",
    "load_params",
    "month_range",
    "save_csv",
    "save_fit",
    "save_params",
]

PARAM_KEYS = ("alpha", "gamma", "sigma0", "eta_minus", "eta_plus", "beta", "nu_minus", "nu_plus")

_DATE_RE = re.compile(r"^\s*(\d{4,})-(\d{1,2})(?:-(\d{1,2}))?\s*$")


def parse_month(text: str) -> tuple[int, int]:
    """Parse ``YYYY-MM`` or ``YYYY-MM-DD`` (day ignored) into (year, month)."""
    m = _DATE_RE.match(text)
    if m is None:
        raise ParseError(f"unrecognized date {text!r}; expected YYYY-MM or YYYY-MM-DD")
    year, month = int(m.group(1)), int(m.group(2))
    if not 1 <= month <= 12:
        raise ParseError(f"month out of range in {text!r}")
    return year, month


def _month_index(text: str) -> int:
    year, month = parse_month(text)
    return 12 * year + month - 1


def _month_label(index: int) -> str:
    return f"{index // 12:04d}-{index % 12 + 1:02d}"


def month_range(start: str, n: int) -> tuple[str, ...]:
    """``n`` consecutive month labels beginning at ``start``."""
    first = _month_index(start)
    return tuple(_month_label(first + i) for i in range(n))


@dataclass(frozen=True, eq=False)
class ReturnSeries:
    """
    Consecutive monthly simple returns in decimal units.

    Dates are normalized to ``YYYY-MM`` labels. Returns must be finite and
    greater than -1; ``check_floor=False`` lifts the last rule for model
    output, since a simulated arithmetic return can fall below -100%.
    """

    label: str
    dates: tuple[str, ...]
    returns: np.ndarray = field(repr=False)
    check_floor: InitVar[bool] = True

    def __post_init__(self, check_floor: bool) -> None:
        dates = tuple(_month_label(_month_index(d)) for d in self.dates)
        returns = np.array(self.returns, dtype=float)
        if returns.ndim != 1:
            raise InputError("returns must be one-dimensional")
        if len(dates) != returns.size:
            raise InputError(f"{len(dates)} dates but {returns.size} returns")
        if returns.size < 1:
            raise InputError("series is empty")
        if not np.all(np.isfinite(returns)):
            bad = int(np.flatnonzero(~np.isfinite(returns))[0])
            raise InputError(f"non-finite return at {dates[bad]}")
        if check_floor and np.any(returns <= -1.0):
            bad = int(np.flatnonzero(returns <= -1.0)[0])
            raise InputError(f"return of -100% or worse at {dates[bad]}")
        _check_consecutive(dates)
        returns.flags.writeable = False
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "returns", returns)

    def __len__(self) -> int:
        return self.returns.size

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ReturnSeries):
            return NotImplemented
        return (
            self.label == other.label
            and self.dates == other.dates
            and np.array_equal(self.returns, other.returns)
        )

    @classmethod
    def from_array(
        cls, returns, start: str = "2000-01", label: str = "series", check_floor: bool = True
    ) -> "ReturnSeries":
        returns = np.asarray(returns, dtype=float)
        return cls(label, month_range(start, returns.size), returns, check_floor)


def _check_consecutive(dates: Sequence[str]) -> None:
    idx = [_month_index(d) for d in dates]
    for prev, cur in zip(idx, idx[1:]):
        if cur <= prev:
            raise ContinuityError(f"dates not strictly increasing at {_month_label(cur)}")
        if cur != prev + 1:
            missing = _month_label(prev + 1)
            raise ContinuityError(
                f"gap in monthly dates: {missing} missing between "
                f"{_month_label(prev)} and {_month_label(cur)}"
            )


def load_csv(
    path,
    date_column: str = "date",
    value_column: str | None = None,
    percent: bool = False,
    label: str | None = None,
) -> ReturnSeries:
    """
    Read a monthly return series from a CSV file.

    Parameters
    ----------
    path : path-like
        UTF-8, comma-separated file with a header row.
    date_column : str
        Column holding ``YYYY-MM`` or ``YYYY-MM-DD`` dates.
    value_column : str, optional
        Column holding returns. Defaults to the first column that is not the
        date column.
    percent : bool
        Values are in percent and are divided by 100.
    label : str, optional
        Series label; defaults to the file stem.

    Raises
    ------
    SchemaError
        Missing date or value column.
    ParseError
        Unparseable date or number (message carries the file row number).
    ContinuityError
        A month is missing or dates are out of order.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path}: file is empty") from None
        if date_column not in header:
            raise SchemaError(f"{path}: missing date column {date_column!r}; found {header}")
        if value_column is None:
            others = [h for h in header if h != date_column]
            if not others:
                raise SchemaError(f"{path}: no value column")
            value_column = others[0]
        if value_column not in header:
            raise SchemaError(f"{path}: missing value column {value_column!r}; found {header}")
        di = header.index(date_column)
        vi = header.index(value_column)
        dates: list[str] = []
        values: list[float] = []
        for row_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) <= max(di, vi):
                raise ParseError(f"{path}: row {row_no} has {len(row)} fields")
            try:
                year, month = parse_month(row[di])
            except ParseError as exc:
                raise ParseError(f"{path}: row {row_no}: {exc}") from None
            try:
                value = float(row[vi])
            except ValueError:
                raise ParseError(f"{path}: row {row_no}: non-numeric value {row[vi]!r}") from None
            if not math.isfinite(value):
                raise ParseError(f"{path}: row {row_no}: non-finite value {row[vi]!r}")
            dates.append(f"{year:04d}-{month:02d}")
            values.append(value / 100.0 if percent else value)
    if not values:
        raise InputError(f"{path}: no data rows")
    try:
        _check_consecutive(dates)
    except ContinuityError as exc:
        raise ContinuityError(f"{path}: {exc}") from None
    return ReturnSeries(label if label is not None else path.stem, tuple(dates), np.array(values))


def save_csv(series: ReturnSeries, path, value_column: str = "ret") -> None:
    """Write ``date,<value_column>`` rows with full float precision."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["date", value_column])
        for d, r in zip(series.dates, series.returns):
            writer.writerow([d, repr(float(r))])


# --------------------------------------------------------------------------
# parameter and fit files


def _write_json(obj: dict, path) -> None:
    text = json.dumps(obj, indent=2, allow_nan=True) + "\n"
    Path(path).write_text(text, encoding="utf-8")


def _read_json(path) -> dict:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(obj, dict):
        raise SchemaError(f"{path}: expected a JSON object")
    return obj


def params_from_mapping(obj: dict, source: str = "<mapping>") -> "GaarchParams":
    from gaarch.model import GaarchParams

    missing = [k for k in PARAM_KEYS if k not in obj]
    if missing:
        raise SchemaError(f"{source}: missing parameter keys {missing}")
    try:
        values = {k: float(obj[k]) for k in PARAM_KEYS}
    except (TypeError, ValueError):
        raise ParseError(f"{source}: parameter values must be numbers") from None
    return GaarchParams.from_dict(values)


def save_params(params: "GaarchParams", path) -> None:
    _write_json(params.to_dict(), path)


def load_params(path) -> "GaarchParams":
    """Read a flat monthly-decimal parameter file."""
    return params_from_mapping(_read_json(path), str(path))


def save_fit(result: "FitResult", path) -> None:
    """Write parameters plus an ``estimation`` block; values stay monthly decimals."""
    _write_json(result.to_dict(), path)


def load_fit(path) -> "FitResult":
    from gaarch.estimate import FitResult

    obj = _read_json(path)
    if "estimation" not in obj:
        raise SchemaError(f"{path}: missing 'estimation' block")
    return FitResult.from_dict(obj, source=str(path))
