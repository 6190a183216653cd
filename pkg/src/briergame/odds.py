"""Bookmaker odds: conversion to forecasts, overrounds, and the canonical CSV format.

Canonical CSV (UTF-8, comma separated) has the header::

    date,group,outcome,<expert>_a1,...,<expert>_an,<expert2>_a1,...

with ISO dates, 1-based integer outcomes and decimal ("continental") odds.
The ``group`` column is optional.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from datetime import date

import numpy as np

from .core import OutcomeSpace


class OddsError(ValueError):
    pass


def _check_odds(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)) or np.any(a <= 1.0):
        raise OddsError(f"decimal odds must be finite and greater than 1: {a}")
    return a


@dataclass(frozen=True)
class OddsVector:
    a: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", _check_odds(self.a))

    def __array__(self, dtype=None, copy=None):
        return self.a if dtype is None else self.a.astype(dtype)


def odds_to_probs(a) -> np.ndarray:
    """Normalised inverse odds, ``(1/a_i) / sum_j (1/a_j)``; works along the last axis."""
    inv = 1.0 / _check_odds(a)
    return inv / inv.sum(axis=-1, keepdims=True)


def overround(a):
    """Bookmaker margin ``sum_i 1/a_i - 1``.

    The sum is correctly rounded (``math.fsum``), so fair books such as
    ``(2, 3, 6)`` give exactly 0.
    """
    inv = 1.0 / _check_odds(a)
    if inv.ndim == 1:
        return math.fsum(inv) - 1.0
    return np.apply_along_axis(math.fsum, -1, inv) - 1.0


@dataclass(frozen=True)
class MatchRecord:
    date: date
    group_key: str | None
    outcome: int
    odds_by_expert: tuple[tuple[float, ...], ...]
    expert_names: tuple[str, ...]

    @property
    def n_outcomes(self) -> int:
        return len(self.odds_by_expert[0])

    def expert_probs(self) -> np.ndarray:
        return odds_to_probs(np.array(self.odds_by_expert))


@dataclass(frozen=True)
class Diagnostic:
    row: int
    level: str  # "error" | "warning"
    message: str

    def __str__(self):
        return f"row {self.row}: {self.level}: {self.message}"


@dataclass(frozen=True)
class Schema:
    """Where to find each field in a CSV file."""

    n_outcomes: int
    experts: tuple[str, ...]
    date_column: str = "date"
    group_column: str | None = "group"
    outcome_column: str = "outcome"
    odds_pattern: str = "{expert}_a{i}"

    def odds_columns(self, expert: str) -> list[str]:
        return [self.odds_pattern.format(expert=expert, i=i) for i in range(1, self.n_outcomes + 1)]

    def header(self) -> list[str]:
        cols = [self.date_column]
        if self.group_column:
            cols.append(self.group_column)
        cols.append(self.outcome_column)
        for e in self.experts:
            cols.extend(self.odds_columns(e))
        return cols


@dataclass
class Histogram:
    bin_count: int
    lo: float
    hi: float
    counts: np.ndarray = field(repr=False)

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.bin_count + 1)


def _as_text(source):
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(source.decode("utf-8"))
    if isinstance(source, io.BufferedIOBase) or (hasattr(source, "mode") and "b" in source.mode):
        return io.TextIOWrapper(source, encoding="utf-8", newline="")
    return source


def parse_matches(source, schema: Schema) -> tuple[list[MatchRecord], list[Diagnostic]]:
    """Read match records, keeping file order; bad rows become diagnostics, never silent drops."""
    space = OutcomeSpace(schema.n_outcomes)
    reader = csv.DictReader(_as_text(source))
    records: list[MatchRecord] = []
    diags: list[Diagnostic] = []
    header = reader.fieldnames or []
    needed = [schema.date_column, schema.outcome_column]
    for e in schema.experts:
        needed += schema.odds_columns(e)
    missing = [c for c in needed if c not in header]
    if missing:
        diags.append(Diagnostic(1, "error", f"missing columns: {', '.join(missing)}"))
        return records, diags
    has_group = bool(schema.group_column) and schema.group_column in header

    for rownum, row in enumerate(reader, start=2):
        try:
            d = date.fromisoformat(row[schema.date_column].strip())
        except (ValueError, AttributeError):
            diags.append(Diagnostic(rownum, "error", f"bad date {row[schema.date_column]!r}"))
            continue
        try:
            outcome = space.check(int(row[schema.outcome_column]))
        except (ValueError, TypeError):
            diags.append(Diagnostic(rownum, "error", f"bad outcome {row[schema.outcome_column]!r}"))
            continue

        odds, problem = [], None
        for e in schema.experts:
            cells = [row[c] for c in schema.odds_columns(e)]
            if any(c is None or not c.strip() for c in cells):
                problem = Diagnostic(rownum, "warning", f"missing odds for {e}; row skipped")
                break
            try:
                vec = tuple(float(c) for c in cells)
                _check_odds(vec)
            except ValueError:
                problem = Diagnostic(rownum, "error", f"invalid odds for {e}: {cells} (must be > 1)")
                break
            odds.append(vec)
        if problem:
            diags.append(problem)
            continue

        for e, vec in zip(schema.experts, odds):
            r = overround(vec)
            if r < 0:
                diags.append(Diagnostic(rownum, "warning", f"negative overround {r:.4f} for {e}"))
        group = row[schema.group_column] if has_group else None
        records.append(MatchRecord(d, group or None, outcome, tuple(odds), tuple(schema.experts)))
    return records, diags


def read_matches(path, schema: Schema):
    with open(path, newline="", encoding="utf-8") as f:
        return parse_matches(f, schema)


def write_matches(records, stream, schema: Schema) -> None:
    """Inverse of :func:`parse_matches` for the canonical layout."""
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(schema.header())
    for r in records:
        row = [r.date.isoformat()]
        if schema.group_column:
            row.append(r.group_key or "")
        row.append(r.outcome)
        for vec in r.odds_by_expert:
            row.extend(repr(float(x)) for x in vec)
        w.writerow(row)


def build_histogram(values, bin_count: int) -> Histogram:
    """Equal-width bins from min to max; the maximum lands in the last bin."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("cannot build a histogram of no values")
    if bin_count < 1:
        raise ValueError("bin_count must be positive")
    lo, hi = float(v.min()), float(v.max())
    counts = np.zeros(bin_count, dtype=np.int64)
    width = (hi - lo) / bin_count
    if width == 0 or not math.isfinite(width):
        counts[0] = v.size
    else:
        idx = np.floor((v - lo) / width).astype(np.int64)
        np.add.at(counts, np.clip(idx, 0, bin_count - 1), 1)
    return Histogram(bin_count, lo, hi, counts)
