"""Strict loading of experiment result CSVs.

Expected schema (exact header, LF, UTF-8):

    experiment,waveform,M,N,snr_db,seed,metric,value

M, N and seed are integers, snr_db is a float or empty, value is a finite
float.  Any deviation raises :class:`SchemaError` naming the line and column
so a truncated or foreign file fails loudly instead of producing an empty or
misleading plot.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

HEADER = ["experiment", "waveform", "M", "N", "snr_db", "seed", "metric", "value"]


class SchemaError(ValueError):
    """The CSV does not match the experiment-results schema."""


@dataclass(frozen=True)
class Row:
    experiment: str
    waveform: str
    m: int
    n: int
    snr_db: float      # nan when the column is empty
    seed: int
    metric: str
    value: float


def _fail(lineno, column, message):
    raise SchemaError(f"line {lineno}, column {column!r}: {message}")


def _parse_int(text, lineno, column):
    try:
        return int(text)
    except ValueError:
        _fail(lineno, column, f"expected integer, got {text!r}")


def _parse_float(text, lineno, column, allow_empty=False):
    if text == "":
        if allow_empty:
            return math.nan
        _fail(lineno, column, "empty value")
    try:
        v = float(text)
    except ValueError:
        _fail(lineno, column, f"expected number, got {text!r}")
    return v


def load_rows(path: str) -> list:
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise SchemaError("empty file (missing header)") from None
            if header != HEADER:
                raise SchemaError(
                    f"bad header {header!r}, expected {HEADER!r}")
            rows = []
            for lineno, rec in enumerate(reader, start=2):
                if len(rec) != len(HEADER):
                    raise SchemaError(
                        f"line {lineno}: {len(rec)} fields, expected {len(HEADER)}")
                exp, wf, m, n, snr, seed, metric, value = rec
                if not exp:
                    _fail(lineno, "experiment", "empty value")
                if not wf:
                    _fail(lineno, "waveform", "empty value")
                if not metric:
                    _fail(lineno, "metric", "empty value")
                v = _parse_float(value, lineno, "value")
                if not math.isfinite(v):
                    _fail(lineno, "value", f"non-finite value {value!r}")
                rows.append(Row(
                    experiment=exp, waveform=wf,
                    m=_parse_int(m, lineno, "M"),
                    n=_parse_int(n, lineno, "N"),
                    snr_db=_parse_float(snr, lineno, "snr_db", allow_empty=True),
                    seed=_parse_int(seed, lineno, "seed"),
                    metric=metric, value=v))
    except OSError as exc:
        raise SchemaError(f"cannot read {path!r}: {exc}") from exc
    if not rows:
        raise SchemaError("no data rows")
    return rows
