"""Raw CBC CSV loading, missing-value cleaning, and seeded split/partition."""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .errors import (
    AllRowsDropped,
    DegenerateSplit,
    EmptyDataset,
    HeaderMismatch,
    InvalidConfig,
    TooFewRecords,
)
from .schema import CBC_FEATURES, Dataset, FeatureSchema, Gender, Label, RawRecord, default_schema

log = logging.getLogger(__name__)

MISSING_MODES = ("drop", "neighbor_average")
_GENDER_TOKENS = {"male": Gender.MALE, "m": Gender.MALE, "1": Gender.MALE,
                  "female": Gender.FEMALE, "f": Gender.FEMALE, "0": Gender.FEMALE}
_RAW_COLUMNS = ("age", "gender") + CBC_FEATURES + ("class",)


@dataclass(frozen=True)
class CleaningReport:
    rows_read: int
    rows_dropped_missing: int = 0
    columns_dropped: tuple[str, ...] = ()
    rows_kept: int = -1

    def __post_init__(self):
        if self.rows_kept < 0:
            object.__setattr__(self, "rows_kept", self.rows_read - self.rows_dropped_missing)
        if self.rows_kept != self.rows_read - self.rows_dropped_missing:
            raise InvalidConfig("rows_kept must equal rows_read - rows_dropped_missing")


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.7
    seed: int = 42
    client_count: int = 3

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise InvalidConfig(f"train_fraction must lie in (0,1), got {self.train_fraction}")
        if self.client_count < 1:
            raise InvalidConfig("client_count must be positive")
        if not 0 <= self.seed < 2**64:
            raise InvalidConfig("seed must be a 64-bit unsigned integer")


def _parse_float(cell: Optional[str]) -> Optional[float]:
    if cell is None:
        return None
    cell = cell.strip()
    if not cell:
        return None
    try:
        v = float(cell)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def _parse_gender(cell: Optional[str]) -> Optional[Gender]:
    if cell is None:
        return None
    return _GENDER_TOKENS.get(cell.strip().lower())


def _parse_label(cell: Optional[str]) -> Optional[Label]:
    v = _parse_float(cell)
    if v is None or v not in (0.0, 1.0):
        return None
    return Label(int(v))


def load_raw_csv(path: Union[str, Path], schema: FeatureSchema = None):
    """Parse a raw patient CSV into records and a :class:`CleaningReport`.

    Header names are matched case-insensitively. Columns outside the schema
    (names, addresses, test dates...) are discarded. Unparseable cells are
    treated as missing rather than raising.
    """
    schema = schema or default_schema()
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(str(path))
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyDataset(f"{path}: file is empty") from None
        rows = [r for r in reader if any(c.strip() for c in r)]

    lookup = {}
    for i, name in enumerate(header):
        lookup.setdefault(name.strip().lower(), i)
    wanted = ("age", "gender") + schema.names + (schema.class_name,)
    missing = [c for c in wanted if c.lower() not in lookup]
    if missing:
        raise HeaderMismatch(f"{path}: required column(s) absent: {', '.join(missing)}")
    wanted_lower = {c.lower() for c in wanted}
    dropped = tuple(h.strip() for h in header if h.strip().lower() not in wanted_lower)

    def cell(row, name):
        i = lookup[name.lower()]
        return row[i] if i < len(row) else None

    records = []
    for row in rows:
        age = _parse_float(cell(row, "age"))
        if age is not None and age < 0:
            age = None
        records.append(RawRecord(
            age_years=age,
            gender=_parse_gender(cell(row, "gender")),
            cbc_values={n: _parse_float(cell(row, n)) for n in schema.names},
            label=_parse_label(cell(row, schema.class_name)),
        ))
    if not records:
        raise EmptyDataset(f"{path}: no data rows")
    report = CleaningReport(rows_read=len(records), columns_dropped=dropped)
    if dropped:
        log.info("dropped columns %s", ", ".join(dropped))
    return records, report


def _fmt(v) -> str:
    return "" if v is None else repr(float(v))


def write_raw_csv(records: Sequence[RawRecord], path: Union[str, Path]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(_RAW_COLUMNS)
        for r in records:
            gender = "" if r.gender is None else r.gender.name.lower()
            label = "" if r.label is None else str(int(r.label))
            age = "" if r.age_years is None else (
                str(int(r.age_years)) if float(r.age_years).is_integer() else repr(float(r.age_years)))
            w.writerow([age, gender] + [_fmt(r.cbc_values.get(n)) for n in CBC_FEATURES] + [label])


def _neighbor_fill(column: list) -> list:
    """Replace None by the mean of the nearest non-missing values on each side."""
    n = len(column)
    prev = [None] * n
    nxt = [None] * n
    last = None
    for i in range(n):
        if column[i] is not None:
            last = column[i]
        prev[i] = last
    last = None
    for i in range(n - 1, -1, -1):
        if column[i] is not None:
            last = column[i]
        nxt[i] = last
    out = list(column)
    for i, v in enumerate(column):
        if v is None:
            sides = [s for s in (prev[i], nxt[i]) if s is not None]
            out[i] = sum(sides) / len(sides) if sides else None
    return out


def clean(records: Sequence[RawRecord], mode: str = "drop", columns_dropped: Sequence[str] = ()):
    """Remove (or, with ``neighbor_average``, impute) incomplete records."""
    mode = mode.replace("-", "_")
    if mode not in MISSING_MODES:
        raise InvalidConfig(f"unknown missing-value mode {mode!r}")
    if not records:
        raise EmptyDataset("no records to clean")

    if mode == "drop":
        kept = [r for r in records if r.is_complete()]
    else:
        base = [r for r in records
                if r.age_years is not None and r.gender is not None and r.label is not None]
        filled = {n: _neighbor_fill([r.cbc_values.get(n) for r in base]) for n in CBC_FEATURES}
        kept = []
        for i, r in enumerate(base):
            values = {n: filled[n][i] for n in CBC_FEATURES}
            if any(v is None for v in values.values()):
                continue
            kept.append(r if values == dict(r.cbc_values) else replace(r, cbc_values=values))

    report = CleaningReport(rows_read=len(records),
                            rows_dropped_missing=len(records) - len(kept),
                            columns_dropped=tuple(columns_dropped))
    if not kept:
        raise AllRowsDropped(f"all {len(records)} rows dropped by cleaning (mode={mode})")
    return kept, report


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), stream])


def train_val_split(data: Dataset, spec: SplitSpec):
    n = len(data)
    n_train = math.floor(spec.train_fraction * n)
    if n < 2 or n_train < 1 or n_train >= n:
        raise DegenerateSplit(f"cannot split {n} rows at fraction {spec.train_fraction}")
    order = _rng(spec.seed, 0).permutation(n)
    tag = f"{data.provenance}|split(seed={spec.seed},frac={spec.train_fraction!r})"
    return (data.subset(order[:n_train], tag + ":train"),
            data.subset(order[n_train:], tag + ":val"))


def shard_sizes(n: int, k: int) -> list[int]:
    base, extra = divmod(n, k)
    return [base + 1 if i < extra else base for i in range(k)]


def partition_clients(train: Dataset, k: int, seed: int) -> list[Dataset]:
    if k < 1:
        raise InvalidConfig("client count must be positive")
    n = len(train)
    if n < k:
        raise TooFewRecords(f"{n} records cannot fill {k} client shards")
    order = _rng(seed, 1).permutation(n)
    shards, start = [], 0
    for i, size in enumerate(shard_sizes(n, k)):
        shards.append(train.subset(order[start:start + size],
                                   f"{train.provenance}|shard({i}/{k},seed={seed})"))
        start += size
    return shards
