"""Ordinal 0-5 binning of CBC values, plus age and gender binarization.

A value below the normal range is bin 0, above it bin 5, and the range
itself is cut into four equal quarters numbered 1-4. Interior quarters are
half-open on the right; the top quarter is closed at the upper bound. Bin
membership is decided in exact rational arithmetic on the float inputs, so
values sitting on a quarter boundary never depend on rounding.
"""
from __future__ import annotations

import csv
import math
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import (
    EmptyDataset,
    HeaderMismatch,
    InvalidConfig,
    InvalidRange,
    NegativeAge,
    NonFiniteValue,
)
from .schema import (
    CBC_FEATURES,
    BinnedRecord,
    Dataset,
    FeatureSchema,
    Gender,
    RawRecord,
    default_schema,
)

ADULT_AGE = 18.0
BINNED_HEADER = ("rbc", "hb", "hct", "mcv", "mch", "mchc", "rdw", "plt", "wbc", "gender", "age", "class")

# quarter positions closer than this to an integer are re-checked exactly
_EXACT_CHECK_BAND = 1e-9


def _exact_quarter(v: float, lo: float, hi: float) -> int:
    t = (Fraction(v) - Fraction(lo)) * 4 / (Fraction(hi) - Fraction(lo))
    return math.floor(t)


def bin_value(v: float, lo: float, hi: float) -> int:
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
        raise InvalidRange(f"invalid range ({lo}, {hi})")
    if not math.isfinite(v):
        raise NonFiniteValue(f"non-finite value {v!r}")
    if v < lo:
        return 0
    if v > hi:
        return 5
    t = (v - lo) * 4.0 / (hi - lo)
    k = math.floor(t)
    if abs(t - round(t)) < _EXACT_CHECK_BAND:
        k = _exact_quarter(v, lo, hi)
    return 1 + min(3, k)


def bin_values(values, lo: float, hi: float) -> np.ndarray:
    """Vectorized :func:`bin_value` over an array of values."""
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
        raise InvalidRange(f"invalid range ({lo}, {hi})")
    v = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise NonFiniteValue("non-finite value in input")
    t = (v - lo) * 4.0 / (hi - lo)
    k = np.floor(t)
    near = np.abs(t - np.round(t)) < _EXACT_CHECK_BAND
    for i in np.flatnonzero(near & (v >= lo) & (v <= hi)):
        k[i] = _exact_quarter(float(v[i]), lo, hi)
    out = 1 + np.minimum(3, k).astype(np.int64)
    out[v < lo] = 0
    out[v > hi] = 5
    return out


def binarize_age(age_years: float) -> int:
    if age_years < 0:
        raise NegativeAge(f"negative age {age_years}")
    return 0 if age_years < ADULT_AGE else 1


def binarize_gender(g: Gender) -> int:
    return int(Gender(g))


def normalize_dataset(raw: Sequence[RawRecord], schema: FeatureSchema = None,
                      provenance: str = "") -> Dataset:
    schema = schema or default_schema()
    out = []
    for idx, rec in enumerate(raw):
        try:
            if not rec.is_complete():
                raise InvalidConfig("record has missing values; clean before normalizing")
            bins = tuple(
                bin_value(float(rec.cbc_values[f.name]), *f.range_for(rec.gender))
                for f in schema.features
            )
            out.append(BinnedRecord(
                age_bin=binarize_age(rec.age_years),
                gender_bin=binarize_gender(rec.gender),
                bins=bins,
                label=int(rec.label),
            ))
        except (InvalidRange, NonFiniteValue, NegativeAge, InvalidConfig) as exc:
            raise type(exc)(f"record {idx}: {exc}") from exc
    return Dataset(schema, tuple(out), provenance)


def write_binned_csv(data: Dataset, path: Union[str, Path]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BINNED_HEADER)
        for row, label in zip(data.X.tolist(), data.y.tolist()):
            w.writerow(row + [label])


def read_binned_csv(path: Union[str, Path], schema: FeatureSchema = None) -> Dataset:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(c.strip().lower() for c in rows[0]) != BINNED_HEADER:
        raise HeaderMismatch(f"{path}: expected header {','.join(BINNED_HEADER)}")
    body = [r for r in rows[1:] if r]
    if not body:
        raise EmptyDataset(f"{path}: no rows")
    arr = np.array([[int(c) for c in r] for r in body], dtype=np.int64)
    return Dataset.from_arrays(arr[:, :11], arr[:, 11], schema, provenance=str(path))


def reconstruct_midpoints(rec: BinnedRecord, schema: FeatureSchema, gender: Gender) -> dict:
    """A representative raw value for every bin (used to check bin stability)."""
    out = {}
    for name, b in zip(CBC_FEATURES, rec.bins):
        lo, hi = schema[name].range_for(gender)
        w = (hi - lo) / 4.0
        if b == 0:
            out[name] = lo - w / 2
        elif b == 5:
            out[name] = hi + w / 2
        else:
            out[name] = lo + (b - 0.5) * w
    return out


def label_counts(records: Iterable) -> dict:
    counts = {0: 0, 1: 0}
    for r in records:
        counts[int(r.label)] += 1
    return counts
