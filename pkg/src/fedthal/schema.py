"""Feature schema, record types and the dataset container.

The nine CBC analytes are kept in Table-1 row order; feature vectors append
gender then age. Changing this order breaks every saved model file.
"""
from __future__ import annotations

import enum
import io
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .errors import InvalidConfig

CBC_FEATURES = ("RBC", "HB", "HCT", "MCV", "MCH", "MCHC", "RDW", "PLT", "WBC")
DEMOGRAPHIC_FEATURES = ("gender", "age")
N_FEATURES = len(CBC_FEATURES) + len(DEMOGRAPHIC_FEATURES)
N_BINS = 6


class Gender(enum.IntEnum):
    FEMALE = 0
    MALE = 1


class Label(enum.IntEnum):
    NON_CARRIER = 0
    CARRIER = 1


@dataclass(frozen=True)
class FeatureDef:
    name: str
    unit: str
    normal_range_male: tuple[float, float]
    normal_range_female: tuple[float, float]

    def __post_init__(self):
        if not self.unit:
            raise InvalidConfig(f"{self.name}: unit must be non-empty")
        for lo, hi in (self.normal_range_male, self.normal_range_female):
            if not lo < hi:
                raise InvalidConfig(f"{self.name}: range ({lo}, {hi}) needs lower < upper")

    @property
    def range(self) -> tuple[float, float]:
        return self.normal_range_male

    @property
    def range_male(self) -> tuple[float, float]:
        return self.normal_range_male

    @property
    def range_female(self) -> tuple[float, float]:
        return self.normal_range_female

    def range_for(self, gender: Gender) -> tuple[float, float]:
        return self.normal_range_male if gender == Gender.MALE else self.normal_range_female


@dataclass(frozen=True)
class FeatureSchema:
    features: tuple[FeatureDef, ...]
    class_name: str = "class"

    def __post_init__(self):
        names = tuple(f.name for f in self.features)
        if names != CBC_FEATURES:
            raise InvalidConfig(f"schema must list {CBC_FEATURES} in order, got {names}")

    def __getattr__(self, name):
        # attribute-style lookup: schema.MCV
        if name.startswith("_"):
            raise AttributeError(name)
        for f in self.__dict__.get("features", ()):
            if f.name == name:
                return f
        raise AttributeError(name)

    def __getitem__(self, name: str) -> FeatureDef:
        return self.features[self.index(name)]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)

    @property
    def vector_names(self) -> tuple[str, ...]:
        return self.names + DEMOGRAPHIC_FEATURES

    def index(self, name: str) -> int:
        return self.vector_names.index(name)

    def to_text(self) -> str:
        buf = io.StringIO()
        for f in self.features:
            lo_m, hi_m = f.normal_range_male
            lo_f, hi_f = f.normal_range_female
            buf.write(f"{f.name},{f.unit},{lo_m!r},{hi_m!r},{lo_f!r},{hi_f!r}\n")
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str) -> "FeatureSchema":
        defs = []
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            parts = line.split(",")
            if len(parts) != 6:
                raise InvalidConfig(f"schema line {lineno}: expected 6 fields, got {len(parts)}")
            name, unit, *nums = parts
            try:
                lo_m, hi_m, lo_f, hi_f = (float(x) for x in nums)
            except ValueError as exc:
                raise InvalidConfig(f"schema line {lineno}: {exc}") from None
            defs.append(FeatureDef(name.strip(), unit.strip(), (lo_m, hi_m), (lo_f, hi_f)))
        return cls(tuple(defs))

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "FeatureSchema":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))


_DEFAULT_SCHEMA_TEXT = """\
RBC,x10^12 cells/l,4.0,5.0,4.0,5.0
HB,g/dl,13.0,17.0,12.0,15.0
HCT,%,45.0,50.0,30.0,45.0
MCV,fl,80.0,100.0,80.0,100.0
MCH,pg/cell,27.0,34.0,27.0,34.0
MCHC,%,32.0,36.0,32.0,36.0
RDW,%,11.0,15.0,11.0,15.0
PLT,x10^9/l,150.0,350.0,150.0,350.0
WBC,x10^9/l,4.0,10.0,4.0,10.0
"""


def default_schema() -> FeatureSchema:
    """Reference ranges from the screening programme's feature table."""
    return FeatureSchema.from_text(_DEFAULT_SCHEMA_TEXT)


@dataclass(frozen=True)
class RawRecord:
    age_years: Optional[float]
    gender: Optional[Gender]
    cbc_values: Mapping[str, Optional[float]]
    label: Optional[Label] = None

    def __post_init__(self):
        unknown = set(self.cbc_values) - set(CBC_FEATURES)
        if unknown:
            raise InvalidConfig(f"unknown CBC fields {sorted(unknown)}")
        if self.age_years is not None and self.age_years < 0:
            raise InvalidConfig(f"negative age {self.age_years}")

    def value(self, name: str) -> Optional[float]:
        return self.cbc_values.get(name)

    def is_complete(self) -> bool:
        if self.age_years is None or self.gender is None or self.label is None:
            return False
        for name in CBC_FEATURES:
            v = self.cbc_values.get(name)
            if v is None or not math.isfinite(v):
                return False
        return True


@dataclass(frozen=True)
class BinnedRecord:
    age_bin: int
    gender_bin: int
    bins: tuple[int, ...]
    label: int

    def __post_init__(self):
        if len(self.bins) != len(CBC_FEATURES):
            raise InvalidConfig(f"expected {len(CBC_FEATURES)} bins, got {len(self.bins)}")
        if any(b not in range(N_BINS) for b in self.bins):
            raise InvalidConfig(f"bins out of [0,5]: {self.bins}")
        if self.age_bin not in (0, 1) or self.gender_bin not in (0, 1):
            raise InvalidConfig("age_bin and gender_bin must be 0 or 1")
        if self.label not in (0, 1):
            raise InvalidConfig(f"label must be 0 or 1, got {self.label}")


def feature_vector(rec: BinnedRecord) -> tuple[int, ...]:
    """[9 CBC bins, gender_bin, age_bin]."""
    return tuple(rec.bins) + (rec.gender_bin, rec.age_bin)


Record = Union[RawRecord, BinnedRecord]


@dataclass(frozen=True)
class Dataset:
    schema: FeatureSchema
    records: tuple[Record, ...]
    provenance: str = ""

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def is_binned(self) -> bool:
        return all(isinstance(r, BinnedRecord) for r in self.records)

    @cached_property
    def X(self) -> np.ndarray:
        """(n, 11) integer matrix of feature vectors."""
        if not self.records:
            return np.zeros((0, N_FEATURES), dtype=np.int64)
        return np.array([feature_vector(r) for r in self.records], dtype=np.int64)

    @cached_property
    def y(self) -> np.ndarray:
        return np.array([int(r.label) for r in self.records], dtype=np.int64)

    def subset(self, indices: Sequence[int], provenance: str) -> "Dataset":
        return Dataset(self.schema, tuple(self.records[i] for i in indices), provenance)

    @classmethod
    def from_arrays(cls, X, y, schema: Optional[FeatureSchema] = None, provenance: str = "") -> "Dataset":
        X = np.asarray(X, dtype=np.int64)
        y = np.asarray(y, dtype=np.int64)
        recs = tuple(
            BinnedRecord(age_bin=int(row[10]), gender_bin=int(row[9]),
                         bins=tuple(int(v) for v in row[:9]), label=int(lab))
            for row, lab in zip(X, y)
        )
        return cls(schema or default_schema(), recs, provenance)

    @classmethod
    def concat(cls, parts: Sequence["Dataset"], provenance: str) -> "Dataset":
        if not parts:
            raise InvalidConfig("nothing to concatenate")
        recs: list[Record] = []
        for p in parts:
            recs.extend(p.records)
        return cls(parts[0].schema, tuple(recs), provenance)
