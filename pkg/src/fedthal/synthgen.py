"""Synthetic raw CBC cohorts with exact class, sex and age counts.

Non-carriers draw every analyte uniformly inside its (sex-appropriate) normal
range. With probability ``signal_strength`` a carrier instead gets MCV, MCH
and HB below range together; the rest of its analytes stay in range. This is
a test harness for the pipeline, not a model of real haematology.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfig
from .schema import CBC_FEATURES, FeatureSchema, Gender, Label, RawRecord, default_schema

SIGNAL_FEATURES = ("MCV", "MCH", "HB")


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class GenConfig:
    n_total: int = 5066
    n_carrier: int = 2015
    male_fraction: float = 0.53
    adult_fraction: float = 0.54
    signal_strength: float = 0.9
    # depth of below-range draws, as a fraction of the normal-range width
    low_spread: float = 0.5
    decimals: int = 2
    seed: int = 42

    def __post_init__(self):
        if self.n_total < 1:
            raise InvalidConfig("n_total must be positive")
        if not 0 <= self.n_carrier <= self.n_total:
            raise InvalidConfig("need 0 <= n_carrier <= n_total")
        for name in ("male_fraction", "adult_fraction", "signal_strength"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidConfig(f"{name} must lie in [0,1], got {v}")
        if self.low_spread <= 0:
            raise InvalidConfig("low_spread must be positive")
        if self.decimals < 1:
            raise InvalidConfig("decimals must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise InvalidConfig("seed must be a 64-bit unsigned integer")

    @property
    def n_male(self) -> int:
        return round_half_up(self.male_fraction * self.n_total)

    @property
    def n_adult(self) -> int:
        return round_half_up(self.adult_fraction * self.n_total)


def _exact_labels(rng, n, n_pos):
    v = np.zeros(n, dtype=np.int64)
    v[:n_pos] = 1
    return rng.permutation(v)


def generate(cfg: GenConfig = GenConfig(), schema: FeatureSchema = None) -> list[RawRecord]:
    schema = schema or default_schema()
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n_total
    labels = _exact_labels(rng, n, cfg.n_carrier)
    males = _exact_labels(rng, n, cfg.n_male)
    adults = _exact_labels(rng, n, cfg.n_adult)
    ages = np.where(adults == 1, rng.integers(18, 81, size=n), rng.integers(1, 18, size=n))
    flagged = (labels == 1) & (rng.random(n) < cfg.signal_strength)
    u = rng.random((n, len(CBC_FEATURES)))
    depth = rng.uniform(0.05, 1.0, size=(n, len(CBC_FEATURES)))
    step = 10.0 ** -cfg.decimals

    records = []
    for i in range(n):
        gender = Gender(int(males[i]))
        values = {}
        for j, f in enumerate(schema.features):
            lo, hi = f.range_for(gender)
            if flagged[i] and f.name in SIGNAL_FEATURES:
                v = round(lo - depth[i, j] * cfg.low_spread * (hi - lo), cfg.decimals)
                if v >= lo:
                    v = round(lo - step, cfg.decimals)
                v = max(v, step)
            else:
                v = round(lo + u[i, j] * (hi - lo), cfg.decimals)
                v = min(max(v, lo), hi)
            values[f.name] = float(v)
        records.append(RawRecord(age_years=float(ages[i]), gender=gender,
                                 cbc_values=values, label=Label(int(labels[i]))))
    return records
