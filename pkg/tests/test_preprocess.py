import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fedthal.errors import InvalidRange, NegativeAge, NonFiniteValue
from fedthal.preprocess import (
    bin_value,
    bin_values,
    binarize_age,
    binarize_gender,
    normalize_dataset,
    read_binned_csv,
    reconstruct_midpoints,
    write_binned_csv,
)
from fedthal.schema import CBC_FEATURES, Gender, Label, RawRecord, default_schema


def reference_bin(v, lo, hi):
    """Independent rule: compare 4*(v-lo) with k*(hi-lo) on exact integer ratios."""
    vn, vd = float(v).as_integer_ratio()
    ln, ld = float(lo).as_integer_ratio()
    hn, hd = float(hi).as_integer_ratio()
    # everything scaled to the common denominator vd*ld*hd
    V, L, H = vn * ld * hd, ln * vd * hd, hn * vd * ld
    if V < L:
        return 0
    if V > H:
        return 5
    for k in (3, 2, 1):
        if 4 * (V - L) >= k * (H - L):
            return k + 1
    return 1


@pytest.mark.parametrize("v,lo,hi,expected", [
    (12.0, 13, 17, 0),
    (18.0, 13, 17, 5),
    (14.5, 13, 17, 2),
    (17.0, 13, 17, 4),
    (13.0, 13, 17, 1),
    (14.0, 13, 17, 2),
    (16.999, 13, 17, 4),
])
def test_bin_examples(v, lo, hi, expected):
    assert bin_value(v, lo, hi) == expected
    assert reference_bin(v, lo, hi) == expected


def test_bin_errors():
    with pytest.raises(InvalidRange):
        bin_value(1.0, 5, 5)
    with pytest.raises(InvalidRange):
        bin_value(1.0, 6, 5)
    with pytest.raises(NonFiniteValue):
        bin_value(math.nan, 1, 2)
    with pytest.raises(NonFiniteValue):
        bin_values([1.0, math.inf], 1, 2)


finite = st.floats(-1e6, 1e6, allow_nan=False)


@given(finite, finite, st.floats(1e-3, 1e4))
def test_bin_matches_reference(v, lo, width):
    hi = lo + width
    if not lo < hi:
        return
    assert bin_value(v, lo, hi) == reference_bin(v, lo, hi)


@given(st.lists(finite, min_size=2, max_size=40), finite, st.floats(1e-3, 1e4))
def test_bin_monotone_and_bounded(vals, lo, width):
    hi = lo + width
    if not lo < hi:
        return
    vals = sorted(vals)
    bins = [bin_value(v, lo, hi) for v in vals]
    assert all(0 <= b <= 5 for b in bins)
    assert bins == sorted(bins)
    for v, b in zip(vals, bins):
        assert (lo <= v <= hi) == (b in (1, 2, 3, 4))
    assert list(bin_values(vals, lo, hi)) == bins


def test_quarter_boundaries_exact():
    # every interior quarter start belongs to the upper bin
    for lo, hi in [(13, 17), (150, 350), (27, 34), (4, 5)]:
        w = (hi - lo) / 4
        for k in range(1, 4):
            edge = lo + k * w
            assert bin_value(edge, lo, hi) == reference_bin(edge, lo, hi)
            assert bin_value(np.nextafter(edge, -np.inf), lo, hi) == reference_bin(
                np.nextafter(edge, -np.inf), lo, hi)


def test_age_and_gender():
    assert binarize_age(17) == 0
    assert binarize_age(40) == 1
    assert binarize_age(18) == 1
    assert binarize_age(0) == 0
    with pytest.raises(NegativeAge):
        binarize_age(-1)
    assert binarize_gender(Gender.FEMALE) == 0
    assert binarize_gender(Gender.MALE) == 1


def _record(gender, label=1, **vals):
    base = {n: default_schema()[n].range_for(gender)[0] for n in CBC_FEATURES}
    base.update(vals)
    return RawRecord(30.0, gender, base, Label(label))


def test_sex_specific_hb():
    s = default_schema()
    male = normalize_dataset([_record(Gender.MALE, HB=14.5)], s).records[0]
    female = normalize_dataset([_record(Gender.FEMALE, HB=14.5)], s).records[0]
    assert male.bins[1] == 2  # against (13, 17)
    assert female.bins[1] == 4  # against (12, 15)


def test_all_below_range():
    s = default_schema()
    vals = {n: s[n].range_for(Gender.MALE)[0] - 0.5 for n in CBC_FEATURES}
    rec = normalize_dataset([RawRecord(10.0, Gender.MALE, vals, Label(0))], s).records[0]
    assert rec.bins == (0,) * 9
    assert rec.age_bin == 0 and rec.gender_bin == 1


def test_midpoint_rebinning_is_stable(small_binned):
    s = default_schema()
    for rec in small_binned.records[:200]:
        g = Gender(rec.gender_bin)
        mids = reconstruct_midpoints(rec, s, g)
        again = normalize_dataset([RawRecord(40.0 if rec.age_bin else 5.0, g, mids, Label(rec.label))], s)
        assert again.records[0].bins == rec.bins


def test_normalize_preserves_counts(default_raw):
    ds = normalize_dataset(default_raw)
    assert len(ds) == len(default_raw)
    assert int(ds.y.sum()) == sum(int(r.label) for r in default_raw)
    assert ds.X[:, :9].min() >= 0 and ds.X[:, :9].max() <= 5


def test_binned_csv_round_trip(tmp_path, small_binned):
    write_binned_csv(small_binned, tmp_path / "b.csv")
    header = (tmp_path / "b.csv").read_text().splitlines()[0]
    assert header == "rbc,hb,hct,mcv,mch,mchc,rdw,plt,wbc,gender,age,class"
    back = read_binned_csv(tmp_path / "b.csv")
    assert back.records == small_binned.records
