import pytest
from hypothesis import given, strategies as st

from fedthal.errors import InvalidConfig
from fedthal.schema import (
    BinnedRecord,
    Dataset,
    FeatureDef,
    FeatureSchema,
    default_schema,
    feature_vector,
)


def test_table_ranges():
    s = default_schema()
    assert s.MCV.range == (80, 100)
    assert s.HB.range_female == (12, 15)
    assert s.HB.range_male == (13, 17)
    assert s.HCT.range_male == (45, 50)
    assert s.HCT.range_female == (30, 45)
    assert s.RBC.range == (4, 5)
    assert s.MCH.range == (27, 34)
    assert s.MCHC.range == (32, 36)
    assert s.RDW.range == (11, 15)
    assert s.PLT.range == (150, 350)
    assert s.WBC.range == (4, 10)


def test_only_hb_and_hct_are_sex_specific():
    s = default_schema()
    specific = {f.name for f in s.features if f.range_male != f.range_female}
    assert specific == {"HB", "HCT"}


def test_feature_order():
    s = default_schema()
    assert s.index("RBC") == 0
    assert s.index("WBC") == 8
    assert s.vector_names[9:] == ("gender", "age")


def test_schema_file_round_trip(tmp_path):
    s = default_schema()
    s.save(tmp_path / "schema.csv")
    back = FeatureSchema.load(tmp_path / "schema.csv")
    assert back == s
    for a, b in zip(s.features, back.features):
        assert a.range_male == b.range_male and a.range_female == b.range_female


def test_invalid_range_rejected():
    with pytest.raises(InvalidConfig):
        FeatureDef("X", "u", (5.0, 5.0), (1.0, 2.0))
    with pytest.raises(InvalidConfig):
        FeatureDef("X", "", (1.0, 2.0), (1.0, 2.0))


def test_feature_vector_examples():
    zero = BinnedRecord(0, 0, (0,) * 9, 0)
    assert feature_vector(zero) == (0,) * 11
    r = BinnedRecord(age_bin=0, gender_bin=1, bins=(3,) * 9, label=1)
    assert feature_vector(r) == (3, 3, 3, 3, 3, 3, 3, 3, 3, 1, 0)
    assert feature_vector(r) == feature_vector(BinnedRecord(0, 1, (3,) * 9, 1))


def test_binned_record_validation():
    with pytest.raises(InvalidConfig):
        BinnedRecord(0, 0, (6,) + (0,) * 8, 0)
    with pytest.raises(InvalidConfig):
        BinnedRecord(2, 0, (0,) * 9, 0)


records = st.builds(
    BinnedRecord,
    age_bin=st.integers(0, 1),
    gender_bin=st.integers(0, 1),
    bins=st.tuples(*[st.integers(0, 5)] * 9),
    label=st.integers(0, 1),
)


@given(records, records)
def test_feature_vector_injective(a, b):
    same_fields = (a.age_bin, a.gender_bin, a.bins) == (b.age_bin, b.gender_bin, b.bins)
    assert (feature_vector(a) == feature_vector(b)) == same_fields


def test_dataset_arrays_round_trip():
    recs = (BinnedRecord(1, 0, tuple(range(6)) + (1, 2, 3), 1), BinnedRecord(0, 1, (0,) * 9, 0))
    ds = Dataset(default_schema(), recs, "t")
    back = Dataset.from_arrays(ds.X, ds.y)
    assert back.records == ds.records
