"""Federated beta-thalassemia carrier screening: binning, local learners and aggregation."""
from .schema import (
    BinnedRecord,
    Dataset,
    FeatureDef,
    FeatureSchema,
    Gender,
    Label,
    RawRecord,
    default_schema,
    feature_vector,
)

__version__ = "0.1.0"
