"""
Binning CBC values into ordinal levels
======================================

Every blood count analyte is mapped to an integer 0-5 against its normal
range: 0 below, 5 above, 1-4 for the four quarters of the range.
"""

import numpy as np

from fedthal.preprocess import bin_values
from fedthal.schema import Gender, default_schema

schema = default_schema()
for f in schema.features:
    print(f"{f.name:5s} male {f.range_male}  female {f.range_female}")

# a sweep across the male haemoglobin range (13-17 g/dl)
hb = np.array([12.0, 13.0, 13.99, 14.0, 14.5, 15.0, 16.0, 17.0, 17.01, 18.0])
print(dict(zip(hb.tolist(), bin_values(hb, *schema.HB.range_for(Gender.MALE)).tolist())))

# the same reading lands in a different bin for a female patient (12-15 g/dl)
print("HB 14.5 male:", bin_values([14.5], *schema.HB.range_male)[0],
      "female:", bin_values([14.5], *schema.HB.range_female)[0])
