"""
Three local learners on one client shard
========================================

A synthetic cohort is binned, split 70/30, and the first of three client
shards trains a decision tree, a naive Bayes model and a linear SVM.
"""

import numpy as np

from fedthal.federation.aggregate import client_train
from fedthal.ingest import SplitSpec, partition_clients, train_val_split
from fedthal.preprocess import normalize_dataset
from fedthal.synthgen import GenConfig, generate

data = normalize_dataset(generate(GenConfig(seed=42)))
train, val = train_val_split(data, SplitSpec(0.7, 42, 3))
shard = partition_clients(train, 3, 42)[0]
print(f"{len(data)} rows, train {len(train)}, validation {len(val)}, shard {len(shard)}")

for kind in ("dt", "nb", "svm"):
    local = client_train("client-0", shard, kind)
    acc = np.mean(local.predict(val.X) == val.y)
    print(f"{kind:3s} train {local.train_accuracy:.4f}  validation {acc:.4f}")

# the tree's information-gain importances point at the planted carrier signal
tree = client_train("client-0", shard, "dt").model
names = data.schema.vector_names
top = np.argsort(tree.feature_importances)[::-1][:3]
print("top tree features:", [(names[i], round(float(tree.feature_importances[i]), 3)) for i in top])
