"""
FedAvg rounds and accuracy curves
=================================

All-SVM clients exchange only weights. The round log gives train and
validation accuracy of the global model after each round.
"""

from fedthal.config import RunConfig
from fedthal.metrics import curves_csv
from fedthal.pipeline import run_simulation

result = run_simulation(RunConfig(mode="fedavg", kinds=("svm",), rounds=6))
print(curves_csv(result.round_log))
print("messages received by the coordinator:", result.received_types)

# no shard ever crosses the wire in this mode
assert "shard" not in result.received_types
