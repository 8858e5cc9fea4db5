"""
Running the federation over loopback TCP
========================================

The same run over real sockets produces the same global model bytes as the
in-process transport.
"""

from fedthal.config import RunConfig
from fedthal.pipeline import run_simulation

inproc = run_simulation(RunConfig(transport="inproc"))
tcp = run_simulation(RunConfig(transport="tcp", port=0))
print("inproc accuracy", round(inproc.eval_report.accuracy_pct, 2))
print("tcp accuracy   ", round(tcp.eval_report.accuracy_pct, 2))
print("identical global model:", inproc.global_model.dumps() == tcp.global_model.dumps())
