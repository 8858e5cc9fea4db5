"""Client/coordinator protocol, aggregation schemes and transports."""
from .wire import (
    MAX_PAYLOAD,
    PROTOCOL_VERSION,
    EvalResult,
    GlobalModel,
    GlobalModelMsg,
    LocalModelMsg,
    Register,
    ShardMsg,
    Shutdown,
    deserialize_message,
    serialize_message,
)
from .aggregate import (
    AggregationReport,
    LearnerHyper,
    aggregate_paper13,
    client_train,
    evaluate_global,
    fedavg_aggregate,
)
from .transport import DEFAULT_PORT
from .simulation import Client, Coordinator, federate, fedavg_rounds

__all__ = [
    "MAX_PAYLOAD", "PROTOCOL_VERSION", "DEFAULT_PORT", "AggregationReport", "Client", "Coordinator",
    "EvalResult", "GlobalModel", "GlobalModelMsg", "LearnerHyper", "LocalModelMsg", "Register",
    "ShardMsg", "Shutdown", "aggregate_paper13", "client_train", "deserialize_message",
    "evaluate_global", "fedavg_aggregate", "fedavg_rounds", "federate", "serialize_message",
]
