"""Coordinator/client state machines and the end-to-end pipeline."""
from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from ..errors import FedThalError, HeterogeneousModels, InvalidConfig
from ..learners.models import LocalModel
from ..learners.svm import SvmHyper, fit_svm
from ..metrics import RoundLog
from ..schema import Dataset
from .aggregate import (
    AggregationReport,
    LearnerHyper,
    aggregate_paper13,
    client_train,
    fedavg_aggregate,
    strip_support,
    zero_global,
)
from .transport import Channel, ChannelClosed, TcpListener, inproc_pair, tcp_connect
from .wire import (
    EvalResult,
    GlobalModel,
    GlobalModelMsg,
    LocalModelMsg,
    Register,
    ShardMsg,
    Shutdown,
)

log = logging.getLogger(__name__)

FEDAVG_FORBIDDEN = ("shard",)


def client_id_for(i: int) -> str:
    return f"client-{i}"


def client_seed(seed: int, index: int) -> int:
    return (int(seed) * 1_000_003 + 7919 * (index + 1)) % 2**32


class Client:
    """One data-holding party. Runs :meth:`run` on its own thread."""

    def __init__(self, client_id: str, shard: Dataset, kind: str, hyper: LearnerHyper, mode: str):
        self.client_id = client_id
        self.shard = shard
        self.kind = kind
        self.hyper = hyper
        self.mode = mode
        self.error: Optional[BaseException] = None
        self._alpha = None

    def _fedavg_update(self) -> LocalModel:
        try:
            model, self._alpha = fit_svm(self.shard.X, self.shard.y, self.hyper.svm,
                                         init_alpha=self._alpha, return_alpha=True)
        except FedThalError as exc:
            raise type(exc)(f"client {self.client_id}: {exc}") from exc
        acc = float(np.mean(model.predict(self.shard.X) == self.shard.y))
        return LocalModel("svm", strip_support(model), self.client_id, len(self.shard), acc)

    def run(self, channel: Channel) -> None:
        try:
            channel.send(Register(self.client_id))
            if self.mode == "paper13":
                local = client_train(self.client_id, self.shard, self.kind, self.hyper)
                channel.send(LocalModelMsg(self.client_id, local))
                channel.send(ShardMsg(self.client_id, self.shard))
            while True:
                msg = channel.recv()
                if isinstance(msg, Shutdown):
                    break
                if not isinstance(msg, GlobalModelMsg):
                    raise InvalidConfig(f"client got unexpected {type(msg).__name__}")
                if msg.round >= 1:
                    correct = int(np.sum(msg.global_model.predict(self.shard.X) == self.shard.y))
                    channel.send(EvalResult(self.client_id, {"round": msg.round, "correct": correct,
                                                             "n": len(self.shard)}))
                if self.mode == "fedavg" and not msg.final:
                    channel.send(LocalModelMsg(self.client_id, self._fedavg_update()))
        except BaseException as exc:  # reported to the coordinator through .error
            self.error = exc
        finally:
            channel.close()


@dataclass
class CoordinatorResult:
    global_model: GlobalModel
    round_log: RoundLog
    local_models: list[LocalModel]
    aggregation: Optional[AggregationReport]
    sent_types: dict
    received_types: dict


class Coordinator:
    """Sequential register -> collect -> aggregate -> broadcast -> evaluate loop."""

    def __init__(self, client_ids: Sequence[str], mode: str, hyper: SvmHyper, val: Dataset,
                 rounds: int = 1):
        self.client_ids = list(client_ids)
        self.mode = mode
        self.hyper = hyper
        self.val = val
        self.rounds = rounds
        self.channels: dict[str, Channel] = {}

    def register(self, channels: Sequence[Channel]) -> None:
        for ch in channels:
            msg = ch.recv()
            if not isinstance(msg, Register):
                raise InvalidConfig(f"expected Register, got {type(msg).__name__}")
            if msg.client_id not in self.client_ids or msg.client_id in self.channels:
                raise InvalidConfig(f"unexpected client id {msg.client_id!r}")
            self.channels[msg.client_id] = ch

    def _broadcast(self, msg) -> None:
        for cid in self.client_ids:
            self.channels[cid].send(msg)

    def _collect(self, expected_type) -> list:
        out = []
        for cid in self.client_ids:
            msg = self.channels[cid].recv()
            if not isinstance(msg, expected_type):
                raise InvalidConfig(f"{cid}: expected {expected_type.__name__}, got {type(msg).__name__}")
            if msg.client_id != cid:
                raise InvalidConfig(f"message from {cid} claims to be {msg.client_id}")
            out.append(msg)
        return out

    def _train_accuracy(self, round_index: int) -> float:
        evals = self._collect(EvalResult)
        if any(int(e.metrics["round"]) != round_index for e in evals):
            raise InvalidConfig("evaluation results out of step with the round counter")
        return sum(int(e.metrics["correct"]) for e in evals) / sum(int(e.metrics["n"]) for e in evals)

    def _val_accuracy(self, g: GlobalModel) -> float:
        return float(np.mean(g.predict(self.val.X) == self.val.y))

    def run(self) -> CoordinatorResult:
        if len(self.channels) != len(self.client_ids):
            raise InvalidConfig("not every client has registered")
        round_log = RoundLog()
        agg = None
        if self.mode == "paper13":
            locals_ = [m.local_model for m in self._collect(LocalModelMsg)]
            shards = [m.dataset for m in self._collect(ShardMsg)]
            g, agg = aggregate_paper13(locals_, shards, self.hyper)
            self._broadcast(GlobalModelMsg(1, g, final=True))
            round_log.append(self._train_accuracy(1), self._val_accuracy(g))
        else:
            g = zero_global(self.hyper, self.val.X.shape[1])
            self._broadcast(GlobalModelMsg(0, g, final=False))
            locals_ = []
            for r in range(1, self.rounds + 1):
                locals_ = [m.local_model for m in self._collect(LocalModelMsg)]
                g = fedavg_aggregate(locals_, r)
                self._broadcast(GlobalModelMsg(r, g, final=(r == self.rounds)))
                round_log.append(self._train_accuracy(r), self._val_accuracy(g))
        self._broadcast(Shutdown())
        sent, received = {}, {}
        for ch in self.channels.values():
            for k, v in ch.sent.items():
                sent[k] = sent.get(k, 0) + v
            for k, v in ch.received.items():
                received[k] = received.get(k, 0) + v
        return CoordinatorResult(g, round_log, locals_, agg, sent, received)


def _raise_client_error(clients) -> None:
    errors = [c.error for c in clients if c.error is not None]
    # a client's own failure beats the channel errors it causes elsewhere
    errors.sort(key=lambda e: isinstance(e, (ChannelClosed, OSError)))
    if errors:
        raise errors[0]


def federate(shards: Sequence[Dataset], kinds: Sequence[str], val: Dataset, mode: str = "paper13",
             rounds: int = 1, hyper: LearnerHyper = LearnerHyper(), transport: str = "inproc",
             host: str = "127.0.0.1", port: int = 0, timeout: float = 60.0) -> CoordinatorResult:
    """Run one federation over ``shards`` with clients on threads."""
    if len(kinds) != len(shards):
        raise InvalidConfig("one model kind per shard is required")
    if mode == "fedavg" and any(k != "svm" for k in kinds):
        raise HeterogeneousModels(f"FedAvg needs all-SVM clients, got kinds {list(kinds)}")
    if mode not in ("paper13", "fedavg"):
        raise InvalidConfig(f"unknown mode {mode!r}")
    forbidden = FEDAVG_FORBIDDEN if mode == "fedavg" else ()
    ids = [client_id_for(i) for i in range(len(shards))]
    clients = [
        Client(cid, shard, kind,
               replace(hyper, svm=replace(hyper.svm, seed=client_seed(hyper.svm.seed, i))), mode)
        for i, (cid, shard, kind) in enumerate(zip(ids, shards, kinds))
    ]
    coord = Coordinator(ids, mode, hyper.svm, val, rounds)

    threads = []
    listener = None
    try:
        if transport == "inproc":
            coord_ends = []
            for c in clients:
                mine, theirs = inproc_pair(forbidden, timeout)
                coord_ends.append(mine)
                threads.append(threading.Thread(target=c.run, args=(theirs,), daemon=True))
        elif transport == "tcp":
            listener = TcpListener(host, port, timeout)
            bound = listener.port

            def connect_and_run(client):
                try:
                    ch = tcp_connect(host, bound, forbidden, timeout)
                except OSError as exc:
                    client.error = exc
                    return
                client.run(ch)

            threads = [threading.Thread(target=connect_and_run, args=(c,), daemon=True) for c in clients]
            coord_ends = None
        else:
            raise InvalidConfig(f"unknown transport {transport!r}")

        for t in threads:
            t.start()
        if coord_ends is None:
            coord_ends = [listener.accept(forbidden) for _ in clients]
        try:
            coord.register(coord_ends)
            result = coord.run()
        except (ChannelClosed, OSError):
            # unblock the healthy clients before waiting for them
            for ch in coord_ends:
                ch.close()
            for t in threads:
                t.join(timeout)
            _raise_client_error(clients)
            raise
        finally:
            for ch in coord_ends:
                ch.close()
        for t in threads:
            t.join(timeout)
        _raise_client_error(clients)
        return result
    finally:
        if listener is not None:
            listener.close()


def fedavg_rounds(shards: Sequence[Dataset], val: Dataset, rounds: int,
                  hyper: LearnerHyper = LearnerHyper(), transport: str = "inproc"):
    """FedAvg over all-SVM clients; returns ``(GlobalModel, RoundLog)``."""
    res = federate(shards, ["svm"] * len(shards), val, mode="fedavg", rounds=rounds, hyper=hyper,
                   transport=transport)
    return res.global_model, res.round_log
