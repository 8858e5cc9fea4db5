import json

import numpy as np
import pytest
from helpers import random_binned, random_dataset, random_model

from fedthal.errors import FrameTooLarge, MalformedPayload, UnknownType, VersionMismatch
from fedthal.federation.wire import (
    MAX_PAYLOAD,
    EvalResult,
    GlobalModel,
    GlobalModelMsg,
    LocalModelMsg,
    Register,
    ShardMsg,
    Shutdown,
    decode_payload,
    deserialize_message,
    encode_payload,
    frame_length,
    serialize_message,
)
from fedthal.learners.models import (
    LocalModel,
    load_model,
    model_from_dict,
    model_to_dict,
    save_model,
)


@pytest.mark.parametrize("kind", ["dt", "nb", "svm"])
def test_model_file_round_trip(kind, tmp_path):
    rng = np.random.default_rng(hash(kind) % 1000)
    for i in range(30):
        m = random_model(kind, rng)
        save_model(m, tmp_path / "m.json")
        back = load_model(tmp_path / "m.json")
        X, _ = random_binned(rng, 100)
        assert np.array_equal(m.predict(X), back.predict(X))
        # a second save is byte-identical
        save_model(back, tmp_path / "m2.json")
        assert (tmp_path / "m.json").read_bytes() == (tmp_path / "m2.json").read_bytes()


def test_local_model_meta_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    lm = LocalModel("svm", random_model("svm", rng), "client-2", 37, 0.75)
    save_model(lm, tmp_path / "l.json")
    back = load_model(tmp_path / "l.json")
    assert isinstance(back, LocalModel)
    assert (back.kind, back.client_id, back.train_size, back.train_accuracy) == ("svm", "client-2", 37, 0.75)


def test_model_dict_errors():
    rng = np.random.default_rng(1)
    d = model_to_dict(random_model("nb", rng))
    with pytest.raises(VersionMismatch):
        model_from_dict({**d, "version": 2})
    with pytest.raises(UnknownType):
        model_from_dict({**d, "type": "forest"})
    with pytest.raises(MalformedPayload):
        model_from_dict({"type": "nb", "version": 1})


def _messages(rng):
    svm = random_model("svm", rng)
    return [
        Register("client-0"),
        LocalModelMsg("client-1", LocalModel("dt", random_model("dt", rng), "client-1", 20, 0.9)),
        ShardMsg("client-2", random_dataset(rng, 25)),
        GlobalModelMsg(3, GlobalModel(svm, np.linspace(0, 1, 11) / 5.5, {"mode": "fedavg"}), final=True),
        EvalResult("client-0", {"round": 3, "correct": 10, "n": 12}),
        Shutdown(),
    ]


def test_every_message_round_trips():
    rng = np.random.default_rng(2)
    X, _ = random_binned(rng, 50)
    for msg in _messages(rng):
        frame = serialize_message(msg)
        assert frame_length(frame[:4]) == len(frame) - 4
        back = deserialize_message(frame)
        assert type(back) is type(msg)
        assert serialize_message(back) == frame
        if isinstance(msg, ShardMsg):
            assert back.dataset.records == msg.dataset.records
        if isinstance(msg, GlobalModelMsg):
            assert np.array_equal(back.global_model.predict(X), msg.global_model.predict(X))


def test_payload_has_type_and_version():
    payload = serialize_message(Register("client-0"))[4:]
    d = json.loads(payload)
    assert d["type"] == "register" and d["version"] == 1


def test_error_frames():
    frame = serialize_message(Register("client-0"))
    with pytest.raises(MalformedPayload):
        deserialize_message(frame[:-3])
    with pytest.raises(MalformedPayload):
        frame_length(frame[:2])
    with pytest.raises(FrameTooLarge):
        frame_length((MAX_PAYLOAD + 1).to_bytes(4, "big"))
    with pytest.raises(FrameTooLarge):
        encode_payload(b"x" * (MAX_PAYLOAD + 1))
    with pytest.raises(MalformedPayload):
        decode_payload(b"\xff\xfe not json")
    with pytest.raises(UnknownType):
        decode_payload(b'{"type": "gossip", "version": 1}')
    with pytest.raises(VersionMismatch):
        decode_payload(b'{"type": "register", "version": 2, "client_id": "c"}')
    with pytest.raises(MalformedPayload):
        decode_payload(b'{"type": "register", "version": 1}')


def test_global_model_file(tmp_path):
    rng = np.random.default_rng(4)
    g = GlobalModel(random_model("svm", rng), None, {"mode": "paper13", "round_count": 1})
    g.save(tmp_path / "g.json")
    back = GlobalModel.load(tmp_path / "g.json")
    assert back.dumps() == g.dumps()
    with pytest.raises(UnknownType):
        GlobalModel.from_dict(model_to_dict(g.svm))
