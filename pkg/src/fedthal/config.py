"""Run configuration and its flat ``key = value`` file format.

Blank lines and ``#`` comments are ignored. Keys are the dataclass field
names (dashes are accepted in place of underscores).
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional, Union

from .errors import InvalidConfig
from .federation.aggregate import LearnerHyper
from .ingest import SplitSpec
from .learners.models import KINDS
from .learners.svm import SvmHyper
from .learners.tree import DtHyper
from .synthgen import GenConfig

MODES = ("paper13", "fedavg")
TRANSPORTS = ("inproc", "tcp")


@dataclass(frozen=True)
class RunConfig:
    # data source: a raw CSV path, or synthetic generation when empty
    input: Optional[str] = None
    rows: int = 5066
    carriers: int = 2015
    male_fraction: float = 0.53
    adult_fraction: float = 0.54
    signal: float = 0.9
    missing: str = "drop"
    train_fraction: float = 0.7
    clients: int = 3
    kinds: tuple[str, ...] = ("dt", "nb", "svm")
    mode: str = "paper13"
    rounds: int = 10
    transport: str = "inproc"
    host: str = "127.0.0.1"
    port: int = 7461
    seed: int = 42
    dt_max_depth: int = 8
    dt_min_leaf: int = 5
    nb_alpha: float = 1.0
    svm_c: float = 1.0
    svm_epochs: int = 50
    svm_gamma: float = 1.0
    svm_encoding: str = "ordinal"
    svm_tol: float = 1e-4
    out: str = "out"
    format: str = "text"

    def __post_init__(self):
        kinds = self.kinds
        if isinstance(kinds, str):
            kinds = tuple(k.strip() for k in kinds.split(",") if k.strip())
            object.__setattr__(self, "kinds", kinds)
        if not kinds or any(k not in KINDS for k in kinds):
            raise InvalidConfig(f"kinds must be drawn from {KINDS}, got {kinds}")
        if self.mode not in MODES:
            raise InvalidConfig(f"mode must be one of {MODES}")
        if self.transport not in TRANSPORTS:
            raise InvalidConfig(f"transport must be one of {TRANSPORTS}")
        if self.clients < 1 or self.rounds < 1:
            raise InvalidConfig("clients and rounds must be positive")
        if self.format not in ("text", "csv"):
            raise InvalidConfig("format must be text or csv")
        object.__setattr__(self, "missing", self.missing.replace("-", "_"))
        # validate the derived objects eagerly
        self.split_spec()
        self.hyper()
        if self.input is None:
            self.gen_config()

    def gen_config(self) -> GenConfig:
        return GenConfig(n_total=self.rows, n_carrier=self.carriers,
                         male_fraction=self.male_fraction, adult_fraction=self.adult_fraction,
                         signal_strength=self.signal, seed=self.seed)

    def split_spec(self) -> SplitSpec:
        return SplitSpec(train_fraction=self.train_fraction, seed=self.seed,
                         client_count=self.clients)

    def hyper(self) -> LearnerHyper:
        try:
            return LearnerHyper(
                dt=DtHyper(max_depth=self.dt_max_depth, min_leaf=self.dt_min_leaf),
                nb_alpha=self.nb_alpha,
                svm=SvmHyper(C=self.svm_c, epochs=self.svm_epochs, seed=self.seed,
                             gamma=self.svm_gamma, encoding=self.svm_encoding,
                             tol=self.svm_tol),
            )
        except ValueError as exc:
            raise InvalidConfig(str(exc)) from exc

    def client_kinds(self) -> list[str]:
        return [self.kinds[i % len(self.kinds)] for i in range(self.clients)]

    def to_text(self, exclude=()) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None or f.name in exclude:
                continue
            if isinstance(v, tuple):
                v = ",".join(v)
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def coerce(key: str, raw: str):
    key = key.strip().replace("-", "_")
    if key not in _FIELD_TYPES:
        raise InvalidConfig(f"unknown config key {key!r}")
    default = getattr(RunConfig(), key)
    raw = raw.strip()
    if key == "input":
        return key, raw or None
    if key == "kinds":
        return key, tuple(k.strip() for k in raw.split(",") if k.strip())
    try:
        if isinstance(default, bool):
            return key, raw.lower() in ("1", "true", "yes")
        if isinstance(default, int):
            return key, int(raw)
        if isinstance(default, float):
            return key, float(raw)
    except ValueError:
        raise InvalidConfig(f"{key}: cannot parse {raw!r}") from None
    return key, raw


def parse_config_text(text: str) -> dict:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfig(f"config line {lineno}: expected key = value")
        k, v = line.split("=", 1)
        key, value = coerce(k, v)
        values[key] = value
    return values


def load_config(path: Union[str, Path], **overrides) -> RunConfig:
    values = parse_config_text(Path(path).read_text(encoding="utf-8"))
    values.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**values)
