"""End-to-end runs: data -> clean -> bin -> split -> federate -> evaluate."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from .config import RunConfig
from .errors import FedThalError, PipelineError
from .federation.aggregate import AggregationReport, evaluate_global
from .federation.simulation import federate
from .federation.wire import GlobalModel
from .ingest import CleaningReport, clean, load_raw_csv, partition_clients, train_val_split
from .learners.models import LocalModel, save_model
from .metrics import EvalReport, RoundLog, confusion, emit_curves, render_table, report, save_report_json
from .preprocess import normalize_dataset
from .schema import Dataset, default_schema
from .synthgen import generate

log = logging.getLogger(__name__)


@dataclass
class SimulationResult:
    global_model: GlobalModel
    eval_report: EvalReport
    round_log: RoundLog
    train_report: EvalReport
    local_models: list[LocalModel]
    local_reports: list[EvalReport]
    aggregation: Optional[AggregationReport]
    cleaning: CleaningReport
    split_sizes: tuple[int, int]
    shard_sizes: list[int]
    sent_types: dict = field(default_factory=dict)
    received_types: dict = field(default_factory=dict)


class _Stage:
    def __init__(self, name):
        self.name = name

    def __enter__(self):
        log.debug("stage %s", self.name)

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and isinstance(exc, (FedThalError, OSError)) \
                and not isinstance(exc, PipelineError):
            raise PipelineError(self.name, exc) from exc
        return False


def load_dataset(config: RunConfig):
    """Raw records from file or generator, cleaned and binned."""
    schema = default_schema()
    with _Stage("ingest"):
        if config.input:
            raw, load_report = load_raw_csv(config.input, schema)
            dropped_cols = load_report.columns_dropped
            provenance = f"file:{Path(config.input).name}"
        else:
            raw = generate(config.gen_config(), schema)
            dropped_cols = ()
            provenance = f"synth(seed={config.seed})"
    with _Stage("clean"):
        kept, cleaning = clean(raw, config.missing, dropped_cols)
    with _Stage("normalize"):
        data = normalize_dataset(kept, schema, provenance)
    return data, cleaning


def run_simulation(config: RunConfig) -> SimulationResult:
    data, cleaning = load_dataset(config)
    with _Stage("split"):
        train, val = train_val_split(data, config.split_spec())
        shards = partition_clients(train, config.clients, config.seed)
    kinds = config.client_kinds()
    with _Stage("federation"):
        res = federate(shards, kinds, val, mode=config.mode,
                       rounds=config.rounds if config.mode == "fedavg" else 1,
                       hyper=config.hyper(), transport=config.transport,
                       host=config.host, port=config.port)
    with _Stage("evaluate"):
        val_report = evaluate_global(res.global_model, val, "validation")
        train_report = evaluate_global(res.global_model, train, "train")
        local_reports = [report(confusion(lm.predict(val.X), val.y), "validation")
                         for lm in res.local_models]
    return SimulationResult(
        global_model=res.global_model, eval_report=val_report, round_log=res.round_log,
        train_report=train_report, local_models=res.local_models, local_reports=local_reports,
        aggregation=res.aggregation, cleaning=cleaning, split_sizes=(len(train), len(val)),
        shard_sizes=[len(s) for s in shards], sent_types=res.sent_types,
        received_types=res.received_types,
    )


def report_rows(result: SimulationResult):
    rows = [("Global Model (validation)", result.eval_report),
            ("Global Model (train)", result.train_report)]
    for lm, r in zip(result.local_models, result.local_reports):
        rows.append((f"Local {lm.kind} {lm.client_id} (validation)", r))
    return rows


def report_notes(result: SimulationResult) -> list[str]:
    notes = [f"train/validation rows: {result.split_sizes[0]}/{result.split_sizes[1]}; "
             f"client shards: {result.shard_sizes}",
             f"cleaning: read {result.cleaning.rows_read}, dropped {result.cleaning.rows_dropped_missing}"]
    for lm in result.local_models:
        notes.append(f"{lm.client_id} ({lm.kind}) local train accuracy {100 * lm.train_accuracy:.2f}% "
                     f"on {lm.train_size} rows")
    imp = result.global_model.mean_feature_importances
    if imp is not None:
        names = default_schema().vector_names
        ranked = sorted(zip(names, imp.tolist()), key=lambda t: (-t[1], t[0]))
        notes.append("mean DT feature importances: " +
                     ", ".join(f"{n}={v:.4f}" for n, v in ranked if v > 0))
    if result.aggregation is not None:
        notes.extend(result.aggregation.warnings)
    return notes


def write_outputs(result: SimulationResult, config: RunConfig, out: Union[str, Path, None] = None) -> Path:
    out = Path(out or config.out)
    out.mkdir(parents=True, exist_ok=True)
    # the output location is left out so reruns elsewhere compare byte-identical
    (out / "config.txt").write_text(config.to_text(exclude=("out",)), encoding="utf-8")
    result.global_model.save(out / "global_model.json")
    local_dir = out / "local_models"
    local_dir.mkdir(exist_ok=True)
    for lm in result.local_models:
        save_model(lm, local_dir / f"{lm.client_id}_{lm.kind}.json")
    save_report_json(result.eval_report, out / "eval_validation.json")
    save_report_json(result.train_report, out / "eval_train.json")
    emit_curves(result.round_log, out / "curves.csv")
    text = render_table(report_rows(result), config.format, detail=result.eval_report,
                        notes=report_notes(result))
    suffix = "csv" if config.format == "csv" else "txt"
    (out / f"report.{suffix}").write_text(text, encoding="utf-8")
    return out
