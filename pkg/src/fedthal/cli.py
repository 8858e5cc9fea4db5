"""Command-line entry point: ``fedthal <subcommand> ...``.

Exit status is 0 on success, 1 for usage errors and 2 for pipeline errors
(reported with the failing stage).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import MODES, TRANSPORTS, RunConfig, load_config
from .errors import FedThalError, PipelineError
from .federation.aggregate import LearnerHyper, client_train, evaluate_global
from .federation.transport import DEFAULT_PORT
from .federation.wire import PROTOCOL_VERSION, GlobalModel
from .ingest import (
    MISSING_MODES,
    SplitSpec,
    clean,
    load_raw_csv,
    partition_clients,
    train_val_split,
    write_raw_csv,
)
from .learners.models import KINDS, MODEL_FILE_VERSION, load_model, save_model
from .learners.svm import SvmHyper
from .learners.tree import DtHyper
from .metrics import confusion, load_report_json, render_table, report, save_report_json
from .pipeline import run_simulation, write_outputs
from .preprocess import normalize_dataset, read_binned_csv, write_binned_csv
from .synthgen import GenConfig, generate

log = logging.getLogger("fedthal")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _missing_mode(s: str) -> str:
    s = s.replace("-", "_")
    if s not in MISSING_MODES:
        raise argparse.ArgumentTypeError("choose from drop, neighbor-average")
    return s


def _add_hyper_flags(p):
    p.add_argument("--dt-max-depth", type=int, default=None)
    p.add_argument("--dt-min-leaf", type=int, default=None)
    p.add_argument("--nb-alpha", type=float, default=None)
    p.add_argument("--svm-c", type=float, default=None)
    p.add_argument("--svm-epochs", type=int, default=None)
    p.add_argument("--svm-gamma", type=float, default=None)
    p.add_argument("--svm-encoding", choices=("ordinal", "onehot"), default=None)
    p.add_argument("--svm-tol", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fedthal", description="Federated beta-thalassemia carrier screening.")
    parser.add_argument("--version", action="version",
                        version=f"fedthal protocol v{PROTOCOL_VERSION}, model files v{MODEL_FILE_VERSION}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("gen", help="generate a synthetic raw CBC CSV")
    p.add_argument("--rows", type=int, default=5066)
    p.add_argument("--carriers", type=int, default=2015)
    p.add_argument("--signal", type=float, default=0.9)
    p.add_argument("--male-fraction", type=float, default=0.53)
    p.add_argument("--adult-fraction", type=float, default=0.54)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--output", "-o", required=True)

    p = sub.add_parser("preprocess", help="clean and bin a raw CSV")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--output", "-o", required=True)
    p.add_argument("--missing", type=_missing_mode, default="drop")

    p = sub.add_parser("split", help="train/validation split and client shards")
    p.add_argument("--input", "-i", required=True, help="binned CSV")
    p.add_argument("--train-fraction", type=float, default=0.7)
    p.add_argument("--clients", type=int, default=3)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)

    p = sub.add_parser("train-local", help="train one local model on a binned shard")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--client-id", default="client-0")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--output", "-o", required=True)
    _add_hyper_flags(p)

    p = sub.add_parser("run", help="full federated simulation")
    p.add_argument("--config", help="key = value config file; flags override it")
    p.add_argument("--input", "-i", help="raw CSV (omit to use synthetic data)")
    p.add_argument("--rows", type=int)
    p.add_argument("--carriers", type=int)
    p.add_argument("--signal", type=float)
    p.add_argument("--missing", type=_missing_mode)
    p.add_argument("--train-fraction", type=float)
    p.add_argument("--clients", type=int)
    p.add_argument("--kinds", help="comma-separated, assigned round-robin (dt,nb,svm)")
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--rounds", type=int)
    p.add_argument("--transport", choices=TRANSPORTS)
    p.add_argument("--host")
    p.add_argument("--port", type=int, help=f"coordinator port (default {DEFAULT_PORT}; 0 = any)")
    p.add_argument("--seed", type=int)
    p.add_argument("--format", choices=("text", "csv"))
    p.add_argument("--out", "--report", dest="out")
    _add_hyper_flags(p)

    p = sub.add_parser("eval", help="evaluate a global or local model file on a binned CSV")
    p.add_argument("--model", "-m", required=True)
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--split-tag", choices=("train", "validation"), default="validation")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.add_argument("--out", required=True)

    p = sub.add_parser("report", help="render saved evaluation JSON files as a table")
    p.add_argument("inputs", nargs="+", help="eval JSON files written by 'eval' or 'run'")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.add_argument("--output", "-o")
    return parser


def _hyper(args, seed: int) -> LearnerHyper:
    d = RunConfig()
    pick = lambda name: getattr(args, name) if getattr(args, name) is not None else getattr(d, name)
    return LearnerHyper(
        dt=DtHyper(max_depth=pick("dt_max_depth"), min_leaf=pick("dt_min_leaf")),
        nb_alpha=pick("nb_alpha"),
        svm=SvmHyper(C=pick("svm_c"), epochs=pick("svm_epochs"), gamma=pick("svm_gamma"),
                     encoding=pick("svm_encoding"), tol=pick("svm_tol"), seed=seed),
    )


def cmd_gen(args):
    cfg = GenConfig(n_total=args.rows, n_carrier=args.carriers, signal_strength=args.signal,
                    male_fraction=args.male_fraction, adult_fraction=args.adult_fraction,
                    seed=args.seed)
    records = generate(cfg)
    write_raw_csv(records, args.output)
    print(f"wrote {len(records)} rows ({cfg.n_carrier} carriers) to {args.output}")


def cmd_preprocess(args):
    raw, loaded = load_raw_csv(args.input)
    kept, rep = clean(raw, args.missing, loaded.columns_dropped)
    data = normalize_dataset(kept, provenance=args.input)
    write_binned_csv(data, args.output)
    dropped = ", ".join(rep.columns_dropped) or "none"
    print(f"read {rep.rows_read} rows, dropped {rep.rows_dropped_missing} incomplete, "
          f"kept {rep.rows_kept}; columns dropped: {dropped}")


def cmd_split(args):
    data = read_binned_csv(args.input)
    spec = SplitSpec(train_fraction=args.train_fraction, seed=args.seed, client_count=args.clients)
    train, val = train_val_split(data, spec)
    shards = partition_clients(train, spec.client_count, spec.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_binned_csv(train, out / "train.csv")
    write_binned_csv(val, out / "val.csv")
    for i, shard in enumerate(shards):
        write_binned_csv(shard, out / f"client_{i}.csv")
    print(f"train {len(train)}, validation {len(val)}, shards {[len(s) for s in shards]}")


def cmd_train_local(args):
    data = read_binned_csv(args.input)
    local = client_train(args.client_id, data, args.kind, _hyper(args, args.seed))
    save_model(local, args.output)
    print(f"{args.kind} on {local.train_size} rows: train accuracy {100 * local.train_accuracy:.2f}%")


def cmd_run(args):
    overrides = {k: getattr(args, k) for k in (
        "input", "rows", "carriers", "signal", "missing", "train_fraction", "clients", "kinds",
        "mode", "rounds", "transport", "host", "port", "seed", "format", "out", "dt_max_depth",
        "dt_min_leaf", "nb_alpha", "svm_c", "svm_epochs", "svm_gamma", "svm_encoding", "svm_tol")}
    if overrides["kinds"] is not None:
        overrides["kinds"] = tuple(k.strip() for k in overrides["kinds"].split(",") if k.strip())
    if args.config:
        config = load_config(args.config, **overrides)
    else:
        config = RunConfig(**{k: v for k, v in overrides.items() if v is not None})
    result = run_simulation(config)
    out = write_outputs(result, config)
    r = result.eval_report
    print(f"global validation accuracy {r.accuracy_pct:.2f}%, miss rate {r.miss_rate_pct:.2f}% "
          f"(n={r.n}); outputs in {out}")


def cmd_eval(args):
    path = Path(args.model)
    kind = json.loads(path.read_text(encoding="utf-8")).get("type")
    model = GlobalModel.load(path) if kind == "global" else load_model(path)
    name = "Global Model" if kind == "global" else f"Local {kind}"
    data = read_binned_csv(args.input)
    if isinstance(model, GlobalModel):
        r = evaluate_global(model, data, args.split_tag)
    else:
        r = report(confusion(model.predict(data.X), data.y), args.split_tag)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_report_json(r, out / f"eval_{args.split_tag}.json")
    suffix = "csv" if args.format == "csv" else "txt"
    text = render_table([(name, r)], args.format, detail=r)
    (out / f"report.{suffix}").write_text(text, encoding="utf-8")
    print(text, end="")


def cmd_report(args):
    rows = [(Path(p).stem, load_report_json(p)) for p in args.inputs]
    text = render_table(rows, args.format, detail=rows[0][1] if len(rows) == 1 else None)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    print(text, end="")


COMMANDS = {
    "gen": ("generate", cmd_gen),
    "preprocess": ("preprocess", cmd_preprocess),
    "split": ("split", cmd_split),
    "train-local": ("train-local", cmd_train_local),
    "run": (None, cmd_run),
    "eval": ("evaluate", cmd_eval),
    "report": ("report", cmd_report),
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command is None:
        parser.print_usage(sys.stderr)
        print("fedthal: error: a subcommand is required", file=sys.stderr)
        return 1
    stage, fn = COMMANDS[args.command]
    try:
        fn(args)
    except PipelineError as exc:
        print(f"fedthal: pipeline error [{exc.stage}]: {exc.cause}", file=sys.stderr)
        return 2
    except (FedThalError, FileNotFoundError, OSError, ValueError) as exc:
        print(f"fedthal: pipeline error [{stage or args.command}]: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
