"""Confusion matrices, accuracy / miss-rate reports and curve export.

The positive class is carrier (label 1). Miss rate is the percentage of
misclassified rows, so accuracy + miss rate is always 100.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .errors import EmptyDataset, InvalidConfig, LengthMismatch

SPLIT_TAGS = ("train", "validation")


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise InvalidConfig("confusion counts must be non-negative")

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def correct(self) -> int:
        return self.tp + self.tn

    @property
    def errors(self) -> int:
        return self.fp + self.fn

    def render(self) -> str:
        return (
            "                 predicted 0  predicted 1\n"
            f"actual 0 (non)   {self.tn:>11d}  {self.fp:>11d}\n"
            f"actual 1 (car)   {self.fn:>11d}  {self.tp:>11d}\n"
            f"misclassified: {self.fp} non-carrier, {self.fn} carrier\n"
        )


def confusion(preds: Sequence[int], labels: Sequence[int]) -> ConfusionMatrix:
    p = np.asarray(preds, dtype=np.int64).ravel()
    t = np.asarray(labels, dtype=np.int64).ravel()
    if p.shape != t.shape:
        raise LengthMismatch(f"{p.size} predictions vs {t.size} labels")
    if p.size == 0:
        raise EmptyDataset("no predictions to evaluate")
    return ConfusionMatrix(
        tp=int(np.sum((p == 1) & (t == 1))),
        fp=int(np.sum((p == 1) & (t == 0))),
        tn=int(np.sum((p == 0) & (t == 0))),
        fn=int(np.sum((p == 0) & (t == 1))),
    )


@dataclass(frozen=True)
class EvalReport:
    confusion: ConfusionMatrix
    accuracy_pct: float
    miss_rate_pct: float
    sensitivity_pct: Optional[float]
    specificity_pct: Optional[float]
    n: int
    split_tag: str = "validation"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        d = dict(d)
        d["confusion"] = ConfusionMatrix(**d["confusion"])
        return cls(**d)


def report(cm: ConfusionMatrix, split_tag: str = "validation") -> EvalReport:
    if split_tag not in SPLIT_TAGS:
        raise InvalidConfig(f"split_tag must be one of {SPLIT_TAGS}")
    if cm.n < 1:
        raise EmptyDataset("empty confusion matrix")
    acc = 100.0 * cm.correct / cm.n
    pos = cm.tp + cm.fn
    neg = cm.tn + cm.fp
    return EvalReport(
        confusion=cm,
        accuracy_pct=acc,
        miss_rate_pct=100.0 - acc,
        sensitivity_pct=100.0 * cm.tp / pos if pos else None,
        specificity_pct=100.0 * cm.tn / neg if neg else None,
        n=cm.n,
        split_tag=split_tag,
    )


@dataclass(frozen=True)
class RoundEntry:
    round_index: int
    train_accuracy: float
    val_accuracy: float


@dataclass
class RoundLog:
    """Per-round global accuracies, as fractions in [0, 1]."""

    entries: list[RoundEntry] = field(default_factory=list)

    def append(self, train_accuracy: float, val_accuracy: float) -> None:
        self.entries.append(RoundEntry(len(self.entries) + 1, float(train_accuracy),
                                       float(val_accuracy)))

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


def curves_csv(log: RoundLog) -> str:
    if not len(log):
        raise InvalidConfig("round log is empty")
    buf = io.StringIO()
    buf.write("round,train_acc,val_acc\n")
    last = 0
    for e in log:
        if e.round_index <= last:
            raise InvalidConfig("round indices must strictly increase")
        last = e.round_index
        buf.write(f"{e.round_index},{e.train_accuracy:.6f},{e.val_accuracy:.6f}\n")
    return buf.getvalue()


def emit_curves(log: RoundLog, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(curves_csv(log), encoding="utf-8")
    return path


def _pct(v: Optional[float]) -> str:
    return "n/a" if v is None else f"{v:.2f}%"


def render_table(rows: Sequence[tuple[str, EvalReport]], fmt: str = "text",
                 detail: Optional[EvalReport] = None, notes: Sequence[str] = ()) -> str:
    """Approach / accuracy / miss-rate table, with the 2x2 matrix of ``detail``."""
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["approach", "split", "n", "accuracy_pct", "miss_rate_pct",
                    "sensitivity_pct", "specificity_pct", "tp", "fp", "tn", "fn"])
        for name, r in rows:
            cm = r.confusion
            w.writerow([name, r.split_tag, r.n, f"{r.accuracy_pct:.6f}", f"{r.miss_rate_pct:.6f}",
                        "" if r.sensitivity_pct is None else f"{r.sensitivity_pct:.6f}",
                        "" if r.specificity_pct is None else f"{r.specificity_pct:.6f}",
                        cm.tp, cm.fp, cm.tn, cm.fn])
        return buf.getvalue()
    if fmt != "text":
        raise InvalidConfig(f"unknown report format {fmt!r}")
    width = max([len("Approaches")] + [len(name) for name, _ in rows]) + 2
    lines = [f"{'Approaches':<{width}}{'Accuracy':>10}{'Miss Rate':>11}{'Sens.':>9}{'Spec.':>9}{'n':>7}"]
    for name, r in rows:
        lines.append(f"{name:<{width}}{r.accuracy_pct:>9.2f}%{r.miss_rate_pct:>10.2f}%"
                     f"{_pct(r.sensitivity_pct):>9}{_pct(r.specificity_pct):>9}{r.n:>7d}")
    out = "\n".join(lines) + "\n"
    if detail is not None:
        out += f"\nConfusion matrix ({detail.split_tag}, positive = carrier)\n" + detail.confusion.render()
    out += "\nMiss rate = 100 - accuracy (share of misclassified rows).\n"
    for note in notes:
        out += f"Note: {note}\n"
    return out


def save_report_json(r: EvalReport, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(r.to_dict(), indent=1, sort_keys=True) + "\n", encoding="utf-8")


def load_report_json(path: Union[str, Path]) -> EvalReport:
    return EvalReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
