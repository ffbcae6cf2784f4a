"""Verification reports: worst slack over a sweep plus the witness achieving it."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np


@dataclass
class VerificationReport:
    """Outcome of a sweep.  Slack sign convention: >= 0 means the inequality holds."""

    name: str
    instances_checked: int
    passes: int
    worst_slack: float
    witness: Any
    ok: bool
    config: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    rows: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        if self.passes > self.instances_checked:
            raise ValueError("passes cannot exceed instances checked")

    def to_json(self) -> dict:
        out = {
            "name": self.name,
            "instances_checked": self.instances_checked,
            "passes": self.passes,
            "worst_slack": _jsonable(self.worst_slack),
            "witness": _jsonable(self.witness),
            "ok": self.ok,
            "config": _jsonable(self.config),
        }
        if self.extra:
            out["extra"] = _jsonable(self.extra)
        return out

    def to_csv(self) -> str:
        rows = self.rows or [{"name": self.name, "instances_checked": self.instances_checked,
                              "passes": self.passes, "worst_slack": self.worst_slack, "ok": self.ok}]
        keys: list[str] = []
        for r in rows:
            keys.extend(k for k in r if k not in keys)
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=keys)
        writer.writeheader()
        for r in rows:
            writer.writerow({k: _jsonable(v) for k, v in r.items()})
        return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if hasattr(obj, "numerator") and hasattr(obj, "denominator") and not isinstance(obj, (int, bool)):
        return f"{obj.numerator}/{obj.denominator}"
    return obj


def _encode_key(instance) -> str:
    return json.dumps(_jsonable(instance), sort_keys=True)


class Tally:
    """Accumulates instance slacks; ties in the worst slack keep the witness
    whose JSON encoding sorts first, so merges are order independent."""

    def __init__(self, name: str, tolerance: float = 1e-12, keep_rows: bool = False):
        self.name = name
        self.tolerance = tolerance
        self.count = 0
        self.passes = 0
        self.worst = math.inf
        self.witness: Any = None
        self._witness_key: str | None = None
        self.keep_rows = keep_rows
        self.rows: list = []

    def add(self, slack: float, instance) -> None:
        slack = float(slack)
        self.count += 1
        if slack >= -self.tolerance:
            self.passes += 1
        if self.keep_rows:
            self.rows.append({"slack": slack, "instance": _encode_key(instance)})
        if slack < self.worst:
            self.worst, self.witness, self._witness_key = slack, instance, None
        elif slack == self.worst:
            key = _encode_key(instance)
            if self._witness_key is None:
                self._witness_key = _encode_key(self.witness)
            if key < self._witness_key:
                self.witness, self._witness_key = instance, key

    def add_many(self, slacks, instance_of: Callable[[int], Any]) -> None:
        """Bulk add; only the worst instance is materialized."""
        slacks = np.asarray(slacks, dtype=float).ravel()
        if slacks.size == 0:
            return
        self.count += slacks.size
        self.passes += int(np.sum(slacks >= -self.tolerance))
        i = int(np.argmin(slacks))
        if self.keep_rows:
            self.rows.extend({"slack": float(s), "instance": j} for j, s in enumerate(slacks))
        if slacks[i] < self.worst:
            self.worst, self.witness, self._witness_key = float(slacks[i]), instance_of(i), None

    def merge(self, other: "Tally") -> None:
        if other.count == 0:
            return
        self.count += other.count
        self.passes += other.passes
        self.rows.extend(other.rows)
        if other.worst < self.worst:
            self.worst, self.witness, self._witness_key = other.worst, other.witness, None

    def report(self, ok: bool | None = None, config: dict | None = None,
               extra: dict | None = None) -> VerificationReport:
        if ok is None:
            ok = self.passes == self.count
        return VerificationReport(self.name, self.count, self.passes, self.worst, self.witness, ok,
                                  config or {}, extra or {}, self.rows)


def combine_reports(name: str, reports: list[VerificationReport], ok: bool | None = None,
                    config: dict | None = None, extra: dict | None = None) -> VerificationReport:
    """Fold sub-reports into one: counts add, the worst slack wins."""
    worst, witness = math.inf, None
    for r in reports:
        if r.instances_checked and r.worst_slack < worst:
            worst, witness = r.worst_slack, {"check": r.name, "instance": r.witness}
    if ok is None:
        ok = all(r.ok for r in reports)
    parts = {r.name: {"instances_checked": r.instances_checked, "passes": r.passes,
                      "worst_slack": r.worst_slack, "ok": r.ok, **r.extra} for r in reports}
    rows = [row for r in reports for row in r.rows]
    return VerificationReport(name, sum(r.instances_checked for r in reports),
                              sum(r.passes for r in reports), worst, witness, ok,
                              config or {}, {"parts": parts, **(extra or {})}, rows)
