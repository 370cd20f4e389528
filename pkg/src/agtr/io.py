"""CSV and JSON formats.

Clusterings:  ``sample_id,cluster_id``
Labels:       ``sample_id,label``   (empty label = unlabeled)
Digests:      ``sample_id,digest,status``
Shuffle runs: ``shuffle_fraction,precision_lower_bound,recall_upper_bound``
Bound reports and verdicts are JSON with a fixed key order.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Optional

from agtr.bounds import BoundReport, LitmusVerdict, ReportedMetrics, Status
from agtr.core import AgtrError, Clustering, DuplicateSample, EmptyId, Labeling, build_clustering
from agtr.metrics import MetricValue
from agtr.shuffle import CorrelationReport, ShuffleRecord, format_p

CLUSTERING_HEADER = ["sample_id", "cluster_id"]
LABEL_HEADER = ["sample_id", "label"]
DIGEST_HEADER = ["sample_id", "digest", "status"]
RECORD_HEADER = ["shuffle_fraction", "precision_lower_bound", "recall_upper_bound"]


class MalformedHeader(AgtrError):
    pass


class MalformedRow(AgtrError):
    pass


class EmptyFile(AgtrError):
    pass


def _rows(path, header: list[str]):
    """Yield ``(line_number, row)`` after validating the header."""
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise EmptyFile(f"{path}: file is empty") from None
        if first != header:
            raise MalformedHeader(f"{path}: expected header {','.join(header)!r}, got {','.join(first)!r}")
        width = len(header)
        for row in reader:
            if len(row) != width:
                if not row:
                    continue
                raise MalformedRow(f"{path}:{reader.line_num}: expected {width} fields, got {len(row)}")
            yield reader.line_num, row


def _check_rows(path, rows):
    seen = set()
    any_row = False
    for line, (sid, value) in rows:
        if not sid:
            raise EmptyId(line)
        if sid in seen:
            raise DuplicateSample(sid, line)
        seen.add(sid)
        any_row = True
        yield sid, value
    if not any_row:
        raise EmptyFile(f"{path}: no data rows")


def load_clustering(path) -> Clustering:
    return build_clustering(_check_rows(path, _rows(path, CLUSTERING_HEADER)))


def load_labels(path) -> Labeling:
    return Labeling(_check_rows(path, _rows(path, LABEL_HEADER)))


def write_clustering(clustering: Clustering, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CLUSTERING_HEADER)
        w.writerows(clustering.assignments())


def write_labels(labels: Labeling, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LABEL_HEADER)
        w.writerows((sid, label or "") for sid, label in labels.entries.items())


def load_digests(path) -> list[tuple[str, Optional[str], str]]:
    out = []
    seen = set()
    for line, (sid, digest, status) in _rows(path, DIGEST_HEADER):
        if not sid:
            raise EmptyId(line)
        if sid in seen:
            raise DuplicateSample(sid, line)
        seen.add(sid)
        out.append((sid, digest or None, status))
    return out


def write_digests(rows, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DIGEST_HEADER)
        w.writerows((sid, digest or "", status) for sid, digest, status in rows)


def write_records(records: list[ShuffleRecord], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RECORD_HEADER)
        for r in records:
            w.writerow([repr(r.shuffle_fraction), repr(r.precision_lower_bound), repr(r.recall_upper_bound)])


def load_records(path) -> list[ShuffleRecord]:
    return [ShuffleRecord(float(f), float(p), float(r)) for _, (f, p, r) in _rows(path, RECORD_HEADER)]


# -- JSON ------------------------------------------------------------------


def _metric_dict(v: Optional[MetricValue]):
    return None if v is None else v.to_dict()


def _metric_from(d) -> Optional[MetricValue]:
    return None if d is None else MetricValue(int(d["num"]), int(d["den"]))


def verdict_to_dict(v: LitmusVerdict) -> dict:
    return {
        "name": v.name,
        "status": {k: s.value for k, s in v.status.items()},
        "margins": dict(v.margins),
    }


def verdict_from_dict(d: dict) -> LitmusVerdict:
    return LitmusVerdict(d["name"], {k: Status(s) for k, s in d["status"].items()}, dict(d["margins"]))


def bound_report_to_dict(report: BoundReport, verdicts=None) -> dict:
    if isinstance(verdicts, LitmusVerdict):
        verdicts = [verdicts]
    return {
        "m": report.m,
        "epsilon_hat": report.epsilon_hat,
        "precision_agtr": _metric_dict(report.precision_agtr),
        "recall_agtr": _metric_dict(report.recall_agtr),
        "precision_lower_bound": report.precision_lower_bound,
        "recall_upper_bound": report.recall_upper_bound,
        "accuracy_upper_bound": report.accuracy_upper_bound,
        "raw_precision_lower_bound": report.raw_precision_lower_bound,
        "raw_recall_upper_bound": report.raw_recall_upper_bound,
        "clamped_flags": dict(report.clamped_flags),
        "verdicts": [verdict_to_dict(v) for v in verdicts or []],
    }


def bound_report_from_dict(d: dict) -> tuple[BoundReport, list[LitmusVerdict]]:
    report = BoundReport(
        m=int(d["m"]),
        epsilon_hat=int(d["epsilon_hat"]),
        precision_agtr=_metric_from(d["precision_agtr"]),
        recall_agtr=_metric_from(d["recall_agtr"]),
        precision_lower_bound=float(d["precision_lower_bound"]),
        recall_upper_bound=float(d["recall_upper_bound"]),
        raw_precision_lower_bound=float(d["raw_precision_lower_bound"]),
        raw_recall_upper_bound=float(d["raw_recall_upper_bound"]),
        clamped_flags=dict(d["clamped_flags"]),
    )
    return report, [verdict_from_dict(v) for v in d.get("verdicts", [])]


def dumps(obj) -> bytes:
    return (json.dumps(obj, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def write_bound_report(report: BoundReport, litmus=None) -> bytes:
    return dumps(bound_report_to_dict(report, litmus))


def read_bound_report(data: bytes | str) -> tuple[BoundReport, list[LitmusVerdict]]:
    return bound_report_from_dict(json.loads(data))


def correlation_to_dict(rep: CorrelationReport) -> dict:
    return {
        "n_points": rep.n_points,
        "r_precision": rep.r_precision,
        "p_precision": format_p(rep.p_precision),
        "r_recall": rep.r_recall,
        "p_recall": format_p(rep.p_recall),
        "threshold": rep.threshold,
        "pass": rep.passed,
    }


def load_reported(path) -> list[ReportedMetrics]:
    """Reported metrics JSON: one object or a list of objects with optional
    ``name``, ``precision``, ``recall`` and ``accuracy`` keys."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    items = data if isinstance(data, list) else [data]
    out = []
    for item in items:
        unknown = set(item) - {"name", "precision", "recall", "accuracy"}
        if unknown:
            raise AgtrError(f"{path}: unknown keys {sorted(unknown)}")
        out.append(ReportedMetrics(**item))
    return out
