"""Metric bounds from an approximate ground truth refinement.

Given a predicted clustering ``C``, an AGTR ``R_hat`` over the same samples
and an error allowance ``epsilon_hat`` (believed to be at least the true
number of misplaced samples in ``R_hat``)::

    precision(C, D) >= precision(C, R_hat) - epsilon_hat / m
    recall(C, D)    <= recall(C, R_hat)    + epsilon_hat / m
    accuracy(C, D)  <= recall(C, R_hat)    + epsilon_hat / m

for the unknown reference clustering ``D``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from agtr.core import Clustering
from agtr.metrics import MetricValue, precision_recall

METRICS = ("precision", "recall", "accuracy")


def default_epsilon_hat(m: int, rate: float = 0.01) -> int:
    """``ceil(rate * m)``, with ``rate`` taken as the decimal it was written as."""
    if m < 1:
        raise ValueError("m must be at least 1")
    if not 0 < rate <= 1:
        raise ValueError("rate must be in (0, 1]")
    return math.ceil(Fraction(str(rate)) * m)


@dataclass(frozen=True)
class BoundReport:
    m: int
    epsilon_hat: int
    precision_agtr: Optional[MetricValue]
    recall_agtr: Optional[MetricValue]
    precision_lower_bound: float
    recall_upper_bound: float
    raw_precision_lower_bound: float
    raw_recall_upper_bound: float
    clamped_flags: dict = field(default_factory=dict)

    @property
    def accuracy_upper_bound(self) -> float:
        return self.recall_upper_bound

    @classmethod
    def from_metrics(cls, precision_agtr: MetricValue, recall_agtr: MetricValue, epsilon_hat: int) -> "BoundReport":
        m = precision_agtr.denominator
        raw_lb = (precision_agtr.numerator - epsilon_hat) / m
        raw_ub = (recall_agtr.numerator + epsilon_hat) / m
        return cls(
            m=m,
            epsilon_hat=epsilon_hat,
            precision_agtr=precision_agtr,
            recall_agtr=recall_agtr,
            precision_lower_bound=max(0.0, raw_lb),
            recall_upper_bound=min(1.0, raw_ub),
            raw_precision_lower_bound=raw_lb,
            raw_recall_upper_bound=raw_ub,
            clamped_flags={"precision_lower_bound": raw_lb < 0.0, "recall_upper_bound": raw_ub > 1.0},
        )

    @classmethod
    def from_bounds(cls, precision_lower_bound: float, recall_upper_bound: float,
                    m: int = 0, epsilon_hat: int = 0) -> "BoundReport":
        """A report that carries only published bound values (no raw metrics)."""
        return cls(
            m=m,
            epsilon_hat=epsilon_hat,
            precision_agtr=None,
            recall_agtr=None,
            precision_lower_bound=precision_lower_bound,
            recall_upper_bound=recall_upper_bound,
            raw_precision_lower_bound=precision_lower_bound,
            raw_recall_upper_bound=recall_upper_bound,
            clamped_flags={"precision_lower_bound": False, "recall_upper_bound": False},
        )


def agtr_bounds(c: Clustering, r_hat: Clustering, epsilon_hat: int) -> BoundReport:
    if epsilon_hat < 0:
        raise ValueError("epsilon_hat must be non-negative")
    prec, rec = precision_recall(c, r_hat)
    return BoundReport.from_metrics(prec, rec, int(epsilon_hat))


class Status(str, enum.Enum):
    CONSISTENT = "CONSISTENT"
    SUSPECT_OVERFIT = "SUSPECT_OVERFIT"
    NOT_TESTED = "NOT_TESTED"


@dataclass(frozen=True)
class ReportedMetrics:
    """Metrics someone reported on a (typically smaller) labeled dataset."""

    name: str = ""
    precision: Optional[float] = None
    recall: Optional[float] = None
    accuracy: Optional[float] = None

    def __post_init__(self):
        for metric in METRICS:
            v = getattr(self, metric)
            if v is not None and not 0.0 <= v <= 1.0:
                raise ValueError(f"reported {metric} {v} is outside [0, 1]")


@dataclass(frozen=True)
class LitmusVerdict:
    name: str
    status: dict
    margins: dict

    @property
    def suspect(self) -> bool:
        return any(s is Status.SUSPECT_OVERFIT for s in self.status.values())


def litmus_test(reported: ReportedMetrics, bounds: BoundReport) -> LitmusVerdict:
    """Flag reported metrics that violate the AGTR bounds.

    Precision is suspect when the lower bound exceeds it; recall and accuracy
    when the upper bound is below them.  Margins are ``reported - bound``.
    """
    status, margins = {}, {}
    limits = {
        "precision": bounds.precision_lower_bound,
        "recall": bounds.recall_upper_bound,
        "accuracy": bounds.accuracy_upper_bound,
    }
    for metric in METRICS:
        value = getattr(reported, metric)
        if value is None:
            status[metric] = Status.NOT_TESTED
            margins[metric] = None
            continue
        bound = limits[metric]
        violated = bound > value if metric == "precision" else bound < value
        status[metric] = Status.SUSPECT_OVERFIT if violated else Status.CONSISTENT
        margins[metric] = value - bound
    return LitmusVerdict(reported.name, status, margins)


def compare_bounds(candidates, r_hat: Clustering, epsilon_hat: int) -> list[tuple[str, BoundReport]]:
    """Bound reports for several candidate clusterings against one AGTR.

    ``candidates`` is a sequence of ``(name, Clustering)``; output keeps that
    order.  Comparing bounds is only meaningful for intrinsically similar
    models that passed the shuffle correlation check.
    """
    return [(name, agtr_bounds(c, r_hat, epsilon_hat)) for name, c in candidates]


def bounds_table(reports: list[tuple[str, BoundReport]]) -> dict:
    """Rows of bound values keyed by row label, one column per candidate."""
    return {
        "columns": [name for name, _ in reports],
        "Precision Lower Bound": [r.precision_lower_bound for _, r in reports],
        "Recall Upper Bound": [r.recall_upper_bound for _, r in reports],
    }
