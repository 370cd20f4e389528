"""Incremental shuffle test for comparing similar models.

A predicted clustering is corrupted one sample at a time: samples are taken
in a random order (without replacement) and reassigned to a cluster drawn
with probability proportional to the *original* cluster sizes.  Bounds are
recorded at regular intervals.  If both bounds correlate strongly and
negatively with the shuffled fraction, differences in bounds between
intrinsically similar models can be read as differences in quality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import stats

from agtr.bounds import BoundReport
from agtr.core import AgtrError, Clustering, _aligned_codes
from agtr.metrics import MetricValue, _overlap_numerators


class DegenerateSeries(AgtrError):
    """A series has zero variance, so its correlation is undefined."""


@dataclass(frozen=True)
class ShuffleRecord:
    shuffle_fraction: float
    precision_lower_bound: float
    recall_upper_bound: float
    moves: int = 0


@dataclass(frozen=True)
class CorrelationReport:
    r_precision: float
    r_recall: float
    p_precision: float
    p_recall: float
    n_points: int
    threshold: float

    @property
    def passed(self) -> bool:
        return self.r_precision <= self.threshold and self.r_recall <= self.threshold


def shuffle_run(c: Clustering, r_hat: Clustering, epsilon_hat: int, interval: float = 0.01,
                seed: int = 0) -> list[ShuffleRecord]:
    """Shuffle every sample of ``c`` once, recording bounds every ``ceil(interval * m)`` moves.

    The first record is the unshuffled clustering; the last is taken after all
    ``m`` moves.  A sample may be reassigned to its current cluster.
    """
    if not 0 < interval <= 1:
        raise ValueError("interval must be in (0, 1]")
    r_codes = _aligned_codes(c, r_hat)
    m, k, kr = c.m, c.n_clusters, r_hat.n_clusters
    step = max(1, math.ceil(Fraction(str(interval)) * m))

    rng = np.random.default_rng(seed)
    order = rng.permutation(m)
    # cluster of a uniformly drawn sample == draw weighted by original cluster sizes
    targets = c.codes[rng.integers(0, m, size=m)]

    codes = c.codes.copy()
    records = []
    done = 0
    while True:
        prec, rec = _overlap_numerators(codes, r_codes, k, kr)
        report = BoundReport.from_metrics(MetricValue(prec, m), MetricValue(rec, m), epsilon_hat)
        records.append(ShuffleRecord(done / m, report.precision_lower_bound, report.recall_upper_bound, done))
        if done == m:
            break
        nxt = min(done + step, m)
        codes[order[done:nxt]] = targets[done:nxt]
        done = nxt
    return records


def pearson(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dx, dy = x - x.mean(), y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateSeries("constant series")
    return max(-1.0, min(1.0, float(dx @ dy) / math.sqrt(sxx * syy)))


def pearson_p_value(r: float, n: int) -> float:
    """Two-sided p-value of Pearson ``r`` via ``t = r sqrt((n-2)/(1-r^2))`` with n-2 dof."""
    if abs(r) >= 1.0:
        return 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return float(2.0 * stats.t.sf(abs(t), n - 2))


def correlation_test(records: list[ShuffleRecord], threshold: float = -0.9) -> CorrelationReport:
    if len(records) < 3:
        raise ValueError("need at least 3 records")
    x = [r.shuffle_fraction for r in records]
    series = {
        "precision": [r.precision_lower_bound for r in records],
        "recall": [r.recall_upper_bound for r in records],
    }
    rs = {}
    for metric, y in series.items():
        try:
            rs[metric] = pearson(x, y)
        except DegenerateSeries:
            raise DegenerateSeries(f"{metric} bound series is constant") from None
    n = len(records)
    return CorrelationReport(
        r_precision=rs["precision"],
        r_recall=rs["recall"],
        p_precision=pearson_p_value(rs["precision"], n),
        p_recall=pearson_p_value(rs["recall"], n),
        n_points=n,
        threshold=threshold,
    )


def format_p(p: float) -> str | float:
    return "< 1e-300" if p < 1e-300 else p
