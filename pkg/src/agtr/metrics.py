"""Precision, recall and accuracy as cluster validity indices.

Precision sums, over predicted clusters, the largest overlap with any
reference cluster; recall does the same over reference clusters.  Both are
divided by the number of samples m.  Integer numerators are kept so results
can be compared exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from agtr.core import Clustering, Labeling, UniverseMismatch, _aligned_codes, _pair_counts, contingency


@dataclass(frozen=True)
class MetricValue:
    numerator: int
    denominator: int
    warnings: tuple = field(default=(), compare=False)

    @property
    def value(self) -> float:
        return self.numerator / self.denominator

    def as_fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def __float__(self) -> float:
        return self.value

    def to_dict(self) -> dict:
        return {"num": self.numerator, "den": self.denominator, "value": self.value}


@dataclass(frozen=True)
class ClusterMapping:
    """Each source cluster mapped to the target cluster it overlaps most."""

    pairs: dict
    overlaps: dict
    direction: str = "predicted->reference"

    def __getitem__(self, name: str) -> str:
        return self.pairs[name]

    def __len__(self) -> int:
        return len(self.pairs)


def _group_max(groups: np.ndarray, values: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros(n, dtype=np.int64)
    np.maximum.at(out, groups, values)
    return out


def _overlap_numerators(a_codes: np.ndarray, b_codes: np.ndarray, na: int, nb: int) -> tuple[int, int]:
    """(sum of row maxima, sum of column maxima) of the overlap table."""
    rows, cols, counts = _pair_counts(a_codes, b_codes, nb)
    prec = int(_group_max(rows, counts, na).sum())
    rec = int(_group_max(cols, counts, nb).sum())
    return prec, rec


def precision(c: Clustering, d: Clustering) -> MetricValue:
    """Fraction of samples lying in the best-matching ``d`` cluster of their ``c`` cluster."""
    table = contingency(c, d)
    num = int(_group_max(table.rows, table.counts, c.n_clusters).sum())
    return MetricValue(num, c.m)


def recall(c: Clustering, d: Clustering) -> MetricValue:
    table = contingency(c, d)
    num = int(_group_max(table.cols, table.counts, d.n_clusters).sum())
    return MetricValue(num, c.m)


def precision_recall(c: Clustering, d: Clustering) -> tuple[MetricValue, MetricValue]:
    """Both indices from a single overlap table."""
    prec, rec = _overlap_numerators(c.codes, _aligned_codes(c, d), c.n_clusters, d.n_clusters)
    return MetricValue(prec, c.m), MetricValue(rec, c.m)


def cluster_mapping(src: Clustering, dst: Clustering, direction: str = "predicted->reference") -> ClusterMapping:
    """Map every ``src`` cluster to the ``dst`` cluster with maximal overlap.

    Ties go to the lexicographically smallest ``dst`` name.
    """
    table = contingency(src, dst)
    rowmax = _group_max(table.rows, table.counts, src.n_clusters)
    hit = table.counts == rowmax[table.rows]
    # entries are sorted by (row, col) and col order is name order, so the
    # first maximal entry of each row is the lexicographic tie-break winner
    best_rows, first = np.unique(table.rows[hit], return_index=True)
    best_cols = table.cols[hit][first]
    pairs = {src.names[r]: dst.names[c] for r, c in zip(best_rows.tolist(), best_cols.tolist())}
    overlaps = {src.names[r]: int(rowmax[r]) for r in best_rows.tolist()}
    return ClusterMapping(pairs, overlaps, direction)


def accuracy(pred: Labeling, ref: Labeling) -> MetricValue:
    """Fraction of samples whose predicted label string equals the reference one.

    Unlabeled samples never match.  When the two label vocabularies share
    nothing the result is 0 and carries the ``"disjoint_vocabularies"`` warning.
    """
    p, r = pred.entries, ref.entries
    if len(p) != len(r) or p.keys() != r.keys():
        raise UniverseMismatch("predicted and reference labelings cover different sample ids")
    hits = sum(1 for sid, label in p.items() if label is not None and label == r[sid])
    warnings = () if pred.vocabulary() & ref.vocabulary() else ("disjoint_vocabularies",)
    return MetricValue(hits, len(p), warnings)
