"""Datasets, clusterings and contingency tables.

A :class:`Clustering` is an exact partition of a set of sample ids.  It is
stored as a tuple of ids plus an integer code per id; cluster names are kept
in lexicographic order so that code order and name order coincide.  Every
other module works on these code arrays, which keeps comparisons O(m).
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping
from typing import Optional

import numpy as np

SINGLETON_PREFIX = "__singleton__:"


class AgtrError(ValueError):
    """Base class for input errors raised by this package."""


class DuplicateSample(AgtrError):
    def __init__(self, sample_id: str, line: Optional[int] = None):
        self.sample_id = sample_id
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"sample id {sample_id!r} appears more than once{where}")


class EmptyId(AgtrError):
    def __init__(self, line: Optional[int] = None):
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"empty sample id{where}")


class UniverseMismatch(AgtrError):
    """Two clusterings do not partition the same set of sample ids."""


def _norm_id(sample_id) -> str:
    sid = sample_id if type(sample_id) is str else str(sample_id)
    if not sid:
        raise EmptyId()
    return sid


class Clustering:
    """Immutable exact partition of sample ids into named clusters."""

    __slots__ = ("_ids", "_codes", "_names", "_index", "_clusters")

    def __init__(self, ids: tuple, codes: np.ndarray, names: tuple, index: Optional[dict] = None):
        # Internal constructor: callers guarantee canonical names and no empty clusters.
        # Use build_clustering / Clustering.from_clusters from outside the package.
        self._ids = ids
        self._codes = codes
        self._names = names
        self._index = index
        self._clusters = None
        codes.flags.writeable = False

    @classmethod
    def _from_codes(cls, ids: tuple, codes: np.ndarray, names, index: Optional[dict] = None) -> "Clustering":
        """Canonicalize arbitrary (possibly unsorted, possibly unused) cluster names."""
        names = list(names)
        codes = np.asarray(codes, dtype=np.int64)
        used = np.bincount(codes, minlength=len(names)) > 0
        keep = np.flatnonzero(used).tolist()
        order = sorted(keep, key=names.__getitem__)
        remap = np.full(len(names), -1, dtype=np.int64)
        remap[order] = np.arange(len(order), dtype=np.int64)
        new_names = tuple(names[i] for i in order)
        if len(set(new_names)) != len(new_names):
            raise AgtrError("cluster names must be unique")
        return cls(ids, remap[codes], new_names, index)

    @classmethod
    def from_clusters(cls, clusters: Mapping[str, Iterable]) -> "Clustering":
        """Build from ``{cluster_name: member_ids}``; empty clusters are dropped."""
        return build_clustering((sid, name) for name, members in clusters.items() for sid in members)

    # -- basic accessors -------------------------------------------------

    @property
    def m(self) -> int:
        return len(self._ids)

    universe_size = m

    @property
    def ids(self) -> tuple:
        return self._ids

    @property
    def names(self) -> tuple:
        """Cluster names in canonical (lexicographic) order."""
        return self._names

    @property
    def codes(self) -> np.ndarray:
        """Read-only cluster index of each id, aligned with :attr:`ids`."""
        return self._codes

    @property
    def n_clusters(self) -> int:
        return len(self._names)

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self._codes, minlength=len(self._names))

    @property
    def index(self) -> dict:
        if self._index is None:
            self._index = {sid: i for i, sid in enumerate(self._ids)}
        return self._index

    @property
    def clusters(self) -> dict:
        """``{name: frozenset(ids)}`` in canonical name order (built lazily)."""
        if self._clusters is None:
            buckets: list[list] = [[] for _ in self._names]
            for sid, c in zip(self._ids, self._codes.tolist()):
                buckets[c].append(sid)
            self._clusters = {n: frozenset(b) for n, b in zip(self._names, buckets)}
        return self._clusters

    def cluster_of(self, sample_id) -> str:
        return self._names[self._codes[self.index[_norm_id(sample_id)]]]

    def members(self, name: str) -> frozenset:
        return self.clusters[name]

    def assignments(self) -> Iterator[tuple]:
        names = self._names
        for sid, c in zip(self._ids, self._codes.tolist()):
            yield sid, names[c]

    def same_partition(self, other: "Clustering") -> bool:
        """True when both group the ids identically, regardless of cluster names."""
        if self.m != other.m or self.n_clusters != other.n_clusters:
            return False
        try:
            table = contingency(self, other)
        except UniverseMismatch:
            return False
        return len(table) == self.n_clusters

    def __len__(self) -> int:
        return self.m

    def __eq__(self, other) -> bool:
        if not isinstance(other, Clustering):
            return NotImplemented
        if self.m != other.m or self._names != other._names:
            return False
        try:
            return bool(np.array_equal(self._codes, _aligned_codes(self, other)))
        except UniverseMismatch:
            return False

    __hash__ = None

    def __repr__(self) -> str:
        return f"Clustering(m={self.m}, clusters={self.n_clusters})"


def _aligned_codes(a: Clustering, b: Clustering) -> np.ndarray:
    """Codes of ``b`` reordered to follow ``a``'s id order."""
    if a._ids is b._ids or (len(a._ids) == len(b._ids) and a._ids == b._ids):
        return b._codes
    if a.m != b.m:
        raise UniverseMismatch(f"universe sizes differ: {a.m} vs {b.m}")
    index = b.index
    try:
        pos = np.fromiter((index[sid] for sid in a._ids), dtype=np.int64, count=a.m)
    except KeyError as exc:
        raise UniverseMismatch(f"sample id {exc.args[0]!r} missing from one clustering") from None
    return b._codes[pos]


def build_clustering(assignments: Iterable[tuple]) -> Clustering:
    """Build a clustering from ``(sample_id, cluster_name)`` pairs in one pass.

    Ids and names are coerced to ``str``.  Raises :class:`DuplicateSample`
    when an id is repeated and :class:`EmptyId` for an empty id.
    """
    index: dict = {}
    ids: list = []
    name_code: dict = {}
    codes: list = []
    for sid, name in assignments:
        sid = sid if type(sid) is str and sid else _norm_id(sid)
        if sid in index:
            raise DuplicateSample(sid)
        index[sid] = len(ids)
        ids.append(sid)
        if type(name) is not str:
            name = str(name)
        code = name_code.get(name)
        if code is None:
            code = name_code[name] = len(name_code)
        codes.append(code)
    if not ids:
        raise AgtrError("cannot build a clustering from an empty assignment list")
    return Clustering._from_codes(tuple(ids), np.array(codes, dtype=np.int64), list(name_code), index)


class Labeling:
    """Sample id to optional label.  ``None`` (or an empty string) means unlabeled."""

    __slots__ = ("_entries",)

    def __init__(self, entries: Mapping | Iterable[tuple]):
        pairs = entries.items() if isinstance(entries, Mapping) else entries
        out: dict = {}
        for sid, label in pairs:
            sid = _norm_id(sid)
            if sid in out:
                raise DuplicateSample(sid)
            out[sid] = str(label) if label not in (None, "") else None
        if not out:
            raise AgtrError("labeling is empty")
        self._entries = out

    @property
    def entries(self) -> dict:
        return self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __getitem__(self, sample_id) -> Optional[str]:
        return self._entries[_norm_id(sample_id)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Labeling):
            return NotImplemented
        return self._entries == other._entries

    __hash__ = None

    def vocabulary(self) -> set:
        return {v for v in self._entries.values() if v is not None}

    def __repr__(self) -> str:
        return f"Labeling(n={len(self._entries)})"


def clustering_from_labels(labels: Labeling) -> Clustering:
    """Group samples sharing a label; each unlabeled sample becomes its own
    cluster named ``SINGLETON_PREFIX + sample_id``."""
    if not isinstance(labels, Labeling):
        labels = Labeling(labels)

    def pairs():
        for sid, label in labels.entries.items():
            if label is None:
                yield sid, SINGLETON_PREFIX + sid
            elif label.startswith(SINGLETON_PREFIX):
                raise AgtrError(f"label {label!r} uses the reserved prefix {SINGLETON_PREFIX!r}")
            else:
                yield sid, label

    return build_clustering(pairs())


def _pair_counts(a_codes: np.ndarray, b_codes: np.ndarray, nb: int):
    """Sparse overlap counts, sorted by (row, col)."""
    keys = a_codes * np.int64(nb) + b_codes
    uniq, counts = np.unique(keys, return_counts=True)
    return uniq // nb, uniq % nb, counts


class ContingencyTable:
    """Sparse overlap counts ``|A_i & B_j|`` between two clusterings.

    ``rows``, ``cols`` and ``counts`` are parallel arrays sorted by
    (row, col); indices refer to ``row_names`` / ``col_names``.
    """

    __slots__ = ("rows", "cols", "counts", "row_names", "col_names", "m")

    def __init__(self, rows, cols, counts, row_names, col_names, m):
        self.rows = rows
        self.cols = cols
        self.counts = counts
        self.row_names = row_names
        self.col_names = col_names
        self.m = m

    def __len__(self) -> int:
        return len(self.counts)

    @property
    def nnz(self) -> int:
        return len(self.counts)

    @property
    def entries(self) -> dict:
        rn, cn = self.row_names, self.col_names
        return {
            (rn[r], cn[c]): n
            for r, c, n in zip(self.rows.tolist(), self.cols.tolist(), self.counts.tolist())
        }

    @property
    def row_marginals(self) -> dict:
        sums = np.bincount(self.rows, weights=self.counts, minlength=len(self.row_names))
        return {n: int(s) for n, s in zip(self.row_names, sums)}

    @property
    def col_marginals(self) -> dict:
        sums = np.bincount(self.cols, weights=self.counts, minlength=len(self.col_names))
        return {n: int(s) for n, s in zip(self.col_names, sums)}

    def dense(self) -> np.ndarray:
        out = np.zeros((len(self.row_names), len(self.col_names)), dtype=np.int64)
        out[self.rows, self.cols] = self.counts
        return out

    def transpose(self) -> "ContingencyTable":
        order = np.lexsort((self.rows, self.cols))
        return ContingencyTable(
            self.cols[order], self.rows[order], self.counts[order], self.col_names, self.row_names, self.m
        )

    def __repr__(self) -> str:
        return f"ContingencyTable({len(self.row_names)}x{len(self.col_names)}, nnz={self.nnz}, m={self.m})"


def contingency(a: Clustering, b: Clustering) -> ContingencyTable:
    """Overlap table of two clusterings of the same universe, in O(m)."""
    b_codes = _aligned_codes(a, b)
    rows, cols, counts = _pair_counts(a.codes, b_codes, b.n_clusters)
    return ContingencyTable(rows, cols, counts, a.names, b.names, a.m)
