"""Partition refinements and the distances used to reason about them.

``is_refinement`` / ``decompose`` check and expose the refinement
relation.  ``min_corrections_to_refinement`` (the epsilon of an AGTR with
respect to a reference clustering) and ``partition_distance`` (delta) are
exact oracles meant for tests and audits.  ``random_refinement`` and
``perturb`` generate controlled inputs for the bound theorems.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from agtr.core import SINGLETON_PREFIX, AgtrError, Clustering, _aligned_codes, contingency
from agtr.metrics import cluster_mapping

MAX_DENSE_CELLS = 50_000_000


class NotARefinement(AgtrError):
    pass


@dataclass(frozen=True)
class RefinementDecomposition:
    """``groups[coarse_name]`` is the set of fine cluster names whose union is that coarse cluster."""

    groups: dict

    def group_of(self, fine_name: str) -> str:
        for coarse, fines in self.groups.items():
            if fine_name in fines:
                return coarse
        raise KeyError(fine_name)


@dataclass(frozen=True)
class CorrectionWitness:
    """Membership moves ``(sample_id, from_cluster, to_cluster)`` that turn a
    clustering into a refinement of some target."""

    moves: tuple

    @property
    def count(self) -> int:
        return len(self.moves)

    def __len__(self) -> int:
        return len(self.moves)


def is_refinement(r: Clustering, s: Clustering) -> bool:
    """True iff every cluster of ``r`` lies inside a single cluster of ``s``."""
    return contingency(r, s).nnz == r.n_clusters


def decompose(r: Clustering, s: Clustering) -> RefinementDecomposition:
    table = contingency(r, s)
    if table.nnz != r.n_clusters:
        raise NotARefinement("some cluster of the first clustering spans several clusters of the second")
    groups: dict = {name: set() for name in s.names}
    for row, col in zip(table.rows.tolist(), table.cols.tolist()):
        groups[s.names[col]].add(r.names[row])
    return RefinementDecomposition({k: frozenset(v) for k, v in groups.items()})


def _fresh_name(base: str, taken: set) -> str:
    name = base
    while name in taken:
        name += "#"
    taken.add(name)
    return name


def min_corrections_to_refinement(r_hat: Clustering, d: Clustering) -> CorrectionWitness:
    """Fewest membership changes that make ``r_hat`` a refinement of ``d``.

    In each ``r_hat`` cluster the members of its plurality ``d`` cluster stay
    put and every other member moves to a new singleton, so the count is
    ``sum_k (|R_k| - max_j |R_k & D_j|)``, i.e. ``m * (1 - precision(r_hat, d))``.
    """
    mapping = cluster_mapping(r_hat, d)
    keep = _name_codes(d, [mapping.pairs[n] for n in r_hat.names])
    d_codes = _aligned_codes(r_hat, d)
    moved = np.flatnonzero(d_codes != keep[r_hat.codes])
    taken = set(r_hat.names)
    moves = []
    for pos in moved.tolist():
        sid = r_hat.ids[pos]
        moves.append((sid, r_hat.names[r_hat.codes[pos]], _fresh_name(SINGLETON_PREFIX + sid, taken)))
    return CorrectionWitness(tuple(moves))


def _name_codes(c: Clustering, names: list) -> np.ndarray:
    lookup = {n: i for i, n in enumerate(c.names)}
    return np.array([lookup[n] for n in names], dtype=np.int64)


def apply_corrections(c: Clustering, witness: CorrectionWitness) -> Clustering:
    """Return ``c`` with the witness moves applied."""
    names = list(c.names)
    lookup = {n: i for i, n in enumerate(names)}
    codes = c.codes.copy()
    index = c.index
    for sid, src, dst in witness.moves:
        pos = index[sid]
        if names[codes[pos]] != src:
            raise AgtrError(f"sample {sid!r} is not in cluster {src!r}")
        code = lookup.get(dst)
        if code is None:
            code = lookup[dst] = len(names)
            names.append(dst)
        codes[pos] = code
    return Clustering._from_codes(c.ids, codes, names, c._index)


def partition_distance(a: Clustering, b: Clustering) -> int:
    """Minimum number of samples whose membership must change to turn ``a`` into ``b``.

    Solved as a maximum-weight assignment between clusters on the dense
    overlap matrix (the smaller side is implicitly padded with empty
    clusters), so it is meant for small to moderate instances.
    """
    table = contingency(a, b)
    if a.n_clusters * b.n_clusters > MAX_DENSE_CELLS:
        raise AgtrError("overlap matrix too large for exact partition distance")
    dense = table.dense()
    rows, cols = linear_sum_assignment(dense, maximize=True)
    return a.m - int(dense[rows, cols].sum())


def random_refinement(d: Clustering, split_probability: float, seed: int) -> Clustering:
    """Randomly split every cluster of ``d``.

    Members of each cluster are visited in random order and a new block is
    started before each member (after the first) with ``split_probability``.
    The first block keeps the original cluster name.
    """
    if not 0.0 <= split_probability <= 1.0:
        raise ValueError("split_probability must be in [0, 1]")
    if split_probability == 0.0:
        return d
    rng = np.random.default_rng(seed)
    m = d.m
    order = np.lexsort((rng.random(m), d.codes))
    grouped = d.codes[order]
    first = np.ones(m, dtype=bool)
    first[1:] = grouped[1:] != grouped[:-1]
    cut = first | (rng.random(m) < split_probability)
    block = np.cumsum(cut) - 1
    cluster_first_block = block[first]
    within = block - cluster_first_block[np.cumsum(first) - 1]

    block_cluster = grouped[cut].tolist()
    block_within = within[cut].tolist()
    existing = set(d.names)
    sep = "~"
    while True:
        names = [
            d.names[c] if k == 0 else f"{d.names[c]}{sep}{k}"
            for c, k in zip(block_cluster, block_within)
        ]
        # split names contain no other separator run, so only clashes with d's own names matter
        if not existing.intersection(n for n, k in zip(names, block_within) if k):
            break
        sep += "~"
    codes = np.empty(m, dtype=np.int64)
    codes[order] = block
    return Clustering._from_codes(d.ids, codes, names, d._index)


def perturb(s: Clustering, n_moves: int, seed: int) -> Clustering:
    """Move exactly ``n_moves`` distinct samples to a different cluster.

    Samples are drawn uniformly without replacement.  Each one goes to one of
    the ``k`` other currently non-empty clusters or to a fresh singleton, all
    ``k + 1`` options equally likely.  A sample that is already alone never
    picks the fresh-singleton option unless no other cluster exists.
    """
    m = s.m
    if not 0 <= n_moves <= m:
        raise ValueError("n_moves must be between 0 and m")
    if n_moves == 0:
        return s
    rng = np.random.default_rng(seed)
    codes = s.codes.copy()
    names = list(s.names)
    taken = set(names)
    sizes = np.bincount(codes, minlength=len(names)).tolist()
    live = list(range(len(names)))
    slot = {c: i for i, c in enumerate(live)}

    def drop(c):
        i = slot.pop(c)
        last = live.pop()
        if last != c:
            live[i] = last
            slot[last] = i

    for pos in rng.choice(m, size=n_moves, replace=False).tolist():
        cur = int(codes[pos])
        others = len(live) - 1
        allow_fresh = sizes[cur] > 1 or others == 0
        j = int(rng.integers(others + int(allow_fresh)))
        if j < others:
            target = live[j] if live[j] != cur else live[-1]
        else:
            target = len(names)
            names.append(_fresh_name(f"__moved__:{s.ids[pos]}", taken))
            sizes.append(0)
            slot[target] = len(live)
            live.append(target)
        codes[pos] = target
        sizes[cur] -= 1
        sizes[target] += 1
        if sizes[cur] == 0:
            drop(cur)
    return Clustering._from_codes(s.ids, codes, names, s._index)
