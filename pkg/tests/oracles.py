"""Slow, obviously-correct reference computations used only by the tests.

Everything here works on plain ``{name: set(ids)}`` dictionaries so it
shares no code path with the package.
"""

from __future__ import annotations

import itertools
from collections import deque


def as_sets(clustering) -> dict:
    return {name: set(members) for name, members in clustering.clusters.items()}


def brute_contingency(a: dict, b: dict) -> dict:
    out = {}
    for an, aset in a.items():
        for bn, bset in b.items():
            n = len(aset & bset)
            if n:
                out[(an, bn)] = n
    return out


def brute_precision_num(c: dict, d: dict) -> int:
    return sum(max(len(ci & dj) for dj in d.values()) for ci in c.values())


def brute_recall_num(c: dict, d: dict) -> int:
    return sum(max(len(ci & dj) for ci in c.values()) for dj in d.values())


def brute_is_refinement(r: dict, s: dict) -> bool:
    return all(any(rk <= sj for sj in s.values()) for rk in r.values())


def brute_min_corrections(r_hat: dict, d: dict) -> int:
    """Per AGTR cluster, everything outside its plurality reference family must move."""
    total = 0
    for rk in r_hat.values():
        total += len(rk) - max(len(rk & dj) for dj in d.values())
    return total


def bijection_distance(a: dict, b: dict) -> int:
    """m minus the best total overlap over every injective matching of clusters."""
    a_sets, b_sets = list(a.values()), list(b.values())
    m = sum(len(s) for s in a_sets)
    n = max(len(a_sets), len(b_sets))
    a_sets += [set()] * (n - len(a_sets))
    b_sets += [set()] * (n - len(b_sets))
    best = 0
    for perm in itertools.permutations(range(n)):
        best = max(best, sum(len(a_sets[i] & b_sets[perm[i]]) for i in range(n)))
    return m - best


def _canon(labels: tuple) -> tuple:
    """Relabel a label vector by first appearance so equal partitions compare equal."""
    seen = {}
    return tuple(seen.setdefault(x, len(seen)) for x in labels)


def move_distance(a: dict, b: dict) -> int:
    """Breadth-first search over partitions, one sample moved per step (tiny m only)."""
    ids = sorted(set().union(*a.values()))
    pos = {sid: i for i, sid in enumerate(ids)}

    def vec(p):
        v = [0] * len(ids)
        for k, members in enumerate(p.values()):
            for sid in members:
                v[pos[sid]] = k
        return _canon(tuple(v))

    start, goal = vec(a), vec(b)
    dist = {start: 0}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        if cur == goal:
            return dist[cur]
        labels = set(cur)
        for i in range(len(ids)):
            for target in labels | {max(labels) + 1}:
                if target == cur[i]:
                    continue
                nxt = _canon(cur[:i] + (target,) + cur[i + 1:])
                if nxt not in dist:
                    dist[nxt] = dist[cur] + 1
                    queue.append(nxt)
    raise AssertionError("unreachable")


def pearson_textbook(x, y) -> float:
    n = len(x)
    mx, my = sum(x) / n, sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    return sxy / (sxx * syy) ** 0.5
