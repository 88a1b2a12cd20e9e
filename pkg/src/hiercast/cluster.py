"""Partitioning (PAM) and agglomerative (Ward) clustering over a distance
matrix, plus conversion of the results into aggregation groupings.

PAM runs the classic BUILD seeding followed by SWAP descent on the total
distance to the nearest medoid; the cluster count is picked by the average
silhouette width.  Ward trees are grown with the Lance-Williams update on
squared distances so the same code applies to DTW inputs.  All tie-breaks
are by lowest index, making every run exactly reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError
from .panel import Grouping


def _check_distance(D: np.ndarray) -> np.ndarray:
    D = np.asarray(D, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ArgumentError("distance matrix must be square")
    return D


@dataclass(frozen=True)
class Partition:
    labels: np.ndarray       # values in 1..k
    medoids: tuple[int, ...]
    asw: float

    def __post_init__(self):
        labels = np.asarray(self.labels)
        object.__setattr__(self, "labels", labels)
        k = len(self.medoids)
        if k and (np.bincount(labels, minlength=k + 1)[1:] == 0).any():
            raise ArgumentError("every cluster must be non-empty")
        if not -1.0 <= self.asw <= 1.0:
            raise ArgumentError("silhouette width out of [-1, 1]")

    @property
    def k(self) -> int:
        return len(self.medoids)


def _assign(D: np.ndarray, medoids: list[int]) -> np.ndarray:
    # ties go to the earlier (lowest-index) medoid: medoids are kept sorted;
    # each medoid belongs to its own cluster so no cluster is empty
    labels = np.argmin(D[:, medoids], axis=1)
    for mi, med in enumerate(medoids):
        labels[med] = mi
    return labels


def _total_cost(D: np.ndarray, medoids: list[int]) -> float:
    return float(D[:, medoids].min(axis=1).sum())


def silhouette_width(D: np.ndarray, labels: np.ndarray) -> float:
    """Mean of (b - a)/max(a, b); singleton members score zero."""
    D = _check_distance(D)
    labels = np.asarray(labels)
    ks = np.unique(labels)
    scores = np.zeros(len(labels))
    for i in range(len(labels)):
        own = labels == labels[i]
        n_own = own.sum()
        if n_own == 1:
            continue
        a = D[i, own].sum() / (n_own - 1)
        b = np.inf
        for c in ks:
            if c == labels[i]:
                continue
            other = labels == c
            b = min(b, D[i, other].mean())
        denom = max(a, b)
        scores[i] = 0.0 if denom == 0.0 else (b - a) / denom
    return float(scores.mean())


def pam(D: np.ndarray, k: int, cost_trace: list | None = None) -> Partition:
    """Partition around medoids: greedy BUILD then SWAP to a local optimum.

    ``cost_trace`` (if given) collects the total cost after BUILD and after
    every accepted swap.
    """
    D = _check_distance(D)
    m = D.shape[0]
    if not 2 <= k <= m - 1:
        raise ArgumentError(f"k must lie in [2, {m - 1}], got {k}")

    # BUILD: start from the most central point, then greedily add the point
    # with the largest reduction in total cost (ties -> lowest index)
    medoids = [int(np.argmin(D.sum(axis=1)))]
    while len(medoids) < k:
        nearest = D[:, medoids].min(axis=1)
        gains = np.maximum(nearest[None, :] - D, 0.0).sum(axis=1)
        gains[medoids] = -np.inf
        medoids.append(int(np.argmax(gains)))
        medoids.sort()

    # SWAP: take the best strictly improving (medoid, candidate) exchange
    cost = _total_cost(D, medoids)
    if cost_trace is not None:
        cost_trace.append(cost)
    improved = True
    while improved:
        improved = False
        best_swap, best_cost = None, cost
        in_set = np.zeros(m, dtype=bool)
        in_set[medoids] = True
        for mi in range(len(medoids)):
            for h in range(m):
                if in_set[h]:
                    continue
                trial = sorted(medoids[:mi] + medoids[mi + 1 :] + [h])
                c = _total_cost(D, trial)
                if c < best_cost - 1e-15:
                    best_cost, best_swap = c, trial
        if best_swap is not None:
            medoids, cost = best_swap, best_cost
            if cost_trace is not None:
                cost_trace.append(cost)
            improved = True

    labels = _assign(D, medoids) + 1
    return Partition(labels, tuple(medoids), silhouette_width(D, labels))


def select_k_by_asw(D: np.ndarray, k_max: int) -> Partition:
    """Run PAM for k = 2..k_max and keep the best silhouette (ties -> smallest k)."""
    D = _check_distance(D)
    m = D.shape[0]
    k_max = min(k_max, m - 1)
    if k_max < 2:
        raise ArgumentError("need k_max >= 2")
    best = None
    for k in range(2, k_max + 1):
        part = pam(D, k)
        if best is None or part.asw > best.asw:
            best = part
    return best


@dataclass(frozen=True)
class MergeTree:
    """Binary agglomeration over m leaves: 2m-1 nodes, m-1 internal.

    ``children[i]`` holds the two node ids merged at step i into node m+i;
    leaves are nodes 0..m-1 and the root is node 2m-2.
    """

    n_leaves: int
    children: np.ndarray  # (m-1, 2) int
    heights: np.ndarray   # (m-1,)

    @property
    def n_nodes(self) -> int:
        return 2 * self.n_leaves - 1

    def members(self, node: int) -> np.ndarray:
        """Leaf indices under a node."""
        m = self.n_leaves
        stack, leaves = [node], []
        while stack:
            v = stack.pop()
            if v < m:
                leaves.append(v)
            else:
                stack.extend(self.children[v - m])
        return np.array(sorted(leaves))


def ward_tree(D: np.ndarray) -> MergeTree:
    """Agglomerate with the Lance-Williams Ward update on squared distances."""
    D = _check_distance(D)
    m = D.shape[0]
    if m < 2:
        raise ArgumentError("need at least two points")
    d2 = D.astype(float) ** 2
    np.fill_diagonal(d2, np.inf)
    size = np.ones(m, dtype=np.int64)
    node_of = np.arange(m)  # active slot -> tree node id
    active = list(range(m))
    children = np.empty((m - 1, 2), dtype=int)
    heights = np.empty(m - 1)
    for step in range(m - 1):
        # lowest merge cost; row-major argmin over the active block picks the
        # lexicographically smallest pair among ties (active stays sorted)
        idx = np.array(active)
        block = d2[np.ix_(idx, idx)]
        flat = int(np.argmin(block))
        ai, aj = divmod(flat, len(idx))
        if ai > aj:
            ai, aj = aj, ai
        i, j = int(idx[ai]), int(idx[aj])
        children[step] = (node_of[i], node_of[j])
        heights[step] = np.sqrt(max(d2[i, j], 0.0))
        ni, nj = size[i], size[j]
        rest = idx[(idx != i) & (idx != j)]
        if rest.size:
            nl = size[rest]
            val = ((ni + nl) * d2[i, rest] + (nj + nl) * d2[j, rest] - nl * d2[i, j]) / (
                ni + nj + nl
            )
            d2[i, rest] = val
            d2[rest, i] = val
        size[i] = ni + nj
        node_of[i] = m + step
        active.remove(j)
    return MergeTree(m, children, heights)


def grouping_from_partition(part: Partition) -> Grouping:
    """One row per cluster, dropping rows that duplicate the top or a leaf."""
    m = len(part.labels)
    rows, ids = [], []
    for c in range(1, part.k + 1):
        row = (part.labels == c).astype(float)
        total = row.sum()
        if total <= 1 or total >= m:
            continue
        rows.append(row)
        ids.append(f"cluster{c}")
    matrix = np.array(rows) if rows else np.zeros((0, m))
    return Grouping(matrix, tuple(ids))


def grouping_from_tree(tree: MergeTree) -> Grouping:
    """One row per internal node except the root; singletons and duplicates dropped."""
    m = tree.n_leaves
    rows, ids, seen = [], [], set()
    for step in range(m - 2):  # last step is the root
        members = tree.members(m + step)
        if not 1 < len(members) < m:
            continue
        row = np.zeros(m)
        row[members] = 1.0
        key = tuple(members)
        if key in seen:
            continue
        seen.add(key)
        rows.append(row)
        ids.append(f"node{m + step}")
    matrix = np.array(rows) if rows else np.zeros((0, m))
    return Grouping(matrix, tuple(ids))


def grouped_hierarchy(groupings: list[Grouping]) -> Grouping:
    """Union of aggregation constraints with duplicate rows removed."""
    if not groupings:
        raise ArgumentError("need at least one grouping")
    m = groupings[0].m
    rows, ids, seen = [], [], set()
    for g in groupings:
        if g.m != m:
            raise ArgumentError("groupings cover different numbers of bottom series")
        for mid, row in zip(g.middle_ids, g.matrix):
            key = tuple(row.astype(int))
            if key in seen:
                continue
            seen.add(key)
            rows.append(row)
            ids.append(mid)
    # duplicate middle ids can survive the row dedupe; disambiguate
    counts = {}
    unique_ids = []
    for name in ids:
        counts[name] = counts.get(name, 0) + 1
        unique_ids.append(name if counts[name] == 1 else f"{name}.{counts[name]}")
    matrix = np.array(rows) if rows else np.zeros((0, m))
    return Grouping(matrix, tuple(unique_ids))
