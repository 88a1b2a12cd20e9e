"""Twin hierarchies: identical structure, randomly permuted leaf assignment."""

from __future__ import annotations

import numpy as np

from .errors import ArgumentError
from .panel import Grouping


def twin(grouping: Grouping, perm) -> Grouping:
    """Reassign bottom series by shuffling the grouping's columns.

    ``perm`` is a 0-based permutation: new column j takes old column
    ``perm[j]``.  Row count and row sums are unchanged by construction.
    """
    perm = np.asarray(perm)
    m = grouping.m
    if perm.shape != (m,) or not np.array_equal(np.sort(perm), np.arange(m)):
        raise ArgumentError("perm must be a permutation of 0..m-1")
    return Grouping(grouping.matrix[:, perm], grouping.middle_ids)


def twin_batch(groupings, count: int, seed: int):
    """Draw ``count`` independent uniform permutations from a seeded generator.

    Accepts a single grouping (returns a list of twins) or a list of
    groupings sharing the same bottom series, in which case each drawn
    permutation is applied to every grouping (one shared shuffle per twin).
    Identity draws are kept.
    """
    if count < 1:
        raise ArgumentError("count must be at least 1")
    single = isinstance(groupings, Grouping)
    group_list = [groupings] if single else list(groupings)
    if not group_list:
        raise ArgumentError("need at least one grouping")
    m = group_list[0].m
    if any(g.m != m for g in group_list):
        raise ArgumentError("groupings cover different numbers of bottom series")
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        perm = rng.permutation(m)
        twins = [twin(g, perm) for g in group_list]
        out.append(twins[0] if single else twins)
    return out
