"""Accuracy, diversity and novelty metrics for top-L recommendation.

Only *evaluable* users enter an average: users with at least one training
link and a non-empty probe set.  Every result carries the number of users
that were actually averaged.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

from .graph import RatingGraph, inverse_sqrt
from .recommenders import RecommendationList

METRICS = ("AUC", "RS", "P", "R", "F1", "H", "I", "N")
L_FREE = ("AUC", "RS")


class UndefinedMetric(ValueError):
    """No user (or pair of users) qualifies for the average."""


@dataclass(frozen=True)
class MetricValue:
    name: str
    L: int | None
    value: float
    evaluable_users: int


@dataclass
class EvaluationContext:
    train: RatingGraph
    probes: list[np.ndarray]

    def __post_init__(self):
        if len(self.probes) != self.train.m:
            raise ValueError("need one probe array per user")
        self.probes = [np.unique(np.asarray(p, dtype=np.int64)) for p in self.probes]
        for u, p in enumerate(self.probes):
            if np.intersect1d(p, self.train.items_of(u), assume_unique=True).size:
                raise ValueError(f"probe objects of user {u} overlap the training links")

    @classmethod
    def from_links(cls, train: RatingGraph, test_links) -> "EvaluationContext":
        probes = [[] for _ in range(train.m)]
        for u, o in test_links:
            probes[int(u)].append(int(o))
        return cls(train, probes)

    @property
    def n_probe_links(self) -> int:
        return int(sum(p.size for p in self.probes))

    def evaluable_users(self) -> np.ndarray:
        has_probe = np.array([p.size > 0 for p in self.probes], dtype=bool)
        return np.flatnonzero(has_probe & (self.train.user_degree > 0))


# per-user terms --------------------------------------------------------------

def candidate_ranks(scores: np.ndarray, collected: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Uncollected objects and their 1-based descending ranks, ties averaged."""
    mask = np.ones(scores.size, dtype=bool)
    mask[collected] = False
    cand = np.flatnonzero(mask)
    return cand, rankdata(-scores[cand], method="average")


def user_auc(cand: np.ndarray, desc_ranks: np.ndarray, probes: np.ndarray) -> float | None:
    """Exact probability that a probe outscores a non-probe candidate (ties count half)."""
    n_cand = cand.size
    n_pos = probes.size
    n_neg = n_cand - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    asc = (n_cand + 1) - desc_ranks[np.searchsorted(cand, probes)]
    u_stat = asc.sum() - n_pos * (n_pos + 1) / 2.0
    return float(u_stat / (n_pos * n_neg))


def user_rank_terms(cand: np.ndarray, desc_ranks: np.ndarray, probes: np.ndarray) -> np.ndarray:
    """Relative rank p/l of each probe object among the candidates."""
    if cand.size == 0 or probes.size == 0:
        return np.zeros(0)
    return desc_ranks[np.searchsorted(cand, probes)] / cand.size


def hit_curve(items: np.ndarray, probes: np.ndarray) -> np.ndarray:
    """Cumulative count of probe hits along a ranked list."""
    return np.cumsum(np.isin(items, probes))


def hits_at(curve: np.ndarray, L: int) -> int:
    if curve.size == 0:
        return 0
    return int(curve[min(L, curve.size) - 1])


def prf_terms(hits: int, L: int, n_probes: int) -> tuple[float, float, float]:
    p = hits / L
    r = hits / n_probes
    f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return p, r, f1


def pair_similarity_sums(train: RatingGraph, items: np.ndarray) -> np.ndarray:
    """Prefix sums of object-cosine over ordered distinct pairs of a list.

    Entry ``k`` is the sum over pairs inside ``items[:k + 1]``.
    """
    if items.size == 0:
        return np.zeros(0)
    x = train.object_matrix[items]
    counts = (x @ x.T).toarray()
    np.fill_diagonal(counts, 0.0)
    norm = inverse_sqrt(train.object_degree[items].astype(np.float64))
    sim = counts * norm[:, None] * norm[None, :]
    return np.cumsum(sim, axis=0).cumsum(axis=1).diagonal().copy()


def _items(x) -> np.ndarray:
    if isinstance(x, RecommendationList):
        return np.asarray(x.items, dtype=np.int64)
    return np.asarray(x, dtype=np.int64)


def _row(scores_per_user, u):
    return np.asarray(scores_per_user[u], dtype=np.float64)


# aggregate metrics -----------------------------------------------------------

def auc(ctx: EvaluationContext, scores_per_user) -> MetricValue:
    vals = []
    for u in ctx.evaluable_users():
        cand, ranks = candidate_ranks(_row(scores_per_user, u), ctx.train.items_of(u))
        a = user_auc(cand, ranks, ctx.probes[u])
        if a is not None:
            vals.append(a)
    if not vals:
        raise UndefinedMetric("AUC: no user with both probe and non-probe candidates")
    return MetricValue("AUC", None, float(np.mean(vals)), len(vals))


def ranking_score(ctx: EvaluationContext, scores_per_user) -> MetricValue:
    terms = []
    users = 0
    for u in ctx.evaluable_users():
        cand, ranks = candidate_ranks(_row(scores_per_user, u), ctx.train.items_of(u))
        t = user_rank_terms(cand, ranks, ctx.probes[u])
        if t.size:
            terms.append(t)
            users += 1
    if not terms:
        raise UndefinedMetric("RS: empty probe set")
    return MetricValue("RS", None, float(np.concatenate(terms).mean()), users)


def precision_recall_f1(ctx: EvaluationContext, lists: Mapping[int, object], L: int):
    if L < 1:
        raise ValueError(f"L must be >= 1, got {L}")
    rows = []
    for u in ctx.evaluable_users():
        if u not in lists:
            continue
        hits = hits_at(hit_curve(_items(lists[u]), ctx.probes[u]), L)
        rows.append(prf_terms(hits, L, ctx.probes[u].size))
    if not rows:
        raise UndefinedMetric("P/R/F1: no evaluable user")
    p, r, f = np.mean(rows, axis=0)
    k = len(rows)
    return MetricValue("P", L, float(p), k), MetricValue("R", L, float(r), k), MetricValue("F1", L, float(f), k)


def _nonempty(lists, L):
    values = lists.values() if isinstance(lists, Mapping) else lists
    out = [_items(x)[:L] for x in values]
    return [x for x in out if x.size]


def hamming_from_counts(item_counts: np.ndarray, total_len: int, n_users: int, L: int) -> float:
    """Mean of 1 - C(i, j)/L over ordered distinct pairs.

    ``item_counts[a]`` is the number of lists containing object ``a``.
    """
    overlap = float(np.dot(item_counts, item_counts)) - total_len
    return 1.0 - overlap / (L * n_users * (n_users - 1))


def hamming_distance(lists, L: int) -> MetricValue:
    kept = _nonempty(lists, L)
    if len(kept) < 2:
        raise UndefinedMetric("H: fewer than two users with lists")
    flat = np.concatenate(kept)
    counts = np.bincount(flat)
    return MetricValue("H", L, hamming_from_counts(counts, flat.size, len(kept), L), len(kept))


def intra_similarity(train: RatingGraph, lists, L: int) -> MetricValue:
    if L < 2:
        raise ValueError(f"intra-similarity needs L >= 2, got {L}")
    kept = _nonempty(lists, L)
    if not kept:
        raise UndefinedMetric("I: no lists")
    vals = [pair_similarity_sums(train, x)[-1] / (L * (L - 1)) for x in kept]
    return MetricValue("I", L, float(np.mean(vals)), len(kept))


def popularity(train: RatingGraph, lists, L: int) -> MetricValue:
    kept = _nonempty(lists, L)
    if not kept:
        raise UndefinedMetric("N: no lists")
    deg = train.object_degree
    vals = [deg[x].sum() / L for x in kept]
    return MetricValue("N", L, float(np.mean(vals)), len(kept))


def evaluate_lists(ctx: EvaluationContext, scores_per_user, lists, L: int) -> dict[str, MetricValue]:
    """All eight metrics for one list length; undefined ones are omitted."""
    out = {}
    for fn in (lambda: auc(ctx, scores_per_user), lambda: ranking_score(ctx, scores_per_user)):
        try:
            mv = fn()
            out[mv.name] = mv
        except UndefinedMetric:
            pass
    evaluable = {int(u) for u in ctx.evaluable_users()}
    own = {u: x for u, x in (lists.items() if isinstance(lists, Mapping) else enumerate(lists))
           if u in evaluable}
    calls = [
        lambda: precision_recall_f1(ctx, own, L),
        lambda: (hamming_distance(own, L),),
        lambda: (intra_similarity(ctx.train, own, L),) if L >= 2 else (),
        lambda: (popularity(ctx.train, own, L),),
    ]
    for fn in calls:
        try:
            for mv in fn():
                out[mv.name] = mv
        except UndefinedMetric:
            pass
    return out


def metric_names(Ls: Sequence[int]) -> list[tuple[str, int | None]]:
    out = [(m, None) for m in L_FREE]
    for L in Ls:
        out += [(m, L) for m in METRICS if m not in L_FREE]
    return out
