"""Synthetic rating/trust datasets for desk-scale experiments."""

from __future__ import annotations

import numpy as np

from .graph import build_rating_graph, build_trust_graph
from .ingest import Dataset


def _zipf_weights(n: int, exponent: float, rng) -> np.ndarray:
    w = np.arange(1, n + 1, dtype=np.float64) ** -exponent
    rng.shuffle(w)
    return w / w.sum()


def _user_degrees(m: int, mean: float, exponent: float, max_deg: int, rng) -> np.ndarray:
    # discrete Pareto with minimum 2, rescaled toward the requested mean
    raw = (rng.pareto(exponent - 1.0, size=m) + 1.0) * 2.0
    raw *= mean / raw.mean()
    return np.clip(np.rint(raw), 2, max_deg).astype(np.int64)


def _sample(weights: np.ndarray, k: int, rng) -> np.ndarray:
    k = min(k, int(np.count_nonzero(weights)))
    return rng.choice(weights.size, size=k, replace=False, p=weights)


def power_law_dataset(m: int = 500, n: int = 800, mean_degree: float = 20.0,
                      object_exponent: float = 0.9, user_exponent: float = 2.5,
                      trust_degree: float = 5.0, seed: int = 0) -> Dataset:
    """Heavy-tailed bipartite graph with uniformly random trust links."""
    rng = np.random.default_rng(seed)
    w = _zipf_weights(n, object_exponent, rng)
    deg = _user_degrees(m, mean_degree, user_exponent, n // 2, rng)
    links = [(u, int(o)) for u in range(m) for o in _sample(w, int(deg[u]), rng)]
    n_trust = rng.poisson(trust_degree, size=m)
    edges = [(u, int(v)) for u in range(m) for v in rng.choice(m, size=min(n_trust[u], m - 1), replace=False)]
    return _dataset(links, edges, m, n)


def taste_dataset(m: int = 400, n: int = 600, groups: int = 8, mean_degree: float = 15.0,
                  in_group: float = 0.6, object_exponent: float = 0.8,
                  trust_degree: float = 6.0, trust_in_group: float = 0.7,
                  seed: int = 0) -> Dataset:
    """Users and objects carry a taste group; ratings and trust favour one's own group.

    A rating is drawn from the user's group with probability ``in_group``
    (otherwise from the whole catalogue); a trust link targets a same-group
    user with probability ``trust_in_group`` and a random user otherwise.
    """
    rng = np.random.default_rng(seed)
    user_group = rng.integers(groups, size=m)
    object_group = rng.integers(groups, size=n)
    w = _zipf_weights(n, object_exponent, rng)
    group_w = []
    for gidx in range(groups):
        gw = np.where(object_group == gidx, w, 0.0)
        group_w.append(gw / gw.sum())
    deg = _user_degrees(m, mean_degree, 2.5, n // 4, rng)

    links = []
    for u in range(m):
        k = int(deg[u])
        k_in = rng.binomial(k, in_group)
        chosen = set(_sample(group_w[user_group[u]], k_in, rng).tolist())
        while len(chosen) < k:
            chosen.add(int(rng.choice(n, p=w)))
        links += [(u, o) for o in sorted(chosen)]

    members = [np.flatnonzero(user_group == gidx) for gidx in range(groups)]
    edges = []
    for u in range(m):
        for _ in range(rng.poisson(trust_degree)):
            pool = members[user_group[u]] if rng.random() < trust_in_group else None
            v = int(rng.choice(pool)) if pool is not None else int(rng.integers(m))
            if v != u:
                edges.append((u, v))
    return _dataset(links, edges, m, n)


def _dataset(links, edges, m, n) -> Dataset:
    g = build_rating_graph(links, m, n)
    t = build_trust_graph(edges, m)
    return Dataset(g, t, [f"u{i}" for i in range(m)], [f"o{a}" for a in range(n)])
