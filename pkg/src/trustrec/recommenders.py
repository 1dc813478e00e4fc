"""Diffusion and similarity scoring kernels.

Every kernel follows the same object -> user -> object round trip: a block
of target users' indicator rows is pushed through two sparse, pre-weighted
adjacency matrices.  The n x n transfer or similarity matrices are never
formed.  Rows of a block never interact, so a user's scores do not depend
on which block it was computed in.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as ssp

from .graph import RatingGraph, TrustGraph, empty_trust_graph, inverse, inverse_sqrt

METHODS = ("GR", "UCF", "HC", "MD", "CosRA", "CosRA_T")
_ALIASES = {name.lower(): name for name in METHODS}
_ALIASES.update({"cosra+t": "CosRA_T", "cosrat": "CosRA_T", "cosra-t": "CosRA_T"})


def canonical_method(name: str) -> str:
    try:
        return _ALIASES[name.strip().lower()]
    except KeyError:
        raise ValueError(
            f"unknown method {name!r}; valid names: {', '.join(METHODS)}"
        ) from None


def check_theta(theta: float) -> float:
    theta = float(theta)
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [0, 1], got {theta}")
    return theta


@dataclass(frozen=True)
class MethodConfig:
    method: str
    theta: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "method", canonical_method(self.method))
        object.__setattr__(self, "theta", check_theta(self.theta))

    @property
    def uses_theta(self) -> bool:
        return self.method == "CosRA_T"

    @property
    def label(self) -> str:
        return f"CosRA_T(theta={self.theta:g})" if self.uses_theta else self.method


@dataclass(frozen=True)
class RecommendationList:
    user: int
    items: np.ndarray
    scores: np.ndarray

    def __len__(self):
        return len(self.items)


def _scale(mat: ssp.csr_matrix, rows=None, cols=None) -> ssp.csr_matrix:
    out = mat.copy()
    if rows is not None:
        out.data *= np.repeat(rows, np.diff(out.indptr))
    if cols is not None:
        out.data *= cols[out.indices]
    out.sort_indices()
    return out


def _entry_mask(r: ssp.csr_matrix, rows: np.ndarray, cols: np.ndarray, width: int) -> np.ndarray:
    """Boolean mask over ``r.data`` selecting the listed (row, col) cells."""
    row_of = np.repeat(np.arange(r.shape[0], dtype=np.int64), np.diff(r.indptr))
    keys = row_of * width + r.indices
    return np.isin(keys, rows.astype(np.int64) * width + cols)


class Scorer:
    """Pre-weighted matrices for scoring many users of one training graph."""

    def __init__(self, g: RatingGraph, trust: TrustGraph | None = None):
        if trust is not None and trust.m != g.m:
            raise ValueError(f"trust graph has {trust.m} users, rating graph {g.m}")
        self.g = g
        self.trust = trust if trust is not None else empty_trust_graph(g.m)
        a = g.matrix()
        at = a.T.tocsr()
        at.sort_indices()
        ku = g.user_degree.astype(np.float64)
        ko = g.object_degree.astype(np.float64)
        self._a = a
        self._at = at
        su, so = inverse_sqrt(ku), inverse_sqrt(ko)
        iu, io = inverse(ku), inverse(ko)
        self._su = su
        # object -> user sweeps
        self._cos_up = _scale(at, rows=so, cols=su)
        self._md_up = _scale(at, rows=io)
        self._hc_up = _scale(at, cols=iu)
        # user -> object sweeps
        self._cos_down = _scale(a, rows=su, cols=so)
        self._md_down = _scale(a, rows=iu)
        self._hc_down = _scale(a, cols=io)
        self._popularity = ko

    def _seed(self, users: np.ndarray) -> ssp.csr_matrix:
        return self._a[users]

    def gr(self, users) -> np.ndarray:
        users = np.asarray(users, dtype=np.int64)
        return np.tile(self._popularity, (users.size, 1))

    def ucf(self, users) -> np.ndarray:
        users = np.asarray(users, dtype=np.int64)
        sim = self._seed(users) @ self._at
        sim.sort_indices()
        sim = _scale(sim, rows=self._su[users], cols=self._su)
        sim.data[_entry_mask(sim, np.arange(users.size), users, self.g.m)] = 0.0
        return (sim @ self._a).toarray()

    def md(self, users) -> np.ndarray:
        users = np.asarray(users, dtype=np.int64)
        return (self._seed(users) @ self._md_up @ self._md_down).toarray()

    def hc(self, users) -> np.ndarray:
        users = np.asarray(users, dtype=np.int64)
        return (self._seed(users) @ self._hc_up @ self._hc_down).toarray()

    def user_resource(self, users) -> ssp.csr_matrix:
        """Resource each user receives in the first CosRA sweep, one row per target."""
        users = np.asarray(users, dtype=np.int64)
        r = self._seed(users) @ self._cos_up
        r.sort_indices()
        return r

    def redistribute(self, users, resource: ssp.csr_matrix, theta: float = 1.0) -> np.ndarray:
        """Second CosRA sweep; resource held by trusted users is raised to ``theta``."""
        users = np.asarray(users, dtype=np.int64)
        theta = check_theta(theta)
        r = resource
        t = self.trust
        counts = np.diff(t.indptr)[users]
        if counts.any():
            rows = np.repeat(np.arange(users.size, dtype=np.int64), counts)
            cols = np.concatenate([t.trusted_by(u) for u in users])
            mask = _entry_mask(r, rows, cols, self.g.m)
            if mask.any():
                r = r.copy()
                vals = r.data[mask]
                # 0 ** theta is 0 for every theta, including 0
                pos = vals > 0
                vals[pos] = vals[pos] ** theta
                vals[~pos] = 0.0
                r.data[mask] = vals
        return self.spread(r)

    def spread(self, resource: ssp.csr_matrix) -> np.ndarray:
        """Second CosRA sweep without any trust scaling."""
        return (resource @ self._cos_down).toarray()

    def cosra(self, users) -> np.ndarray:
        return self.spread(self.user_resource(users))

    def cosra_t(self, users, theta: float) -> np.ndarray:
        return self.redistribute(users, self.user_resource(users), theta)

    def scores(self, users, config: MethodConfig) -> np.ndarray:
        """Score matrix of shape (len(users), n) for one method."""
        name = config.method
        if name == "GR":
            return self.gr(users)
        if name == "UCF":
            return self.ucf(users)
        if name == "MD":
            return self.md(users)
        if name == "HC":
            return self.hc(users)
        if name == "CosRA":
            return self.cosra(users)
        return self.cosra_t(users, config.theta)


def score_gr(g: RatingGraph) -> np.ndarray:
    return g.object_degree.astype(np.float64)


def score_ucf(g: RatingGraph, i: int) -> np.ndarray:
    return Scorer(g).ucf([i])[0]


def score_diffusion(g: RatingGraph, i: int, kind: str = "MD") -> np.ndarray:
    kind = kind.upper()
    if kind not in ("MD", "HC"):
        raise ValueError(f"diffusion kind must be MD or HC, got {kind!r}")
    s = Scorer(g)
    return (s.md if kind == "MD" else s.hc)([i])[0]


def score_cosra(g: RatingGraph, i: int) -> np.ndarray:
    return Scorer(g).cosra([i])[0]


def score_cosra_t(g: RatingGraph, t: TrustGraph, i: int, theta: float) -> np.ndarray:
    return Scorer(g, t).cosra_t([i], check_theta(theta))[0]


def score_user(g: RatingGraph, t: TrustGraph | None, i: int, config: MethodConfig) -> np.ndarray:
    return Scorer(g, t).scores([i], config)[0]


def ranked_candidates(scores: np.ndarray, collected: Iterable[int]) -> np.ndarray:
    """Uncollected objects ordered by score descending, ties by index."""
    scores = np.asarray(scores, dtype=np.float64)
    mask = np.ones(scores.size, dtype=bool)
    mask[np.asarray(list(collected) if not isinstance(collected, np.ndarray) else collected,
                    dtype=np.int64)] = False
    cand = np.flatnonzero(mask)
    order = np.argsort(-scores[cand], kind="stable")
    return cand[order]


def top_l(scores: np.ndarray, collected: Iterable[int], L: int, user: int = -1) -> RecommendationList:
    """The ``L`` best uncollected objects."""
    if L < 1:
        raise ValueError(f"L must be >= 1, got {L}")
    items = ranked_candidates(scores, collected)[:L]
    return RecommendationList(user, items, np.asarray(scores, dtype=np.float64)[items])


def top_l_many(scorer: Scorer, users: Sequence[int], config: MethodConfig, L: int):
    users = np.asarray(users, dtype=np.int64)
    s = scorer.scores(users, config)
    return [top_l(s[k], scorer.g.items_of(u), L, int(u)) for k, u in enumerate(users)]
