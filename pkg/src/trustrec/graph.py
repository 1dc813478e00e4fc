"""Sparse rating and trust networks.

Both graphs are stored as CSR index arrays (``indptr``/``indices``) so a
row is a sorted slice of node indices.  The rating graph keeps a
user-major and an object-major view of the same edge set.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np
import scipy.sparse as ssp


class GraphError(ValueError):
    """Raised when a link references a node outside the graph."""


def _csr_from_pairs(rows: np.ndarray, cols: np.ndarray, n_rows: int, n_cols: int):
    """Sorted, duplicate-free CSR index arrays for a 0/1 matrix."""
    if rows.size:
        key = rows.astype(np.int64) * max(n_cols, 1) + cols.astype(np.int64)
        key = np.unique(key)
        rows = key // max(n_cols, 1)
        cols = key % max(n_cols, 1)
    indptr = np.zeros(n_rows + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n_rows), out=indptr[1:])
    return indptr, cols.astype(np.int64)


def _as_pairs(links: Iterable) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(list(links) if not isinstance(links, np.ndarray) else links, dtype=np.int64)
    if arr.size == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise GraphError(f"links must be (source, target) pairs, got shape {arr.shape}")
    return arr[:, 0], arr[:, 1]


def _check_range(rows, cols, n_rows, n_cols, what):
    bad = (rows < 0) | (rows >= n_rows) | (cols < 0) | (cols >= n_cols)
    if bad.any():
        k = int(np.flatnonzero(bad)[0])
        raise GraphError(
            f"{what} #{k} ({int(rows[k])}, {int(cols[k])}) out of range "
            f"for a {n_rows} x {n_cols} graph"
        )


def inverse(values: np.ndarray) -> np.ndarray:
    """Elementwise 1/x with 1/0 := 0."""
    out = np.zeros(values.shape, dtype=np.float64)
    nz = values != 0
    out[nz] = 1.0 / values[nz]
    return out


def inverse_sqrt(values: np.ndarray) -> np.ndarray:
    """Elementwise 1/sqrt(x) with 0 mapped to 0."""
    out = np.zeros(values.shape, dtype=np.float64)
    nz = values != 0
    out[nz] = 1.0 / np.sqrt(values[nz])
    return out


@dataclass(frozen=True, eq=False)
class RatingGraph:
    """Binary user-object adjacency with both row views.

    ``user_indptr``/``user_indices`` list the objects of each user,
    ``object_indptr``/``object_indices`` the users of each object.
    """

    m: int
    n: int
    user_indptr: np.ndarray
    user_indices: np.ndarray
    object_indptr: np.ndarray
    object_indices: np.ndarray

    @property
    def user_degree(self) -> np.ndarray:
        return np.diff(self.user_indptr)

    @property
    def object_degree(self) -> np.ndarray:
        return np.diff(self.object_indptr)

    @property
    def n_links(self) -> int:
        return int(self.user_indices.size)

    def items_of(self, user: int) -> np.ndarray:
        return self.user_indices[self.user_indptr[user] : self.user_indptr[user + 1]]

    def users_of(self, obj: int) -> np.ndarray:
        return self.object_indices[self.object_indptr[obj] : self.object_indptr[obj + 1]]

    @property
    def user_adj(self) -> list[np.ndarray]:
        return [self.items_of(i) for i in range(self.m)]

    @property
    def object_adj(self) -> list[np.ndarray]:
        return [self.users_of(a) for a in range(self.n)]

    def links(self) -> np.ndarray:
        """All links as an (l, 2) array in user-major order."""
        users = np.repeat(np.arange(self.m, dtype=np.int64), self.user_degree)
        return np.column_stack([users, self.user_indices])

    def matrix(self) -> ssp.csr_matrix:
        """The m x n adjacency as a float CSR matrix."""
        data = np.ones(self.user_indices.size, dtype=np.float64)
        return ssp.csr_matrix(
            (data, self.user_indices, self.user_indptr), shape=(self.m, self.n)
        )

    @cached_property
    def object_matrix(self) -> ssp.csr_matrix:
        """The n x m transpose adjacency, one row per object."""
        data = np.ones(self.object_indices.size, dtype=np.float64)
        return ssp.csr_matrix(
            (data, self.object_indices, self.object_indptr), shape=(self.n, self.m)
        )

    def density(self) -> float:
        return self.n_links / (self.m * self.n) if self.m and self.n else 0.0

    def __eq__(self, other):
        if not isinstance(other, RatingGraph):
            return NotImplemented
        return (
            self.m == other.m
            and self.n == other.n
            and np.array_equal(self.user_indptr, other.user_indptr)
            and np.array_equal(self.user_indices, other.user_indices)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class TrustGraph:
    """Directed user -> user trust links, no self-loops."""

    m: int
    indptr: np.ndarray
    indices: np.ndarray

    @property
    def n_links(self) -> int:
        return int(self.indices.size)

    def trusted_by(self, user: int) -> np.ndarray:
        return self.indices[self.indptr[user] : self.indptr[user + 1]]

    @property
    def out_adj(self) -> list[np.ndarray]:
        return [self.trusted_by(i) for i in range(self.m)]

    def edges(self) -> np.ndarray:
        src = np.repeat(np.arange(self.m, dtype=np.int64), np.diff(self.indptr))
        return np.column_stack([src, self.indices])

    def matrix(self) -> ssp.csr_matrix:
        data = np.ones(self.indices.size, dtype=np.float64)
        return ssp.csr_matrix((data, self.indices, self.indptr), shape=(self.m, self.m))

    def density(self) -> float:
        return self.n_links / (self.m * self.m) if self.m else 0.0

    def __eq__(self, other):
        if not isinstance(other, TrustGraph):
            return NotImplemented
        return (
            self.m == other.m
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
        )

    __hash__ = None


def build_rating_graph(links, m: int, n: int) -> RatingGraph:
    """Build a rating graph from (user, object) pairs; duplicates collapse."""
    users, objs = _as_pairs(links)
    _check_range(users, objs, m, n, "rating link")
    uptr, uidx = _csr_from_pairs(users, objs, m, n)
    urows = np.repeat(np.arange(m, dtype=np.int64), np.diff(uptr))
    optr, oidx = _csr_from_pairs(uidx, urows, n, m)
    for arr in (uptr, uidx, optr, oidx):
        arr.setflags(write=False)
    return RatingGraph(m, n, uptr, uidx, optr, oidx)


def empty_trust_graph(m: int) -> TrustGraph:
    return build_trust_graph([], m)


def build_trust_graph(edges, m: int) -> TrustGraph:
    """Build a trust graph; self-loops and duplicate edges are dropped."""
    src, dst = _as_pairs(edges)
    _check_range(src, dst, m, m, "trust edge")
    keep = src != dst
    ptr, idx = _csr_from_pairs(src[keep], dst[keep], m, m)
    ptr.setflags(write=False)
    idx.setflags(write=False)
    return TrustGraph(m, ptr, idx)


def _common_weight(a: np.ndarray, b: np.ndarray, weights: np.ndarray | None) -> float:
    common = np.intersect1d(a, b, assume_unique=True)
    if weights is None:
        return float(common.size)
    return float(weights[common].sum())


def cosine_user_similarity(g: RatingGraph, i: int, j: int) -> float:
    ki, kj = g.user_degree[i], g.user_degree[j]
    if ki == 0 or kj == 0:
        return 0.0
    return _common_weight(g.items_of(i), g.items_of(j), None) / np.sqrt(ki * kj)


def cosine_object_similarity(g: RatingGraph, a: int, b: int) -> float:
    ka, kb = g.object_degree[a], g.object_degree[b]
    if ka == 0 or kb == 0:
        return 0.0
    return _common_weight(g.users_of(a), g.users_of(b), None) / np.sqrt(ka * kb)


def _ra_sum(g: RatingGraph, a: int, b: int) -> float:
    # sum over common collectors of 1/k_user
    return _common_weight(g.users_of(a), g.users_of(b), inverse(g.user_degree))


def cosra_index(g: RatingGraph, a: int, b: int) -> float:
    """Cosine-normalised resource-allocation similarity of two objects."""
    ka, kb = g.object_degree[a], g.object_degree[b]
    if ka == 0 or kb == 0:
        return 0.0
    return _ra_sum(g, a, b) / np.sqrt(ka * kb)


def md_transfer(g: RatingGraph, a: int, b: int) -> float:
    """Mass-diffusion transfer weight from object ``b`` to object ``a``."""
    kb = g.object_degree[b]
    if kb == 0:
        return 0.0
    return _ra_sum(g, a, b) / kb


def hc_transfer(g: RatingGraph, a: int, b: int) -> float:
    """Heat-conduction transfer weight from object ``b`` to object ``a``."""
    ka = g.object_degree[a]
    if ka == 0:
        return 0.0
    return _ra_sum(g, a, b) / ka
