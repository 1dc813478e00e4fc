"""Raw TSV parsing, rating binarization and the canonical dataset file."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple

from .graph import RatingGraph, TrustGraph, build_rating_graph, build_trust_graph

log = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 3


class ParseError(ValueError):
    """Malformed input; carries the offending line number when known."""

    def __init__(self, message: str, line: int | None = None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class RawRating(NamedTuple):
    user: str
    obj: str
    rating: int
    line: int | None = None


@dataclass
class LoadReport:
    ratings_read: int = 0
    below_threshold: int = 0
    duplicate_links: int = 0
    trust_read: int = 0
    dropped_trust: int = 0
    self_loops: int = 0
    duplicate_trust: int = 0

    def lines(self) -> list[str]:
        return [f"{k}: {v}" for k, v in vars(self).items()]


@dataclass(eq=False)
class Dataset:
    rating_graph: RatingGraph
    trust_graph: TrustGraph
    user_ids: list[str]
    object_ids: list[str]
    report: LoadReport = field(default_factory=LoadReport)

    @property
    def user_index(self) -> dict[str, int]:
        return {tok: i for i, tok in enumerate(self.user_ids)}

    @property
    def object_index(self) -> dict[str, int]:
        return {tok: i for i, tok in enumerate(self.object_ids)}

    def stats(self) -> dict:
        g, t = self.rating_graph, self.trust_graph
        return {
            "m": g.m,
            "n": g.n,
            "l_R": g.n_links,
            "S_R": g.density(),
            "l_T": t.n_links,
            "S_T": t.density(),
        }

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.rating_graph == other.rating_graph
            and self.trust_graph == other.trust_graph
            and self.user_ids == other.user_ids
            and self.object_ids == other.object_ids
        )

    __hash__ = None


def _records(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            yield lineno, line.split("\t")


def parse_rating(value: str, line: int | None = None, path=None) -> int:
    try:
        r = int(value)
    except ValueError:
        try:
            f = float(value)
        except ValueError:
            raise ParseError(f"rating {value!r} is not a number", line, path) from None
        if not f.is_integer():
            raise ParseError(f"rating {value!r} is not an integer", line, path)
        r = int(f)
    if not 1 <= r <= 5:
        raise ParseError(f"rating {r} outside [1, 5]", line, path)
    return r


def read_raw_ratings(path) -> list[RawRating]:
    """Read ``user<TAB>object<TAB>rating`` lines."""
    out = []
    for lineno, fields in _records(path):
        if len(fields) != 3:
            raise ParseError(f"expected 3 tab-separated fields, got {len(fields)}", lineno, path)
        user, obj, rating = (f.strip() for f in fields)
        out.append(RawRating(user, obj, parse_rating(rating, lineno, path), lineno))
    return out


def read_raw_trust(path) -> list[tuple[str, str]]:
    """Read ``truster<TAB>trustee`` lines."""
    out = []
    for lineno, fields in _records(path):
        if len(fields) != 2:
            raise ParseError(f"expected 2 tab-separated fields, got {len(fields)}", lineno, path)
        out.append((fields[0].strip(), fields[1].strip()))
    return out


def threshold_ratings(ratings: Iterable[RawRating], threshold: int = DEFAULT_THRESHOLD):
    """Keep (user, object) for every rating >= threshold."""
    kept = []
    for r in ratings:
        if not 1 <= r.rating <= 5:
            raise ParseError(f"rating {r.rating} outside [1, 5]", r.line)
        if r.rating >= threshold:
            kept.append((r.user, r.obj))
    return kept


def assemble_dataset(kept_links, trust_edges, report: LoadReport | None = None) -> Dataset:
    """Index users and objects by first appearance and build both graphs.

    Trust edges touching a user without kept ratings are dropped and counted.
    """
    report = report if report is not None else LoadReport()
    users: dict[str, int] = {}
    objects: dict[str, int] = {}
    pairs = []
    for u, o in kept_links:
        i = users.setdefault(u, len(users))
        a = objects.setdefault(o, len(objects))
        pairs.append((i, a))
    g = build_rating_graph(pairs, len(users), len(objects))
    report.duplicate_links += len(pairs) - g.n_links

    edges = []
    for src, dst in trust_edges:
        report.trust_read += 1
        if src not in users or dst not in users:
            report.dropped_trust += 1
            continue
        if src == dst:
            report.self_loops += 1
            continue
        edges.append((users[src], users[dst]))
    t = build_trust_graph(edges, len(users))
    report.duplicate_trust += len(edges) - t.n_links
    return Dataset(g, t, list(users), list(objects), report)


def load_raw(ratings_path, trust_path=None, threshold: int = DEFAULT_THRESHOLD) -> Dataset:
    ratings = read_raw_ratings(ratings_path)
    kept = threshold_ratings(ratings, threshold)
    report = LoadReport(ratings_read=len(ratings), below_threshold=len(ratings) - len(kept))
    trust = read_raw_trust(trust_path) if trust_path is not None else []
    return assemble_dataset(kept, trust, report)


# canonical format: whitespace-separated records, ID tokens after a tab
def write_canonical(d: Dataset, path) -> None:
    g, t = d.rating_graph, d.trust_graph
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"users {g.m} objects {g.n}\n")
        for i, tok in enumerate(d.user_ids):
            fh.write(f"U {i}\t{tok}\n")
        for a, tok in enumerate(d.object_ids):
            fh.write(f"O {a}\t{tok}\n")
        for u, o in g.links():
            fh.write(f"R {u} {o}\n")
        for i, j in t.edges():
            fh.write(f"T {i} {j}\n")


def _ints(fields, lineno, path, expect):
    try:
        return [int(x) for x in fields]
    except ValueError:
        raise ParseError(f"expected {expect}", lineno, path) from None


def read_canonical(path) -> Dataset:
    path = Path(path)
    report = LoadReport()
    m = n = None
    user_ids: dict[int, str] = {}
    object_ids: dict[int, str] = {}
    links, trust = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            if m is None:
                f = line.split()
                if len(f) != 4 or f[0] != "users" or f[2] != "objects":
                    raise ParseError("expected header 'users <m> objects <n>'", lineno, path)
                m, n = _ints([f[1], f[3]], lineno, path, "integer counts in header")
                continue
            tag = line[:2]
            if tag in ("U ", "O "):
                head, sep, tok = line.partition("\t")
                f = head.split()
                if not sep or len(f) != 2:
                    raise ParseError(f"expected '{tag[0]} <index><TAB><token>'", lineno, path)
                (idx,) = _ints(f[1:], lineno, path, "integer index")
                table, limit = (user_ids, m) if tag == "U " else (object_ids, n)
                if not 0 <= idx < limit or idx in table:
                    raise ParseError(f"bad or repeated index {idx}", lineno, path)
                table[idx] = tok
            elif tag in ("R ", "T "):
                f = line.split()
                if len(f) != 3:
                    raise ParseError(
                        f"expected '{tag[0]} <index> <index>', got {len(f)} fields", lineno, path
                    )
                a, b = _ints(f[1:], lineno, path, "integer indices")
                limit = n if tag == "R " else m
                if not (0 <= a < m and 0 <= b < limit):
                    raise ParseError(f"index out of range in {line!r}", lineno, path)
                (links if tag == "R " else trust).append((a, b))
            else:
                raise ParseError(f"unknown record {line.split()[0]!r}", lineno, path)
    if m is None:
        raise ParseError("missing header", None, path)
    if len(user_ids) != m or len(object_ids) != n:
        raise ParseError("ID map does not cover every user and object", None, path)

    g = build_rating_graph(links, m, n)
    t = build_trust_graph(trust, m)
    report.duplicate_links = len(links) - g.n_links
    report.duplicate_trust = len(trust) - t.n_links
    if report.duplicate_links or report.duplicate_trust:
        log.warning(
            "%s: collapsed %d duplicate rating and %d duplicate trust lines",
            path, report.duplicate_links, report.duplicate_trust,
        )
    return Dataset(
        g, t, [user_ids[i] for i in range(m)], [object_ids[a] for a in range(n)], report
    )
