"""K-fold cross-validation, repeated realizations and parameter sweeps."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as ssp
from scipy.stats import rankdata

from .graph import RatingGraph, build_rating_graph, inverse_sqrt
from .ingest import Dataset
from .metrics import (
    L_FREE,
    EvaluationContext,
    MetricValue,
    hamming_from_counts,
)
from .recommenders import MethodConfig, Scorer

log = logging.getLogger(__name__)

DEFAULT_SEED = 20180731
DEFAULT_BLOCK = 256
CSV_HEADER = ("method", "metric", "L", "theta", "mean", "stderr", "evaluable_users")


def theta_grid(start: float = 0.0, stop: float = 1.0, step: float = 0.05) -> list[float]:
    """Inclusive grid, rounded to suppress accumulated float drift."""
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 10) for k in range(count)]


@dataclass(frozen=True, eq=False)
class SplitPlan:
    fold_of_link: np.ndarray
    k: int
    seed: int | None = None

    def fold_sizes(self) -> np.ndarray:
        return np.bincount(self.fold_of_link, minlength=self.k)


def make_split(g: RatingGraph, k: int = 10, seed: int = DEFAULT_SEED) -> SplitPlan:
    """Random partition of the links (user-major order) into k near-equal folds."""
    if k < 2:
        raise ValueError(f"need at least 2 folds, got {k}")
    if g.n_links < k:
        raise ValueError(f"cannot split {g.n_links} links into {k} folds")
    rng = np.random.Generator(np.random.PCG64(seed))
    perm = rng.permutation(g.n_links)
    fold = np.empty(g.n_links, dtype=np.int64)
    fold[perm] = np.arange(g.n_links) % k
    return SplitPlan(fold, k, seed)


@dataclass
class ExperimentConfig:
    methods: list[MethodConfig]
    L_values: list[int] = field(default_factory=lambda: [10])
    folds: int = 10
    realizations: int = 20
    seed: int = DEFAULT_SEED
    workers: int = 1
    block_size: int = DEFAULT_BLOCK

    def __post_init__(self):
        self.methods = [
            m if isinstance(m, MethodConfig) else MethodConfig(*m) if isinstance(m, tuple)
            else MethodConfig(m)
            for m in self.methods
        ]
        self.methods = list(dict.fromkeys(self.methods))
        if not self.methods:
            raise ValueError("no methods configured")
        if self.folds < 2:
            raise ValueError(f"folds must be >= 2, got {self.folds}")
        if self.realizations < 1:
            raise ValueError(f"realizations must be >= 1, got {self.realizations}")
        self.L_values = sorted({int(L) for L in self.L_values})
        if not self.L_values or self.L_values[0] < 1:
            raise ValueError("L values must be >= 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["methods"] = [{"method": m.method, "theta": m.theta} for m in self.methods]
        d.pop("workers")
        return d


def _metric_keys(L_values):
    keys = [(m, None) for m in L_FREE]
    for L in L_values:
        keys += [(m, L) for m in ("P", "R", "F1", "H", "I", "N")]
    return keys


@dataclass
class _Curves:
    """Per-user quantities from which every metric at every L is read off.

    Array rows are users; columns index list positions, padded past the end
    of a short list with the last cumulative value (items padded with -1).
    """

    auc: list = field(default_factory=list)
    rs_terms: list = field(default_factory=list)
    items: list = field(default_factory=list)
    hits: list = field(default_factory=list)
    n_probes: list = field(default_factory=list)
    pop: list = field(default_factory=list)
    sim: list = field(default_factory=list)

    def stacked(self):
        return (np.concatenate(self.items), np.concatenate(self.hits),
                np.concatenate(self.n_probes), np.concatenate(self.pop),
                np.concatenate(self.sim))


def _pair_prefix(train: RatingGraph, items: np.ndarray, rows_per_chunk: int = 512) -> np.ndarray:
    """Prefix sums of object-cosine over ordered distinct pairs, per list row."""
    n_users, width = items.shape
    norm = inverse_sqrt(train.object_degree.astype(np.float64))
    out = np.zeros(items.shape)
    chunk = max(1, rows_per_chunk // max(width, 1))
    diag = np.arange(width)
    for start in range(0, n_users, chunk):
        block = items[start : start + chunk]
        valid = block >= 0
        flat = block[valid]
        owner = np.nonzero(valid)[0]
        z = _scale_rows(train.object_matrix[flat], norm[flat])
        # shift each row's user columns by its list owner so z @ z.T is block diagonal
        shifted = z.indices + np.repeat(owner, np.diff(z.indptr)) * train.m
        z = ssp.csr_matrix((z.data, shifted, z.indptr), shape=(flat.size, block.shape[0] * train.m))
        gram = np.zeros((flat.size + 1, flat.size + 1))
        gram[:-1, :-1] = (z @ z.T).toarray()
        pos = np.full(block.shape, flat.size, dtype=np.int64)
        pos[valid] = np.arange(flat.size)
        g3 = gram[pos[:, :, None], pos[:, None, :]]
        g3[:, diag, diag] = 0.0
        out[start : start + chunk] = g3.cumsum(axis=1).cumsum(axis=2)[:, diag, diag]
    return out


def _scale_rows(mat, factors):
    mat = mat.tocsr(copy=True)
    mat.data *= np.repeat(factors, np.diff(mat.indptr))
    return mat


def _collect_block(curves: _Curves, ctx: EvaluationContext, block: np.ndarray,
                   scores: np.ndarray, probe_mask: np.ndarray, lmax: int):
    """Rank a block of users' scores and record their metric curves."""
    train = ctx.train
    scores = scores.copy()
    n = train.n
    rows = np.repeat(np.arange(block.size), train.user_degree[block])
    cols = np.concatenate([train.items_of(u) for u in block])
    # collected objects sink below every candidate without moving candidate ranks
    scores[rows, cols] = -np.inf
    ranks = rankdata(-scores, method="average", axis=1)
    n_cand = n - train.user_degree[block]
    pmask = probe_mask[block]
    n_pos = pmask.sum(axis=1)
    for r, u in enumerate(block):
        pr = ranks[r, pmask[r]]
        n_neg = n_cand[r] - n_pos[r]
        if n_pos[r] and n_neg:
            asc = (n_cand[r] + 1) - pr
            curves.auc.append(float((asc.sum() - n_pos[r] * (n_pos[r] + 1) / 2.0) / (n_pos[r] * n_neg)))
        curves.rs_terms.append(pr / n_cand[r])

    width = min(lmax, n)
    order = np.argsort(-scores, axis=1, kind="stable")[:, :width]
    items = np.where(np.arange(width)[None, :] < n_cand[:, None], order, -1)
    valid = items >= 0
    safe = np.where(valid, items, 0)
    hit = np.take_along_axis(pmask, safe, axis=1) & valid
    deg = np.where(valid, train.object_degree[safe], 0)
    curves.items.append(items)
    curves.hits.append(np.cumsum(hit, axis=1))
    curves.n_probes.append(n_pos)
    curves.pop.append(np.cumsum(deg, axis=1))
    curves.sim.append(_pair_prefix(train, items))


def _metrics_from_curves(c: _Curves, L_values, n: int) -> dict:
    out = {}
    if c.auc:
        out[("AUC", None)] = MetricValue("AUC", None, float(np.mean(c.auc)), len(c.auc))
    terms = [t for t in c.rs_terms if t.size]
    if terms:
        out[("RS", None)] = MetricValue("RS", None, float(np.concatenate(terms).mean()), len(terms))
    if not c.items:
        return out
    items, hits, n_probes, pop, sim = c.stacked()
    users = items.shape[0]
    width = items.shape[1]
    for L in L_values:
        col = min(L, width) - 1
        d = hits[:, col].astype(np.float64)
        p = d / L
        r = d / n_probes
        denom = p + r
        f1 = np.divide(2 * p * r, denom, out=np.zeros_like(p), where=denom > 0)
        out[("P", L)] = MetricValue("P", L, float(p.mean()), users)
        out[("R", L)] = MetricValue("R", L, float(r.mean()), users)
        out[("F1", L)] = MetricValue("F1", L, float(f1.mean()), users)
        if users >= 2:
            trunc = items[:, : col + 1]
            flat = trunc[trunc >= 0]
            counts = np.bincount(flat, minlength=n)
            h = hamming_from_counts(counts, flat.size, users, L)
            out[("H", L)] = MetricValue("H", L, h, users)
        if L >= 2:
            out[("I", L)] = MetricValue("I", L, float((sim[:, col] / (L * (L - 1))).mean()), users)
        out[("N", L)] = MetricValue("N", L, float((pop[:, col] / L).mean()), users)
    return out


@dataclass
class FoldResult:
    """Metric values keyed by (MethodConfig, metric, L); undefined values are NaN."""

    values: dict
    evaluable_users: int
    lists: dict | None = None
    train: RatingGraph | None = None

    def get(self, method: MethodConfig, metric: str, L: int | None = None) -> MetricValue:
        return self.values[(method, metric, None if metric in L_FREE else L)]


def split_dataset(d: Dataset, plan: SplitPlan, fold_index: int):
    """Training graph and evaluation context for one held-out fold."""
    if not 0 <= fold_index < plan.k:
        raise ValueError(f"fold index {fold_index} outside [0, {plan.k})")
    g = d.rating_graph
    links = g.links()
    if plan.fold_of_link.size != links.shape[0]:
        raise ValueError("split plan does not match the rating graph")
    held = plan.fold_of_link == fold_index
    train = build_rating_graph(links[~held], g.m, g.n)
    return train, EvaluationContext.from_links(train, links[held])


def run_fold(d: Dataset, plan: SplitPlan, fold_index: int, cfg: ExperimentConfig,
             keep_lists: bool = False) -> FoldResult:
    train, ctx = split_dataset(d, plan, fold_index)
    users = ctx.evaluable_users()
    scorer = Scorer(train, d.trust_graph)
    lmax = max(cfg.L_values)
    curves = {mc: _Curves() for mc in cfg.methods}
    probe_mask = np.zeros((train.m, train.n), dtype=bool) if users.size else None
    for u in users:
        probe_mask[u, ctx.probes[u]] = True
    for start in range(0, users.size, cfg.block_size):
        block = users[start : start + cfg.block_size]
        resource = None
        for mc in cfg.methods:
            if mc.method in ("CosRA", "CosRA_T"):
                if resource is None:
                    resource = scorer.user_resource(block)
                if mc.method == "CosRA":
                    scores = scorer.spread(resource)
                else:
                    scores = scorer.redistribute(block, resource, mc.theta)
            else:
                scores = scorer.scores(block, mc)
            _collect_block(curves[mc], ctx, block, scores, probe_mask, lmax)

    values = {}
    for mc, c in curves.items():
        got = _metrics_from_curves(c, cfg.L_values, train.n)
        for metric, L in _metric_keys(cfg.L_values):
            values[(mc, metric, L)] = got.get(
                (metric, L), MetricValue(metric, L, math.nan, 0)
            )
    lists = None
    if keep_lists:
        lists = {}
        for mc, c in curves.items():
            items = np.concatenate(c.items) if c.items else np.zeros((0, 0), np.int64)
            lists[mc] = {int(u): row[row >= 0] for u, row in zip(users, items)}
    return FoldResult(values, int(users.size), lists, train if keep_lists else None)


@dataclass(frozen=True)
class ReportRow:
    method: str
    metric: str
    L: int | None
    theta: float | None
    mean: float
    stderr: float
    evaluable_users: int


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


@dataclass
class MetricsReport:
    rows: list[ReportRow]
    provenance: dict
    fold_values: dict = field(default_factory=dict, repr=False)

    def row(self, method: str, metric: str, L: int | None = None, theta: float | None = None) -> ReportRow:
        for r in self.rows:
            if r.method == method and r.metric == metric and (r.L == L or metric in L_FREE):
                if theta is None or r.theta is None or math.isclose(r.theta, theta):
                    return r
        raise KeyError((method, metric, L, theta))

    def value(self, method: str, metric: str, L: int | None = None, theta: float | None = None) -> float:
        return self.row(method, metric, L, theta).mean

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow([_fmt(getattr(r, c)) for c in CSV_HEADER])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text

    def to_json(self, path=None) -> str:
        doc = {
            "provenance": self.provenance,
            "rows": [
                {k: (None if isinstance(v, float) and math.isnan(v) else v)
                 for k, v in asdict(r).items()}
                for r in self.rows
            ],
        }
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text


def _fold_task(args):
    d, cfg, r, f = args
    plan = make_split(d.rating_graph, cfg.folds, cfg.seed + r)
    return r, f, run_fold(d, plan, f, cfg).values


def _nanmean(x: np.ndarray) -> float:
    x = x[~np.isnan(x)]
    return float(x.mean()) if x.size else math.nan


def run_experiment(d: Dataset, cfg: ExperimentConfig, name: str = "") -> MetricsReport:
    """Mean and standard error over realizations of k-fold averages.

    Realization ``r`` uses the split seeded with ``cfg.seed + r``.
    """
    tasks = [(d, cfg, r, f) for r in range(cfg.realizations) for f in range(cfg.folds)]
    slots: list[list[dict | None]] = [[None] * cfg.folds for _ in range(cfg.realizations)]
    if cfg.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            for r, f, vals in pool.map(_fold_task, tasks):
                slots[r][f] = vals
    else:
        for t in tasks:
            r, f, vals = _fold_task(t)
            slots[r][f] = vals
            log.info("realization %d fold %d done", r, f)

    rows, raw = [], {}
    for mc in cfg.methods:
        for metric, L in _metric_keys(cfg.L_values):
            key = (mc, metric, L)
            vals = np.array([[slots[r][f][key].value for f in range(cfg.folds)]
                             for r in range(cfg.realizations)])
            users = np.array([[slots[r][f][key].evaluable_users for f in range(cfg.folds)]
                              for r in range(cfg.realizations)])
            raw[key] = vals
            per_real = np.array([_nanmean(v) for v in vals])
            ok = per_real[~np.isnan(per_real)]
            mean = float(ok.mean()) if ok.size else math.nan
            stderr = float(ok.std(ddof=1) / math.sqrt(ok.size)) if ok.size > 1 else 0.0
            rows.append(ReportRow(
                mc.method, metric, L, mc.theta if mc.uses_theta else None,
                mean, stderr, int(round(users.mean())),
            ))
    prov = {"dataset": name, "config": cfg.to_dict(), "seed": cfg.seed}
    return MetricsReport(rows, prov, raw)


@dataclass
class ThetaSummary:
    best: dict
    mean_best: float
    stderr_best: float


def summarize_theta(report: MetricsReport, grid: Sequence[float], L_values: Sequence[int]) -> ThetaSummary:
    """theta maximising AUC, P, R, F1 (each L) and minimising RS.

    Ties go to the first grid point.
    """
    best = {}

    def pick(metric, L, better):
        vals = [report.value("CosRA_T", metric, L, th) for th in grid]
        idx = [i for i, v in enumerate(vals) if not math.isnan(v)]
        if not idx:
            return
        sign = 1.0 if better == "max" else -1.0
        i = max(idx, key=lambda k: (sign * vals[k], -k))
        best[(metric, L)] = grid[i]

    pick("AUC", None, "max")
    pick("RS", None, "min")
    for L in L_values:
        for metric in ("P", "R", "F1"):
            pick(metric, L, "max")
    thetas = np.array(list(best.values()), dtype=float)
    se = float(thetas.std(ddof=1) / math.sqrt(thetas.size)) if thetas.size > 1 else 0.0
    return ThetaSummary(best, float(thetas.mean()) if thetas.size else math.nan, se)


def sweep_theta(d: Dataset, cfg: ExperimentConfig, grid: Sequence[float] | None = None,
                name: str = "") -> tuple[MetricsReport, ThetaSummary]:
    """Evaluate CosRA+T on every grid point over the same splits."""
    grid = theta_grid() if grid is None else [float(t) for t in grid]
    if not grid:
        raise ValueError("empty theta grid")
    sweep_cfg = ExperimentConfig(
        [MethodConfig("CosRA_T", t) for t in grid], cfg.L_values, cfg.folds,
        cfg.realizations, cfg.seed, cfg.workers, cfg.block_size,
    )
    report = run_experiment(d, sweep_cfg, name)
    return report, summarize_theta(report, grid, sweep_cfg.L_values)


def sweep_length(d: Dataset, cfg: ExperimentConfig, L_values: Sequence[int],
                 name: str = "") -> MetricsReport:
    """All L values are read from one top-max(L) list per user and method."""
    if not L_values:
        raise ValueError("empty L grid")
    sweep_cfg = ExperimentConfig(
        cfg.methods, list(L_values), cfg.folds, cfg.realizations, cfg.seed,
        cfg.workers, cfg.block_size,
    )
    return run_experiment(d, sweep_cfg, name)


def recommended_degree_distribution(d: Dataset, method: MethodConfig, L: int, folds: int = 10,
                                    seed: int = DEFAULT_SEED, fold_index: int = 0):
    """(degree, count) pairs over every evaluable user's top-L list in one fold.

    Degrees are taken in the training graph.  Also returns the fold result
    so callers can cross-check against N(L).
    """
    cfg = ExperimentConfig([method], [L], folds, 1, seed)
    plan = make_split(d.rating_graph, folds, seed)
    res = run_fold(d, plan, fold_index, cfg, keep_lists=True)
    deg = res.train.object_degree
    lists = res.lists[cfg.methods[0]]
    flat = np.concatenate([x[:L] for x in lists.values()]) if lists else np.zeros(0, np.int64)
    values, counts = np.unique(deg[flat], return_counts=True)
    return [(int(v), int(c)) for v, c in zip(values, counts)], res
