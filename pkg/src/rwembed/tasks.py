"""Downstream evaluation: link prediction, node classification, community detection.

Also the multiscale analyses (Markov-time sweeps, added recall) and the
degree/embedding-norm diagnostic.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from sklearn.cluster import KMeans
from sklearn.metrics import f1_score

from .factorize import Embedding
from .graph import Graph, GraphError, HoldoutSplit, LabelSet
from .logreg import LogisticRegression

DEFAULT_K_RATIOS = tuple(round(0.1 * i, 1) for i in range(1, 11))
EXHAUSTIVE_MAX_N = 20_000
_BLOCK_ENTRIES = 1 << 22

_UNIT_RANGE = ("precision", "recall", "micro_f1", "macro_f1", "nmi", "added_recall")


class EvaluationError(ValueError):
    pass


def _ratio_tag(r: float) -> str:
    return f"{r * 100:g}%"


@dataclass
class EvalReport:
    """Metrics of one evaluation plus the configuration that produced them."""

    task: str
    metrics: dict[str, float]
    config: dict = field(default_factory=dict)
    curve: list[dict] | None = None
    predictions: dict | None = None
    flags: dict = field(default_factory=dict)

    def __post_init__(self):
        for name, val in self.metrics.items():
            if isinstance(val, float) and math.isnan(val):
                raise EvaluationError(f"metric {name} is NaN")
            base = name.split("@")[0].split("/")[-1]
            if base in _UNIT_RANGE and not -1e-12 <= val <= 1 + 1e-12:
                raise EvaluationError(f"metric {name}={val} outside [0, 1]")
            if base == "pearson_r" and not -1 - 1e-12 <= val <= 1 + 1e-12:
                raise EvaluationError(f"metric {name}={val} outside [-1, 1]")

    def to_dict(self) -> dict:
        out = {"task": self.task, "metrics": self.metrics, "config": self.config, "flags": self.flags}
        if self.curve is not None:
            out["curve"] = self.curve
        return out

    def to_json(self, path=None) -> str:
        text = json.dumps(_jsonable(self.to_dict()), sort_keys=True, indent=2) + "\n"
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text

    def write_csv(self, path) -> None:
        """Curve as ``k_ratio,k,precision,recall`` rows."""
        if self.curve is None:
            raise EvaluationError(f"{self.task} report has no curve")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["k_ratio", "k", "precision", "recall"])
            for row in self.curve:
                w.writerow([repr(row["k_ratio"]), row["k"], repr(row["precision"]), repr(row["recall"])])


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    return x


def _embedding_config(e: Embedding, extra: dict | None = None) -> dict:
    prov = e.provenance
    cfg = {key: prov.get(key) for key in ("similarity", "tau", "algorithm", "d") if key in prov}
    if extra:
        cfg.update(extra)
    return cfg


# ---------------------------------------------------------------------------
# ranking of candidate pairs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RankedPairs:
    """Candidate pairs sorted by decreasing score, ties by ``(u, v)``."""

    u: np.ndarray
    v: np.ndarray
    score: np.ndarray

    def __len__(self) -> int:
        return len(self.u)

    def keys(self, n: int) -> np.ndarray:
        return self.u * n + self.v


def _snap(s: np.ndarray) -> np.ndarray:
    """Round scores to 40 mantissa bits so float noise (e.g. from a rotation) cannot reorder exact ties."""
    m, e = np.frexp(s)
    return np.ldexp(np.round(m * 2.0**40) / 2.0**40, e)


def _sort_pool(s, u, v, k):
    order = np.lexsort((v, u, -s))[:k]
    return s[order], u[order], v[order]


def top_pairs(
    block_scores: Callable[[int, int], np.ndarray],
    n: int,
    k: int,
    residual: Graph,
    directed: bool = False,
) -> RankedPairs:
    """Exhaustive top-``k`` over all non-residual pairs, computed in row blocks.

    Undirected candidates are unordered pairs ``u < v``; directed ones are
    ordered pairs ``u != v``. ``block_scores(i0, i1)`` returns the
    ``(i1 - i0) x n`` score rows.
    """
    adj = residual.adjacency
    rows = max(1, _BLOCK_ENTRIES // max(n, 1))
    pool_s = np.empty(0)
    pool_u = np.empty(0, dtype=np.int64)
    pool_v = np.empty(0, dtype=np.int64)
    cols = np.arange(n)
    for i0 in range(0, n, rows):
        i1 = min(n, i0 + rows)
        S = _snap(np.array(block_scores(i0, i1), dtype=np.float64))
        r = np.arange(i0, i1)[:, None]
        bad = (cols[None, :] <= r) if not directed else (cols[None, :] == r)
        bad |= adj[i0:i1].toarray() != 0
        S[bad] = -np.inf
        valid = ~bad
        vals = S[valid]
        if len(vals) > k:
            thresh = np.partition(vals, len(vals) - k)[len(vals) - k]
            valid &= S >= thresh
        bu, bv = np.nonzero(valid)
        pool_s = np.concatenate([pool_s, S[bu, bv]])
        pool_u = np.concatenate([pool_u, bu + i0])
        pool_v = np.concatenate([pool_v, bv])
        if len(pool_s) > 2 * k:
            pool_s, pool_u, pool_v = _sort_pool(pool_s, pool_u, pool_v, k)
    pool_s, pool_u, pool_v = _sort_pool(pool_s, pool_u, pool_v, k)
    return RankedPairs(pool_u, pool_v, pool_s)


def sampled_pairs(
    pair_scores: Callable[[np.ndarray, np.ndarray], np.ndarray],
    n: int,
    n_candidates: int,
    residual: Graph,
    seed: int,
    directed: bool = False,
) -> RankedPairs:
    """Uniform sample of non-residual candidate pairs, ranked."""
    rng = np.random.default_rng(seed)
    adj = residual.adjacency
    us, vs = [], []
    seen = set()
    total_pairs = n * (n - 1) if directed else n * (n - 1) // 2
    n_candidates = min(n_candidates, total_pairs - residual.m)
    while len(seen) < n_candidates:
        u = rng.integers(0, n, size=2 * n_candidates)
        v = rng.integers(0, n, size=2 * n_candidates)
        if not directed:
            u, v = np.minimum(u, v), np.maximum(u, v)
        for a, b in zip(u.tolist(), v.tolist()):
            if a == b or (a, b) in seen or adj[a, b] != 0:
                continue
            seen.add((a, b))
            us.append(a)
            vs.append(b)
            if len(seen) == n_candidates:
                break
    u, v = np.array(us, dtype=np.int64), np.array(vs, dtype=np.int64)
    s = _snap(np.asarray(pair_scores(u, v), dtype=np.float64))
    s, u, v = _sort_pool(s, u, v, len(s))
    return RankedPairs(u, v, s)


def precision_recall_curve(correct: np.ndarray, n_removed: int, k_ratios: Sequence[float]) -> list[dict]:
    """precision@k and recall@k with ``k = max(1, floor(r * |removed|))``."""
    hits = np.cumsum(correct)
    curve = []
    for r in k_ratios:
        k = max(1, int(math.floor(r * n_removed + 1e-9)))
        found = int(hits[min(k, len(hits)) - 1]) if len(hits) else 0
        curve.append({"k_ratio": float(r), "k": k, "precision": found / k, "recall": found / n_removed})
    return curve


def _link_report(task, ranked: RankedPairs, split: HoldoutSplit, k_ratios, config, directed) -> EvalReport:
    n = split.residual.n
    if split.n_removed == 0:
        raise EvaluationError("split has no removed edges")
    rs, rd = split.removed_src, split.removed_dst
    if not directed:
        rs, rd = np.minimum(rs, rd), np.maximum(rs, rd)
    correct = np.isin(ranked.keys(n), rs * n + rd)
    curve = precision_recall_curve(correct, split.n_removed, k_ratios)
    metrics = {}
    for row in curve:
        tag = _ratio_tag(row["k_ratio"])
        metrics[f"precision@{tag}"] = row["precision"]
        metrics[f"recall@{tag}"] = row["recall"]
    k_full = split.n_removed
    preds = {
        "u": ranked.u[:k_full].tolist(),
        "v": ranked.v[:k_full].tolist(),
        "correct": correct[:k_full].tolist(),
    }
    return EvalReport(task, metrics, config, curve, preds)


def _check_embedding(e: Embedding, split: HoldoutSplit) -> None:
    if e.n != split.residual.n:
        raise EvaluationError(f"embedding has {e.n} rows but the graph has {split.residual.n} nodes")


def _k_max(split: HoldoutSplit, k_ratios) -> int:
    return max(1, int(math.floor(max(k_ratios) * split.n_removed + 1e-9)))


def dot_scorer(e: Embedding, directed: bool):
    """Block and pair scoring by dot products.

    Without a target matrix the score is ``u_u . u_v``. With one it is
    ``u_u . v_v``; for undirected graphs the two orientations are averaged.
    """
    U, T = e.U, e.target
    sym = e.V is not None and not directed

    def block(i0, i1):
        S = U[i0:i1] @ T.T
        if sym:
            S = 0.5 * (S + T[i0:i1] @ U.T)
        return S

    def pairs(u, v):
        s = np.einsum("ij,ij->i", U[u], T[v])
        if sym:
            s = 0.5 * (s + np.einsum("ij,ij->i", T[u], U[v]))
        return s

    return block, pairs


def _rank(block, pairs, split, k, directed, candidates, n_candidates, sample_seed):
    n = split.residual.n
    if candidates == "auto":
        candidates = "exhaustive" if n <= EXHAUSTIVE_MAX_N else "sampled"
    if candidates == "exhaustive":
        return top_pairs(block, n, k, split.residual, directed), {"candidates": "exhaustive"}
    if candidates == "sampled":
        ranked = sampled_pairs(pairs, n, n_candidates, split.residual, sample_seed, directed)
        return ranked, {"candidates": "sampled", "n_candidates": n_candidates, "sample_seed": sample_seed}
    raise ValueError(f"unknown candidate mode {candidates!r}")


def link_predict_dot(
    e: Embedding,
    split: HoldoutSplit,
    k_ratios: Sequence[float] = DEFAULT_K_RATIOS,
    candidates: str = "auto",
    n_candidates: int = 1_000_000,
    sample_seed: int = 0,
    config: dict | None = None,
) -> EvalReport:
    """Rank non-residual pairs by embedding dot products; precision/recall@k."""
    _check_embedding(e, split)
    directed = split.residual.directed
    block, pairs = dot_scorer(e, directed)
    ranked, cand = _rank(block, pairs, split, _k_max(split, k_ratios), directed, candidates, n_candidates, sample_seed)
    cfg = _embedding_config(e, {"ranking": "dot", "holdout_seed": split.seed, **cand, **(config or {})})
    return _link_report("linkpred", ranked, split, k_ratios, cfg, directed)


def _sample_non_edges(g: Graph, count: int, rng: np.random.Generator, directed: bool):
    adj = g.adjacency
    us, vs = [], []
    while len(us) < count:
        u = rng.integers(0, g.n, size=count)
        v = rng.integers(0, g.n, size=count)
        for a, b in zip(u.tolist(), v.tolist()):
            if a == b or adj[a, b] != 0:
                continue
            us.append(a)
            vs.append(b)
            if len(us) == count:
                break
    return np.array(us, dtype=np.int64), np.array(vs, dtype=np.int64)


def _feature_scale(X: np.ndarray) -> float:
    # one global factor keeps the features rotation-equivariant
    rms = np.sqrt(np.mean(np.sum(X * X, axis=1))) if len(X) else 0.0
    return 1.0 / rms if rms > 0 else 1.0


def link_predict_lr(
    e: Embedding,
    split: HoldoutSplit,
    k_ratios: Sequence[float] = DEFAULT_K_RATIOS,
    seed: int = 0,
    C: float = 1.0,
    candidates: str = "auto",
    n_candidates: int = 1_000_000,
    config: dict | None = None,
) -> EvalReport:
    """Rank pairs by a logistic-regression edge classifier on ``[u_u, u_v]``.

    Positives are the residual edges, negatives an equal number of uniformly
    sampled non-edges; both orientations of every pair are used for
    training and the two orientation probabilities are averaged when
    scoring undirected candidates.
    """
    _check_embedding(e, split)
    g = split.residual
    directed = g.directed
    X = e.U * _feature_scale(e.U)
    rng = np.random.default_rng(seed)
    nu, nv = _sample_non_edges(g, g.m, rng, directed)
    ps, pd = g.src, g.dst
    if directed:
        su = np.concatenate([ps, nu])
        sv = np.concatenate([pd, nv])
        y = np.concatenate([np.ones(len(ps)), np.zeros(len(nu))])
    else:
        su = np.concatenate([ps, pd, nu, nv])
        sv = np.concatenate([pd, ps, nv, nu])
        y = np.concatenate([np.ones(2 * len(ps)), np.zeros(2 * len(nu))])
    feats = np.hstack([X[su], X[sv]])
    clf = LogisticRegression(C=C).fit(feats, y)
    d = X.shape[1]
    a = X @ clf.coef_[:d]
    c = X @ clf.coef_[d:]
    b0 = clf.intercept_

    def prob(z):
        return 1.0 / (1.0 + np.exp(-z))

    def block(i0, i1):
        S = prob(a[i0:i1, None] + c[None, :] + b0)
        if not directed:
            S = 0.5 * (S + prob(c[i0:i1, None] + a[None, :] + b0))
        return S

    def pairs(u, v):
        s = prob(a[u] + c[v] + b0)
        if not directed:
            s = 0.5 * (s + prob(a[v] + c[u] + b0))
        return s

    ranked, cand = _rank(block, pairs, split, _k_max(split, k_ratios), directed, candidates, n_candidates, seed)
    cfg = _embedding_config(e, {"ranking": "logistic", "seed": seed, "holdout_seed": split.seed, **cand, **(config or {})})
    return _link_report("linkpred", ranked, split, k_ratios, cfg, directed)


# ---------------------------------------------------------------------------
# node classification
# ---------------------------------------------------------------------------


def _predict_known_count(scores: np.ndarray, Y_true: np.ndarray) -> np.ndarray:
    counts = Y_true.sum(axis=1)
    order = np.argsort(-scores, axis=1, kind="stable")
    pred = np.zeros_like(Y_true)
    for i, c in enumerate(counts):
        pred[i, order[i, :c]] = True
    return pred


def node_classify(
    e: Embedding | np.ndarray,
    labels: LabelSet,
    train_ratio: float = 0.5,
    repeats: int = 10,
    seed: int = 0,
    C: float = 1.0,
    max_resample: int = 100,
    config: dict | None = None,
) -> EvalReport:
    """One-vs-rest logistic regression on embedding rows; mean micro/macro-F1.

    Multi-class nodes get the argmax class; multi-label nodes get as many
    top-scoring classes as they have true labels.
    """
    X_all = e.U if isinstance(e, Embedding) else np.asarray(e, dtype=np.float64)
    if labels.n_labels < 2:
        raise EvaluationError("classification needs at least two classes")
    nodes = labels.nodes
    if nodes.max() >= X_all.shape[0]:
        raise EvaluationError("label set refers to nodes outside the embedding")
    X = X_all[nodes]
    Y = labels.indicator(nodes)
    if not 0 < train_ratio < 1:
        raise EvaluationError("train_ratio must lie in (0, 1)")
    n_train = int(round(train_ratio * len(nodes)))
    if n_train < 1 or n_train >= len(nodes):
        raise EvaluationError("split leaves an empty training or test set")
    rng = np.random.default_rng(seed)
    micro, macro = [], []
    for _ in range(repeats):
        for _attempt in range(max_resample):
            perm = rng.permutation(len(nodes))
            tr, te = perm[:n_train], perm[n_train:]
            if Y[tr].any(axis=0).all():
                break
        else:
            raise EvaluationError(f"no training split covered every class in {max_resample} draws")
        scale = _feature_scale(X[tr])
        clf = LogisticRegression(C=C).fit(X[tr] * scale, Y[tr])
        scores = clf.decision_function(X[te] * scale)
        pred = _predict_known_count(scores, Y[te])
        micro.append(f1_score(Y[te], pred, average="micro", zero_division=0))
        macro.append(f1_score(Y[te], pred, average="macro", zero_division=0))
    cfg = {"train_ratio": train_ratio, "repeats": repeats, "seed": seed, "C": C, **(config or {})}
    if isinstance(e, Embedding):
        cfg = _embedding_config(e, cfg)
    metrics = {"micro_f1": float(np.mean(micro)), "macro_f1": float(np.mean(macro))}
    return EvalReport("classify", metrics, cfg, flags={"multi_label": labels.multi_label})


# ---------------------------------------------------------------------------
# community detection
# ---------------------------------------------------------------------------


def nmi(a, b) -> float:
    """Normalized mutual information with arithmetic-mean normalization."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError("partitions must have equal length")
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    n = len(a)
    C = np.zeros((ia.max() + 1, ib.max() + 1))
    np.add.at(C, (ia, ib), 1.0)
    P = C / n
    pa, pb = P.sum(axis=1), P.sum(axis=0)
    ha = -np.sum(pa * np.log(pa))
    hb = -np.sum(pb * np.log(pb))
    if ha == 0 and hb == 0:
        return 1.0
    nz = P > 0
    mi = np.sum(P[nz] * np.log(P[nz] / np.outer(pa, pb)[nz]))
    val = mi / (0.5 * (ha + hb))
    return float(min(max(val, 0.0), 1.0))


def community_detect(e: Embedding | np.ndarray, labels: LabelSet, seed: int = 0, restarts: int = 10, config: dict | None = None) -> EvalReport:
    """k-means (k-means++ seeding, best of ``restarts``) into the true number of communities; NMI."""
    X_all = e.U if isinstance(e, Embedding) else np.asarray(e, dtype=np.float64)
    nodes = labels.nodes
    truth = labels.partition()
    K = len(np.unique(truth))
    X = X_all[nodes]
    pred = None
    for attempt in range(5):
        km = KMeans(n_clusters=K, init="k-means++", n_init=restarts, random_state=seed + attempt)
        pred = km.fit_predict(X)
        if len(np.unique(pred)) == K:
            break
    cfg = {"seed": seed, "restarts": restarts, "k": K, **(config or {})}
    if isinstance(e, Embedding):
        cfg = _embedding_config(e, cfg)
    return EvalReport("community", {"nmi": nmi(truth, pred)}, cfg)


# ---------------------------------------------------------------------------
# multiscale analyses
# ---------------------------------------------------------------------------


@dataclass
class SweepResult:
    taus: list[int]
    reports: list[EvalReport]
    best: dict[str, int]

    def curve(self, metric: str) -> np.ndarray:
        return np.array([r.metrics[metric] for r in self.reports])

    def report_at(self, tau: int) -> EvalReport:
        return self.reports[self.taus.index(tau)]

    def summary(self) -> dict:
        return {"taus": self.taus, "best_tau": self.best, "best_value": {m: self.report_at(t).metrics[m] for m, t in self.best.items()}}


def tau_sweep(evaluate: Callable[[int], EvalReport], taus: Sequence[int], workers: int = 1) -> SweepResult:
    """Evaluate every Markov time and record the best one per metric (ties to the smaller time)."""
    taus = [int(t) for t in taus]
    if not taus:
        raise ValueError("empty tau range")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(evaluate, taus))
    else:
        reports = [evaluate(t) for t in taus]
    best = {}
    for metric in reports[0].metrics:
        vals = np.array([r.metrics[metric] for r in reports])
        best[metric] = taus[int(np.argmax(vals))]
    return SweepResult(taus, reports, best)


def _correct_set(report: EvalReport) -> set[tuple[int, int]]:
    if report.predictions is None:
        raise EvaluationError("report carries no predictions")
    p = report.predictions
    return {(u, v) for u, v, c in zip(p["u"], p["v"], p["correct"]) if c}


def _check_order(best: EvalReport, later: EvalReport) -> None:
    tb, tl = best.config.get("tau"), later.config.get("tau")
    if tb is None or tl is None:
        raise EvaluationError("reports must echo their Markov time")
    if not tl > tb:
        raise EvaluationError(f"later Markov time {tl} must exceed the best one {tb}")


def added_recall(best: EvalReport, later: EvalReport) -> float:
    """Share of edges correct at the later time but not at the best time,
    relative to the number correct at the best time (k = 100%)."""
    _check_order(best, later)
    base = _correct_set(best)
    if not base:
        raise EvaluationError("no correct predictions at the best Markov time")
    return len(_correct_set(later) - base) / len(base)


def added_recall_by_class(best: EvalReport, later: EvalReport, communities) -> dict[str, float]:
    """Added recall split into edges inside one community and edges across communities."""
    _check_order(best, later)
    communities = np.asarray(communities)
    base = _correct_set(best)
    if not base:
        raise EvaluationError("no correct predictions at the best Markov time")
    added = _correct_set(later) - base
    inter = sum(1 for u, v in added if communities[u] != communities[v])
    intra = len(added) - inter
    return {
        "intra": intra / len(base),
        "inter": inter / len(base),
        "inter_share": inter / len(added) if added else 0.0,
        "n_added": len(added),
    }


def degree_norm_correlation(e: Embedding, g: Graph, squared: bool = False) -> EvalReport:
    """Pearson correlation of max-normalized degrees and embedding-row norms."""
    if e.n != g.n:
        raise EvaluationError("embedding and graph sizes differ")
    deg = g.degrees()
    norms = np.linalg.norm(e.U, axis=1)
    if squared:
        norms = norms**2
    degenerate = bool(np.ptp(deg) == 0 or np.ptp(norms) <= 1e-15 * max(norms.max(), 1e-300))
    if degenerate:
        r = 0.0
    else:
        x = deg / deg.max()
        y = norms / norms.max()
        r = float(np.clip(np.corrcoef(x, y)[0, 1], -1.0, 1.0))
    cfg = _embedding_config(e, {"squared": squared})
    return EvalReport("degnorm", {"pearson_r": r}, cfg, flags={"degenerate": degenerate})


def directed_eval(
    split: HoldoutSplit,
    labels: LabelSet | None = None,
    similarity_kind: str = "autocov",
    tau: int = 1,
    dim: int = 16,
    damping: float = 0.85,
    k_ratios: Sequence[float] = DEFAULT_K_RATIOS,
    train_ratio: float = 0.5,
    repeats: int = 5,
    seed: int = 0,
) -> EvalReport:
    """Directed (PageRank) embeddings against the symmetrized baseline.

    The directed similarity is factorized as ``U V^T``; link prediction
    scores ordered pairs by ``u_u . v_v``. The baseline embeds ``A + A^T``
    with the standard walk and scores ordered pairs by ``u_u . u_v``.
    Node classification, when labels are given, is run on the source,
    target, concatenated and undirected embeddings.
    """
    from .pipeline import embed_similarity, make_process
    from .similarity import similarity

    g = split.residual
    if not g.directed:
        raise EvaluationError("directed_eval needs a directed graph")
    R = similarity(make_process(g, "pagerank", damping), similarity_kind, tau)
    directed = embed_similarity(R, dim)
    und_graph = g.symmetrized()
    undirected = embed_similarity(similarity(make_process(und_graph, "standard"), similarity_kind, tau), dim)

    metrics = {}
    curves = {}
    for name, e in (("directed", directed), ("undirected", undirected)):
        rep = link_predict_dot(e, split, k_ratios)
        curves[name] = rep.curve
        for key, val in rep.metrics.items():
            metrics[f"{name}/{key}"] = val
    if labels is not None:
        variants = {
            "source": directed.U,
            "target": directed.V,
            "concat": np.hstack([directed.U, directed.V]),
            "undirected": undirected.U,
        }
        for name, X in variants.items():
            rep = node_classify(X, labels, train_ratio, repeats, seed)
            metrics[f"{name}/micro_f1"] = rep.metrics["micro_f1"]
            metrics[f"{name}/macro_f1"] = rep.metrics["macro_f1"]
    cfg = {"similarity": R.kind, "tau": tau, "algorithm": "factorize", "d": dim, "damping": damping, "seed": seed}
    return EvalReport("directed", metrics, cfg, curve=curves["directed"], flags={"undirected_curve": curves["undirected"]})
