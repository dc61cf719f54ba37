"""Canned desk-scale experiments on synthetic graphs.

Each experiment runs end to end, computes its summary metrics and checks
one qualitative or exact property. They back the ``repro`` subcommand and
the acceptance tests.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import tasks
from .factorize import factorize, reconstruction_error, top_eigenpairs
from .graph import (
    LabelSet,
    generate_directed_sbm,
    generate_hierarchical_sbm,
    generate_sbm,
    karate_club,
    plant_hubs,
    split_holdout,
)
from .pipeline import embed, factorized_series
from .process import sample_corpus, standard_process
from .sample_embed import TrainerConfig, fixed_point_autocov, train
from .similarity import autocovariance, log_mean_exp_pmi, pmi, pmi_lemma1


@dataclass
class ExperimentResult:
    name: str
    passed: bool
    metrics: dict = field(default_factory=dict)
    detail: str = ""
    seconds: float = 0.0

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _hub_sbm(seed: int):
    g = generate_sbm([50, 50], 0.15, 0.02, seed=seed)
    g, hubs = plant_hubs(g, 20, seed=seed)
    return g, hubs


def _best_tau(split, kind: str, taus, dim: int):
    """Factorization sweep; best Markov time by precision@100% (ties to the smaller one)."""
    best = None
    for tau, e in factorized_series(split.residual, kind, taus, dim):
        rep = tasks.link_predict_dot(e, split)
        prec = rep.metrics["precision@100%"]
        if best is None or prec > best[1]:
            best = (tau, prec, e, rep)
    return best


def lemma1(taus=(1, 2, 3, 5, 10), tol: float = 1e-10) -> ExperimentResult:
    """Two PMI formulas agree on the karate club."""
    g = karate_club()
    p = standard_process(g)
    worst = 0.0
    masks_equal = True
    for tau in taus:
        a = pmi(p, tau).values
        b = pmi_lemma1(g, tau).values
        fa, fb = np.isfinite(a), np.isfinite(b)
        masks_equal &= bool(np.array_equal(fa, fb))
        worst = max(worst, float(np.max(np.abs(a[fa & fb] - b[fa & fb]))))
    ok = masks_equal and worst < tol
    return ExperimentResult("lemma1", ok, {"max_abs_diff": worst, "masks_equal": masks_equal}, f"max |diff| {worst:.2e}")


def eckart_young(tau: int = 3, dim: int = 16, tol: float = 1e-8) -> ExperimentResult:
    """Lanczos factorization error equals the dense spectral optimum.

    The optimum over ``U U^T`` of rank ``dim`` is ``||R||^2`` minus the
    squares of the ``dim`` largest nonnegative eigenvalues.
    """
    R = autocovariance(standard_process(karate_club()), tau)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        e = factorize(R, dim, method="lanczos")
    err = reconstruction_error(e, R.values)
    lam = np.linalg.eigvalsh(R.values)
    top = np.sort(lam)[::-1][:dim]
    optimum = float(np.sum(R.values**2) - np.sum(np.maximum(top, 0.0) ** 2))
    diff = abs(err - optimum)
    return ExperimentResult("eckart-young", diff < tol, {"error": err, "optimum": optimum, "diff": diff}, f"|err - opt| {diff:.2e}")


def deepwalk(tau_max: int = 10, b: int = 5, tol: float = 1e-10) -> ExperimentResult:
    """log-mean-exp PMI equals ``log(vol/(bT) sum_t (D^-1 A)^t D^-1)``."""
    g = karate_club()
    A = g.adjacency.toarray()
    deg = A.sum(axis=1)
    P = A / deg[:, None]
    S = np.zeros_like(A)
    Pt = np.eye(g.n)
    for _ in range(tau_max):
        Pt = Pt @ P
        S += Pt
    with np.errstate(divide="ignore"):
        direct = np.log(deg.sum() / (b * tau_max) * S / deg[None, :])
    lme = log_mean_exp_pmi(standard_process(g), tau_max, b).values
    fin = np.isfinite(direct)
    same_mask = bool(np.array_equal(fin, np.isfinite(lme)))
    diff = float(np.max(np.abs(direct[fin] - lme[fin])))
    return ExperimentResult("deepwalk", same_mask and diff < tol, {"max_abs_diff": diff}, f"max |diff| {diff:.2e}")


def theorem1(tau: int = 3, epochs: int = 400, lr: float = 0.005, seed: int = 0, tol: float = 0.02) -> ExperimentResult:
    """Full-rank training with the piecewise-linear model recovers the autocovariance.

    Ten-node two-block graph, ``d = n``, one negative, 10^5 pairs. Every
    entry of ``M^tau`` is positive at ``tau = 3`` on this graph, so the
    fixed point is unique for every pair.
    """
    g = generate_sbm([5, 5], 0.8, 0.2, seed=1)
    p = standard_process(g)
    corpus = sample_corpus(p, tau, walks_per_node=1000, walk_length=tau + 10, seed=seed)
    Mt = np.linalg.matrix_power(p.dense_transition(), tau)
    target = fixed_point_autocov(p.pi, Mt)
    cfg = TrainerConfig(dim=g.n, negatives=1, epochs=epochs, lr=lr, seed=seed)
    res = train(corpus, p.pi, cfg, "autocov_piecewise")
    err = float(np.max(np.abs(res.embedding.gram() - target)))
    m = {"max_abs_error": err, "pairs": len(corpus), "min_Mt": float(Mt.min()), "loss_monotone": res.trailing_average_nonincreasing()}
    ok = err < tol and len(corpus) >= 100_000
    return ExperimentResult("theorem1", ok, m, f"max |UV^T - R| {err:.4f} over {len(corpus)} pairs")


def sbm_hubs(seeds=range(10), taus=range(1, 31), dim: int = 16) -> ExperimentResult:
    """Degree-heterogeneous SBM: autocovariance beats PMI in precision and in degree-norm correlation."""
    prec = {"autocovariance": [], "pmi": []}
    corr = {"autocovariance": [], "pmi": []}
    hub_share = []
    for seed in seeds:
        g, hubs = _hub_sbm(seed)
        split = split_holdout(g, 0.2, seed)
        for kind in prec:
            tau, p_at, e, rep = _best_tau(split, kind, taus, dim)
            prec[kind].append(p_at)
            corr[kind].append(tasks.degree_norm_correlation(e, split.residual).metrics["pearson_r"])
            if kind == "autocovariance":
                u, v = np.asarray(rep.predictions["u"]), np.asarray(rep.predictions["v"])
                hub_share.append(float(np.mean(np.isin(u, hubs) | np.isin(v, hubs))))
    m = {
        "precision_autocov": float(np.mean(prec["autocovariance"])),
        "precision_pmi": float(np.mean(prec["pmi"])),
        "r_autocov": float(np.mean(corr["autocovariance"])),
        "r_pmi": float(np.mean(corr["pmi"])),
        "hub_share_top_autocov": float(np.mean(hub_share)),
    }
    ok = m["precision_autocov"] > m["precision_pmi"] and m["r_autocov"] - m["r_pmi"] >= 0.2
    detail = (
        f"precision {m['precision_autocov']:.3f} vs {m['precision_pmi']:.3f}, "
        f"r {m['r_autocov']:.3f} vs {m['r_pmi']:.3f}"
    )
    return ExperimentResult("sbm-hubs", ok, m, detail)


def multiscale(seeds=range(8), tau_max: int = 30, dim: int = 16, min_share: float = 0.6) -> ExperimentResult:
    """Two-level SBM: interior precision peak, and later Markov times add mostly cross-block edges.

    The curve is averaged over seeds. Added correct edges are pooled over
    all later Markov times and all seeds, and classified by whether they
    join two different leaf blocks.
    """
    taus = list(range(1, tau_max + 1))
    curves = []
    added_inter = added_total = added_inter_group = 0
    for seed in seeds:
        g, groups = generate_hierarchical_sbm(2, 2, 16, 0.95, 0.3, 0.01, seed=seed)
        split = split_holdout(g, 0.2, seed)
        reports = [tasks.link_predict_dot(e, split) for _, e in factorized_series(split.residual, "autocov", taus, dim)]
        curve = np.array([r.metrics["precision@100%"] for r in reports])
        curves.append(curve)
        best = int(np.argmax(curve))
        base = tasks._correct_set(reports[best])
        added = set()
        for r in reports[best + 1:]:
            added |= tasks._correct_set(r) - base
        added_total += len(added)
        added_inter += sum(1 for u, v in added if g.blocks[u] != g.blocks[v])
        added_inter_group += sum(1 for u, v in added if groups[u] != groups[v])
    mean_curve = np.mean(curves, axis=0)
    tau_star = taus[int(np.argmax(mean_curve))]
    share = added_inter / added_total if added_total else 0.0
    interior = 1 < tau_star < tau_max
    m = {
        "tau_star": tau_star,
        "curve": mean_curve.tolist(),
        "added_edges": added_total,
        "inter_block_share": share,
        "inter_group_share": added_inter_group / added_total if added_total else 0.0,
    }
    ok = interior and added_total > 0 and share >= min_share
    return ExperimentResult("multiscale", ok, m, f"tau* {tau_star}, inter-block share of added edges {share:.2f} ({added_total} edges)")


def fact_vs_sample(seeds=range(5), taus=range(1, 31), dim: int = 16) -> ExperimentResult:
    """Factorization precision is at least sampling precision for both similarities."""
    res = {"autocovariance": ([], []), "pmi": ([], [])}
    for seed in seeds:
        g, _ = _hub_sbm(seed)
        split = split_holdout(g, 0.2, seed)
        for kind, (fact, samp) in res.items():
            tau, p_at, _, _ = _best_tau(split, kind, taus, dim)
            e = embed(split.residual, kind, tau, "sample", dim, seed=seed)
            fact.append(p_at)
            samp.append(tasks.link_predict_dot(e, split).metrics["precision@100%"])
    m = {}
    ok = True
    for kind, (fact, samp) in res.items():
        m[f"{kind}_factorize"] = float(np.mean(fact))
        m[f"{kind}_sample"] = float(np.mean(samp))
        ok &= m[f"{kind}_factorize"] >= m[f"{kind}_sample"]
    detail = ", ".join(f"{k}: {m[f'{k}_factorize']:.3f} vs {m[f'{k}_sample']:.3f}" for k in res)
    return ExperimentResult("fact-vs-sample", ok, m, detail)


def directed(seeds=range(10), tau: int = 1, dim: int = 16) -> ExperimentResult:
    """Planted directional flow: directed embeddings win at the top of the link ranking.

    Three blocks with arcs mostly running 0 -> 1 -> 2 -> 0. Node
    classification of both embeddings is reported but not asserted.
    """
    P = [[0.1, 0.3, 0.0], [0.0, 0.1, 0.3], [0.3, 0.0, 0.1]]
    rows = []
    for seed in seeds:
        g = generate_directed_sbm([30, 30, 30], 0.0, 0.0, seed=seed, block_probs=P)
        split = split_holdout(g, 0.2, seed)
        rep = tasks.directed_eval(split, LabelSet.from_array(g.blocks), "autocov", tau, dim, seed=seed, k_ratios=(0.1, 1.0))
        mm = rep.metrics
        rows.append([mm["directed/precision@10%"], mm["undirected/precision@10%"], mm["concat/macro_f1"], mm["undirected/macro_f1"]])
    a = np.mean(rows, axis=0)
    m = {
        "directed_precision@10%": float(a[0]),
        "undirected_precision@10%": float(a[1]),
        "concat_macro_f1": float(a[2]),
        "undirected_macro_f1": float(a[3]),
    }
    return ExperimentResult("directed", a[0] > a[1], m, f"precision@10% directed {a[0]:.3f} vs undirected {a[1]:.3f}")


EXPERIMENTS: dict[str, Callable[[], ExperimentResult]] = {
    "sbm-hubs": sbm_hubs,
    "theorem1": theorem1,
    "lemma1": lemma1,
    "eckart-young": eckart_young,
    "multiscale": multiscale,
    "fact-vs-sample": fact_vs_sample,
    "deepwalk": deepwalk,
    "directed": directed,
}


def run(name: str) -> ExperimentResult:
    if name not in EXPERIMENTS:
        raise KeyError(f"unknown experiment {name!r}; available: {', '.join(sorted(EXPERIMENTS))}")
    t = time.perf_counter()
    res = EXPERIMENTS[name]()
    res.seconds = time.perf_counter() - t
    return res
