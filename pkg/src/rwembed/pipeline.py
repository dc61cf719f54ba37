"""Graph -> process -> similarity -> embedding, in one call."""

from __future__ import annotations

import logging
from typing import Iterator

from .factorize import Embedding, clamp_pmi, factorize, factorize_rectangular
from .graph import Graph
from .process import WalkProcess, pagerank_process, sample_corpus, standard_process
from .sample_embed import TrainerConfig, train
from .similarity import SimilarityMatrix, normalize_kind, similarity, similarity_series

logger = logging.getLogger(__name__)


def make_process(g: Graph, kind: str = "auto", damping: float = 0.85) -> WalkProcess:
    if kind == "auto":
        kind = "pagerank" if g.directed else "standard"
    if kind == "standard":
        return standard_process(g)
    if kind == "pagerank":
        return pagerank_process(g, damping)
    raise ValueError(f"unknown process {kind!r}")


def embed_similarity(R: SimilarityMatrix, dim: int, method: str = "auto") -> Embedding:
    """Factorize a similarity, clamping PMI at zero first."""
    if R.kind == "pmi":
        R = clamp_pmi(R)
    if R.process_kind == "pagerank":
        e = factorize_rectangular(R, dim, method)
    else:
        e = factorize(R, dim, method)
    e.provenance["similarity"] = R.kind
    e.provenance["tau"] = R.tau
    return e


def embed(
    g: Graph,
    similarity_kind: str = "autocov",
    tau: int = 3,
    algorithm: str = "factorize",
    dim: int = 128,
    aggregation: str = "none",
    process: str = "auto",
    damping: float = 0.85,
    trainer: TrainerConfig | None = None,
    walks_per_node: int = 10,
    walk_length: int = 80,
    seed: int = 0,
    backend: str | None = None,
) -> Embedding:
    """Embed ``g`` with one choice per framework axis.

    ``algorithm='factorize'`` builds the dense similarity and factorizes
    it; ``'sample'`` simulates a walk corpus and trains ``U, V`` with
    negative sampling (sigmoid model for PMI, piecewise-linear for
    autocovariance).
    """
    kind = normalize_kind(similarity_kind)
    proc = make_process(g, process, damping)
    if algorithm == "factorize":
        R = similarity(proc, kind, tau, aggregation)
        e = embed_similarity(R, dim)
    elif algorithm == "sample":
        if aggregation != "none":
            raise ValueError("aggregated similarities are only available with factorization")
        cfg = trainer or TrainerConfig(dim=dim, seed=seed)
        if cfg.dim != dim:
            raise ValueError("trainer dimension disagrees with dim")
        corpus = sample_corpus(proc, tau, walks_per_node, walk_length, seed, backend=backend)
        variant = "pmi_sigmoid" if kind == "pmi" else "autocov_piecewise"
        result = train(corpus, proc.stationary, cfg, variant, backend=backend)
        e = result.embedding
        e.provenance["losses"] = result.losses
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    e.provenance.update({"algorithm": algorithm, "process": proc.kind, "seed": seed, "aggregation": aggregation})
    return e


def factorized_series(g: Graph, similarity_kind: str, taus, dim: int, process: str = "auto", damping: float = 0.85) -> Iterator[tuple[int, Embedding]]:
    """Factorization embeddings for increasing Markov times, sharing matrix powers."""
    proc = make_process(g, process, damping)
    for R in similarity_series(proc, similarity_kind, taus):
        e = embed_similarity(R, dim)
        e.provenance.update({"algorithm": "factorize", "process": proc.kind})
        yield R.tau, e
