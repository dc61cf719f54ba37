"""Dense random-walk similarity matrices: PMI and autocovariance."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .graph import Graph
from .process import WalkProcess

MAX_DENSE_NODES = 60_000


@dataclass(frozen=True, eq=False)
class SimilarityMatrix:
    """Dense ``n x n`` similarity tagged with its kind and Markov time.

    ``tau`` is an int for a single Markov time, or a descriptor string
    such as ``"lme1..10/b5"`` for aggregations. PMI values may contain
    ``-inf`` where the transition probability is zero.
    """

    values: np.ndarray
    kind: str
    tau: int | str
    process_kind: str = "standard"

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def asymmetry(self) -> float:
        R = self.values
        fin = np.isfinite(R) & np.isfinite(R.T)
        diff = np.where(fin, np.abs(R - R.T), 0.0)
        if np.any(np.isfinite(R) != np.isfinite(R.T)):
            return np.inf
        return float(diff.max()) if diff.size else 0.0

    def save(self, path) -> None:
        """Binary dump: one JSON-ish header line then row-major float64."""
        with open(path, "wb") as fh:
            fh.write(f"n={self.n} kind={self.kind} tau={self.tau}\n".encode())
            fh.write(np.ascontiguousarray(self.values, dtype="<f8").tobytes())

    def save_text(self, path) -> None:
        if self.n > 100:
            raise ValueError("text dumps are limited to n <= 100")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"# n={self.n} kind={self.kind} tau={self.tau}\n")
            np.savetxt(fh, self.values, fmt="%.17g")

    @classmethod
    def load(cls, path) -> SimilarityMatrix:
        with open(path, "rb") as fh:
            header = fh.readline().decode().split()
            meta = dict(item.split("=", 1) for item in header)
            n = int(meta["n"])
            vals = np.frombuffer(fh.read(), dtype="<f8").reshape(n, n).copy()
        tau = meta["tau"]
        return cls(vals, meta["kind"], int(tau) if tau.isdigit() else tau)


def _check_size(p: WalkProcess, max_nodes: int) -> None:
    if p.n > max_nodes:
        raise MemoryError(f"refusing to build a dense {p.n}x{p.n} similarity (cap {max_nodes})")


def transition_powers(p: WalkProcess, taus, max_nodes: int = MAX_DENSE_NODES) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(tau, M^tau)`` for increasing ``taus`` by repeated sparse products."""
    _check_size(p, max_nodes)
    taus = sorted(int(t) for t in taus)
    if taus and taus[0] < 0:
        raise ValueError("Markov time must be non-negative")
    Y = np.eye(p.n)
    cur = 0
    for t in taus:
        while cur < t:
            Y = p.apply(Y)
            cur += 1
        yield t, Y


def _mpow(p: WalkProcess, tau: int, max_nodes: int) -> np.ndarray:
    return next(transition_powers(p, [tau], max_nodes))[1]


def autocov_from_power(p: WalkProcess, Mt: np.ndarray) -> np.ndarray:
    pi = p.stationary
    return pi[:, None] * Mt - np.outer(pi, pi)


def pmi_from_power(p: WalkProcess, Mt: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(Mt / p.stationary[None, :])


def autocovariance(p: WalkProcess, tau: int, max_nodes: int = MAX_DENSE_NODES) -> SimilarityMatrix:
    """``R = Pi M^tau - pi pi^T``; ``tau = 0`` gives ``diag(pi) - pi pi^T``."""
    if tau < 0:
        raise ValueError("tau must be non-negative")
    R = autocov_from_power(p, _mpow(p, tau, max_nodes))
    return SimilarityMatrix(R, "autocovariance", int(tau), p.kind)


def pmi(p: WalkProcess, tau: int, max_nodes: int = MAX_DENSE_NODES) -> SimilarityMatrix:
    """``R = log(Pi M^tau) - log(pi pi^T) = log(M^tau / pi_v)``; zeros map to ``-inf``."""
    if tau < 1:
        raise ValueError("PMI needs tau >= 1")
    R = pmi_from_power(p, _mpow(p, tau, max_nodes))
    return SimilarityMatrix(R, "pmi", int(tau), p.kind)


def pmi_lemma1(g: Graph, tau: int) -> SimilarityMatrix:
    """PMI of the standard walk as ``log(vol(G) (D^-1 A)^tau D^-1)``.

    Uses a dense matrix power of the adjacency, independent of
    :func:`pmi`; kept as a cross-check.
    """
    if g.directed:
        raise ValueError("the closed form holds for undirected graphs")
    if tau < 1:
        raise ValueError("PMI needs tau >= 1")
    A = g.adjacency.toarray()
    deg = A.sum(axis=1)
    M = A / deg[:, None]
    with np.errstate(divide="ignore"):
        R = np.log(deg.sum() * np.linalg.matrix_power(M, tau) / deg[None, :])
    return SimilarityMatrix(R, "pmi", int(tau), "standard")


def line_pmi(p: WalkProcess, b: int) -> SimilarityMatrix:
    """Shifted PMI at Markov time one, ``R(1) - log b``."""
    R = pmi(p, 1)
    return SimilarityMatrix(R.values - np.log(b), "pmi", f"line/b{b}", p.kind)


def log_mean_exp_pmi(p: WalkProcess, tau_max: int, shift_b: int = 1, max_nodes: int = MAX_DENSE_NODES) -> SimilarityMatrix:
    """``log((1/T) sum_{tau=1..T} exp(R(tau))) - log b``.

    Accumulated with ``logaddexp`` over the PMI matrices, so ``-inf``
    entries contribute exactly zero.
    """
    if tau_max < 1 or shift_b < 1:
        raise ValueError("tau_max and shift_b must be >= 1")
    acc = None
    for _, Mt in transition_powers(p, range(1, tau_max + 1), max_nodes):
        R = pmi_from_power(p, Mt)
        acc = R if acc is None else np.logaddexp(acc, R)
    vals = acc - np.log(tau_max) - np.log(shift_b)
    return SimilarityMatrix(vals, "pmi", f"lme1..{tau_max}/b{shift_b}", p.kind)


def mean_autocovariance(p: WalkProcess, tau_max: int, max_nodes: int = MAX_DENSE_NODES) -> SimilarityMatrix:
    """``(1/T) sum_{tau=1..T} R(tau) = Pi ((1/T) sum M^tau) - pi pi^T``."""
    if tau_max < 1:
        raise ValueError("tau_max must be >= 1")
    S = np.zeros((p.n, p.n))
    for _, Mt in transition_powers(p, range(1, tau_max + 1), max_nodes):
        S += Mt
    vals = autocov_from_power(p, S / tau_max)
    return SimilarityMatrix(vals, "autocovariance", f"mean1..{tau_max}", p.kind)


def similarity(p: WalkProcess, kind: str, tau: int, aggregation: str = "none") -> SimilarityMatrix:
    """Dispatch on ``kind`` ('pmi' or 'autocov') and aggregation ('none', 'mean', 'log-mean-exp')."""
    kind = normalize_kind(kind)
    if aggregation == "none":
        return pmi(p, tau) if kind == "pmi" else autocovariance(p, tau)
    if aggregation in ("mean", "log-mean-exp"):
        return log_mean_exp_pmi(p, tau) if kind == "pmi" else mean_autocovariance(p, tau)
    raise ValueError(f"unknown aggregation {aggregation!r}")


def normalize_kind(kind: str) -> str:
    k = kind.lower()
    if k in ("pmi",):
        return "pmi"
    if k in ("autocov", "autocovariance"):
        return "autocovariance"
    raise ValueError(f"unknown similarity kind {kind!r}")


def similarity_series(p: WalkProcess, kind: str, taus, max_nodes: int = MAX_DENSE_NODES) -> Iterator[SimilarityMatrix]:
    """Similarity matrices for increasing ``taus``, sharing the matrix powers."""
    kind = normalize_kind(kind)
    for t, Mt in transition_powers(p, taus, max_nodes):
        if kind == "pmi":
            yield SimilarityMatrix(pmi_from_power(p, Mt), "pmi", t, p.kind)
        else:
            yield SimilarityMatrix(autocov_from_power(p, Mt), "autocovariance", t, p.kind)
