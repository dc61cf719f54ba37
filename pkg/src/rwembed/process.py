"""Ergodic random-walk processes and walk-corpus sampling."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .graph import Graph, GraphError
from .kernels import get_backend

WALK_BLOCK = 256


@dataclass(frozen=True, eq=False)
class WalkProcess:
    """Markov chain on the nodes of a graph.

    The transition matrix is ``M = damping * P + (1 - damping)/n * 11^T``
    where ``P`` is the sparse row-normalized adjacency and rows of dangling
    nodes are uniform. The standard walk is ``damping = 1`` with no
    dangling nodes, i.e. ``M = P = D^-1 A``.
    """

    P: sparse.csr_matrix
    stationary: np.ndarray
    kind: str
    damping: float = 1.0
    dangling: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.P.shape[0]

    @property
    def pi(self) -> np.ndarray:
        return self.stationary

    def apply(self, X: np.ndarray) -> np.ndarray:
        """``M @ X`` for a dense ``n x k`` block, in O(nnz * k)."""
        X = np.asarray(X, dtype=np.float64)
        out = self.P @ X
        if self.kind == "standard":
            return out
        out *= self.damping
        col_mean = X.mean(axis=0)
        out += (1.0 - self.damping) * col_mean
        if self.dangling is not None and self.dangling.any():
            out[self.dangling] = col_mean
        return out

    def apply_left(self, x: np.ndarray) -> np.ndarray:
        """Row vector product ``x^T M``."""
        out = self.P.T @ x
        if self.kind == "standard":
            return out
        out = self.damping * out
        total = x.sum()
        dang = x[self.dangling].sum() if self.dangling is not None else 0.0
        out += ((1.0 - self.damping) * (total - dang) + dang) / self.n
        return out

    def dense_transition(self) -> np.ndarray:
        return self.apply(np.eye(self.n))

    def check(self, tol_rows: float = 1e-12, tol_stat: float = 1e-10) -> None:
        ones = np.ones((self.n, 1))
        rows = self.apply(ones).ravel()
        if np.max(np.abs(rows - 1.0)) > tol_rows:
            raise GraphError("transition matrix is not row-stochastic")
        pi = self.stationary
        if np.any(pi <= 0) or abs(pi.sum() - 1.0) > 1e-12:
            raise GraphError("stationary distribution must be positive and sum to one")
        if np.max(np.abs(self.apply_left(pi) - pi)) > tol_stat:
            raise GraphError("stationary distribution is not invariant")


def _row_normalize(adj: sparse.csr_matrix) -> tuple[sparse.csr_matrix, np.ndarray]:
    deg = np.asarray(adj.sum(axis=1)).ravel()
    inv = np.zeros_like(deg)
    nz = deg > 0
    inv[nz] = 1.0 / deg[nz]
    P = sparse.diags(inv) @ adj
    P = sparse.csr_matrix(P)
    P.sort_indices()
    return P, deg


def standard_process(g: Graph) -> WalkProcess:
    """Standard walk: ``M = D^-1 A`` with ``pi_u = deg(u) / vol(G)``."""
    if g.directed:
        raise GraphError("the standard walk needs an undirected graph; use pagerank_process")
    if g.n < 2 or g.m == 0:
        raise GraphError("the standard walk needs at least one edge")
    if not g.is_connected():
        raise GraphError("the standard walk is not ergodic on a disconnected graph")
    if g.is_bipartite():
        warnings.warn("bipartite graph: the standard walk is periodic", stacklevel=2)
    P, deg = _row_normalize(g.adjacency)
    proc = WalkProcess(P, deg / deg.sum(), "standard")
    proc.check()
    return proc


def pagerank_process(g: Graph, damping: float = 0.85, tol: float = 1e-10, max_iter: int = 10_000) -> WalkProcess:
    """PageRank walk on a directed graph; ``pi`` by power iteration."""
    if not g.directed:
        raise GraphError("pagerank_process expects a directed graph")
    if not 0 < damping < 1:
        raise GraphError("damping must lie in (0, 1)")
    P, deg = _row_normalize(g.adjacency)
    proc = WalkProcess(P, np.full(g.n, 1.0 / g.n), "pagerank", float(damping), deg == 0)
    pi = proc.stationary.copy()
    for _ in range(max_iter):
        nxt = proc.apply_left(pi)
        nxt /= nxt.sum()
        resid = np.abs(nxt - pi).sum()
        pi = nxt
        if resid < tol:
            break
    else:
        raise GraphError(f"power iteration did not converge: residual {resid:.3e} after {max_iter} iterations")
    proc = WalkProcess(P, pi, "pagerank", float(damping), deg == 0)
    proc.check()
    return proc


# ---------------------------------------------------------------------------
# corpus sampling
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Corpus:
    """Pairs ``(v_t, v_{t+tau})`` from simulated walks, grouped walk by walk.

    Walk ``i`` contributes the contiguous slice
    ``[i * pairs_per_walk, (i + 1) * pairs_per_walk)`` of ``src``/``dst``.
    """

    src: np.ndarray
    dst: np.ndarray
    n: int
    tau: int
    walk_length: int
    walks_per_node: int
    seed: int
    burn_in: int

    @property
    def pairs_per_walk(self) -> int:
        return self.walk_length - self.tau

    @property
    def n_walks(self) -> int:
        return len(self.src) // self.pairs_per_walk

    def __len__(self) -> int:
        return len(self.src)

    def counts(self) -> np.ndarray:
        """Dense ``n x n`` pair-count matrix ``#(u, v)``."""
        C = np.zeros((self.n, self.n))
        np.add.at(C, (self.src, self.dst), 1.0)
        return C

    def save(self, path) -> None:
        """Text export: a header line then one ``src dst`` pair per line."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(
                f"# n={self.n} tau={self.tau} L={self.walk_length} "
                f"walks_per_node={self.walks_per_node} seed={self.seed} burn_in={self.burn_in}\n"
            )
            np.savetxt(fh, np.column_stack([self.src, self.dst]), fmt="%d")


def _walk_tables(p: WalkProcess):
    P = p.P
    indptr = P.indptr.astype(np.int64)
    indices = P.indices.astype(np.int64)
    keys = np.empty(P.nnz)
    rows = np.repeat(np.arange(p.n), np.diff(indptr))
    for r in range(p.n):
        lo, hi = indptr[r], indptr[r + 1]
        if hi > lo:
            c = np.cumsum(P.data[lo:hi])
            keys[lo:hi] = c / c[-1]
    keys += rows
    dangling = np.zeros(p.n, dtype=np.uint8) if p.dangling is None else p.dangling.astype(np.uint8)
    if p.kind == "standard" and P.nnz:
        dangling = (np.diff(indptr) == 0).astype(np.uint8)
    return indptr, indices, keys, dangling


def walk_uniforms(seed: int, block: int, n_walks: int, steps: int) -> np.ndarray:
    """Uniforms for one block of walks, from a Philox stream keyed by (seed, block)."""
    bitgen = np.random.Philox(key=np.array([int(seed) & (2**64 - 1), int(block)], dtype=np.uint64))
    return np.random.Generator(bitgen).random((n_walks, steps, 2))


def simulate(p: WalkProcess, starts, steps: int, seed: int, backend: str | None = None) -> np.ndarray:
    """Walks of ``steps`` transitions from each start node; shape ``(len(starts), steps + 1)``."""
    kern = get_backend(backend)
    indptr, indices, keys, dangling = _walk_tables(p)
    starts = np.ascontiguousarray(starts, dtype=np.int64)
    out = np.empty((len(starts), steps + 1), dtype=np.int64)
    teleport = 1.0 - p.damping if p.kind != "standard" else 0.0
    for b, lo in enumerate(range(0, len(starts), WALK_BLOCK)):
        hi = min(lo + WALK_BLOCK, len(starts))
        uni = walk_uniforms(seed, b, hi - lo, steps)
        kern.simulate_walks(indptr, indices, keys, dangling, starts[lo:hi], uni, teleport, out[lo:hi])
    return out


def sample_corpus(
    p: WalkProcess,
    tau: int,
    walks_per_node: int = 10,
    walk_length: int = 80,
    seed: int = 0,
    burn_in: int = 10,
    start: str = "nodes",
    backend: str | None = None,
) -> Corpus:
    """Simulate walks and extract all pairs at offset exactly ``tau``.

    ``start='nodes'`` starts ``walks_per_node`` walks at every node and
    discards the first ``burn_in`` steps of each, so the recorded part of
    the walk is approximately stationary. ``start='stationary'`` draws the
    ``n * walks_per_node`` start nodes from ``pi`` instead.
    """
    if tau < 1:
        raise ValueError("tau must be a positive integer")
    if walk_length <= tau:
        raise ValueError(f"walk_length ({walk_length}) must exceed tau ({tau})")
    if walks_per_node < 1:
        raise ValueError("walks_per_node must be at least 1")
    n = p.n
    if start == "nodes":
        starts = np.tile(np.arange(n), walks_per_node)
    elif start == "stationary":
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), 2**31 - 1]))
        starts = rng.choice(n, size=n * walks_per_node, p=p.stationary)
    else:
        raise ValueError(f"unknown start mode {start!r}")
    walks = simulate(p, starts, burn_in + walk_length - 1, seed, backend)[:, burn_in:]
    src = walks[:, : walk_length - tau].ravel()
    dst = walks[:, tau:].ravel()
    return Corpus(src, dst, n, int(tau), int(walk_length), int(walks_per_node), int(seed), int(burn_in))
