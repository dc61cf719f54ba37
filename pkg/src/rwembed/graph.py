"""Graph container, edge-list ingestion, synthetic generators and hold-out splits."""

from __future__ import annotations

import json
import logging
import math
import os
import warnings
from dataclasses import dataclass, field
from importlib import resources

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

logger = logging.getLogger(__name__)


class GraphError(ValueError):
    """Raised for malformed graph input or impossible graph operations."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Weighted sparse graph on dense node ids ``0..n-1``.

    Undirected graphs store every edge once with ``src < dst``; the
    adjacency matrix is symmetric. Directed graphs store arcs as given.

    Parameters
    ----------
    n : int
        Number of nodes.
    src, dst : ndarray of int64
        Edge endpoints.
    weight : ndarray of float64
        Strictly positive edge weights.
    directed : bool
    blocks : ndarray of int64, optional
        Planted block (community) of every node, when known.
    id_map : list of str, optional
        Original node label for every dense id.
    """

    n: int
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray
    directed: bool = False
    blocks: np.ndarray | None = None
    id_map: list[str] | None = None
    _adj: sparse.csr_matrix | None = field(default=None, repr=False)

    def __post_init__(self):
        src = np.ascontiguousarray(self.src, dtype=np.int64)
        dst = np.ascontiguousarray(self.dst, dtype=np.int64)
        w = np.ascontiguousarray(self.weight, dtype=np.float64)
        if not (len(src) == len(dst) == len(w)):
            raise GraphError("src, dst and weight must have equal length")
        if len(src) and (src.min() < 0 or dst.min() < 0 or max(src.max(), dst.max()) >= self.n):
            raise GraphError("edge endpoint outside 0..n-1")
        if np.any(w <= 0) or not np.all(np.isfinite(w)):
            raise GraphError("edge weights must be finite and strictly positive")
        if np.any(src == dst):
            raise GraphError("self-loops are not supported")
        if not self.directed:
            lo, hi = np.minimum(src, dst), np.maximum(src, dst)
            src, dst = lo, hi
        keys = src * self.n + dst
        if len(np.unique(keys)) != len(keys):
            raise GraphError("duplicate edges; merge them before building a Graph")
        order = np.argsort(keys, kind="stable")
        for name, arr in (("src", src[order]), ("dst", dst[order]), ("weight", w[order])):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.blocks is not None:
            blocks = np.asarray(self.blocks, dtype=np.int64).copy()
            if blocks.shape != (self.n,):
                raise GraphError("blocks must have one entry per node")
            blocks.setflags(write=False)
            object.__setattr__(self, "blocks", blocks)

    @property
    def m(self) -> int:
        return len(self.src)

    @property
    def adjacency(self) -> sparse.csr_matrix:
        """Adjacency matrix ``A`` (symmetric for undirected graphs)."""
        if self._adj is None:
            if self.directed:
                rows, cols, vals = self.src, self.dst, self.weight
            else:
                rows = np.concatenate([self.src, self.dst])
                cols = np.concatenate([self.dst, self.src])
                vals = np.concatenate([self.weight, self.weight])
            adj = sparse.csr_matrix((vals, (rows, cols)), shape=(self.n, self.n))
            adj.sort_indices()
            object.__setattr__(self, "_adj", adj)
        return self._adj

    def degrees(self) -> np.ndarray:
        """Weighted (out-)degree of every node."""
        return np.asarray(self.adjacency.sum(axis=1)).ravel()

    def edge_keys(self) -> np.ndarray:
        """Integer key ``src * n + dst`` per stored edge, sorted."""
        return self.src * self.n + self.dst

    def is_connected(self) -> bool:
        """Connectivity (weak connectivity for directed graphs)."""
        if self.n <= 1:
            return True
        ncomp, _ = csgraph.connected_components(self.adjacency, directed=self.directed, connection="weak")
        return ncomp == 1

    def is_bipartite(self) -> bool:
        adj = self.adjacency
        if self.directed:
            adj = (adj + adj.T).tocsr()
        color = np.full(self.n, -1, dtype=np.int64)
        indptr, indices = adj.indptr, adj.indices
        for root in range(self.n):
            if color[root] >= 0:
                continue
            color[root] = 0
            stack = [root]
            while stack:
                u = stack.pop()
                for v in indices[indptr[u]:indptr[u + 1]]:
                    if color[v] < 0:
                        color[v] = 1 - color[u]
                        stack.append(v)
                    elif color[v] == color[u]:
                        return False
        return True

    def symmetrized(self) -> Graph:
        """Undirected graph with adjacency ``A + A^T``."""
        if not self.directed:
            return self
        lo = np.minimum(self.src, self.dst)
        hi = np.maximum(self.src, self.dst)
        src, dst, w = _merge_duplicates(lo, hi, self.weight, self.n)
        return Graph(self.n, src, dst, w, directed=False, blocks=self.blocks, id_map=self.id_map)

    def with_edges(self, src, dst, weight) -> Graph:
        """Same node set and metadata, different edges."""
        return Graph(self.n, src, dst, weight, directed=self.directed, blocks=self.blocks, id_map=self.id_map)

    def node_label(self, u: int) -> str:
        return self.id_map[u] if self.id_map is not None else str(u)


@dataclass(frozen=True)
class LabelSet:
    """Node labels; ``assignments[u]`` is the set of label ids of node ``u``."""

    assignments: dict[int, frozenset[int]]
    n_labels: int
    label_names: list[str] | None = None

    @property
    def multi_label(self) -> bool:
        return any(len(s) > 1 for s in self.assignments.values())

    @property
    def nodes(self) -> np.ndarray:
        return np.array(sorted(self.assignments), dtype=np.int64)

    def indicator(self, nodes=None) -> np.ndarray:
        """Binary ``len(nodes) x n_labels`` membership matrix."""
        nodes = self.nodes if nodes is None else nodes
        Y = np.zeros((len(nodes), self.n_labels), dtype=bool)
        for i, u in enumerate(nodes):
            Y[i, list(self.assignments[int(u)])] = True
        return Y

    def partition(self) -> np.ndarray:
        """Single label per node, for community detection."""
        if self.multi_label:
            raise GraphError("community detection needs exactly one label per node")
        return np.array([next(iter(self.assignments[int(u)])) for u in self.nodes], dtype=np.int64)

    @classmethod
    def from_array(cls, labels) -> LabelSet:
        labels = np.asarray(labels, dtype=np.int64)
        uniq = np.unique(labels)
        remap = {int(c): i for i, c in enumerate(uniq)}
        return cls({u: frozenset([remap[int(c)]]) for u, c in enumerate(labels)}, len(uniq), [str(int(c)) for c in uniq])


@dataclass(frozen=True)
class HoldoutSplit:
    residual: Graph
    removed_src: np.ndarray
    removed_dst: np.ndarray
    removed_weight: np.ndarray
    ratio: float
    seed: int

    @property
    def n_removed(self) -> int:
        return len(self.removed_src)

    def removed_keys(self) -> np.ndarray:
        return self.removed_src * self.residual.n + self.removed_dst


def _merge_duplicates(src, dst, w, n):
    keys = np.asarray(src, dtype=np.int64) * n + np.asarray(dst, dtype=np.int64)
    uniq, inv = np.unique(keys, return_inverse=True)
    merged = np.zeros(len(uniq))
    np.add.at(merged, inv, w)
    return uniq // n, uniq % n, merged


# ---------------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------------


def load_edge_list(path, directed: bool = False) -> Graph:
    """Read a ``src dst [weight]`` edge list.

    Node tokens are compacted to ``0..n-1`` in first-appearance order and
    the original tokens are kept in ``Graph.id_map``. Duplicate edges have
    their weights summed (with a warning); self-loops are rejected.
    """
    ids: dict[str, int] = {}
    src, dst, wts = [], [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tok = line.split()
            if len(tok) not in (2, 3):
                raise GraphError(f"{path}:{lineno}: expected 'src dst [weight]', got {len(tok)} fields")
            w = 1.0
            if len(tok) == 3:
                try:
                    w = float(tok[2])
                except ValueError:
                    raise GraphError(f"{path}:{lineno}: non-numeric weight {tok[2]!r}") from None
                if not (w > 0 and math.isfinite(w)):
                    raise GraphError(f"{path}:{lineno}: weight must be positive, got {tok[2]}")
            if tok[0] == tok[1]:
                raise GraphError(f"{path}:{lineno}: self-loop on node {tok[0]!r}")
            for t in tok[:2]:
                if t not in ids:
                    ids[t] = len(ids)
            src.append(ids[tok[0]])
            dst.append(ids[tok[1]])
            wts.append(w)
    if not src:
        raise GraphError(f"{path}: no edges found")
    n = len(ids)
    src, dst, wts = np.array(src), np.array(dst), np.array(wts)
    if not directed:
        src, dst = np.minimum(src, dst), np.maximum(src, dst)
    m_in = len(src)
    src, dst, wts = _merge_duplicates(src, dst, wts, n)
    if len(src) < m_in:
        warnings.warn(f"{path}: {m_in - len(src)} duplicate edge(s) merged by summing weights", stacklevel=2)
    return Graph(n, src, dst, wts, directed=directed, id_map=list(ids))


def write_edge_list(g: Graph, path, src=None, dst=None, weight=None) -> None:
    """Write edges (default: all of ``g``) using the original node labels."""
    src = g.src if src is None else src
    dst = g.dst if dst is None else dst
    weight = g.weight if weight is None else weight
    with open(path, "w", encoding="utf-8") as fh:
        for u, v, w in zip(src, dst, weight):
            fh.write(f"{g.node_label(int(u))} {g.node_label(int(v))} {float(w)!r}\n")


def load_labels(path, g: Graph | None = None) -> LabelSet:
    """Read ``node label1[,label2,...]`` lines; node tokens go through ``g.id_map``."""
    lookup = None
    if g is not None and g.id_map is not None:
        lookup = {tok: i for i, tok in enumerate(g.id_map)}
    names: dict[str, int] = {}
    assign: dict[int, set[int]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tok = line.split()
            if len(tok) != 2:
                raise GraphError(f"{path}:{lineno}: expected 'node label1[,label2,...]'")
            if lookup is not None:
                if tok[0] not in lookup:
                    raise GraphError(f"{path}:{lineno}: unknown node {tok[0]!r}")
                u = lookup[tok[0]]
            else:
                try:
                    u = int(tok[0])
                except ValueError:
                    raise GraphError(f"{path}:{lineno}: non-integer node id {tok[0]!r}") from None
            if g is not None and not 0 <= u < g.n:
                raise GraphError(f"{path}:{lineno}: node {u} outside graph")
            for lab in tok[1].split(","):
                if lab not in names:
                    names[lab] = len(names)
                assign.setdefault(u, set()).add(names[lab])
    if not assign:
        raise GraphError(f"{path}: no labels found")
    return LabelSet({u: frozenset(s) for u, s in assign.items()}, len(names), list(names))


def karate_club() -> Graph:
    """Zachary's karate club (34 nodes, 78 unweighted edges)."""
    with resources.as_file(resources.files("rwembed") / "data" / "karate.edges") as path:
        g = load_edge_list(path)
    # ids in the file are already 0..33 in first-appearance order
    return g


def karate_labels(g: Graph | None = None) -> LabelSet:
    g = karate_club() if g is None else g
    with resources.as_file(resources.files("rwembed") / "data" / "karate.labels") as path:
        return load_labels(path, g)


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


def _attempt_rng(seed: int, attempt: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(attempt)]))


def _sample_blocks(blocks: np.ndarray, prob: np.ndarray, rng: np.random.Generator):
    n = len(blocks)
    iu, ju = np.triu_indices(n, k=1)
    p = prob[blocks[iu], blocks[ju]]
    keep = rng.random(len(iu)) < p
    return iu[keep], ju[keep]


def generate_sbm(sizes, p_intra: float, p_inter: float, seed: int = 0, max_tries: int = 100) -> Graph:
    """Undirected stochastic block model, resampled until connected.

    Every intra-block pair gets an edge with probability ``p_intra`` and
    every inter-block pair with ``p_inter``. Raises ``GraphError`` if no
    connected instance is drawn within ``max_tries`` attempts.
    """
    sizes = [int(s) for s in sizes]
    if not sizes or min(sizes) < 1:
        raise GraphError("every block needs at least one node")
    if not (0 <= p_intra <= 1 and 0 <= p_inter <= 1):
        raise GraphError("probabilities must lie in [0, 1]")
    k = len(sizes)
    prob = np.full((k, k), float(p_inter))
    np.fill_diagonal(prob, float(p_intra))
    return _generate_block_graph(np.repeat(np.arange(k), sizes), prob, seed, max_tries)


def generate_hierarchical_sbm(
    groups: int,
    blocks_per_group: int,
    block_size: int,
    p_block: float,
    p_group: float,
    p_out: float,
    seed: int = 0,
    max_tries: int = 100,
) -> tuple[Graph, np.ndarray]:
    """Two-level SBM: blocks nested inside groups.

    Pairs in the same block connect with ``p_block``, pairs in different
    blocks of the same group with ``p_group``, pairs in different groups
    with ``p_out``. Returns the graph (``blocks`` = fine blocks) and the
    group of every node.
    """
    nb = groups * blocks_per_group
    fine = np.repeat(np.arange(nb), block_size)
    group_of_block = np.arange(nb) // blocks_per_group
    prob = np.where(group_of_block[:, None] == group_of_block[None, :], p_group, p_out)
    np.fill_diagonal(prob, p_block)
    g = _generate_block_graph(fine, prob, seed, max_tries)
    return g, group_of_block[fine]


def _generate_block_graph(blocks, prob, seed, max_tries) -> Graph:
    n = len(blocks)
    for attempt in range(max_tries):
        src, dst = _sample_blocks(blocks, prob, _attempt_rng(seed, attempt))
        g = Graph(n, src, dst, np.ones(len(src)), directed=False, blocks=blocks)
        if g.is_connected():
            return g
        logger.debug("block model draw %d disconnected, retrying", attempt)
    raise GraphError(f"block model stayed disconnected after {max_tries} draws")


def generate_directed_sbm(
    sizes, p_intra: float, p_inter: float, seed: int = 0, max_tries: int = 100, block_probs=None
) -> Graph:
    """Directed block model; arcs drawn independently per ordered pair.

    ``block_probs[i][j]``, when given, is the arc probability from block
    ``i`` to block ``j`` and overrides ``p_intra``/``p_inter``; an
    asymmetric matrix plants a directional flow between blocks.
    """
    sizes = [int(s) for s in sizes]
    k = len(sizes)
    if block_probs is None:
        prob = np.full((k, k), float(p_inter))
        np.fill_diagonal(prob, float(p_intra))
    else:
        prob = np.asarray(block_probs, dtype=np.float64)
        if prob.shape != (k, k):
            raise GraphError(f"block_probs must be {k} x {k}")
    if np.any((prob < 0) | (prob > 1)):
        raise GraphError("probabilities must lie in [0, 1]")
    blocks = np.repeat(np.arange(k), sizes)
    n = len(blocks)
    for attempt in range(max_tries):
        rng = _attempt_rng(seed, attempt)
        p = prob[blocks[:, None], blocks[None, :]]
        np.fill_diagonal(p, 0.0)
        src, dst = np.nonzero(rng.random((n, n)) < p)
        g = Graph(n, src, dst, np.ones(len(src)), directed=True, blocks=blocks)
        if g.is_connected():
            return g
    raise GraphError(f"directed block model stayed disconnected after {max_tries} draws")


def plant_hubs(g: Graph, nodes_per_hub: int, seed: int = 0) -> tuple[Graph, np.ndarray]:
    """Contract ``nodes_per_hub`` random nodes of every block into one hub.

    Parallel edges created by the contraction are merged by summing their
    weights and self-loops are dropped. Returns the contracted graph and
    the ids of the hubs in it.
    """
    if g.directed:
        raise GraphError("hub planting is defined for undirected graphs")
    blocks = g.blocks if g.blocks is not None else np.zeros(g.n, dtype=np.int64)
    block_ids, counts = np.unique(blocks, return_counts=True)
    if nodes_per_hub < 2 or nodes_per_hub > counts.min():
        raise GraphError(f"nodes_per_hub must be in [2, {counts.min()}], got {nodes_per_hub}")
    rng = np.random.default_rng(seed)
    target = np.arange(g.n)
    for b in block_ids:
        members = np.flatnonzero(blocks == b)
        chosen = np.sort(rng.choice(members, size=nodes_per_hub, replace=False))
        target[chosen] = chosen[0]
    survivors = np.flatnonzero(target == np.arange(g.n))
    new_id = np.full(g.n, -1)
    new_id[survivors] = np.arange(len(survivors))
    mapped = new_id[target]
    s, d = mapped[g.src], mapped[g.dst]
    keep = s != d
    s, d = np.minimum(s[keep], d[keep]), np.maximum(s[keep], d[keep])
    n_new = len(survivors)
    s, d, w = _merge_duplicates(s, d, g.weight[keep], n_new)
    hubs = np.unique(mapped[target != np.arange(g.n)])
    id_map = [g.node_label(int(u)) for u in survivors] if g.id_map is not None else None
    out = Graph(n_new, s, d, w, directed=False, blocks=blocks[survivors], id_map=id_map)
    return out, hubs


# ---------------------------------------------------------------------------
# hold-out splitting
# ---------------------------------------------------------------------------


def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        parent[x], x = root, parent[x]
    return root


def split_holdout(g: Graph, ratio: float = 0.2, seed: int = 0) -> HoldoutSplit:
    """Remove ``floor(ratio * m)`` edges while keeping the residual connected.

    Edges are shuffled and visited in order; an edge is removed when it lies
    on a cycle of the current residual graph. This greedy rule removes
    exactly the first non-tree edges (in shuffled order) of the spanning
    tree that Kruskal's algorithm builds over the reversed order, which is
    how it is computed here in near-linear time. Directed graphs keep weak
    connectivity.
    """
    if not 0 < ratio < 1:
        raise GraphError("ratio must lie in (0, 1)")
    if not g.is_connected():
        raise GraphError("hold-out splitting needs a connected graph")
    target = int(math.floor(ratio * g.m + 1e-9))
    order = np.random.default_rng(seed).permutation(g.m)
    parent = list(range(g.n))
    in_tree = np.zeros(g.m, dtype=bool)
    src, dst = g.src.tolist(), g.dst.tolist()
    for e in order[::-1]:
        ru, rv = _find(parent, src[e]), _find(parent, dst[e])
        if ru != rv:
            parent[ru] = rv
            in_tree[e] = True
    removable = order[~in_tree[order]]
    if len(removable) < target:
        raise GraphError(
            f"cannot remove {target} edges without disconnecting the graph; at most {len(removable)} are removable"
        )
    removed = np.sort(removable[:target])
    keep = np.ones(g.m, dtype=bool)
    keep[removed] = False
    residual = g.with_edges(g.src[keep], g.dst[keep], g.weight[keep])
    return HoldoutSplit(residual, g.src[removed], g.dst[removed], g.weight[removed], float(ratio), int(seed))


def export_holdout(split: HoldoutSplit, outdir) -> None:
    """Write ``residual`` and ``removed`` edge lists plus a JSON manifest."""
    os.makedirs(outdir, exist_ok=True)
    g = split.residual
    write_edge_list(g, os.path.join(outdir, "residual.edges"))
    write_edge_list(g, os.path.join(outdir, "removed.edges"), split.removed_src, split.removed_dst, split.removed_weight)
    with open(os.path.join(outdir, "holdout.json"), "w", encoding="utf-8") as fh:
        json.dump({"ratio": split.ratio, "seed": split.seed, "m_removed": split.n_removed}, fh, sort_keys=True)
        fh.write("\n")
