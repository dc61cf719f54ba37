import json
import os
from collections import deque

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rwembed.graph import (
    Graph,
    GraphError,
    LabelSet,
    export_holdout,
    generate_directed_sbm,
    generate_hierarchical_sbm,
    generate_sbm,
    karate_club,
    karate_labels,
    load_edge_list,
    load_labels,
    plant_hubs,
    split_holdout,
    write_edge_list,
)

from conftest import make_graph


def _reachable(g, start=0):
    A = g.adjacency
    A = (A + A.T).tocsr()
    seen = {start}
    q = deque([start])
    while q:
        u = q.popleft()
        for v in A.indices[A.indptr[u]:A.indptr[u + 1]]:
            if v not in seen:
                seen.add(int(v))
                q.append(int(v))
    return len(seen)


def test_load_default_weights(tmp_path):
    p = tmp_path / "g.edges"
    p.write_text("0 1\n1 2")
    g = load_edge_list(p)
    assert (g.n, g.m) == (3, 2)
    assert np.all(g.weight == 1.0)


def test_load_id_compaction(tmp_path):
    p = tmp_path / "g.edges"
    p.write_text("a b 2.5\n")
    g = load_edge_list(p)
    assert g.n == 2 and g.m == 1
    assert g.weight[0] == 2.5
    assert g.id_map == ["a", "b"]


@pytest.mark.parametrize(
    "text, msg",
    [
        ("0 1\n1 x y\n", ":2:"),
        ("0 1 -1\n", ":1:"),
        ("0 1 abc\n", ":1:"),
        ("0 0\n", "self-loop"),
        ("# nothing\n", "no edges"),
    ],
)
def test_load_errors(tmp_path, text, msg):
    p = tmp_path / "bad.edges"
    p.write_text(text)
    with pytest.raises(GraphError, match=msg):
        load_edge_list(p)


def test_duplicate_edges_summed(tmp_path):
    p = tmp_path / "dup.edges"
    p.write_text("0 1\n1 0 2\n1 2\n")
    with pytest.warns(UserWarning, match="duplicate"):
        g = load_edge_list(p)
    assert g.m == 2
    assert g.adjacency[0, 1] == 3.0


def test_round_trip(tmp_path):
    p = tmp_path / "in.edges"
    p.write_text("x y 1.5\ny z\nz w 3\n# comment\nw x\n")
    g = load_edge_list(p)
    q = tmp_path / "out.edges"
    write_edge_list(g, q)
    h = load_edge_list(q)
    def labelled(x):
        return {(frozenset((x.node_label(int(u)), x.node_label(int(v)))), w) for u, v, w in zip(x.src, x.dst, x.weight)}

    assert set(g.id_map) == set(h.id_map)
    assert labelled(g) == labelled(h)


def test_adjacency_symmetric(triangle):
    A = triangle.adjacency.toarray()
    assert np.array_equal(A, A.T)
    assert np.array_equal(triangle.degrees(), [2, 2, 2])


def test_graph_invariants():
    with pytest.raises(GraphError):
        make_graph(2, [(0, 1)], weights=[0.0])
    with pytest.raises(GraphError):
        make_graph(2, [(0, 1), (1, 0)])
    with pytest.raises(GraphError):
        make_graph(2, [(0, 0)])


def test_karate():
    g = karate_club()
    assert (g.n, g.m) == (34, 78)
    lab = karate_labels(g)
    assert lab.n_labels == 2 and len(lab.nodes) == 34
    ref = nx.karate_club_graph()
    assert sorted(d for _, d in ref.degree()) == sorted(g.degrees().astype(int).tolist())


def test_labels_multi(tmp_path):
    g = make_graph(3, [(0, 1), (1, 2)])
    p = tmp_path / "l.txt"
    p.write_text("0 a,b\n1 b\n2 c\n")
    lab = load_labels(p)
    assert lab.multi_label
    assert lab.n_labels == 3
    assert lab.indicator().sum() == 4
    with pytest.raises(GraphError):
        lab.partition()
    p.write_text("7 a\n")
    with pytest.raises(GraphError, match="outside"):
        load_labels(p, g)


def test_sbm_expected_intra_edges():
    counts = []
    for seed in range(20):
        g = generate_sbm([50, 50], 0.15, 0.02, seed=seed)
        same = g.blocks[g.src] == g.blocks[g.dst]
        counts.append(same.sum())
    # 2 * C(50,2) * 0.15 = 367.5, std ~ sqrt(2450*.15*.85) ~ 17.7 per draw
    assert abs(np.mean(counts) - 367.5) < 3 * 17.7 / np.sqrt(20)


def test_sbm_triangle_and_disconnected():
    g = generate_sbm([3], 1.0, 0.3, seed=0)
    assert g.m == 3
    with pytest.raises(GraphError, match="disconnected"):
        generate_sbm([20, 20], 1.0, 0.0, seed=0, max_tries=3)


def test_sbm_deterministic():
    a = generate_sbm([30, 30], 0.2, 0.05, seed=5)
    b = generate_sbm([30, 30], 0.2, 0.05, seed=5)
    assert np.array_equal(a.src, b.src) and np.array_equal(a.dst, b.dst)


def test_plant_hubs():
    g = generate_sbm([50, 50], 0.15, 0.02, seed=0)
    h, hubs = plant_hubs(g, 20, seed=0)
    deg = h.degrees()
    big = np.flatnonzero(deg > 3 * np.median(deg))
    assert len(big) == 2
    assert set(big.tolist()) == set(hubs.tolist())
    assert h.n == 100 - 2 * 19
    # contraction preserves total weight minus collapsed internal edges
    assert h.weight.sum() <= g.weight.sum()


def test_plant_hubs_small_cases():
    cyc = Graph(4, np.array([0, 1, 2, 0]), np.array([1, 2, 3, 3]), np.ones(4), blocks=np.zeros(4, dtype=int))
    h, hubs = plant_hubs(cyc, 2, seed=1)
    assert h.n == 3 and h.m in (2, 3)
    assert h.weight.sum() in (3.0, 4.0)
    with pytest.raises(GraphError):
        plant_hubs(cyc, 1)


def test_hierarchical_sbm():
    g, groups = generate_hierarchical_sbm(2, 2, 10, 0.9, 0.3, 0.02, seed=0)
    assert g.n == 40
    assert np.array_equal(groups, np.repeat([0, 1], 20))
    assert len(np.unique(g.blocks)) == 4


def test_directed_sbm_flow():
    P = [[0.1, 0.4, 0.0], [0.0, 0.1, 0.4], [0.4, 0.0, 0.1]]
    g = generate_directed_sbm([20, 20, 20], 0, 0, seed=0, block_probs=P)
    bs, bd = g.blocks[g.src], g.blocks[g.dst]
    assert g.directed
    assert np.all((bd == bs) | (bd == (bs + 1) % 3))


def test_split_triangle(triangle):
    s = split_holdout(triangle, 1 / 3, seed=0)
    assert s.n_removed == 1
    assert s.residual.m == 2 and s.residual.is_connected()


def test_split_star_error():
    star = make_graph(6, [(0, i) for i in range(1, 6)])
    with pytest.raises(GraphError, match="at most 0"):
        split_holdout(star, 0.2, seed=0)


def test_split_sbm():
    g = generate_sbm([50, 50], 0.15, 0.02, seed=3)
    s = split_holdout(g, 0.2, seed=3)
    assert s.n_removed == int(0.2 * g.m)
    assert _reachable(s.residual) == g.n
    union = np.sort(np.concatenate([s.residual.edge_keys(), s.removed_keys()]))
    assert np.array_equal(union, np.sort(g.edge_keys()))


def _greedy_oracle(g, ratio, seed):
    """Literal shuffle-then-remove-if-on-a-cycle procedure with networkx."""
    target = int(np.floor(ratio * g.m))
    order = np.random.default_rng(seed).permutation(g.m)
    G = nx.Graph()
    G.add_nodes_from(range(g.n))
    G.add_edges_from(zip(g.src.tolist(), g.dst.tolist()))
    removed = []
    for e in order:
        if len(removed) == target:
            break
        u, v = int(g.src[e]), int(g.dst[e])
        G.remove_edge(u, v)
        if nx.has_path(G, u, v):
            removed.append((u, v))
        else:
            G.add_edge(u, v)
    return sorted(removed)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(5, 14), p=st.floats(0.3, 0.9))
def test_split_matches_greedy_oracle(seed, n, p):
    try:
        g = generate_sbm([n], p, 0.0, seed=seed, max_tries=5)
    except GraphError:
        return
    ratio = 0.2
    try:
        s = split_holdout(g, ratio, seed)
    except GraphError:
        return
    got = sorted(zip(s.removed_src.tolist(), s.removed_dst.tolist()))
    assert got == _greedy_oracle(g, ratio, seed)


def test_directed_split_weakly_connected():
    g = generate_directed_sbm([15, 15], 0.3, 0.05, seed=2)
    s = split_holdout(g, 0.2, seed=2)
    assert s.residual.directed and s.residual.is_connected()


def test_export_holdout(tmp_path):
    g = generate_sbm([20, 20], 0.3, 0.05, seed=1)
    s = split_holdout(g, 0.2, 4)
    export_holdout(s, tmp_path / "h")
    meta = json.loads((tmp_path / "h" / "holdout.json").read_text())
    assert meta == {"ratio": 0.2, "seed": 4, "m_removed": s.n_removed}
    assert len((tmp_path / "h" / "removed.edges").read_text().splitlines()) == s.n_removed
    assert os.path.exists(tmp_path / "h" / "residual.edges")


def test_labelset_from_array():
    lab = LabelSet.from_array([3, 3, 7])
    assert lab.n_labels == 2 and lab.label_names == ["3", "7"]
    assert np.array_equal(lab.partition(), [0, 0, 1])
