import json
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import ortho_group
from sklearn.cluster import SpectralClustering
from sklearn.metrics import normalized_mutual_info_score

from rwembed.factorize import Embedding
from rwembed.graph import HoldoutSplit, LabelSet, generate_sbm, karate_club, karate_labels, split_holdout
from rwembed.pipeline import embed
from rwembed.tasks import (
    EvalReport,
    EvaluationError,
    _predict_known_count,
    added_recall,
    added_recall_by_class,
    community_detect,
    degree_norm_correlation,
    directed_eval,
    link_predict_dot,
    link_predict_lr,
    nmi,
    node_classify,
    precision_recall_curve,
    tau_sweep,
    top_pairs,
)

from conftest import make_graph

PATH5 = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)]


def _split(n, residual_edges, removed, directed=False):
    g = make_graph(n, residual_edges, directed=directed)
    r = np.array(removed, dtype=np.int64).reshape(-1, 2)
    return HoldoutSplit(g, r[:, 0], r[:, 1], np.ones(len(r)), 0.2, 0)


@pytest.fixture(scope="module")
def karate_emb():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return embed(karate_club(), "autocov", 3, "factorize", 8)


# ---------------------------------------------------------------- link prediction


def test_perfect_prediction():
    split = _split(6, PATH5, [(0, 2), (3, 5)])
    U = np.zeros((6, 2))
    U[[0, 2], 0] = 1.0
    U[[3, 5], 1] = 1.0
    rep = link_predict_dot(Embedding(U), split)
    assert rep.metrics["precision@100%"] == 1.0
    assert rep.metrics["recall@100%"] == 1.0
    assert rep.metrics["precision@50%"] == 1.0 and rep.metrics["recall@50%"] == 0.5
    assert rep.curve[0]["k"] == 1  # floor(0.1 * 2) clamps to 1


def test_random_scores_hit_hypergeometric_mean():
    # 6 candidate pairs, 2 removed: a random ranking has expected precision 1/3 at any k
    split = _split(5, [(0, 1), (1, 2), (2, 3), (3, 4)], [(0, 2), (1, 4)])
    rng = np.random.default_rng(0)
    hits = []
    for _ in range(4000):
        S = rng.random((5, 5))
        ranked = top_pairs(lambda i0, i1, S=S: S[i0:i1], 5, 2, split.residual)
        assert len(ranked) == 2
        hits.append(np.isin(ranked.keys(5), [0 * 5 + 2, 1 * 5 + 4]).mean())
    assert np.mean(hits) == pytest.approx(1 / 3, abs=0.02)


def test_ties_break_lexicographically():
    split = _split(6, PATH5, [(0, 2), (3, 5)])
    rep = link_predict_dot(Embedding(np.zeros((6, 3))), split)
    # all scores tie, so the first two non-residual pairs (0,2) and (0,3) are taken
    assert rep.predictions["u"] == [0, 0] and rep.predictions["v"] == [2, 3]
    assert rep.metrics["precision@100%"] == 0.5


def test_precision_recall_monotone_in_k():
    correct = np.array([1, 0, 1, 1, 0, 0, 1, 0, 0, 0], dtype=bool)
    curve = precision_recall_curve(correct, 4, [0.25, 0.5, 0.75, 1.0])
    rec = [c["recall"] for c in curve]
    assert rec == sorted(rec)
    assert [c["k"] for c in curve] == [1, 2, 3, 4]
    assert [c["precision"] for c in curve] == [1.0, 0.5, 2 / 3, 0.75]


def test_lr_ranking_one_hot_roles():
    # two hubs joined to every leaf; removed edges are hub-leaf, all other candidates leaf-leaf
    leaves = range(2, 10)
    edges = [(0, 1)] + [(h, l) for h in (0, 1) for l in leaves]
    g = make_graph(10, edges)
    split = split_holdout(g, 0.2, seed=3)
    assert split.n_removed == 3
    U = np.zeros((10, 2))
    U[:2, 0] = 1.0
    U[2:, 1] = 1.0
    rep = link_predict_lr(Embedding(U), split)
    assert rep.metrics["precision@100%"] == 1.0
    assert rep.config["ranking"] == "logistic"


def test_lr_zero_embedding_falls_back_to_order():
    split = _split(6, PATH5, [(0, 2), (3, 5)])
    rep = link_predict_lr(Embedding(np.zeros((6, 2))), split)
    assert rep.predictions["u"] == [0, 0] and rep.predictions["v"] == [2, 3]


def test_embedding_size_mismatch():
    split = _split(6, PATH5, [(0, 2)])
    with pytest.raises(EvaluationError):
        link_predict_dot(Embedding(np.zeros((5, 2))), split)


# ---------------------------------------------------------------- classification


def test_separable_classes_score_one():
    rng = np.random.default_rng(0)
    y = np.repeat([0, 1, 2], 20)
    X = np.eye(3)[y] * 10 + 0.1 * rng.standard_normal((60, 3))
    rep = node_classify(X, LabelSet.from_array(y), repeats=5)
    assert rep.metrics["micro_f1"] == 1.0 and rep.metrics["macro_f1"] == 1.0


def test_random_labels_near_chance():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((600, 8))
    y = rng.integers(0, 2, 600)
    rep = node_classify(X, LabelSet.from_array(y), repeats=10)
    assert rep.metrics["micro_f1"] == pytest.approx(0.5, abs=0.05)


def test_known_count_prediction():
    scores = np.array([[0.1, 0.9, 0.5], [0.3, 0.2, 0.1]])
    truth = np.array([[True, True, False], [False, False, True]])
    pred = _predict_known_count(scores, truth)
    assert pred.tolist() == [[False, True, True], [True, False, False]]


def test_multilabel_flag_and_range():
    rng = np.random.default_rng(2)
    assignments = {u: frozenset(rng.choice(3, size=1 + u % 2, replace=False).tolist()) for u in range(40)}
    labels = LabelSet(assignments, 3)
    rep = node_classify(rng.standard_normal((40, 4)), labels, repeats=3)
    assert rep.flags["multi_label"]
    assert 0 <= rep.metrics["macro_f1"] <= 1


def test_classify_errors():
    X = np.zeros((4, 2))
    with pytest.raises(EvaluationError):
        node_classify(X, LabelSet.from_array([0, 0, 0, 0]))
    with pytest.raises(EvaluationError):
        node_classify(X, LabelSet.from_array([0, 1, 0, 1]), train_ratio=1.0)


# ---------------------------------------------------------------- communities


def test_nmi_cases():
    a = [0, 0, 1, 1, 2, 2]
    assert nmi(a, a) == 1.0
    assert nmi(a, [5, 5, 7, 7, 9, 9]) == 1.0
    assert nmi(a, [0] * 6) == 0.0
    with pytest.raises(ValueError):
        nmi([0, 1], [0])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 4)), min_size=2, max_size=40))
def test_nmi_against_sklearn(pairs):
    a, b = map(np.array, zip(*pairs))
    val = nmi(a, b)
    assert 0.0 <= val <= 1.0
    assert val == pytest.approx(nmi(b, a), abs=1e-12)
    perm = np.random.default_rng(0).permutation(len(a))
    assert val == pytest.approx(nmi(a[perm], b[perm]), abs=1e-12)
    if len(set(a)) > 1 or len(set(b)) > 1:
        assert val == pytest.approx(normalized_mutual_info_score(a, b), abs=1e-9)


def test_community_detection_recovers_sbm():
    g = generate_sbm([50, 50], 0.3, 0.02, seed=0)
    truth = np.repeat([0, 1], 50)
    labels = LabelSet.from_array(truth)
    e = embed(g, "autocov", 3, "factorize", 16)
    rep = community_detect(e, labels, seed=0)
    oracle = SpectralClustering(2, affinity="precomputed", random_state=0).fit_predict(g.adjacency.toarray())
    assert normalized_mutual_info_score(truth, oracle) >= 0.9
    assert rep.metrics["nmi"] >= 0.9


# ---------------------------------------------------------------- multiscale


def _rep(tau, metrics, correct_pairs=()):
    u = [p[0] for p in correct_pairs]
    v = [p[1] for p in correct_pairs]
    return EvalReport("linkpred", metrics, {"tau": tau}, predictions={"u": u, "v": v, "correct": [True] * len(u)})


def test_tau_sweep_ties_go_to_smaller_time():
    vals = {1: 0.2, 2: 0.5, 3: 0.5, 4: 0.1}
    res = tau_sweep(lambda t: _rep(t, {"m": vals[t]}), [1, 2, 3, 4])
    assert res.best == {"m": 2}
    assert res.summary()["best_value"] == {"m": 0.5}
    par = tau_sweep(lambda t: _rep(t, {"m": vals[t]}), [1, 2, 3, 4], workers=3)
    assert par.best == res.best
    with pytest.raises(ValueError):
        tau_sweep(lambda t: None, [])


def test_added_recall_cases():
    best = _rep(2, {}, [(0, 1), (2, 3)])
    assert added_recall(best, _rep(5, {}, [(0, 1), (2, 3)])) == 0.0
    assert added_recall(best, _rep(5, {}, [(0, 1), (4, 5), (6, 7)])) == 1.0
    with pytest.raises(EvaluationError):
        added_recall(best, _rep(2, {}, []))
    with pytest.raises(EvaluationError):
        added_recall(best, _rep(1, {}, []))
    split = added_recall_by_class(best, _rep(5, {}, [(4, 5), (5, 9)]), [0, 0, 0, 0, 0, 0, 1, 1, 1, 1])
    assert split["intra"] == 0.5 and split["inter"] == 0.5 and split["n_added"] == 2


def test_degnorm_sqrt_degree():
    g = karate_club()
    deg = g.degrees()
    e = Embedding(np.eye(g.n) * np.sqrt(deg)[:, None])
    rep = degree_norm_correlation(e, g, squared=True)
    assert rep.metrics["pearson_r"] == pytest.approx(1.0, abs=1e-12)
    assert not rep.flags["degenerate"]


def test_degnorm_regular_graph_is_degenerate():
    g = make_graph(5, [(i, (i + 1) % 5) for i in range(5)])
    rep = degree_norm_correlation(Embedding(np.random.default_rng(0).random((5, 2))), g)
    assert rep.flags["degenerate"] and rep.metrics["pearson_r"] == 0.0


# ---------------------------------------------------------------- directed


def test_directed_scores_follow_orientation():
    two = make_graph(2, [(0, 1), (1, 0)], directed=True)
    G = embed(two, "autocov", 1, "factorize", 2, process="pagerank").gram()
    assert np.allclose(G, G.T, atol=1e-12)
    three = make_graph(3, [(0, 1), (1, 2), (2, 0)], directed=True)
    G = embed(three, "autocov", 1, "factorize", 3, process="pagerank").gram()
    assert G[0, 1] > G[1, 0] and G[1, 2] > G[2, 1] and G[2, 0] > G[0, 2]


def test_directed_eval_requires_directed(karate_emb):
    split = split_holdout(karate_club(), 0.2, seed=0)
    with pytest.raises(EvaluationError):
        directed_eval(split)


def test_directed_eval_report():
    from rwembed.graph import generate_directed_sbm

    g = generate_directed_sbm([15, 15], 0.3, 0.05, seed=0)
    split = split_holdout(g, 0.2, seed=0)
    labels = LabelSet.from_array(np.repeat([0, 1], 15))
    rep = directed_eval(split, labels, dim=8, repeats=2)
    for key in ("directed/precision@100%", "undirected/precision@100%", "concat/micro_f1", "target/macro_f1"):
        assert 0 <= rep.metrics[key] <= 1


# ---------------------------------------------------------------- invariances and outputs


def test_rotation_invariance(karate_emb):
    Q = ortho_group.rvs(karate_emb.d, random_state=0)
    rot = karate_emb.rotated(Q)
    split = split_holdout(karate_club(), 0.2, seed=1)
    labels = karate_labels()
    assert link_predict_dot(karate_emb, split).metrics == link_predict_dot(rot, split).metrics
    a = node_classify(karate_emb, labels, repeats=3).metrics
    b = node_classify(rot, labels, repeats=3).metrics
    assert a == pytest.approx(b, abs=1e-12)
    assert community_detect(karate_emb, labels).metrics == pytest.approx(community_detect(rot, labels).metrics)


def test_deterministic_reports(karate_emb):
    split = split_holdout(karate_club(), 0.2, seed=1)
    assert link_predict_lr(karate_emb, split, seed=4).to_json() == link_predict_lr(karate_emb, split, seed=4).to_json()
    labels = karate_labels()
    assert node_classify(karate_emb, labels, seed=2).to_json() == node_classify(karate_emb, labels, seed=2).to_json()


def test_report_files(tmp_path, karate_emb):
    split = split_holdout(karate_club(), 0.2, seed=1)
    rep = link_predict_dot(karate_emb, split)
    rep.to_json(tmp_path / "r.json")
    rep.write_csv(tmp_path / "r.csv")
    data = json.loads((tmp_path / "r.json").read_text())
    assert data["metrics"] == rep.metrics and data["config"]["tau"] == 3
    rows = (tmp_path / "r.csv").read_text().splitlines()
    assert rows[0] == "k_ratio,k,precision,recall" and len(rows) == 11
    with pytest.raises(EvaluationError):
        EvalReport("x", {"precision@10%": 1.5})
    with pytest.raises(EvaluationError):
        EvalReport("x", {"nmi": float("nan")})
