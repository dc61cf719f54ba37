import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rwembed.graph import GraphError, generate_sbm, karate_club
from rwembed.process import standard_process
from rwembed.similarity import (
    SimilarityMatrix,
    autocovariance,
    line_pmi,
    log_mean_exp_pmi,
    mean_autocovariance,
    pmi,
    pmi_lemma1,
    similarity,
)

from conftest import make_graph

NEG = -np.inf
LOG2 = np.log(2.0)


def test_autocov_single_edge(single_edge):
    R = autocovariance(standard_process(single_edge), 1).values
    assert np.allclose(R, [[-0.25, 0.25], [0.25, -0.25]], atol=1e-12, rtol=0)


def test_autocov_triangle(triangle):
    R = autocovariance(standard_process(triangle), 1).values
    assert np.allclose(np.diag(R), -1 / 9, atol=1e-12, rtol=0)
    assert np.allclose(R[~np.eye(3, dtype=bool)], 1 / 18, atol=1e-12, rtol=0)


def test_autocov_tau0(path3):
    p = standard_process(path3)
    R = autocovariance(p, 0).values
    assert np.allclose(R, np.diag(p.pi) - np.outer(p.pi, p.pi), atol=1e-15)


def test_pmi_single_edge(single_edge):
    R = pmi(standard_process(single_edge), 1).values
    assert np.all(np.diag(R) == NEG)
    assert abs(R[0, 1] - LOG2) < 1e-12 and abs(R[1, 0] - LOG2) < 1e-12


def test_pmi_triangle(triangle):
    R = pmi(standard_process(triangle), 1).values
    assert np.all(np.diag(R) == NEG)
    assert np.allclose(R[~np.eye(3, dtype=bool)], np.log(1.5), atol=1e-12, rtol=0)


def test_pmi_rejects_tau0(triangle):
    with pytest.raises(ValueError):
        pmi(standard_process(triangle), 0)


def test_path3_values(path3):
    p = standard_process(path3)
    A = autocovariance(p, 1).values
    pi = np.array([0.25, 0.5, 0.25])
    M = np.array([[0, 1, 0], [0.5, 0, 0.5], [0, 1, 0]])
    assert np.allclose(A, np.diag(pi) @ M - np.outer(pi, pi), atol=1e-12, rtol=0)
    R = pmi(p, 1).values
    assert abs(R[0, 1] - np.log(1 / 0.5)) < 1e-12
    assert abs(R[1, 0] - np.log(0.5 / 0.25)) < 1e-12
    assert R[0, 2] == NEG


@pytest.mark.parametrize("tau", [1, 2, 3, 5, 10])
def test_lemma1_karate(tau):
    g = karate_club()
    a = pmi(standard_process(g), tau).values
    b = pmi_lemma1(g, tau).values
    assert np.array_equal(np.isfinite(a), np.isfinite(b))
    fin = np.isfinite(a)
    assert np.max(np.abs(a[fin] - b[fin])) < 1e-10


def test_lemma1_path_parity():
    g = make_graph(5, [(0, 1), (1, 2), (2, 3), (3, 4)])
    with pytest.warns(UserWarning):
        p = standard_process(g)
    a, b = pmi(p, 2).values, pmi_lemma1(g, 2).values
    assert np.array_equal(np.isinf(a), np.isinf(b))
    # odd-distance pairs are unreachable in two steps
    assert a[0, 1] == NEG and a[0, 3] == NEG and np.isfinite(a[0, 2])


def test_lemma1_single_edge(single_edge):
    a = pmi(standard_process(single_edge), 1).values
    b = pmi_lemma1(single_edge, 1).values
    fin = np.isfinite(a)
    assert np.array_equal(fin, np.isfinite(b))
    assert np.max(np.abs(a[fin] - b[fin])) < 1e-12


def test_lme_identity_and_shift(triangle):
    p = standard_process(triangle)
    R1 = pmi(p, 1).values
    fin = np.isfinite(R1)
    assert np.allclose(log_mean_exp_pmi(p, 1, 1).values[fin], R1[fin], atol=1e-12)
    assert np.allclose(log_mean_exp_pmi(p, 1, 5).values[fin], R1[fin] - np.log(5), atol=1e-12)
    assert np.array_equal(np.isfinite(log_mean_exp_pmi(p, 1, 5).values), fin)


def test_lme_single_edge_two_steps(single_edge):
    R = log_mean_exp_pmi(standard_process(single_edge), 2, 1).values
    assert np.allclose(R, 0.0, atol=1e-12)


def test_line_form(triangle):
    p = standard_process(triangle)
    fin = np.isfinite(pmi(p, 1).values)
    assert np.allclose(line_pmi(p, 5).values[fin], pmi(p, 1).values[fin] - np.log(5), atol=1e-15)


def test_mean_autocov(single_edge, triangle):
    assert np.allclose(mean_autocovariance(standard_process(single_edge), 2).values, 0.0, atol=1e-15)
    p = standard_process(triangle)
    assert np.allclose(mean_autocovariance(p, 1).values, autocovariance(p, 1).values, atol=1e-15)


def test_large_tau_limit():
    g = generate_sbm([10], 0.6, 0.0, seed=2)
    p = standard_process(g)
    assert np.max(np.abs(autocovariance(p, 1000).values)) < 1e-6
    R = pmi(p, 1000).values
    assert np.max(np.abs(R[np.isfinite(R)])) < 1e-6


def _random_graph(seed, n):
    rng = np.random.default_rng(seed)
    for _ in range(50):
        A = np.triu(rng.random((n, n)) < 0.4, 1)
        u, v = np.nonzero(A)
        w = rng.uniform(0.5, 2.0, len(u))
        try:
            g = make_graph(n, list(zip(u, v)), weights=w)
        except GraphError:
            continue
        if g.m and g.is_connected() and not g.is_bipartite():
            return g
    return None


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 100_000), n=st.integers(3, 12), tau=st.integers(0, 6), T=st.integers(1, 4))
def test_similarity_invariants(seed, n, tau, T):
    g = _random_graph(seed, n)
    if g is None:
        return
    p = standard_process(g)
    pi = p.pi
    R = autocovariance(p, tau).values
    assert np.max(np.abs(R - R.T)) < 1e-10
    assert np.max(np.abs(R.sum(axis=1))) < 1e-10
    lo, hi = -np.outer(pi, pi), pi[:, None] * (1 - pi[None, :])
    assert np.all(R >= lo - 1e-12) and np.all(R <= hi + 1e-12)
    assert np.max(np.abs(mean_autocovariance(p, T).values.sum(axis=1))) < 1e-10
    if tau >= 1:
        P = pmi(p, tau).values
        fin = np.isfinite(P)
        assert np.array_equal(fin, fin.T)
        assert np.max(np.abs(P[fin] - P.T[fin])) < 1e-10
        bound = np.broadcast_to(-np.log(pi)[None, :], P.shape)
        assert np.all(P[fin] <= bound[fin] + 1e-10)


def test_dispatch_and_errors(triangle):
    p = standard_process(triangle)
    assert similarity(p, "autocov", 1).kind == "autocovariance"
    assert similarity(p, "pmi", 2, "log-mean-exp").kind == "pmi"
    with pytest.raises(ValueError):
        similarity(p, "cosine", 1)
    with pytest.raises(MemoryError):
        autocovariance(p, 1, max_nodes=2)


def test_save_load(tmp_path, triangle):
    R = pmi(standard_process(triangle), 1)
    R.save(tmp_path / "r.bin")
    S = SimilarityMatrix.load(tmp_path / "r.bin")
    assert np.array_equal(R.values, S.values) and S.kind == "pmi" and S.tau == 1
    R.save_text(tmp_path / "r.txt")
    lines = (tmp_path / "r.txt").read_text().splitlines()
    assert lines[0] == "# n=3 kind=pmi tau=1" and len(lines) == 4
