import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rwembed import kernels
from rwembed.process import pagerank_process, simulate, standard_process

from conftest import make_graph

needs_compiled = pytest.mark.skipif("cython" not in kernels.available_backends(), reason="extension not built")


def _backend_in_subprocess(env_value):
    env = dict(os.environ)
    env.pop("RWEMBED_PURE_PYTHON", None)
    if env_value is not None:
        env["RWEMBED_PURE_PYTHON"] = env_value
    out = subprocess.run(
        [sys.executable, "-c", "from rwembed.kernels import BACKEND; print(BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    return out.stdout.strip()


def test_env_forces_pure_python():
    assert _backend_in_subprocess("1") == "python"


@needs_compiled
def test_compiled_is_default():
    assert kernels.BACKEND == "cython"
    assert _backend_in_subprocess(None) == "cython"


def test_get_backend():
    assert kernels.get_backend("python").__name__.endswith("_kernels_py")
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


@st.composite
def small_digraphs(draw):
    n = draw(st.integers(2, 12))
    edges = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), min_size=1, max_size=40))
    edges = sorted({(u, v) for u, v in edges if u != v})
    if not edges:
        edges = [(0, 1)]
    w = draw(st.lists(st.floats(0.1, 5.0), min_size=len(edges), max_size=len(edges)))
    return make_graph(n, edges, directed=True, weights=w)


@settings(max_examples=40, deadline=None)
@given(g=small_digraphs(), seed=st.integers(0, 2**31))
def test_pagerank_walks_identical_across_backends(g, seed):
    # exercises dangling rows and teleports
    p = pagerank_process(g)
    starts = np.arange(g.n).repeat(3)
    ref = simulate(p, starts, 25, seed=seed, backend="python")
    assert ref.min() >= 0 and ref.max() < g.n
    for b in kernels.available_backends():
        assert np.array_equal(simulate(p, starts, 25, seed=seed, backend=b), ref)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_walks_follow_edges(seed):
    g = make_graph(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)])
    p = standard_process(g)
    A = g.adjacency.toarray() > 0
    for b in kernels.available_backends():
        w = simulate(p, np.arange(5), 40, seed=seed, backend=b)
        assert A[w[:, :-1], w[:, 1:]].all()
