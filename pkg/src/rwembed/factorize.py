"""Low-rank factorization of similarity matrices into embeddings."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh, svds

from .similarity import SimilarityMatrix

DENSE_SOLVER_MAX_N = 512
SYMMETRY_TOL = 1e-10


class FactorizationError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class Embedding:
    """Source embedding ``U`` and optional target embedding ``V`` (both ``n x d``)."""

    U: np.ndarray
    V: np.ndarray | None = None
    provenance: dict = field(default_factory=dict)
    warnings: tuple[str, ...] = ()

    @property
    def n(self) -> int:
        return self.U.shape[0]

    @property
    def d(self) -> int:
        return self.U.shape[1]

    @property
    def target(self) -> np.ndarray:
        return self.U if self.V is None else self.V

    def gram(self) -> np.ndarray:
        """Matrix of all dot products ``U V^T`` (``U U^T`` without a target)."""
        return self.U @ self.target.T

    def rotated(self, Q: np.ndarray) -> Embedding:
        V = None if self.V is None else self.V @ Q
        return Embedding(self.U @ Q, V, dict(self.provenance), self.warnings)

    def save(self, path, id_map=None, binary: bool = False) -> None:
        """word2vec-style dump of ``U``; ``V`` goes to ``<path>.target`` when present."""
        _write_matrix(path, self.U, id_map, binary)
        if self.V is not None:
            _write_matrix(f"{path}.target", self.V, id_map, binary)

    @classmethod
    def load(cls, path, binary: bool = False) -> Embedding:
        U, _ = read_matrix(path, binary)
        return cls(U)


def _write_matrix(path, X, id_map, binary):
    n, d = X.shape
    if binary:
        with open(path, "wb") as fh:
            fh.write(f"{n} {d}\n".encode())
            fh.write(np.ascontiguousarray(X, dtype="<f8").tobytes())
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{n} {d}\n")
        for i in range(n):
            label = id_map[i] if id_map is not None else str(i)
            fh.write(label + " " + " ".join(repr(float(x)) for x in X[i]) + "\n")


def read_matrix(path, binary: bool = False) -> tuple[np.ndarray, list[str]]:
    if binary:
        with open(path, "rb") as fh:
            n, d = (int(t) for t in fh.readline().split())
            X = np.frombuffer(fh.read(), dtype="<f8").reshape(n, d).copy()
        return X, [str(i) for i in range(n)]
    with open(path, encoding="utf-8") as fh:
        n, d = (int(t) for t in fh.readline().split())
        ids, rows = [], []
        for line in fh:
            tok = line.split()
            ids.append(tok[0])
            rows.append([float(x) for x in tok[1:]])
    X = np.array(rows, dtype=np.float64).reshape(n, d)
    return X, ids


def clamp_pmi(R: SimilarityMatrix) -> SimilarityMatrix:
    """Positive PMI: ``max(R, 0)`` elementwise, with ``-inf`` mapped to 0."""
    if R.kind != "pmi":
        raise ValueError("clamp_pmi expects a PMI matrix")
    return SimilarityMatrix(np.maximum(R.values, 0.0), R.kind, R.tau, R.process_kind)


def _canonical_signs(Q: np.ndarray) -> np.ndarray:
    # largest-magnitude entry of every column made positive
    idx = np.argmax(np.abs(Q), axis=0)
    signs = np.sign(Q[idx, np.arange(Q.shape[1])])
    signs[signs == 0] = 1.0
    return Q * signs


def top_eigenpairs(R: np.ndarray, d: int, method: str = "auto", seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Largest ``d`` algebraic eigenpairs of a symmetric matrix, in decreasing order.

    ``method='dense'`` uses a full symmetric eigendecomposition,
    ``'lanczos'`` the implicitly restarted Lanczos iteration (ARPACK) driven
    only by matrix-vector products.
    """
    n = R.shape[0]
    if method == "auto":
        method = "dense" if n <= DENSE_SOLVER_MAX_N else "lanczos"
    if method == "lanczos" and d >= n - 1:
        method = "dense"
    if method == "dense":
        lam, Q = np.linalg.eigh(R)
        order = np.argsort(-lam, kind="stable")[:d]
        return lam[order], _canonical_signs(Q[:, order])
    if method != "lanczos":
        raise ValueError(f"unknown eigensolver {method!r}")
    op = LinearOperator((n, n), matvec=lambda x: R @ x, dtype=np.float64)
    v0 = np.random.default_rng(seed).standard_normal(n)
    try:
        lam, Q = eigsh(op, k=d, which="LA", v0=v0, tol=0)
    except ArpackNoConvergence as exc:
        raise FactorizationError(f"Lanczos iteration did not converge: {exc}") from exc
    order = np.argsort(-lam, kind="stable")
    return lam[order], _canonical_signs(Q[:, order])


def factorize(R: SimilarityMatrix | np.ndarray, d: int, method: str = "auto") -> Embedding:
    """Best rank-``d`` factorization ``U U^T`` of a symmetric similarity.

    ``U = Q_d sqrt(Lambda_d)`` over the ``d`` largest eigenvalues. Negative
    eigenvalues cannot be represented by ``U U^T``; their columns are
    zeroed and a warning is attached. PMI input must be clamped first.
    """
    sim = R if isinstance(R, SimilarityMatrix) else SimilarityMatrix(np.asarray(R, dtype=np.float64), "matrix", 0)
    X = sim.values
    n = X.shape[0]
    if not 1 <= d <= n:
        raise ValueError(f"dimension must be in [1, {n}], got {d}")
    if not np.all(np.isfinite(X)):
        raise ValueError("similarity has non-finite entries; clamp PMI matrices before factorizing")
    scale = max(1.0, float(np.max(np.abs(X))))
    if np.max(np.abs(X - X.T)) > SYMMETRY_TOL * scale:
        raise FactorizationError("factorize needs a symmetric matrix; use factorize_rectangular")
    X = 0.5 * (X + X.T)
    lam, Q = top_eigenpairs(X, d, method)
    notes = []
    neg = lam < 0
    if neg.any():
        msg = f"only {int((~neg).sum())} of {d} leading eigenvalues are nonnegative; remaining columns zeroed"
        warnings.warn(msg, stacklevel=2)
        notes.append(msg)
        lam = np.where(neg, 0.0, lam)
    U = Q * np.sqrt(lam)[None, :]
    prov = {"algorithm": "factorize", "similarity": sim.kind, "tau": sim.tau, "d": d, "eigenvalues": lam.tolist()}
    return Embedding(U, None, prov, tuple(notes))


def factorize_rectangular(R: SimilarityMatrix | np.ndarray, d: int, method: str = "auto", seed: int = 0) -> Embedding:
    """Rank-``d`` factorization ``U V^T`` of a general square matrix via truncated SVD.

    ``U = P_d sqrt(S_d)`` and ``V = Q_d sqrt(S_d)``. Used for the asymmetric
    similarities of directed walks.
    """
    sim = R if isinstance(R, SimilarityMatrix) else SimilarityMatrix(np.asarray(R, dtype=np.float64), "matrix", 0)
    X = sim.values
    n = X.shape[0]
    if not 1 <= d <= n:
        raise ValueError(f"dimension must be in [1, {n}], got {d}")
    if not np.all(np.isfinite(X)):
        raise ValueError("similarity has non-finite entries")
    if method == "auto":
        method = "dense" if n <= DENSE_SOLVER_MAX_N else "lanczos"
    if method == "lanczos" and d < n - 1:
        v0 = np.random.default_rng(seed).standard_normal(n)
        P, s, Qt = svds(X, k=d, v0=v0, tol=0)
        order = np.argsort(-s, kind="stable")
        P, s, Qt = P[:, order], s[order], Qt[order]
    else:
        P, s, Qt = np.linalg.svd(X)
        P, s, Qt = P[:, :d], s[:d], Qt[:d]
    # fix the joint sign of each singular pair
    idx = np.argmax(np.abs(P), axis=0)
    signs = np.sign(P[idx, np.arange(d)])
    signs[signs == 0] = 1.0
    root = np.sqrt(s)
    U = P * signs * root
    V = Qt.T * signs * root
    prov = {"algorithm": "factorize_rectangular", "similarity": sim.kind, "tau": sim.tau, "d": d}
    return Embedding(U, V, prov)


def reconstruction_error(e: Embedding, R: np.ndarray) -> float:
    """Squared Frobenius error ``||U V^T - R||_F^2``."""
    return float(np.sum((e.gram() - R) ** 2))
