"""L2-regularized logistic regression trained by accelerated gradient descent."""

from __future__ import annotations

import numpy as np


def _log1pexp(z):
    return np.logaddexp(0.0, z)


def _sigmoid(z):
    e = np.exp(-np.abs(z))
    return np.where(z >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


class LogisticRegression:
    """Binary (or independent one-vs-rest) logistic regression.

    Minimizes ``0.5 ||w||^2 + C * sum_i log(1 + exp(-s_i (w.x_i + b)))``
    per output column, with an unpenalized intercept. ``fit`` accepts a
    binary vector or an ``N x K`` indicator matrix; columns are fitted
    jointly but independently.

    Parameters
    ----------
    C : float
        Inverse regularization strength.
    max_iter : int
    tol : float
        Stop when the gradient norm falls below ``tol`` times its initial value.
    """

    def __init__(self, C: float = 1.0, max_iter: int = 5000, tol: float = 1e-8):
        self.C = C
        self.max_iter = max_iter
        self.tol = tol
        self.coef_ = None
        self.intercept_ = None
        self.n_iter_ = 0

    def _objective_grad(self, W, b, X, S):
        Z = X @ W + b
        M = -S * Z
        f = 0.5 * np.sum(W * W, axis=0) + self.C * _log1pexp(M).sum(axis=0)
        R = -S * _sigmoid(M) * self.C
        gW = W + X.T @ R
        gb = R.sum(axis=0)
        return f, gW, gb

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        Y = np.asarray(y)
        single = Y.ndim == 1
        if single:
            Y = Y[:, None]
        S = np.where(Y.astype(bool), 1.0, -1.0)
        N, p = X.shape
        K = S.shape[1]
        # Lipschitz bound of the gradient for the augmented design [X, 1]
        Xa = np.hstack([X, np.ones((N, 1))])
        smax = np.linalg.norm(Xa, 2) if N else 0.0
        L = 1.0 + 0.25 * self.C * smax * smax
        step = 1.0 / L
        W = np.zeros((p, K))
        b = np.zeros(K)
        Wy, by = W.copy(), b.copy()
        t = 1.0
        _, gW0, gb0 = self._objective_grad(W, b, X, S)
        g0 = np.sqrt(np.sum(gW0**2) + np.sum(gb0**2))
        f_prev = np.inf
        for it in range(1, self.max_iter + 1):
            f_y, gW, gb = self._objective_grad(Wy, by, X, S)
            W_new = Wy - step * gW
            b_new = by - step * gb
            f_new = self._objective_grad(W_new, b_new, X, S)[0].sum()
            if f_new > f_prev:
                # restart momentum when the objective goes up
                t = 1.0
                Wy, by = W.copy(), b.copy()
                f_prev = np.inf
                continue
            t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            mom = (t - 1.0) / t_new
            Wy = W_new + mom * (W_new - W)
            by = b_new + mom * (b_new - b)
            W, b, t, f_prev = W_new, b_new, t_new, f_new
            gnorm = np.sqrt(np.sum(gW**2) + np.sum(gb**2))
            if gnorm <= self.tol * max(g0, 1e-300):
                break
        self.n_iter_ = it
        self.coef_ = W[:, 0] if single else W
        self.intercept_ = b[0] if single else b
        return self

    def decision_function(self, X):
        return np.asarray(X, dtype=np.float64) @ self.coef_ + self.intercept_

    def predict_proba(self, X):
        return _sigmoid(self.decision_function(X))
