"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``.

Signatures and outputs match the compiled module; walks are identical,
gradient sums agree up to floating-point summation order.
"""

import numpy as np

PMI_SIGMOID = 0
AUTOCOV_PIECEWISE = 1


def simulate_walks(indptr, indices, keys, dangling, starts, uniforms, teleport, out):
    n = len(dangling)
    cur = np.asarray(starts, dtype=np.int64).copy()
    out[:, 0] = cur
    hi_all = indptr[1:] - 1
    for t in range(uniforms.shape[1]):
        u1 = uniforms[:, t, 0]
        u2 = uniforms[:, t, 1]
        jump = (dangling[cur] != 0) | (u2 < teleport)
        j = np.searchsorted(keys, cur + u1, side="right")
        j = np.minimum(j, hi_all[cur])
        nxt = indices[np.clip(j, 0, max(len(indices) - 1, 0))] if len(indices) else cur
        uniform_pick = np.minimum((u1 * n).astype(np.int64), n - 1)
        cur = np.where(jump, uniform_pick, nxt)
        out[:, t + 1] = cur


def _log_sigmoid(x):
    return np.where(x >= 0, -np.log1p(np.exp(-np.abs(x))), x - np.log1p(np.exp(-np.abs(x))))


def _sigmoid(x):
    e = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def pair_terms(x, a, b, variant, eps):
    """Positive/negative log-probabilities and their derivatives in ``x``.

    ``a`` is ``pi_u * pi_v``; it is ignored by the sigmoid variant.
    """
    x = np.asarray(x, dtype=np.float64)
    if variant == PMI_SIGMOID:
        pos = _log_sigmoid(x)
        neg = _log_sigmoid(-x)
        return pos, neg, _sigmoid(-x), -_sigmoid(x)
    a = np.broadcast_to(np.asarray(a, dtype=np.float64), x.shape)
    den = x + (b + 1) * a
    ok = den > 0
    safe = np.where(ok, den, 1.0)
    fp = np.where(ok, (x + a) / safe, 1.0)
    fn = np.where(ok, a / safe, 0.0)
    in_p = ok & (fp > eps) & (fp < 1.0)
    in_n = ok & (fn > eps) & (fn < 1.0)
    fp_c = np.clip(fp, eps, 1.0)
    fn_c = np.clip(fn, eps, 1.0)
    # d/dx log((x+a)/den) = b*a / ((x+a)*den);  d/dx log(a/den) = -1/den
    dpos = np.where(in_p, b * a / (np.where(in_p, x + a, 1.0) * safe), 0.0)
    dneg = np.where(in_n, -1.0 / safe, 0.0)
    return np.log(fp_c), np.log(fn_c), dpos, dneg


def batch_grad(U, V, src, dst, negs, pi, variant, b, eps, gU, gV):
    """Accumulate the gradient of the negative log-likelihood of one batch.

    Adds into ``gU``/``gV`` and returns the summed loss.
    """
    Us = U[src]
    x = np.einsum("ij,ij->i", Us, V[dst])
    pos, _, dpos, _ = pair_terms(x, pi[src] * pi[dst], b, variant, eps)
    loss = -pos.sum()
    np.add.at(gU, src, -dpos[:, None] * V[dst])
    np.add.at(gV, dst, -dpos[:, None] * Us)
    k = negs.shape[1]
    if k:
        srcr = np.repeat(src, k)
        w = negs.ravel()
        Ur = U[srcr]
        xn = np.einsum("ij,ij->i", Ur, V[w])
        _, neg, _, dneg = pair_terms(xn, pi[srcr] * pi[w], b, variant, eps)
        loss -= neg.sum()
        np.add.at(gU, srcr, -dneg[:, None] * V[w])
        np.add.at(gV, w, -dneg[:, None] * Ur)
    return float(loss)
