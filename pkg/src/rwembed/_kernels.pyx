# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: walk simulation and negative-sampling gradients."""

from libc.math cimport exp, log, log1p, fabs

cdef int PMI_SIGMOID = 0
cdef int AUTOCOV_PIECEWISE = 1


def simulate_walks(const long long[::1] indptr, const long long[::1] indices, const double[::1] keys,
                   const unsigned char[::1] dangling, const long long[::1] starts,
                   const double[:, :, ::1] uniforms, double teleport, long long[:, ::1] out):
    cdef Py_ssize_t nw = uniforms.shape[0], steps = uniforms.shape[1]
    cdef Py_ssize_t n = dangling.shape[0]
    cdef Py_ssize_t i, t, lo, hi, mid
    cdef long long cur, pick
    cdef double u1, u2, target
    with nogil:
        for i in range(nw):
            cur = starts[i]
            out[i, 0] = cur
            for t in range(steps):
                u1 = uniforms[i, t, 0]
                u2 = uniforms[i, t, 1]
                if dangling[cur] or u2 < teleport:
                    pick = <long long>(u1 * n)
                    if pick > n - 1:
                        pick = n - 1
                    cur = pick
                else:
                    target = cur + u1
                    # first index in the row with keys[j] > target
                    lo = indptr[cur]
                    hi = indptr[cur + 1]
                    while lo < hi:
                        mid = (lo + hi) // 2
                        if keys[mid] > target:
                            hi = mid
                        else:
                            lo = mid + 1
                    if lo > indptr[cur + 1] - 1:
                        lo = indptr[cur + 1] - 1
                    cur = indices[lo]
                out[i, t + 1] = cur


cdef inline double _log_sigmoid(double x) nogil:
    if x >= 0:
        return -log1p(exp(-x))
    return x - log1p(exp(x))


cdef inline double _sigmoid(double x) nogil:
    cdef double e
    if x >= 0:
        return 1.0 / (1.0 + exp(-x))
    e = exp(x)
    return e / (1.0 + e)


cdef inline void _terms(double x, double a, int b, int variant, double eps,
                        double* pos, double* neg, double* dpos, double* dneg) nogil:
    cdef double den, fp, fn
    if variant == PMI_SIGMOID:
        pos[0] = _log_sigmoid(x)
        neg[0] = _log_sigmoid(-x)
        dpos[0] = _sigmoid(-x)
        dneg[0] = -_sigmoid(x)
        return
    den = x + (b + 1) * a
    if den > 0:
        fp = (x + a) / den
        fn = a / den
    else:
        fp = 1.0
        fn = 0.0
    if den > 0 and fp > eps and fp < 1.0:
        dpos[0] = b * a / ((x + a) * den)
    else:
        dpos[0] = 0.0
    if den > 0 and fn > eps and fn < 1.0:
        dneg[0] = -1.0 / den
    else:
        dneg[0] = 0.0
    if fp < eps:
        fp = eps
    elif fp > 1.0:
        fp = 1.0
    if fn < eps:
        fn = eps
    elif fn > 1.0:
        fn = 1.0
    pos[0] = log(fp)
    neg[0] = log(fn)


def pair_terms_scalar(double x, double a, int b, int variant, double eps):
    cdef double pos, neg, dpos, dneg
    _terms(x, a, b, variant, eps, &pos, &neg, &dpos, &dneg)
    return pos, neg, dpos, dneg


def batch_grad(const double[:, ::1] U, const double[:, ::1] V, const long long[::1] src,
               const long long[::1] dst, const long long[:, ::1] negs, const double[::1] pi,
               int variant, int b, double eps, double[:, ::1] gU, double[:, ::1] gV):
    cdef Py_ssize_t B = src.shape[0], k = negs.shape[1], d = U.shape[1]
    cdef Py_ssize_t i, j, c
    cdef long long u, v, w
    cdef double x, pos, neg, dpos, dneg, loss = 0.0
    with nogil:
        for i in range(B):
            u = src[i]
            v = dst[i]
            x = 0.0
            for c in range(d):
                x += U[u, c] * V[v, c]
            _terms(x, pi[u] * pi[v], b, variant, eps, &pos, &neg, &dpos, &dneg)
            loss -= pos
            if dpos != 0.0:
                for c in range(d):
                    gU[u, c] -= dpos * V[v, c]
                    gV[v, c] -= dpos * U[u, c]
            for j in range(k):
                w = negs[i, j]
                x = 0.0
                for c in range(d):
                    x += U[u, c] * V[w, c]
                _terms(x, pi[u] * pi[w], b, variant, eps, &pos, &neg, &dpos, &dneg)
                loss -= neg
                if dneg != 0.0:
                    for c in range(d):
                        gU[u, c] -= dneg * V[w, c]
                        gV[w, c] -= dneg * U[u, c]
    return loss
