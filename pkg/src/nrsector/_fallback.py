"""Pure numpy versions of the hot kernels.

Signatures and results match ``nrsector._kernels`` (the compiled module);
``nrsector._backend`` picks one at import time.
"""

import numpy as np

_TINY = 1e-300


def _dual(z, p):
    a = np.abs(z)
    out = np.zeros_like(z)
    nz = a >= _TINY
    out[nz] = z[nz] * a[nz] ** (p - 2.0)
    return out


def _row_pnorm(X, mu, p):
    a = np.abs(X)
    top = a.max(axis=1)
    safe = np.where(top > 0, top, 1.0)
    s = ((a / safe[:, None]) ** p * mu).sum(axis=1)
    return np.where(top > 0, safe * s ** (1.0 / p), 0.0)


def lp_form_many(z, w, p):
    """(w - z) * conj(F_p(w) - F_p(z)) for paired arrays z, w."""
    z = np.ascontiguousarray(z, dtype=complex)
    w = np.ascontiguousarray(w, dtype=complex)
    return (w - z) * np.conj(_dual(w, p) - _dual(z, p))


def _form_one(A, mu, f, p):
    # the optimiser calls form_values one vector at a time; skip the batch bookkeeping
    a = np.abs(f)
    top = a.max()
    if top == 0:
        return complex(np.nan, np.nan)
    f = f / top
    a = a / top
    s = np.zeros_like(a)
    nz = a >= _TINY
    s[nz] = a[nz] ** (p - 2.0) * mu[nz]
    return complex(np.dot(A @ f, np.conj(f) * s) / np.dot(a * a, s))


def form_values(A, mu, X, p):
    """<A f, F_p(f)> / ||f||_p^p for every row f of X (NaN for zero rows)."""
    X = np.atleast_2d(np.asarray(X, dtype=complex))
    if X.shape[0] == 1:
        return np.array([_form_one(A, mu, X[0], p)])
    A = np.ascontiguousarray(A, dtype=complex)
    mu = np.ascontiguousarray(mu, dtype=float)
    top = np.abs(X).max(axis=1)
    zero = top == 0
    Xs = X / np.where(zero, 1.0, top)[:, None]
    num = ((Xs @ A.T) * np.conj(_dual(Xs, p)) * mu).sum(axis=1)
    den = (np.abs(Xs) ** p * mu).sum(axis=1)
    out = num / np.where(zero, 1.0, den)
    out[zero] = np.nan
    return out


def pnorm_ascent_batch(Ms, mu, p, F0, max_iter=200, rtol=1e-13):
    """pnorm_ascent for a stack of matrices Ms[b] with starts F0[b], all at once.

    Every (matrix, start) pair is iterated as its own row and frozen once it
    stops improving, so the result for each b is what pnorm_ascent would give
    for that matrix alone. Returns (best values of shape (B,), vectors (B, n)).
    """
    Ms = np.ascontiguousarray(Ms, dtype=complex)
    mu = np.ascontiguousarray(mu, dtype=float)
    F0 = np.asarray(F0, dtype=complex)
    B, R, n = F0.shape
    F = F0.reshape(B * R, n).copy()
    owner = np.repeat(np.arange(B), R)
    Mt = np.swapaxes(Ms, 1, 2)[owner]  # row-wise M^T, so G = f M^T
    Mc = np.conj(Ms)[owner]
    q = p / (p - 1.0)
    best = np.full(B, -1.0)
    best_vec = F0[:, 0, :].copy()
    prev = np.full(B * R, -1.0)
    active = np.ones(B * R, dtype=bool)
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        nf = _row_pnorm(F[idx], mu, p)
        active[idx[nf == 0]] = False
        keep = nf > 0
        idx, nf = idx[keep], nf[keep]
        if idx.size == 0:
            break
        F[idx] /= nf[:, None]
        G = np.einsum("rj,rjk->rk", F[idx], Mt[idx])
        val = _row_pnorm(G, mu, p)
        better = val > best[owner[idx]]
        if better.any():
            b, v, r = owner[idx][better], val[better], idx[better]
            order = np.lexsort((v, b))
            b, v, r = b[order], v[order], r[order]
            last = np.r_[b[1:] != b[:-1], True]
            best[b[last]] = v[last]
            best_vec[b[last]] = F[r[last]]
        moving = val - prev[idx] > rtol * np.maximum(val, 1e-300)
        prev[idx] = val
        gtop = np.abs(G).max(axis=1)
        moving &= gtop > 0
        active[idx[~moving]] = False
        idx, G = idx[moving], G[moving] / gtop[moving, None]
        if idx.size == 0:
            break
        V = np.einsum("rj,rjk->rk", _dual(G, p) * mu, Mc[idx]) / mu
        vtop = np.abs(V).max(axis=1)
        dead = vtop == 0
        active[idx[dead]] = False
        F[idx[~dead]] = _dual(V[~dead] / vtop[~dead, None], q)
    return np.maximum(best, 0.0), best_vec


def pnorm_ascent(M, mu, p, F0, max_iter=200, rtol=1e-13):
    """Multistart nonlinear power iteration for max ||M f||_p over ||f||_p = 1.

    Each step maps f to the normalised F_p'(M* F_p(M f)), where M* is the
    adjoint for the weighted pairing; ||M f||_p never decreases along the
    iteration. Returns (best value, maximising vector).
    """
    F0 = np.atleast_2d(np.asarray(F0, dtype=complex))
    best, vec = pnorm_ascent_batch(np.asarray(M, dtype=complex)[None], mu, p, F0[None],
                                   max_iter, rtol)
    return float(best[0]), vec[0]
