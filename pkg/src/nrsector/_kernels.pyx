# cython: language_level=3
"""Compiled hot kernels; see nrsector._fallback for the reference semantics.

Inner loops use real arithmetic on (re, im) pairs and |z|^2, which avoids
hypot and the C99 complex multiply/divide helpers.
"""

import numpy as np

from libc.math cimport pow, hypot, NAN

cdef extern from "complex.h" nogil:
    double cabs(double complex)
    double complex conj(double complex)

cdef double TINY = 1e-300
# below this |z|^2 may have lost precision to underflow, so fall back to hypot
cdef double SMALL_SQ = 1e-280


cdef inline double dual_scale(double re, double im, double p) noexcept nogil:
    """|z|^(p-2), or 0 when |z| < TINY."""
    cdef double r2 = re * re + im * im
    if r2 < SMALL_SQ:
        r2 = hypot(re, im)
        if r2 < TINY:
            return 0.0
        return pow(r2, p - 2.0)
    return pow(r2, 0.5 * p - 1.0)


cdef inline double complex dual(double complex z, double p) noexcept nogil:
    return z * dual_scale(z.real, z.imag, p)


cdef double pnorm_row(const double complex[::1] f, const double[::1] mu,
                      double p) noexcept nogil:
    cdef Py_ssize_t j, n = f.shape[0]
    cdef double top = 0.0, s = 0.0, a, inv
    for j in range(n):
        a = cabs(f[j])
        if a > top:
            top = a
    if top == 0.0:
        return 0.0
    inv = 1.0 / top
    for j in range(n):
        a = (f[j].real * inv) ** 2 + (f[j].imag * inv) ** 2
        s += pow(a, 0.5 * p) * mu[j]
    return top * pow(s, 1.0 / p)


def lp_form_many(z, w, double p):
    """(w - z) * conj(F_p(w) - F_p(z)) for paired arrays z, w."""
    cdef const double complex[::1] zv = np.ascontiguousarray(z, dtype=complex)
    cdef const double complex[::1] wv = np.ascontiguousarray(w, dtype=complex)
    cdef Py_ssize_t i, n = zv.shape[0]
    if wv.shape[0] != n:
        raise ValueError("z and w must have the same length")
    out = np.empty(n, dtype=complex)
    cdef double[::1] o = out.view(np.float64)
    cdef double zr, zi, wr, wi, sz, sw, dr, di, er, ei
    with nogil:
        for i in range(n):
            zr = zv[i].real
            zi = zv[i].imag
            wr = wv[i].real
            wi = wv[i].imag
            sz = dual_scale(zr, zi, p)
            sw = dual_scale(wr, wi, p)
            dr = wr - zr
            di = wi - zi
            er = wr * sw - zr * sz
            ei = wi * sw - zi * sz
            # (dr + i di) * (er - i ei)
            o[2 * i] = dr * er + di * ei
            o[2 * i + 1] = di * er - dr * ei
    return out


def form_values(A, mu, X, double p):
    """<A f, F_p(f)> / ||f||_p^p for every row f of X (NaN for zero rows)."""
    cdef const double complex[:, ::1] a = np.ascontiguousarray(A, dtype=complex)
    cdef const double[::1] m = np.ascontiguousarray(mu, dtype=float)
    cdef const double complex[:, ::1] x = np.ascontiguousarray(np.atleast_2d(X), dtype=complex)
    cdef Py_ssize_t N = x.shape[0], n = x.shape[1], r, j, k
    if a.shape[0] != n or a.shape[1] != n or m.shape[0] != n:
        raise ValueError("dimension mismatch")
    out = np.empty(N, dtype=complex)
    cdef double[::1] o = out.view(np.float64)
    buf = np.empty(2 * n, dtype=float)
    cdef double[::1] y = buf
    cdef double top, inv, den, ab, sr, si, ar, ai, nr, ni, s, fr, fi, xr, xi
    with nogil:
        for r in range(N):
            top = 0.0
            for j in range(n):
                ab = cabs(x[r, j])
                if ab > top:
                    top = ab
            if top == 0.0:
                o[2 * r] = NAN
                o[2 * r + 1] = NAN
                continue
            inv = 1.0 / top
            for j in range(n):
                y[2 * j] = x[r, j].real * inv
                y[2 * j + 1] = x[r, j].imag * inv
            nr = ni = den = 0.0
            for j in range(n):
                sr = si = 0.0
                for k in range(n):
                    ar = a[j, k].real
                    ai = a[j, k].imag
                    xr = y[2 * k]
                    xi = y[2 * k + 1]
                    sr += ar * xr - ai * xi
                    si += ar * xi + ai * xr
                fr = y[2 * j]
                fi = y[2 * j + 1]
                ab = fr * fr + fi * fi
                s = dual_scale(fr, fi, p) * m[j]
                # (A f)_j * conj(F(f_j)) * mu_j, and |f_j|^p mu_j = |f_j|^2 |f_j|^(p-2) mu_j
                nr += (sr * fr + si * fi) * s
                ni += (si * fr - sr * fi) * s
                den += ab * s
            o[2 * r] = nr / den
            o[2 * r + 1] = ni / den
    return out


def pnorm_ascent(M, mu, double p, F0, int max_iter=200, double rtol=1e-13):
    """Multistart nonlinear power iteration for max ||M f||_p over ||f||_p = 1."""
    cdef const double complex[:, ::1] a = np.ascontiguousarray(M, dtype=complex)
    cdef const double[::1] m = np.ascontiguousarray(mu, dtype=float)
    F_arr = np.array(np.atleast_2d(F0), dtype=complex, order="C")
    cdef double complex[:, ::1] F = F_arr
    cdef Py_ssize_t R = F.shape[0], n = F.shape[1], r, j, k
    cdef int it
    if a.shape[0] != n or a.shape[1] != n or m.shape[0] != n:
        raise ValueError("dimension mismatch")
    cdef double q = p / (p - 1.0)
    g_arr = np.empty(n, dtype=complex)
    v_arr = np.empty(n, dtype=complex)
    cdef double complex[::1] g = g_arr
    cdef double complex[::1] v = v_arr
    best_vec = np.array(F_arr[0], copy=True)
    cdef double complex[::1] bv = best_vec
    cdef double best = -1.0, nf, val, prev, top, ab
    cdef double complex acc
    with nogil:
        for r in range(R):
            prev = -1.0
            for it in range(max_iter):
                nf = pnorm_row(F[r], m, p)
                if nf == 0.0:
                    break
                for j in range(n):
                    F[r, j] = F[r, j] / nf
                for j in range(n):
                    acc = 0
                    for k in range(n):
                        acc = acc + a[j, k] * F[r, k]
                    g[j] = acc
                val = pnorm_row(g, m, p)
                if val > best:
                    best = val
                    for j in range(n):
                        bv[j] = F[r, j]
                if val - prev <= rtol * (val if val > 1e-300 else 1e-300):
                    break
                prev = val
                top = 0.0
                for j in range(n):
                    ab = cabs(g[j])
                    if ab > top:
                        top = ab
                if top == 0.0:
                    break
                for j in range(n):
                    g[j] = dual(g[j] / top, p) * m[j]
                top = 0.0
                for k in range(n):
                    acc = 0
                    for j in range(n):
                        acc = acc + conj(a[j, k]) * g[j]
                    v[k] = acc / m[k]
                    ab = cabs(v[k])
                    if ab > top:
                        top = ab
                if top == 0.0:
                    break
                for k in range(n):
                    F[r, k] = dual(v[k] / top, q)
    return (best if best > 0.0 else 0.0), best_vec
