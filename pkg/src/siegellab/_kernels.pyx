# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: MPFR series recurrence and the arc-diameter pinch scan.

Operation order matches ``_pykernels`` exactly; see that module for the
mathematical description.
"""
import gmpy2
import numpy as np

from libc.math cimport sqrt, INFINITY
from libc.stdlib cimport malloc, free
from libc.string cimport memcpy

cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"


cdef extern from "gmp.h" nogil:
    ctypedef struct __mpz_struct:
        pass
    ctypedef __mpz_struct mpz_t[1]
    void mpz_init(mpz_t)
    void mpz_clear(mpz_t)
    int mpz_set_str(mpz_t, const char *, int)
    char *mpz_get_str(char *, int, const mpz_t)
    size_t mpz_sizeinbase(const mpz_t, int)


cdef extern from "mpfr.h" nogil:
    ctypedef struct __mpfr_struct:
        pass
    ctypedef __mpfr_struct mpfr_t[1]
    ctypedef long mpfr_prec_t
    ctypedef long mpfr_exp_t
    ctypedef enum mpfr_rnd_t:
        MPFR_RNDN
    void mpfr_init2(mpfr_t, mpfr_prec_t)
    void mpfr_clear(mpfr_t)
    int mpfr_set_ui(mpfr_t, unsigned long, mpfr_rnd_t)
    int mpfr_set_z_2exp(mpfr_t, const mpz_t, mpfr_exp_t, mpfr_rnd_t)
    mpfr_exp_t mpfr_get_z_2exp(mpz_t, const mpfr_t)
    int mpfr_mul(mpfr_t, const mpfr_t, const mpfr_t, mpfr_rnd_t)
    int mpfr_add(mpfr_t, const mpfr_t, const mpfr_t, mpfr_rnd_t)
    int mpfr_sub(mpfr_t, const mpfr_t, const mpfr_t, mpfr_rnd_t)
    int mpfr_mul_2ui(mpfr_t, const mpfr_t, unsigned long, mpfr_rnd_t)
    int mpfr_zero_p(const mpfr_t)


cdef void _load(mpfr_t dst, value, mpz_t tmp):
    man, exp = value.as_mantissa_exp()
    man = int(man)
    s = format(man, "x").encode("ascii")
    mpz_set_str(tmp, s, 16)
    mpfr_set_z_2exp(dst, tmp, <mpfr_exp_t>int(exp), MPFR_RNDN)


cdef object _store(mpfr_t src, mpz_t tmp, long precision):
    cdef char *buf
    if mpfr_zero_p(src):
        return gmpy2.mpfr(0, precision)
    cdef mpfr_exp_t e = mpfr_get_z_2exp(tmp, src)
    buf = <char *> malloc(mpz_sizeinbase(tmp, 16) + 2)
    if buf == NULL:
        raise MemoryError()
    try:
        mpz_get_str(buf, 16, tmp)
        s = buf.decode("ascii")
    finally:
        free(buf)
    with gmpy2.context(precision=precision):
        return gmpy2.mul_2exp(gmpy2.mpfr(int(s, 16), precision), e)


def series_recurrence(inv_re, inv_im, long n_terms, long precision):
    """Compiled twin of ``_pykernels.series_recurrence``."""
    cdef long N = n_terms
    cdef long n, j, h
    cdef mpfr_t *re = <mpfr_t *> malloc((N + 1) * sizeof(mpfr_t))
    cdef mpfr_t *im = <mpfr_t *> malloc((N + 1) * sizeof(mpfr_t))
    cdef mpfr_t sr, si, t, ir, ii, t2
    cdef mpz_t tmp
    if re == NULL or im == NULL:
        free(re)
        free(im)
        raise MemoryError()
    mpz_init(tmp)
    for n in range(N + 1):
        mpfr_init2(re[n], precision)
        mpfr_init2(im[n], precision)
        mpfr_set_ui(re[n], 0, MPFR_RNDN)
        mpfr_set_ui(im[n], 0, MPFR_RNDN)
    mpfr_init2(sr, precision)
    mpfr_init2(si, precision)
    mpfr_init2(t, precision)
    mpfr_init2(t2, precision)
    mpfr_init2(ir, precision)
    mpfr_init2(ii, precision)
    try:
        if N >= 1:
            mpfr_set_ui(re[1], 1, MPFR_RNDN)
        for n in range(2, N + 1):
            mpfr_set_ui(sr, 0, MPFR_RNDN)
            mpfr_set_ui(si, 0, MPFR_RNDN)
            h = (n - 1) // 2
            with nogil:
                for j in range(1, h + 1):
                    mpfr_mul(t, re[j], re[n - j], MPFR_RNDN)
                    mpfr_add(sr, sr, t, MPFR_RNDN)
                    mpfr_mul(t, im[j], im[n - j], MPFR_RNDN)
                    mpfr_sub(sr, sr, t, MPFR_RNDN)
                    mpfr_mul(t, re[j], im[n - j], MPFR_RNDN)
                    mpfr_add(si, si, t, MPFR_RNDN)
                    mpfr_mul(t, im[j], re[n - j], MPFR_RNDN)
                    mpfr_add(si, si, t, MPFR_RNDN)
                mpfr_mul_2ui(sr, sr, 1, MPFR_RNDN)
                mpfr_mul_2ui(si, si, 1, MPFR_RNDN)
                if n % 2 == 0:
                    h = n // 2
                    mpfr_mul(t, re[h], re[h], MPFR_RNDN)
                    mpfr_add(sr, sr, t, MPFR_RNDN)
                    mpfr_mul(t, im[h], im[h], MPFR_RNDN)
                    mpfr_sub(sr, sr, t, MPFR_RNDN)
                    mpfr_mul(t, re[h], im[h], MPFR_RNDN)
                    mpfr_mul_2ui(t, t, 1, MPFR_RNDN)
                    mpfr_add(si, si, t, MPFR_RNDN)
            _load(ir, inv_re[n], tmp)
            _load(ii, inv_im[n], tmp)
            with nogil:
                mpfr_mul(t, sr, ir, MPFR_RNDN)
                mpfr_mul(t2, si, ii, MPFR_RNDN)
                mpfr_sub(re[n], t, t2, MPFR_RNDN)
                mpfr_mul(t, sr, ii, MPFR_RNDN)
                mpfr_mul(t2, si, ir, MPFR_RNDN)
                mpfr_add(im[n], t, t2, MPFR_RNDN)
        out_re = [_store(re[n], tmp, precision) for n in range(N + 1)]
        out_im = [_store(im[n], tmp, precision) for n in range(N + 1)]
    finally:
        for n in range(N + 1):
            mpfr_clear(re[n])
            mpfr_clear(im[n])
        mpfr_clear(sr)
        mpfr_clear(si)
        mpfr_clear(t)
        mpfr_clear(t2)
        mpfr_clear(ir)
        mpfr_clear(ii)
        mpz_clear(tmp)
        free(re)
        free(im)
    return out_re, out_im


cdef inline double _dist(const double *x, const double *y, long i, long j) nogil:
    cdef double dx = x[j] - x[i]
    cdef double dy = y[j] - y[i]
    return sqrt(dx * dx + dy * dy)


def pinch_scan(x, y, seps):
    """Compiled twin of ``_pykernels.pinch_scan``."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xa = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ya = np.ascontiguousarray(y, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] sa = np.ascontiguousarray(seps, dtype=np.int64)
    cdef long M = xa.shape[0]
    cdef long k = sa.shape[0]
    cdef long s, L, Ls, i, j, last = 0, ib
    cdef double a, b, c, du, dv, d, p, pb
    cdef const double *px = &xa[0]
    cdef const double *py = &ya[0]

    cdef cnp.ndarray[cnp.int64_t, ndim=1] slot = np.full(M + 1, -1, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] comp = np.full(M + 1, -1, dtype=np.int64)
    for s in range(k):
        slot[sa[s]] = s
        comp[M - sa[s]] = s
        if M - sa[s] > last:
            last = M - sa[s]

    best_i = np.zeros(k, dtype=np.int64)
    best_p = np.full(k, -1.0)
    best_d = np.zeros(k)
    best_u = np.zeros(k)
    best_v = np.zeros(k)
    cdef cnp.int64_t[:] bi = best_i
    cdef double[:] bp = best_p
    cdef double[:] bd = best_d
    cdef double[:] bu = best_u
    cdef double[:] bv = best_v

    cdef double *rows = <double *> malloc(k * M * sizeof(double)) if k > 0 else NULL
    cdef double *prev = <double *> malloc(M * sizeof(double))
    cdef double *cur = <double *> malloc(M * sizeof(double))
    cdef double *tmp
    if prev == NULL or cur == NULL or (k > 0 and rows == NULL):
        free(rows)
        free(prev)
        free(cur)
        raise MemoryError()
    try:
        with nogil:
            for i in range(M):
                prev[i] = 0.0
            for L in range(1, last + 1):
                for i in range(M):
                    a = prev[i]
                    b = prev[i + 1] if i + 1 < M else prev[0]
                    j = i + L
                    if j >= M:
                        j -= M
                    c = _dist(px, py, i, j)
                    if b > a:
                        a = b
                    if c > a:
                        a = c
                    cur[i] = a
                if slot[L] >= 0:
                    memcpy(rows + slot[L] * M, cur, M * sizeof(double))
                s = comp[L]
                if s >= 0:
                    Ls = M - L
                    pb = -1.0
                    ib = 0
                    for i in range(M):
                        j = i + Ls
                        if j >= M:
                            j -= M
                        du = rows[s * M + i]
                        dv = cur[j]
                        d = _dist(px, py, i, j)
                        if d == 0.0:
                            p = INFINITY
                        else:
                            p = (du if du < dv else dv) / d
                        if p > pb:
                            pb = p
                            ib = i
                    j = ib + Ls
                    if j >= M:
                        j -= M
                    bi[s] = ib
                    bp[s] = pb
                    bd[s] = _dist(px, py, ib, j)
                    bu[s] = rows[s * M + ib]
                    bv[s] = cur[j]
                tmp = prev
                prev = cur
                cur = tmp
    finally:
        free(rows)
        free(prev)
        free(cur)
    return best_i, best_p, best_d, best_u, best_v
