"""Pure-Python kernels, used when the compiled extension is unavailable.

Both kernels perform exactly the same sequence of correctly rounded
operations as their counterparts in ``_kernels.pyx``, so the two backends
agree bit for bit.
"""
import gmpy2
import numpy as np
from gmpy2 import mpfr

BACKEND = "python"


def series_recurrence(inv_re, inv_im, n_terms, precision):
    """Coefficients c_1..c_N of the linearization series.

    ``inv_re[n] + i inv_im[n]`` is 1/(lambda^n - lambda) for n >= 2 (entries
    0 and 1 are ignored).  Returns two lists indexed 0..N with c_0 = 0 and
    c_1 = 1, where

        c_n = inv_n * sum_{j=1}^{n-1} c_j c_{n-j}

    and the symmetric convolution is folded in half.
    """
    N = n_terms
    with gmpy2.context(precision=precision, round=gmpy2.RoundToNearest):
        zero = mpfr(0)
        re = [zero] * (N + 1)
        im = [zero] * (N + 1)
        re[1] = mpfr(1)
        for n in range(2, N + 1):
            sr = zero
            si = zero
            for j in range(1, (n - 1) // 2 + 1):
                ar = re[j]
                ai = im[j]
                br = re[n - j]
                bi = im[n - j]
                sr = sr + ar * br
                sr = sr - ai * bi
                si = si + ar * bi
                si = si + ai * br
            sr = 2 * sr
            si = 2 * si
            if n % 2 == 0:
                ar = re[n // 2]
                ai = im[n // 2]
                sr = sr + ar * ar
                sr = sr - ai * ai
                si = si + 2 * (ar * ai)
            ir = inv_re[n]
            ii = inv_im[n]
            re[n] = sr * ir - si * ii
            im[n] = sr * ii + si * ir
    return re, im


def _dist_row(x, y, L):
    dx = np.roll(x, -L) - x
    dy = np.roll(y, -L) - y
    return np.sqrt(dx * dx + dy * dy)


def pinch_scan(x, y, seps):
    """Best pinching for every index separation in ``seps``.

    Arc diameters come from the interval recurrence
    D_L[i] = max(D_{L-1}[i], D_{L-1}[i+1], |p_i - p_{i+L}|), where D_L[i] is
    the diameter of the closed arc p_i, ..., p_{i+L} (indices mod M).  For
    a pair (i, i+L) the two arcs are D_L[i] and D_{M-L}[i+L].

    Returns arrays (best_i, pinch, dist, diam_u, diam_v) aligned with
    ``seps``; ties resolve to the smallest i.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    seps = np.asarray(seps, dtype=np.int64)
    M = x.shape[0]
    k = seps.shape[0]
    slot = {int(L): s for s, L in enumerate(seps)}
    comp = {M - int(L): s for s, L in enumerate(seps)}
    stored = {}
    best_i = np.zeros(k, dtype=np.int64)
    best_p = np.full(k, -1.0)
    best_d = np.zeros(k)
    best_u = np.zeros(k)
    best_v = np.zeros(k)
    last = max(comp) if comp else 0
    prev = np.zeros(M)
    for L in range(1, last + 1):
        cur = np.maximum(np.maximum(prev, np.roll(prev, -1)), _dist_row(x, y, L))
        if L in slot:
            stored[L] = cur
        if L in comp:
            s = comp[L]
            Ls = M - L
            du = stored[Ls]
            dv = np.roll(cur, -Ls)
            d = _dist_row(x, y, Ls)
            with np.errstate(divide="ignore", invalid="ignore"):
                p = np.minimum(du, dv) / d
            p = np.where(d == 0.0, np.inf, p)
            i = int(np.argmax(p))
            best_i[s] = i
            best_p[s] = p[i]
            best_d[s] = d[i]
            best_u[s] = du[i]
            best_v[s] = dv[i]
        prev = cur
    return best_i, best_p, best_d, best_u, best_v
