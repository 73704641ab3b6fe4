"""Roughness measurements on sampled Jordan curves.

Conventions for a curve sampled at p_0..p_{M-1} (indices mod M): the pair
(i, j) splits the curve into the arcs U = p_i, p_{i+1}, ..., p_j and
V = p_j, ..., p_{i+M}.  Both arcs include their endpoints when their
diameters are taken.  The pinching of the pair is

    min(diam U, diam V) / |p_i - p_j|.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np
from scipy.spatial.distance import directed_hausdorff

from . import _backend
from .curves import SampledCurve
from .errors import (CoincidentPoints, DegenerateFit, GridMismatch,
                     InsufficientScales)
from .hexfloat import float_to_hex

BRUTE_FORCE_ARC = 4096
DEFAULT_PAIR_BUDGET = 1 << 22


@dataclass(frozen=True)
class PinchingReport:
    i: int
    j: int
    dist: float
    diam_u: float
    diam_v: float
    pinch: float

    def __post_init__(self):
        if not self.dist > 0:
            raise CoincidentPoints(f"samples {self.i} and {self.j} coincide")

    def to_json(self) -> dict:
        d = asdict(self)
        for k in ("dist", "diam_u", "diam_v", "pinch"):
            d[k] = float_to_hex(d[k])
        return d


# diameters -----------------------------------------------------------------

def _pairwise_max(x: np.ndarray, y: np.ndarray, chunk: int = 512) -> float:
    best = 0.0
    n = x.shape[0]
    for s in range(0, n, chunk):
        dx = x[None, :] - x[s:s + chunk, None]
        dy = y[None, :] - y[s:s + chunk, None]
        best = max(best, float(np.max(np.sqrt(dx * dx + dy * dy))))
    return best


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Counter-clockwise hull vertices (Andrew's monotone chain)."""
    pts = sorted(set(zip(np.real(points).tolist(), np.imag(points).tolist())))
    if len(pts) <= 2:
        return np.array([complex(*p) for p in pts])

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    return np.array([complex(*p) for p in hull])


def _dist(a: complex, b: complex) -> float:
    dx = b.real - a.real
    dy = b.imag - a.imag
    return math.sqrt(dx * dx + dy * dy)


def calipers_diameter(hull: np.ndarray) -> float:
    """Diameter of a convex polygon by rotating calipers over antipodal pairs."""
    h = len(hull)
    if h == 1:
        return 0.0
    if h == 2:
        return _dist(hull[0], hull[1])

    def area2(a, b, c):
        return abs((b.real - a.real) * (c.imag - a.imag)
                   - (b.imag - a.imag) * (c.real - a.real))

    best = 0.0
    k = 1
    for i in range(h):
        a = hull[i]
        b = hull[(i + 1) % h]
        while area2(a, b, hull[(k + 1) % h]) > area2(a, b, hull[k]):
            k = (k + 1) % h
        best = max(best, _dist(a, hull[k]), _dist(b, hull[k]))
    return best


def point_set_diameter(points: np.ndarray) -> float:
    """Exact O(m^2) scan for small sets, hull + rotating calipers otherwise."""
    points = np.asarray(points, dtype=np.complex128)
    if points.shape[0] < 2:
        return 0.0
    if points.shape[0] <= BRUTE_FORCE_ARC:
        return _pairwise_max(points.real.copy(), points.imag.copy())
    return calipers_diameter(convex_hull(points))


def arc(curve: SampledCurve, i: int, j: int) -> np.ndarray:
    """Samples p_i, p_{i+1}, ..., p_j (forward, wrapping, endpoints included)."""
    M = curve.M
    length = (j - i) % M
    return curve.points[(i + np.arange(length + 1)) % M]


def pinch(curve: SampledCurve, i: int, j: int) -> PinchingReport:
    M = curve.M
    i %= M
    j %= M
    if i == j:
        raise CoincidentPoints("pinching needs two distinct samples")
    d = _dist(curve.points[i], curve.points[j])
    if d == 0.0:
        raise CoincidentPoints(f"samples {i} and {j} coincide")
    du = point_set_diameter(arc(curve, i, j))
    dv = point_set_diameter(arc(curve, j, i))
    return PinchingReport(i, j, d, du, dv, min(du, dv) / d)


# quasicircle constant ---------------------------------------------------------

class QuasicircleEstimate(NamedTuple):
    K: float
    witness: PinchingReport
    exhaustive: bool


def pair_separations(M: int, pair_budget: int = DEFAULT_PAIR_BUDGET):
    """Index separations to scan and whether they cover all pairs.

    Separations L and M - L describe the same pairs, so L runs over 1..M//2.
    Over budget, only dyadic separations 1, 2, 4, ... are kept.
    """
    if M * M <= pair_budget:
        return np.arange(1, M // 2 + 1, dtype=np.int64), True
    seps = [1 << k for k in range(int(math.log2(M // 2)) + 1)]
    return np.array(seps, dtype=np.int64), False


def pinch_profile(curve: SampledCurve, pair_budget: int = DEFAULT_PAIR_BUDGET):
    """Largest pinching at each scanned separation.

    Returns ``(reports, exhaustive)``; ``reports`` is ordered by separation.
    """
    seps, exhaustive = pair_separations(curve.M, pair_budget)
    pts = curve.points
    bi, bp, bd, bu, bv = _backend.pinch_scan(pts.real.copy(), pts.imag.copy(), seps)
    reports = []
    for L, i, p, d, u, v in zip(seps, bi, bp, bd, bu, bv):
        if not math.isfinite(p):
            raise CoincidentPoints(
                f"samples {int(i)} and {int((i + L) % curve.M)} coincide")
        reports.append(PinchingReport(int(i), int((i + L) % curve.M),
                                      float(d), float(u), float(v), float(p)))
    return reports, exhaustive


def quasicircle_constant(curve: SampledCurve,
                         pair_budget: int = DEFAULT_PAIR_BUDGET) -> QuasicircleEstimate:
    """Largest pinching over all pairs, or over dyadic strata when over budget.

    In the subsampled case the value is a lower bound for the all-pairs
    constant (``exhaustive`` is False).  Ties go to the smallest separation.
    """
    reports, exhaustive = pinch_profile(curve, pair_budget)
    best = reports[0]
    for rep in reports[1:]:
        if rep.pinch > best.pinch:
            best = rep
    return QuasicircleEstimate(best.pinch, best, exhaustive)


# distances ---------------------------------------------------------------------

def _xy(curve: SampledCurve) -> np.ndarray:
    return np.column_stack([curve.points.real, curve.points.imag])


def hausdorff_distance(a: SampledCurve, b: SampledCurve) -> float:
    """Symmetric Hausdorff distance between the two sample sets."""
    pa, pb = _xy(a), _xy(b)
    return float(max(directed_hausdorff(pa, pb)[0], directed_hausdorff(pb, pa)[0]))


def sup_norm_distance(a: SampledCurve, b: SampledCurve) -> float:
    """max_k |a_k - b_k| for curves on the same parameter grid."""
    if a.M != b.M:
        raise GridMismatch(f"grids differ: M={a.M} vs M={b.M}")
    return float(np.max(np.abs(a.points - b.points)))


# regularity --------------------------------------------------------------------

@dataclass(frozen=True)
class RegularityProbe:
    scale_pairs: tuple
    alpha: float
    fit_residual: float
    flagged: bool

    def smallest_scale_ratio(self) -> float:
        """displacement / separation at the finest recorded scale."""
        sep, disp = self.scale_pairs[0]
        return disp / sep


FLAG_RESIDUAL = 0.05
ALPHA_TOLERANCE = 0.05


def max_displacement(curve: SampledCurve, L: int) -> float:
    pts = curve.points
    return float(np.max(np.abs(np.roll(pts, -L) - pts)))


def holder_exponent(curve: SampledCurve, min_sep: float, max_sep: float) -> RegularityProbe:
    """Fit max displacement ~ separation^alpha over dyadic scales.

    Separations are parameter distances in T = R/Z; scales run over
    min_sep * 2^k <= max_sep, each rounded to a whole number of samples.
    The probe is flagged when the log-log fit is poor or alpha falls outside
    (tolerance, 1 + tolerance]; an exponent near zero means the displacement
    does not shrink with the scale at all.
    """
    M = curve.M
    if not 0 < min_sep < max_sep <= 0.5:
        raise InsufficientScales("need 0 < min_sep < max_sep <= 1/2")
    if max_sep / min_sep < 100:
        raise InsufficientScales("separations must span at least two decades")
    if min_sep < 4 / M:
        raise InsufficientScales(f"min_sep below 4/M = {4 / M:.3g}; sample more densely")
    Ls = []
    s = min_sep
    while s <= max_sep * (1 + 1e-12):
        L = int(round(s * M))
        if not Ls or L != Ls[-1]:
            Ls.append(L)
        s *= 2
    pairs = tuple((L / M, max_displacement(curve, L)) for L in Ls)
    seps = np.array([p[0] for p in pairs])
    disp = np.array([p[1] for p in pairs])
    if np.any(disp <= 0):
        raise DegenerateFit("zero displacement at some scale")
    x = np.log(seps)
    y = np.log(disp)
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    alpha = float(slope)
    flagged = resid > FLAG_RESIDUAL or not (ALPHA_TOLERANCE < alpha <= 1 + ALPHA_TOLERANCE)
    return RegularityProbe(pairs, alpha, resid, flagged)


# stability of the quasicircle bound under C^1 perturbation -------------------------

class C1Check(NamedTuple):
    holds: bool
    K_prime: float


def min_displacements(curve: SampledCurve) -> np.ndarray:
    """m[L] = min_i |p_{i+L} - p_i| for L = 0..M//2 (m[0] = 0)."""
    pts = curve.points
    out = np.zeros(curve.M // 2 + 1)
    for L in range(1, curve.M // 2 + 1):
        out[L] = np.min(np.abs(np.roll(pts, -L) - pts))
    return out


def separation_floor(f: SampledCurve, eta: float):
    """(eps_index, mu) for the perturbation size ``eta``.

    eps_index is the smallest index separation whose minimal displacement
    exceeds 8 eta (the slack of m/8 used for derivatives, transferred to
    displacements); mu is the minimal displacement over all separations
    >= eps_index.  Returns (None, 0.0) if no separation qualifies.
    """
    m = min_displacements(f)
    ok = np.nonzero(m[1:] > 8 * eta)[0]
    if ok.size == 0:
        return None, 0.0
    eps = int(ok[0]) + 1
    return eps, float(np.min(m[eps:]))


def check_c1_stability(f: SampledCurve, g: SampledCurve, K: float,
                       tolerance: float = 1e-3,
                       pair_budget: int = DEFAULT_PAIR_BUDGET) -> C1Check:
    """Does g stay below K' = K (mu + 2 eta)/(mu - 2 eta), eta = ||f - g||?

    ``K`` is the caller's quasicircle constant for f.  When the bound does
    not apply (eta >= mu/2) the result is ``(False, inf)``.
    """
    eta = sup_norm_distance(f, g)
    _, mu = separation_floor(f, eta)
    if not eta < mu / 2:
        return C1Check(False, math.inf)
    K_prime = K * (mu + 2 * eta) / (mu - 2 * eta)
    measured = quasicircle_constant(g, pair_budget).K
    return C1Check(bool(measured <= K_prime + tolerance), float(K_prime))
