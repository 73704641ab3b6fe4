"""Finite perturbation experiments on Siegel-disk invariant curves.

Given theta and a radius bracket r1 < r2, each candidate theta_n (a
bounded-type approximant of theta) is linearized and the curves
phi_{theta_n}(r U) are scanned on a geometric radius grid for the first
radius r' where the quasicircle constant reaches K + pinch_margin.  The
round is *found* when, in addition, the pinching exceeds K, the curve stays
sup-norm close to phi_theta(r' U), theta_n is close to theta, and
r1 < r' < min(r2, radius estimate of theta_n).  Every round is recorded,
including failures.
"""
from __future__ import annotations

import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

from .curvegeom import (DEFAULT_PAIR_BUDGET, PinchingReport, quasicircle_constant,
                        sup_norm_distance)
from .errors import (DegenerateFit, InsufficientDepth, NoCandidates,
                     PrecisionExhausted, TailTooLarge)
from .hexfloat import float_to_hex, hex_to_float
from .linearization import (LinearizationSeries, TAIL_TOLERANCE, critical_point_distance,
                            linearize, sample_curve)
from .rotation import RotationNumber, bounded_type_approximant, parse_theta

FOUND = "found"
NOT_FOUND = "not-found"
PRECISION_LIMIT = "precision-limit"


class TargetUnreachable(UserWarning):
    """The closest approximant radius misses the target by more than 20%."""


class HermanShadowWarning(UserWarning):
    """A found curve does not approach the critical point as r grows."""


@dataclass(frozen=True)
class ExperimentConfig:
    theta: RotationNumber
    r1: float
    r2: float
    K: float
    epsilon: float
    cut_range: tuple
    tail_entries: tuple
    series_N: int = 4000
    samples_M: int = 512
    pinch_margin: float = 1.0
    radius_margin: float = 0.01
    grid_ratio: float = 1.02
    pair_budget: int = DEFAULT_PAIR_BUDGET
    tail_tolerance: float = TAIL_TOLERANCE

    def __post_init__(self):
        object.__setattr__(self, "cut_range", tuple(int(c) for c in self.cut_range))
        object.__setattr__(self, "tail_entries", tuple(int(t) for t in self.tail_entries))
        if not 0 < self.r1 < self.r2:
            raise ValueError("need 0 < r1 < r2")
        if not self.K > 1:
            raise ValueError("need K > 1")
        # epsilon = 0 is accepted: it is the vacuous budget, no round can be found
        if not self.epsilon >= 0:
            raise ValueError("need epsilon >= 0")
        if self.grid_ratio <= 1:
            raise ValueError("grid_ratio must exceed 1")
        if self.samples_M < 16 or self.series_N < 2:
            raise ValueError("need samples_M >= 16 and series_N >= 2")

    @property
    def r3(self) -> float:
        return (self.r1 + self.r2) / 2

    def to_json(self) -> dict:
        return {
            "theta": self.theta.to_json(),
            "r1": float_to_hex(self.r1),
            "r2": float_to_hex(self.r2),
            "K": float_to_hex(self.K),
            "epsilon": float_to_hex(self.epsilon),
            "cut_range": list(self.cut_range),
            "tail_entries": list(self.tail_entries),
            "series_N": self.series_N,
            "samples_M": self.samples_M,
            "pinch_margin": float_to_hex(self.pinch_margin),
            "radius_margin": float_to_hex(self.radius_margin),
            "grid_ratio": float_to_hex(self.grid_ratio),
            "pair_budget": self.pair_budget,
            "tail_tolerance": float_to_hex(self.tail_tolerance),
        }


_FLOAT_KEYS = ("r1", "r2", "K", "epsilon", "pinch_margin", "radius_margin",
               "grid_ratio", "tail_tolerance")


def config_from_json(data: dict, precision: Optional[int] = None) -> ExperimentConfig:
    """Build a config from JSON; reals may be hex or decimal.

    ``theta`` is a theta spec string or a serialized rotation number.
    ``r1_fraction`` / ``r2_fraction`` may replace ``r1`` / ``r2``; they are
    resolved against the radius estimate of theta at ``series_N``.
    ``cut_range`` is a list of cuts or ``{"start": a, "stop": b}``.
    """
    d = dict(data)
    th = d.pop("theta")
    theta = parse_theta(th, precision) if isinstance(th, str) else RotationNumber.from_json(th)
    cuts = d.pop("cut_range")
    if isinstance(cuts, dict):
        cuts = range(int(cuts["start"]), int(cuts["stop"]))
    kw = {}
    for k in _FLOAT_KEYS:
        if k in d:
            v = d.pop(k)
            kw[k] = hex_to_float(v) if isinstance(v, str) else float(v)
    fr1 = d.pop("r1_fraction", None)
    fr2 = d.pop("r2_fraction", None)
    for k in ("series_N", "samples_M", "pair_budget"):
        if k in d:
            kw[k] = int(d.pop(k))
    tails = d.pop("tail_entries")
    if d:
        raise ValueError(f"unknown config keys: {sorted(d)}")
    if fr1 is not None or fr2 is not None:
        R = linearize(theta, kw.get("series_N", ExperimentConfig.series_N)).radius_estimate
        if fr1 is not None:
            kw["r1"] = float(fr1) * R
        if fr2 is not None:
            kw["r2"] = float(fr2) * R
    return ExperimentConfig(theta=theta, cut_range=tuple(cuts), tail_entries=tuple(tails), **kw)


@dataclass(frozen=True)
class RoundRecord:
    index: int
    cut: int
    tail_entry: int
    theta_n: Optional[RotationNumber]
    theta_distance: float
    r_prime: float
    radius_estimate: float
    max_pinch: float
    witness: Optional[PinchingReport]
    sup_drift: float
    status: str
    radii_scanned: int = 0
    note: str = ""
    cp_distance_inner: float = math.nan
    cp_distance_outer: float = math.nan

    @property
    def found(self) -> bool:
        return self.status == FOUND

    def to_json(self) -> dict:
        return {
            "round": self.index,
            "cut": self.cut,
            "tail_entry": self.tail_entry,
            "theta_n": self.theta_n.to_json() if self.theta_n is not None else None,
            "theta_distance": float_to_hex(self.theta_distance),
            "r_prime": float_to_hex(self.r_prime),
            "radius_estimate": float_to_hex(self.radius_estimate),
            "max_pinch": float_to_hex(self.max_pinch),
            "witness": self.witness.to_json() if self.witness is not None else None,
            "sup_drift": float_to_hex(self.sup_drift),
            "status": self.status,
            "radii_scanned": self.radii_scanned,
            "note": self.note,
            "cp_distance_inner": float_to_hex(self.cp_distance_inner),
            "cp_distance_outer": float_to_hex(self.cp_distance_outer),
        }


@dataclass(frozen=True)
class ExperimentTrace:
    config: ExperimentConfig
    base_radius: float
    rounds: tuple = field(default_factory=tuple)

    @property
    def found(self) -> tuple:
        return tuple(r for r in self.rounds if r.found)

    def summary(self) -> dict:
        best = max((r for r in self.rounds if r.witness is not None),
                   key=lambda r: r.max_pinch, default=None)
        return {
            "config": self.config.to_json(),
            "base_radius": float_to_hex(self.base_radius),
            "r3": float_to_hex(self.config.r3),
            "rounds": len(self.rounds),
            "found": len(self.found),
            "first_found": self.found[0].index if self.found else None,
            "best_pinch": float_to_hex(best.max_pinch) if best else None,
            "statuses": {s: sum(r.status == s for r in self.rounds)
                         for s in (FOUND, NOT_FOUND, PRECISION_LIMIT)},
        }

    def jsonl_lines(self):
        for r in self.rounds:
            yield json.dumps(r.to_json(), sort_keys=True)


def radius_grid(r1: float, ceiling: float, ratio: float):
    """r1 * ratio^k for k >= 1 while below ``ceiling`` (r1 itself excluded)."""
    out = []
    k = 1
    while True:
        r = r1 * ratio ** k
        if not r < ceiling:
            return out
        out.append(r)
        k += 1


def _herman_shadow(series: LinearizationSeries, M: int):
    """Critical-point distances at 0.5 and 0.99 of the radius estimate."""
    R = series.radius_estimate
    lam = series.lam_complex
    try:
        inner = critical_point_distance(sample_curve(series, 0.5 * R, M), lam)
        outer = critical_point_distance(
            sample_curve(series, 0.99 * R, M, tail_tolerance=1e-4), lam)
    except TailTooLarge:
        return math.nan, math.nan
    return inner, outer


def _scan_candidate(config, base, index, cut, tail):
    theta = config.theta
    blank = dict(index=index, cut=cut, tail_entry=tail, r_prime=math.nan,
                 radius_estimate=math.nan, max_pinch=math.nan, witness=None,
                 sup_drift=math.nan)
    try:
        theta_n = bounded_type_approximant(theta, cut, tail)
    except InsufficientDepth as exc:
        return RoundRecord(theta_n=None, theta_distance=math.nan,
                           status=PRECISION_LIMIT, note=str(exc), **blank)
    dist = float(abs(theta_n.value - theta.value))
    blank.update(theta_n=theta_n, theta_distance=dist)
    try:
        series = linearize(theta_n, config.series_N)
    except (PrecisionExhausted, DegenerateFit) as exc:
        return RoundRecord(status=PRECISION_LIMIT, note=str(exc), **blank)
    Rn = series.radius_estimate
    blank["radius_estimate"] = Rn
    ceiling = min(config.r2, Rn * (1 - config.radius_margin))
    threshold = config.K + config.pinch_margin
    best = None
    hit = None
    scanned = 0
    note = ""
    for r in radius_grid(config.r1, ceiling, config.grid_ratio):
        try:
            curve = sample_curve(series, r, config.samples_M, config.tail_tolerance)
        except TailTooLarge:
            note = f"scan stopped at r={r!r}: series tail too large"
            break
        scanned += 1
        est = quasicircle_constant(curve, config.pair_budget)
        if best is None or est.K > best[1].K:
            best = (r, est, curve)
        if est.K >= threshold:
            hit = (r, est, curve)
            break
    if best is None:
        return RoundRecord(status=NOT_FOUND, note=note or "empty radius grid",
                           radii_scanned=0, **blank)
    r_prime, est, curve = hit or best
    try:
        ref = sample_curve(base, r_prime, config.samples_M, config.tail_tolerance)
        drift = sup_norm_distance(curve, ref)
    except TailTooLarge:
        drift = math.inf
    found = (hit is not None
             and est.K > config.K
             and drift < config.epsilon
             and dist < config.epsilon
             and config.r1 < r_prime < config.r2
             and r_prime < Rn)
    inner = outer = math.nan
    if found:
        inner, outer = _herman_shadow(series, config.samples_M)
        if not outer < inner:
            warnings.warn(
                f"round {index}: critical point not approached "
                f"({outer:.4g} at 0.99R vs {inner:.4g} at 0.5R)", HermanShadowWarning)
    blank.update(r_prime=r_prime, max_pinch=est.K, witness=est.witness, sup_drift=drift)
    return RoundRecord(status=FOUND if found else NOT_FOUND, radii_scanned=scanned,
                       note=note, cp_distance_inner=inner, cp_distance_outer=outer,
                       **blank)


def _scan_job(args):
    return _scan_candidate(*args)


def run_perturbation(config: ExperimentConfig,
                     base: Optional[LinearizationSeries] = None,
                     workers: int = 1) -> ExperimentTrace:
    """One perturbation round over the configured candidate grid.

    Candidates are visited cut-major in configured order; a candidate whose
    series cannot be computed at the available precision is recorded with
    status ``precision-limit`` instead of aborting the run.  With
    ``workers > 1`` candidates run in separate processes; the trace keeps
    the configured order either way.
    """
    candidates = [(c, t) for c in config.cut_range for t in config.tail_entries]
    if not candidates:
        raise NoCandidates("empty cut_range or tail_entries")
    if base is None:
        base = linearize(config.theta, config.series_N)
    if not config.r2 < base.radius_estimate:
        raise ValueError(
            f"r2={config.r2} must lie below the radius estimate {base.radius_estimate}")
    jobs = [(config, base, k, c, t) for k, (c, t) in enumerate(candidates)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rounds = tuple(pool.map(_scan_job, jobs))
    else:
        rounds = tuple(_scan_job(j) for j in jobs)
    return ExperimentTrace(config, base.radius_estimate, rounds)


def chain_perturbations(config: ExperimentConfig, rounds: int, workers: int = 1) -> list:
    """Feed each round's first found theta' back in as the next theta.

    Round n (1-based) uses r1 = previous r', a bracket of the original width
    capped below the new radius estimate, epsilon / 2^(n-1) and threshold
    K + n - 1, so a one-round chain is exactly ``run_perturbation(config)``.
    Stops early when a round finds nothing.
    """
    traces = []
    width = config.r2 - config.r1
    cfg = config
    for n in range(1, rounds + 1):
        trace = run_perturbation(cfg, workers=workers)
        traces.append(trace)
        if not trace.found:
            break
        winner = trace.found[0]
        Rn = winner.radius_estimate
        r1 = winner.r_prime
        r2 = min(r1 + width, Rn * (1 - config.radius_margin))
        if not r1 < r2:
            break
        cfg = replace(config, theta=winner.theta_n, r1=r1, r2=r2,
                      epsilon=config.epsilon / 2 ** n, K=config.K + n)
    return traces


def radius_targeted_search(theta: RotationNumber, target_r: float, cut: int,
                           tail_grid, N: int = 2000):
    """Tail entry whose approximant radius estimate is closest to ``target_r``.

    Returns ``(best, achieved_r)``; ties go to the smaller tail entry.  A
    ``TargetUnreachable`` warning is issued when the relative miss exceeds 20%.
    """
    tail_grid = sorted(int(t) for t in tail_grid)
    if not tail_grid:
        raise NoCandidates("empty tail grid")
    R = linearize(theta, N).radius_estimate
    if not target_r < R * (1 + 1e-9):
        raise ValueError(f"target {target_r} exceeds the radius estimate {R}")
    results = []
    for t in tail_grid:
        cand = bounded_type_approximant(theta, cut, t)
        est = linearize(cand, N).radius_estimate
        results.append((abs(est - target_r), t, cand, est))
    miss, _, best, achieved = min(results, key=lambda x: (x[0], x[1]))
    if miss / target_r > 0.2:
        warnings.warn(f"best radius {achieved} misses target {target_r} by "
                      f"{100 * miss / target_r:.1f}%", TargetUnreachable)
    return best, achieved
