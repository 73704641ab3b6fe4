"""Sampled closed curves, their file formats, and synthetic test shapes."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .hexfloat import float_to_hex, hex_to_float

MIN_SAMPLES = 16


@dataclass(frozen=True, eq=False)
class SampledCurve:
    """Closed curve sampled at t_k = k/M, k = 0..M-1 (indices are mod M)."""

    points: np.ndarray
    source: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.complex128).ravel()
        if pts.shape[0] < MIN_SAMPLES:
            raise ValueError(f"a sampled curve needs at least {MIN_SAMPLES} points")
        if not np.all(np.isfinite(pts)):
            raise ValueError("curve samples must be finite")
        if np.any(pts == np.roll(pts, -1)):
            raise ValueError("consecutive samples coincide")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def M(self) -> int:
        return self.points.shape[0]

    @property
    def params(self) -> np.ndarray:
        return np.arange(self.M) / self.M

    def __len__(self):
        return self.M

    @classmethod
    def from_function(cls, f, M: int, **source):
        t = np.arange(M) / M
        return cls(f(t), source)

    def transformed(self, scale=1.0, rotation=0.0, shift=0j) -> "SampledCurve":
        """Image under z -> scale * e^{i rotation} * z + shift."""
        w = scale * np.exp(1j * rotation) * self.points + shift
        return SampledCurve(w, dict(self.source))

    def to_json(self) -> dict:
        return {
            "M": self.M,
            "source": self.source,
            "points": [[float_to_hex(z.real), float_to_hex(z.imag)] for z in self.points],
        }

    @classmethod
    def from_json(cls, data: dict) -> "SampledCurve":
        pts = [complex(hex_to_float(a), hex_to_float(b)) for a, b in data["points"]]
        return cls(np.array(pts), data.get("source", {}))


CURVE_COLUMNS = ["k", "t_k", "re", "im"]


def write_curve_csv(curve: SampledCurve, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CURVE_COLUMNS)
        for k, (t, z) in enumerate(zip(curve.params, curve.points)):
            w.writerow([k, float_to_hex(t), float_to_hex(z.real), float_to_hex(z.imag)])


def read_curve_csv(path, source=None) -> SampledCurve:
    """Read a curve CSV (hex or decimal numbers; rows must be ordered by k)."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: no curve samples")
    missing = set(CURVE_COLUMNS) - set(rows[0])
    if missing:
        raise ValueError(f"{path}: missing columns {sorted(missing)}")
    ks = [int(r["k"]) for r in rows]
    if ks != list(range(len(rows))):
        raise ValueError(f"{path}: sample indices must run 0..M-1 in order")
    pts = np.array([complex(hex_to_float(r["re"]), hex_to_float(r["im"])) for r in rows])
    return SampledCurve(pts, dict(source or {}))


def write_curve_json(curve: SampledCurve, path) -> None:
    with open(path, "w") as fh:
        json.dump(curve.to_json(), fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_curve_json(path) -> SampledCurve:
    with open(path) as fh:
        return SampledCurve.from_json(json.load(fh))


# synthetic shapes ---------------------------------------------------------

def circle(M: int, radius: float = 1.0, center: complex = 0j) -> SampledCurve:
    return SampledCurve.from_function(
        lambda t: center + radius * np.exp(2j * np.pi * t), M,
        shape="circle", radius=radius)


def ellipse(a: float, b: float, M: int) -> SampledCurve:
    """x = a cos(2 pi t), y = b sin(2 pi t)."""
    return SampledCurve.from_function(
        lambda t: a * np.cos(2 * np.pi * t) + 1j * b * np.sin(2 * np.pi * t), M,
        shape="ellipse", a=a, b=b)


def resample_polyline(vertices, M: int) -> np.ndarray:
    """M points equally spaced in arc length along a closed polyline."""
    v = np.asarray(vertices, dtype=np.complex128)
    closed = np.append(v, v[0])
    seg = np.abs(np.diff(closed))
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    s = np.arange(M) * (cum[-1] / M)
    idx = np.searchsorted(cum, s, side="right") - 1
    idx = np.clip(idx, 0, len(seg) - 1)
    frac = (s - cum[idx]) / seg[idx]
    return closed[idx] + frac * (closed[idx + 1] - closed[idx])


def dumbbell(neck_width: float, M: int, center_gap: float = 1.5,
             arc_points: int = 4000) -> SampledCurve:
    """Two unit circles centred at -c and +c joined by a straight neck.

    The neck consists of the segments y = +-neck_width/2 between the circles.
    """
    h = neck_width / 2
    c = center_gap
    a0 = math.asin(h)
    xin = math.sqrt(1 - h * h)
    # right lobe: from the top attachment clockwise round the far side
    ang_r = np.linspace(math.pi - a0, -(math.pi - a0), arc_points)
    right = c + np.exp(1j * ang_r)
    # left lobe: from the bottom attachment clockwise round the far side
    ang_l = np.linspace(-a0, -(2 * math.pi - a0), arc_points)
    left = -c + np.exp(1j * ang_l)
    verts = np.concatenate([
        [complex(-c + xin, h)], right, [complex(-c + xin, -h)], left])
    # drop exact duplicates at joints
    keep = np.concatenate([[True], np.abs(np.diff(verts)) > 0])
    pts = resample_polyline(verts[keep], M)
    return SampledCurve(pts, {"shape": "dumbbell", "neck_width": neck_width})


def koch_snowflake(depth: int) -> SampledCurve:
    """Vertices of the depth-``depth`` Koch snowflake, 3 * 4**depth of them.

    All edges have the same length, so the vertex sequence is an
    arc-length-uniform sampling of the polyline.
    """
    verts = np.exp(2j * np.pi * np.array([0.0, -1 / 3, -2 / 3])) * 1j
    rot = np.exp(1j * np.pi / 3)
    for _ in range(depth):
        a = verts
        b = np.roll(verts, -1)
        d = (b - a) / 3
        p1 = a + d
        p3 = a + 2 * d
        p2 = p1 + d * rot
        verts = np.stack([a, p1, p2, p3], axis=1).ravel()
    return SampledCurve(verts, {"shape": "koch_snowflake", "depth": depth})
