"""Reference-line geometry for roads: line and arc segments only.

An OpenDRIVE road is described by a chain of plan-view primitives. This module
evaluates poses along that chain and along the directed (travel-order) view of
it, which is what the rest of the package works with.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


def wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    a = math.fmod(a + math.pi, 2.0 * math.pi)
    if a <= 0.0:
        a += 2.0 * math.pi
    return a - math.pi


def turn_label(delta_heading: float, straight_threshold_rad: float) -> str:
    """Classify a junction heading change; left is positive."""
    if abs(delta_heading) < straight_threshold_rad:
        return "straight"
    return "left" if delta_heading > 0.0 else "right"


@dataclass(frozen=True)
class RefSegment:
    """One plan-view primitive starting at (x, y) with heading hdg."""

    kind: str  # "line" | "arc"
    x: float
    y: float
    hdg: float
    length: float
    curvature: float = 0.0

    def pose_at(self, s: float) -> tuple[float, float, float]:
        if self.kind == "line":
            return (
                self.x + s * math.cos(self.hdg),
                self.y + s * math.sin(self.hdg),
                self.hdg,
            )
        c = self.curvature
        return (
            self.x + (math.sin(self.hdg + c * s) - math.sin(self.hdg)) / c,
            self.y - (math.cos(self.hdg + c * s) - math.cos(self.hdg)) / c,
            self.hdg + c * s,
        )


@dataclass(frozen=True)
class ReferenceLine:
    """A chain of segments evaluated by arc length from the road start."""

    segments: tuple[RefSegment, ...]

    @property
    def length(self) -> float:
        return sum(seg.length for seg in self.segments)

    def pose_at(self, s: float) -> tuple[float, float, float]:
        """(x, y, heading) at arc length s, clamped to the line's extent."""
        s = min(max(s, 0.0), self.length)
        remaining = s
        for seg in self.segments:
            if remaining <= seg.length or seg is self.segments[-1]:
                return seg.pose_at(min(remaining, seg.length))
            remaining -= seg.length
        raise ValueError("reference line has no segments")

    def sample(self, step: float = 2.0) -> list[tuple[float, float]]:
        """Polyline approximation, always including both endpoints."""
        total = self.length
        n = max(2, int(total / step) + 1)
        pts = []
        for i in range(n + 1):
            x, y, _ = self.pose_at(total * i / n)
            pts.append((x, y))
        return pts


@dataclass(frozen=True)
class DirectedRef:
    """Travel-order view of a reference line.

    ``forward`` means travel in increasing s. A travel coordinate of 0 is
    where driving starts; lateral offsets are in the travel frame where
    positive points to the traveller's left.
    """

    ref: ReferenceLine
    forward: bool

    @property
    def length(self) -> float:
        return self.ref.length

    def pose_at(self, s_travel: float, t_left: float = 0.0) -> tuple[float, float, float]:
        if self.forward:
            x, y, h = self.ref.pose_at(s_travel)
        else:
            x, y, h = self.ref.pose_at(self.ref.length - s_travel)
            h = wrap_angle(h + math.pi)
        return (x - t_left * math.sin(h), y + t_left * math.cos(h), h)

    def end_pose(self) -> tuple[float, float, float]:
        return self.pose_at(self.length)

    def start_pose(self) -> tuple[float, float, float]:
        return self.pose_at(0.0)


@dataclass(frozen=True)
class QuadraticBezier:
    """Junction transition curve between two road end poses."""

    p0: tuple[float, float]
    p1: tuple[float, float]
    p2: tuple[float, float]

    def point_at(self, u: float) -> tuple[float, float]:
        a = (1 - u) * (1 - u)
        b = 2 * u * (1 - u)
        c = u * u
        return (
            a * self.p0[0] + b * self.p1[0] + c * self.p2[0],
            a * self.p0[1] + b * self.p1[1] + c * self.p2[1],
        )

    def heading_at(self, u: float) -> float:
        dx = 2 * (1 - u) * (self.p1[0] - self.p0[0]) + 2 * u * (self.p2[0] - self.p1[0])
        dy = 2 * (1 - u) * (self.p1[1] - self.p0[1]) + 2 * u * (self.p2[1] - self.p1[1])
        if dx == 0.0 and dy == 0.0:
            return 0.0
        return math.atan2(dy, dx)

    def arc_length(self, samples: int = 32) -> float:
        total = 0.0
        prev = self.p0
        for i in range(1, samples + 1):
            cur = self.point_at(i / samples)
            total += math.hypot(cur[0] - prev[0], cur[1] - prev[1])
            prev = cur
        return total


def junction_curve(
    exit_pose: tuple[float, float, float], entry_pose: tuple[float, float, float]
) -> QuadraticBezier:
    """Curve from the end of one road to the start of the next.

    The control point sits at the intersection of the exit and entry heading
    rays; when the headings are (nearly) parallel it falls back to the chord
    midpoint.
    """
    x0, y0, h0 = exit_pose
    x2, y2, h2 = entry_pose
    d0 = (math.cos(h0), math.sin(h0))
    d2 = (math.cos(h2), math.sin(h2))
    denom = d0[0] * d2[1] - d0[1] * d2[0]
    if abs(denom) < 1e-6:
        p1 = ((x0 + x2) / 2.0, (y0 + y2) / 2.0)
    else:
        t = ((x2 - x0) * d2[1] - (y2 - y0) * d2[0]) / denom
        # A control point behind the exit makes the curve loop; clamp to the chord.
        if t <= 0.0:
            p1 = ((x0 + x2) / 2.0, (y0 + y2) / 2.0)
        else:
            p1 = (x0 + t * d0[0], y0 + t * d0[1])
    return QuadraticBezier((x0, y0), p1, (x2, y2))


def obb_corners(
    x: float, y: float, heading: float, length: float, width: float
) -> list[tuple[float, float]]:
    """Corners of an oriented box centred at (x, y)."""
    ch, sh = math.cos(heading), math.sin(heading)
    hl, hw = length / 2.0, width / 2.0
    return [
        (x + ch * dx - sh * dy, y + sh * dx + ch * dy)
        for dx, dy in ((hl, hw), (hl, -hw), (-hl, -hw), (-hl, hw))
    ]


def obb_overlap(
    a: tuple[float, float, float, float, float], b: tuple[float, float, float, float, float]
) -> bool:
    """Separating-axis test for two (x, y, heading, length, width) boxes."""
    ca = obb_corners(*a)
    cb = obb_corners(*b)
    for corners, heading in ((ca, a[2]), (cb, b[2])):
        del corners
        for axis_angle in (heading, heading + math.pi / 2.0):
            ax, ay = math.cos(axis_angle), math.sin(axis_angle)
            pa = [c[0] * ax + c[1] * ay for c in ca]
            pb = [c[0] * ax + c[1] * ay for c in cb]
            if max(pa) < min(pb) or max(pb) < min(pa):
                return False
    return True
