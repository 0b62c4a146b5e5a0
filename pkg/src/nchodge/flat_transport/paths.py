"""Piecewise paths in a complex plane.

Every path is a list of segments, each parametrized by ``t`` in ``[0, 1]``:

* ``("line", a, b)``: ``z = a + (b - a) t``
* ``("arc", c, rho, theta0, dtheta)``: ``z = c + rho exp(i (theta0 + dtheta t))``
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from ..algebra_core.serialize import SchemaError, complex_from_json, complex_to_json
from ..errors import DomainError, UsageError

LINE, ARC = 0, 1


@dataclass(frozen=True)
class Segment:
    kind: int
    p: tuple  # (a, b) for a line, (c, rho, theta0, dtheta) for an arc

    def point(self, t):
        if self.kind == LINE:
            a, b = self.p
            return a + (b - a) * t
        c, rho, th0, dth = self.p
        return c + rho * np.exp(1j * (th0 + dth * t))

    def velocity(self, t):
        if self.kind == LINE:
            a, b = self.p
            return (b - a) + 0 * t
        c, rho, th0, dth = self.p
        return 1j * dth * rho * np.exp(1j * (th0 + dth * t))

    @property
    def length(self) -> float:
        if self.kind == LINE:
            return abs(self.p[1] - self.p[0])
        return abs(self.p[1] * self.p[3])

    def packed(self) -> tuple:
        """``(kind, p0, p1, p2, p3)`` with complex slots, for the kernels."""
        if self.kind == LINE:
            return (LINE, complex(self.p[0]), complex(self.p[1]), 0j, 0j)
        c, rho, th0, dth = self.p
        return (ARC, complex(c), complex(rho), complex(th0), complex(dth))


@dataclass(frozen=True)
class PlanePath:
    """A polyline through waypoints or a (multi-turn) circle.

    Use :meth:`polyline` and :meth:`circle` to build one. ``turns`` is
    signed, ``+1`` being one counterclockwise loop.
    """

    kind: str
    waypoints: tuple = ()
    center: complex = 0j
    radius: float = 0.0
    start_angle: float = 0.0
    turns: float = 0.0

    def __post_init__(self):
        if self.kind == "polyline":
            pts = tuple(complex(z) for z in self.waypoints)
            if len(pts) < 2:
                raise UsageError("a polyline needs at least two waypoints")
            if not all(math.isfinite(z.real) and math.isfinite(z.imag) for z in pts):
                raise UsageError("waypoints must be finite")
            object.__setattr__(self, "waypoints", pts)
        elif self.kind == "circle":
            if not self.radius > 0 or not math.isfinite(self.radius):
                raise UsageError("circle radius must be positive and finite")
            if self.turns == 0 or not math.isfinite(self.turns):
                raise UsageError("circle turns must be nonzero and finite")
            object.__setattr__(self, "center", complex(self.center))
        else:
            raise UsageError(f"unknown path kind {self.kind!r}")

    @classmethod
    def polyline(cls, waypoints) -> "PlanePath":
        return cls("polyline", waypoints=tuple(waypoints))

    @classmethod
    def circle(cls, center, radius, turns=1.0, start_angle=math.pi) -> "PlanePath":
        """Circle starting at ``center + radius * exp(i start_angle)``.

        The default start angle puts the basepoint on the negative real side
        of the center (``u = -1`` for the unit circle about 0).
        """
        return cls(
            "circle", center=complex(center), radius=float(radius),
            turns=float(turns), start_angle=float(start_angle),
        )

    @property
    def segments(self) -> list:
        if self.kind == "polyline":
            w = self.waypoints
            return [Segment(LINE, (w[i], w[i + 1])) for i in range(len(w) - 1)]
        return [Segment(ARC, (self.center, self.radius, self.start_angle, 2 * math.pi * self.turns))]

    @property
    def start(self) -> complex:
        return complex(self.segments[0].point(0.0))

    @property
    def end(self) -> complex:
        return complex(self.segments[-1].point(1.0))

    @property
    def length(self) -> float:
        return sum(s.length for s in self.segments)

    def is_closed(self, tol: float = 1e-12) -> bool:
        scale = max(1.0, abs(self.start))
        return abs(self.end - self.start) <= tol * scale

    def reversed(self) -> "PlanePath":
        if self.kind == "polyline":
            return PlanePath.polyline(self.waypoints[::-1])
        end_angle = self.start_angle + 2 * math.pi * self.turns
        return PlanePath.circle(self.center, self.radius, -self.turns, end_angle)

    def sample(self, per_segment: int = 256) -> np.ndarray:
        t = np.linspace(0.0, 1.0, per_segment + 1)
        return np.concatenate([np.atleast_1d(s.point(t)) for s in self.segments])

    def distance_to(self, points, per_segment: int = 256) -> float:
        """Smallest sampled distance from the path to any of ``points``."""
        pts = np.asarray(list(points), dtype=complex).reshape(-1)
        if pts.size == 0:
            return math.inf
        z = self.sample(per_segment)
        return float(np.min(np.abs(z[:, None] - pts[None, :])))

    def check_avoids(self, singular, clearance: float = 1e-9, per_segment: int = 256) -> None:
        """Raise :class:`DomainError` if a sample point comes within ``clearance`` of ``singular``."""
        d = self.distance_to(singular, per_segment)
        if d <= clearance:
            raise DomainError(f"path passes within {d:.3g} of a singular point")


def path_to_json(path: PlanePath):
    if path.kind == "circle":
        return {
            "kind": "circle",
            "center": complex_to_json(path.center),
            "radius": path.radius,
            "turns": path.turns,
            "start_angle": path.start_angle,
        }
    return [complex_to_json(z) for z in path.waypoints]


def path_from_json(obj, path: str = "") -> PlanePath:
    """Decode a circle object or a waypoint array."""
    try:
        if isinstance(obj, list):
            pts = [complex_from_json(z, f"{path}/{i}") for i, z in enumerate(obj)]
            return PlanePath.polyline(pts)
        if isinstance(obj, dict):
            kind = obj.get("kind")
            if kind == "circle":
                for key in ("center", "radius"):
                    if key not in obj:
                        raise SchemaError(f"{path}/{key}", "missing")
                radius = obj["radius"]
                if not isinstance(radius, (int, float)) or isinstance(radius, bool):
                    raise SchemaError(f"{path}/radius", "expected a number")
                turns = obj.get("turns", 1)
                if not isinstance(turns, (int, float)) or isinstance(turns, bool):
                    raise SchemaError(f"{path}/turns", "expected a number")
                start = obj.get("start_angle", math.pi)
                return PlanePath.circle(
                    complex_from_json(obj["center"], f"{path}/center"), radius, turns, start
                )
            if kind == "polyline":
                if "waypoints" not in obj:
                    raise SchemaError(f"{path}/waypoints", "missing")
                return path_from_json(obj["waypoints"], f"{path}/waypoints")
            raise SchemaError(f"{path}/kind", "expected 'circle' or 'polyline'")
    except SchemaError:
        raise
    except UsageError as exc:
        raise SchemaError(path, str(exc)) from None
    raise SchemaError(path, "expected a circle object or a waypoint array")
