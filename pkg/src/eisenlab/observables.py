"""Compactly supported test functions on the modular surface and its unit
tangent bundle.

Evaluators are vectorised: position observables take arrays (x, y), phase
observables take (x, y, phi) with phi the Euclidean direction angle.  Points
are assumed already reduced into F; outside the support box they return 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Tuple

import numpy as np

from .hyperbolic import HPoint

Box = Tuple[float, float, float, float]
F_MARGIN = 1e-3


def check_inside_F(box: Box, margin: float = F_MARGIN):
    xlo, xhi, ylo, yhi = box
    if not (xlo < xhi and 0 < ylo < yhi):
        raise ValueError(f"degenerate box {box}")
    if max(abs(xlo), abs(xhi)) > 0.5 - margin:
        raise ValueError(f"box {box} leaves the strip |x| <= 1/2")
    xmin = 0.0 if xlo <= 0 <= xhi else min(abs(xlo), abs(xhi))
    if math.hypot(xmin, ylo) < 1 + margin:
        raise ValueError(f"box {box} meets the unit circle")


def _in_box(box: Box, x, y):
    xlo, xhi, ylo, yhi = box
    return (x >= xlo) & (x <= xhi) & (y >= ylo) & (y <= yhi)


@dataclass(frozen=True)
class PositionObservable:
    evaluator: Callable
    box: Box

    def __post_init__(self):
        check_inside_F(self.box)

    def __call__(self, x, y):
        x, y = np.asarray(x, float), np.asarray(y, float)
        inside = _in_box(self.box, x, y)
        out = np.zeros(np.broadcast(x, y).shape)
        if inside.any():
            xb, yb = np.broadcast_arrays(x, y)
            out[inside] = self.evaluator(xb[inside], yb[inside])
        return out

    def scaled(self, k: float) -> "PositionObservable":
        f = self.evaluator
        return PositionObservable(lambda x, y: k * f(x, y), self.box)

    def lift(self) -> "PhaseObservable":
        """Direction-independent observable on the unit tangent bundle."""
        f = self.evaluator
        return PhaseObservable(lambda x, y, phi: f(x, y), self.box)


@dataclass(frozen=True)
class PhaseObservable:
    evaluator: Callable
    box: Box

    def __post_init__(self):
        check_inside_F(self.box)

    def __call__(self, x, y, phi):
        x, y, phi = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float), np.asarray(phi, float))
        inside = _in_box(self.box, x, y)
        out = np.zeros(x.shape)
        if inside.any():
            out[inside] = self.evaluator(x[inside], y[inside], phi[inside])
        return out

    def scaled(self, k: float) -> "PhaseObservable":
        f = self.evaluator
        return PhaseObservable(lambda x, y, phi: k * f(x, y, phi), self.box)


def zero_position(box: Box) -> PositionObservable:
    return PositionObservable(lambda x, y: np.zeros_like(x), box)


@dataclass(frozen=True)
class SmoothBump:
    """amplitude * exp(1 - 1 / (1 - (d / radius)^2)) for Euclidean distance
    d < radius from the center, zero elsewhere."""

    center: HPoint
    radius: float
    amplitude: float = 1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        check_inside_F(self.box)

    @property
    def box(self) -> Box:
        c, r = self.center, self.radius
        return (c.x - r, c.x + r, c.y - r, c.y + r)

    def __call__(self, x, y):
        u = ((np.asarray(x) - self.center.x) ** 2 + (np.asarray(y) - self.center.y) ** 2) / self.radius ** 2
        out = np.zeros(np.shape(u))
        inside = u < 1
        out[inside] = self.amplitude * np.exp(1 - 1 / (1 - u[inside]))
        return out

    def position(self) -> PositionObservable:
        return PositionObservable(self.__call__, self.box)

    def with_direction_weight(self, weight: Callable) -> PhaseObservable:
        return PhaseObservable(lambda x, y, phi: self(x, y) * weight(phi), self.box)


DEFAULT_BUMP = SmoothBump(HPoint(0.05, 1.4), 0.25)


def downward_weight(phi):
    """Favors frames pointing down the cusp (phi = 3 pi / 2)."""
    return 0.25 * (1 - np.sin(phi)) ** 2


def horizontal_weight(phi):
    return 0.25 * (1 + np.cos(phi)) ** 2


def default_suite():
    """Three phase observables used for cross-validating the two measure
    constructions."""
    return [
        DEFAULT_BUMP.position().lift(),
        SmoothBump(HPoint(-0.15, 1.2), 0.12).with_direction_weight(downward_weight),
        SmoothBump(HPoint(0.2, 1.05), 0.05).with_direction_weight(horizontal_weight),
    ]
