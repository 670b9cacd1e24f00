"""Exact geometry of the upper half-plane.

Frames of the unit tangent bundle are stored as unimodular matrices ``g``:
the base point is ``g(i)`` and the direction is the image of the upward unit
vector at ``i``.  The geodesic flow is right multiplication by
``diag(e^{t/2}, e^{-t/2})`` and isometries act by left multiplication, so
both commute and neither accumulates trigonometric drift.

Besides the scalar value types, a handful of ``*_arrays`` helpers operate on
numpy arrays of matrix entries; the measure code pushes millions of frames
through them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

DET_TOL = 1e-12
RENORM_THRESHOLD = 1e-13
MAX_FLOW_TIME = 200.0

# Cusp region of the modular surface is {y > 1.1}.
R_CUSP = math.log(2 * math.pi * 1.1)


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class UnimodularMatrix:
    """Real 2x2 matrix of determinant one, identified with its negative."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if not np.isfinite(det) or det <= 0:
            raise GeometryError(f"determinant {det} is not positive")
        if abs(det - 1.0) > 1e-6:
            raise GeometryError(f"determinant {det} is not 1")
        if abs(det - 1.0) > RENORM_THRESHOLD:
            s = math.sqrt(det)
            for name in "abcd":
                object.__setattr__(self, name, getattr(self, name) / s)

    @classmethod
    def identity(cls) -> "UnimodularMatrix":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def from_array(cls, m) -> "UnimodularMatrix":
        m = np.asarray(m, dtype=float)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @classmethod
    def normalized(cls, a, b, c, d) -> "UnimodularMatrix":
        """Scale an arbitrary positive-determinant matrix to determinant one."""
        det = a * d - b * c
        if det <= 0:
            raise GeometryError(f"determinant {det} is not positive")
        s = math.sqrt(det)
        return cls(a / s, b / s, c / s, d / s)

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other: "UnimodularMatrix") -> "UnimodularMatrix":
        a = self.a * other.a + self.b * other.c
        b = self.a * other.b + self.b * other.d
        c = self.c * other.a + self.d * other.c
        d = self.c * other.b + self.d * other.d
        return UnimodularMatrix(a, b, c, d)

    def inverse(self) -> "UnimodularMatrix":
        return UnimodularMatrix(self.d, -self.b, -self.c, self.a)

    def _canonical(self):
        # sign representative: first nonzero entry positive
        for v in (self.a, self.b, self.c, self.d):
            if v != 0:
                return (self.a, self.b, self.c, self.d) if v > 0 else (-self.a, -self.b, -self.c, -self.d)
        return (self.a, self.b, self.c, self.d)

    def __eq__(self, other):
        if not isinstance(other, UnimodularMatrix):
            return NotImplemented
        return self._canonical() == other._canonical()

    def __hash__(self):
        return hash(self._canonical())

    def isclose(self, other: "UnimodularMatrix", tol: float = 1e-10) -> bool:
        m, n = self.as_array(), other.as_array()
        return bool(min(np.abs(m - n).max(), np.abs(m + n).max()) <= tol)


@dataclass(frozen=True)
class HPoint:
    x: float
    y: float

    def __post_init__(self):
        if not (np.isfinite(self.x) and np.isfinite(self.y)):
            raise GeometryError("non-finite point")
        if self.y <= 0:
            raise GeometryError(f"y = {self.y} is not in the upper half-plane")

    @classmethod
    def from_complex(cls, z: complex) -> "HPoint":
        return cls(float(z.real), float(z.imag))

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)


@dataclass(frozen=True)
class BoundaryPoint:
    """A point of R ∪ {∞}; ``value=None`` is the point at infinity."""

    value: Optional[float] = None

    def __post_init__(self):
        if self.value is not None:
            if not np.isfinite(self.value):
                raise GeometryError("finite boundary point must be a finite number")
            object.__setattr__(self, "value", float(self.value))

    @classmethod
    def infinity(cls) -> "BoundaryPoint":
        return cls(None)

    @property
    def is_infinite(self) -> bool:
        return self.value is None

    def angle(self) -> float:
        """Position on the boundary circle, ``q = tan(angle / 2)``, in (-pi, pi]."""
        if self.value is None:
            return math.pi
        return 2.0 * math.atan(self.value)


INFINITY = BoundaryPoint.infinity()


@dataclass(frozen=True)
class FlowFrame:
    g: UnimodularMatrix

    @property
    def base(self) -> HPoint:
        return mobius_apply(self.g, HPoint(0.0, 1.0))

    @property
    def angle(self) -> float:
        """Euclidean angle of the direction vector, measured from the +x axis."""
        g = self.g
        return float(np.mod(0.5 * np.pi - 2.0 * np.angle(complex(g.d, g.c)), 2 * np.pi))

    def isclose(self, other: "FlowFrame", tol: float = 1e-10) -> bool:
        return self.g.isclose(other.g, tol)


@dataclass(frozen=True)
class GeodesicChartPoint:
    q1: BoundaryPoint
    q2: BoundaryPoint
    t: float

    def __post_init__(self):
        if self.q1 == self.q2:
            raise GeometryError("endpoints of a geodesic must differ")


@dataclass(frozen=True)
class CuspCoord:
    r: float
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", float(np.mod(self.theta, 2 * np.pi)))


# ---------------------------------------------------------------- scalar ops


def mobius_apply(M: UnimodularMatrix, z: HPoint) -> HPoint:
    w = z.z
    out = (M.a * w + M.b) / (M.c * w + M.d)
    y = mobius_im(M, z)
    if not y > 0:
        raise GeometryError("Mobius image left the upper half-plane")
    return HPoint(out.real, y)


def mobius_im(M: UnimodularMatrix, z: HPoint) -> float:
    """Imaginary part of ``M(z)`` without cancellation."""
    u = M.c * z.x + M.d
    return z.y / (u * u + M.c * M.c * z.y * z.y)


def boundary_apply(M: UnimodularMatrix, q: BoundaryPoint) -> BoundaryPoint:
    if q.is_infinite:
        return INFINITY if M.c == 0 else BoundaryPoint(M.a / M.c)
    den = M.c * q.value + M.d
    if den == 0:
        return INFINITY
    return BoundaryPoint((M.a * q.value + M.b) / den)


def ball_deriv(M: UnimodularMatrix, q: BoundaryPoint) -> float:
    """|derivative| of ``M`` on the boundary circle of the disk model."""
    if q.is_infinite:
        return 1.0 / (M.a * M.a + M.c * M.c)
    num = q.value * q.value + 1.0
    den = (M.a * q.value + M.b) ** 2 + (M.c * q.value + M.d) ** 2
    assert den > 0
    return num / den


def hyperbolic_distance(z: HPoint, w: HPoint) -> float:
    dx, dy = z.x - w.x, z.y - w.y
    # 2 asinh(|z-w| / (2 sqrt(y1 y2))) is stable for nearby points
    return 2.0 * math.asinh(math.hypot(dx, dy) / (2.0 * math.sqrt(z.y * w.y)))


def frame_at(z: HPoint, angle: float) -> FlowFrame:
    """Frame based at ``z`` with direction at Euclidean angle ``angle``."""
    a, b, c, d = frame_arrays(np.array(z.x), np.array(z.y), np.array(angle))
    return FlowFrame(UnimodularMatrix(float(a), float(b), float(c), float(d)))


def downward_frame(z: HPoint) -> FlowFrame:
    return frame_at(z, 1.5 * math.pi)


def frame_flow(F: FlowFrame, t: float) -> FlowFrame:
    if abs(t) > MAX_FLOW_TIME:
        raise GeometryError(f"|t| = {abs(t)} exceeds {MAX_FLOW_TIME}")
    e = math.exp(0.5 * t)
    g = F.g
    return FlowFrame(UnimodularMatrix(g.a * e, g.b / e, g.c * e, g.d / e))


def _to_zero_infinity(q1: BoundaryPoint, q2: BoundaryPoint) -> UnimodularMatrix:
    """Isometry sending q1 to 0 and q2 to infinity."""
    if q1.is_infinite:
        return UnimodularMatrix(0.0, -1.0, 1.0, -q2.value)
    if q2.is_infinite:
        return UnimodularMatrix(1.0, -q1.value, 0.0, 1.0)
    p, q = q1.value, q2.value
    if p > q:
        return UnimodularMatrix.normalized(1.0, -p, 1.0, -q)
    return UnimodularMatrix.normalized(-1.0, p, 1.0, -q)


def chart_T(p: GeodesicChartPoint) -> FlowFrame:
    """Frame at time ``t`` on the geodesic from ``q1`` to ``q2``.

    Time zero is the point of the geodesic closest to ``i``.
    """
    g0 = _to_zero_infinity(p.q1, p.q2)
    w = mobius_apply(g0, HPoint(0.0, 1.0))
    s = math.sqrt(abs(w.z)) * math.exp(0.5 * p.t)
    return FlowFrame(g0.inverse() @ UnimodularMatrix(s, 0.0, 0.0, 1.0 / s))


def chart_T_inverse(F: FlowFrame) -> GeodesicChartPoint:
    g = F.g
    # entries at rounding level relative to their partner mean an endpoint at infinity
    q2 = INFINITY if abs(g.c) <= 1e-14 * abs(g.a) else BoundaryPoint(g.a / g.c)
    q1 = INFINITY if abs(g.d) <= 1e-14 * abs(g.b) else BoundaryPoint(g.b / g.d)
    g0 = _to_zero_infinity(q1, q2)
    w = mobius_apply(g0, HPoint(0.0, 1.0))
    tau = math.log(mobius_apply(g0 @ g, HPoint(0.0, 1.0)).y)
    return GeodesicChartPoint(q1, q2, tau - math.log(abs(w.z)))


def cusp_to_H(c: CuspCoord) -> HPoint:
    return HPoint(c.theta / (2 * math.pi), math.exp(c.r) / (2 * math.pi))


def H_to_cusp(z: HPoint, r_cusp: float = R_CUSP) -> CuspCoord:
    if z.y <= math.exp(r_cusp) / (2 * math.pi):
        raise GeometryError(f"y = {z.y} is below the cusp region")
    return CuspCoord(math.log(2 * math.pi * z.y), 2 * math.pi * z.x)


# ----------------------------------------------------------------- batch ops


def frame_arrays(x, y, angle):
    """Matrix entries of frames based at ``x + iy`` with the given directions."""
    x, y, angle = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float), np.asarray(angle, float))
    beta = 0.5 * (angle - 0.5 * np.pi)
    cb, sb = np.cos(beta), np.sin(beta)
    sy = np.sqrt(y)
    # [[sy, x/sy], [0, 1/sy]] @ [[cb, sb], [-sb, cb]]
    a = sy * cb - x / sy * sb
    b = sy * sb + x / sy * cb
    c = -sb / sy
    d = cb / sy
    return a, b, c, d


def frame_base_arrays(a, b, c, d):
    """Base point ``g(i)`` of frames; returns (x, y)."""
    den = c * c + d * d
    return (a * c + b * d) / den, 1.0 / den


def frame_angle_arrays(a, b, c, d):
    return np.mod(0.5 * np.pi - 2.0 * np.arctan2(c, d), 2 * np.pi)


def flow_arrays(a, b, c, d, t):
    e = np.exp(0.5 * np.asarray(t, float))
    return a * e, b / e, c * e, d / e


def chart_T_angles(alpha1, alpha2, t):
    """Vectorised chart T with boundary points given as circle angles.

    The boundary point with angle ``alpha`` is ``tan(alpha / 2)``; ``alpha = pi``
    is infinity.  Avoids any special casing of infinity.
    """
    alpha1, alpha2, t = np.broadcast_arrays(
        np.asarray(alpha1, float), np.asarray(alpha2, float), np.asarray(t, float)
    )
    # rotation k(-alpha1/2) moves alpha1 to 0 and alpha2 to alpha2 - alpha1
    beta = -0.5 * alpha1
    cb, sb = np.cos(beta), np.sin(beta)
    delta = np.mod(alpha2 - alpha1, 2 * np.pi)
    # parabolic fixing 0 that sends tan(delta/2) to infinity
    m = -1.0 / np.tan(0.5 * delta)
    # g0 = [[1, 0], [m, 1]] @ [[cb, sb], [-sb, cb]]
    g_a, g_b = cb, sb
    g_c, g_d = m * cb - sb, m * sb + cb
    # w = g0(i); |w|^2 = (a^2 + b^2) / (c^2 + d^2)
    absw = np.sqrt((g_a * g_a + g_b * g_b) / (g_c * g_c + g_d * g_d))
    s = np.sqrt(absw) * np.exp(0.5 * t)
    # g0^{-1} @ diag(s, 1/s)
    return g_d * s, -g_b / s, -g_c * s, g_a / s


def chart_geometry_angles(alpha1, alpha2, center):
    """Distance ``delta`` from ``center`` to each geodesic and the chart time of
    the closest point.  Used to place quadrature windows."""
    alpha1, alpha2 = np.broadcast_arrays(np.asarray(alpha1, float), np.asarray(alpha2, float))
    beta = -0.5 * alpha1
    cb, sb = np.cos(beta), np.sin(beta)
    delta = np.mod(alpha2 - alpha1, 2 * np.pi)
    m = -1.0 / np.tan(0.5 * delta)
    g_a, g_b = cb, sb
    g_c, g_d = m * cb - sb, m * sb + cb
    absw = np.sqrt((g_a * g_a + g_b * g_b) / (g_c * g_c + g_d * g_d))
    zc = complex(center)
    wb = (g_a * zc + g_b) / (g_c * zc + g_d)
    dist = np.arcsinh(np.abs(wb.real) / wb.imag)
    tc = np.log(np.abs(wb) / absw)
    return dist, tc
