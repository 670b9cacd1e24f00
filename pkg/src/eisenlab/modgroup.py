"""PSL(2, Z) coset enumeration with truncation bounds, plus reduction to the
standard fundamental domain F = {|z| >= 1, |Re z| <= 1/2}.

Cosets of Gamma_inf \\ Gamma are indexed by coprime bottom rows (c, d) with
c >= 0 (and d = 1 when c = 0); the Eisenstein summand depends only on them
through Im(gamma z) = y / |cz + d|^2.  Cosets of Gamma / Gamma_inf are indexed
by coprime columns (a, c) and give the boundary atoms a/c.

All tail bounds below are rigorous integral comparisons; the tests check them
against refined sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from .hyperbolic import HPoint, UnimodularMatrix

SIGMA_FLOOR = 1.2
REDUCE_MAX_ITER = 10_000


class TruncationError(RuntimeError):
    """A requested tail bound cannot be met within the enumeration limits."""


class BottomRowRep(NamedTuple):
    c: int
    d: int


class TopColumnRep(NamedTuple):
    a: int
    c: int


@dataclass(frozen=True)
class TruncationPolicy:
    term_floor: float
    tail_bound_target: float
    c_max: int

    def __post_init__(self):
        if not (self.term_floor > 0 and self.tail_bound_target > 0 and self.c_max > 0):
            raise ValueError("truncation policy fields must be positive")


def _beta_half(sigma: float) -> float:
    """Integral of (1 + t^2)^(-sigma) over the real line."""
    return math.sqrt(math.pi) * math.exp(math.lgamma(sigma - 0.5) - math.lgamma(sigma))


def _cell_radius(z: complex) -> float:
    # half-diameter of the centred lattice cell {s + t z : |s|, |t| <= 1/2}
    return 0.5 * max(abs(1 + z), abs(1 - z))


def disk_tail_bound(z: complex, sigma: float, R: float) -> float:
    """Upper bound for the sum of (Im gamma z)^sigma over cosets with |cz+d| > R."""
    D = _cell_radius(z)
    y = z.imag
    u = R - 2 * D
    if u <= 0:
        return math.inf
    full = (2 * math.pi / y) * (u ** (2 - 2 * sigma) / (2 * sigma - 2) + D * u ** (1 - 2 * sigma) / (2 * sigma - 1))
    return 0.5 * y ** sigma * full


def shell_tail_bound(y: float, sigma: float, c_max: int) -> float:
    """Pointwise bound for the sum over all cosets with c > c_max."""
    C = float(c_max)
    return (
        y ** (1 - sigma) * _beta_half(sigma) * C ** (2 - 2 * sigma) / (2 * sigma - 2)
        + y ** (-sigma) * C ** (1 - 2 * sigma) / (2 * sigma - 1)
    )


def radius_for_tolerance(z: complex, sigma: float, tol: float) -> float:
    """Smallest lattice radius (up to a factor 1.05) whose disk tail is below tol."""
    D = _cell_radius(z)
    R = 2 * D + 1.0
    while disk_tail_bound(z, sigma, R) > tol:
        R *= 1.5
        if R > 1e9:
            raise TruncationError(f"tolerance {tol} unreachable at sigma={sigma}")
    lo, hi = R / 1.5, R
    while hi / lo > 1.05:
        mid = math.sqrt(lo * hi)
        if disk_tail_bound(z, sigma, mid) > tol:
            lo = mid
        else:
            hi = mid
    return hi


def policy_for_tolerance(z: HPoint, sigma: float, tol: float) -> TruncationPolicy:
    R = radius_for_tolerance(z.z, sigma, tol)
    return TruncationPolicy(term_floor=(z.y / (R * R)) ** sigma, tail_bound_target=tol, c_max=int(math.ceil(R / z.y)) + 1)


@dataclass(frozen=True)
class BottomRowEnumeration:
    """Ordered coset representatives (c, d) plus the certified discarded mass."""

    c: np.ndarray
    d: np.ndarray
    tail_bound: float
    radius: float

    def __iter__(self) -> Iterator[BottomRowRep]:
        for c, d in zip(self.c.tolist(), self.d.tolist()):
            yield BottomRowRep(c, d)

    def __len__(self):
        return len(self.c)


def _coprime_window(c: int, lo: int, hi: int, center: int) -> np.ndarray:
    """d in [lo, hi] coprime to c, ordered by distance from ``center``."""
    if hi < lo:
        return np.empty(0, dtype=np.int64)
    d = np.arange(lo, hi + 1, dtype=np.int64)
    d = d[np.gcd(d, c) == 1]
    # distance first, then the smaller d on ties
    order = np.lexsort((d, np.abs(d - center)))
    return d[order]


def enumerate_bottom(z: HPoint, sigma: float, policy: TruncationPolicy) -> BottomRowEnumeration:
    """Cosets whose term (Im gamma z)^sigma is at least ``policy.term_floor``.

    Terms are ordered by increasing c and, within a c, by distance of d from
    the minimiser -cx of |cz + d|: largest terms first.
    """
    if sigma < SIGMA_FLOOR:
        raise ValueError(f"sigma = {sigma} below the feasibility floor {SIGMA_FLOOR}")
    x, y = z.x, z.y
    R2 = y * policy.term_floor ** (-1.0 / sigma)
    R = math.sqrt(R2)
    cs, ds = [np.array([0])], [np.array([1])]
    c_top = min(policy.c_max, int(math.floor(R / y)))
    for c in range(1, c_top + 1):
        W = math.sqrt(max(R2 - (c * y) ** 2, 0.0))
        lo, hi = math.ceil(-c * x - W), math.floor(-c * x + W)
        d = _coprime_window(c, lo, hi, int(round(-c * x)))
        cs.append(np.full(d.size, c))
        ds.append(d)
    tail = disk_tail_bound(z.z, sigma, R)
    if policy.c_max < R / y:
        tail += shell_tail_bound(y, sigma, policy.c_max)
    if tail > policy.tail_bound_target:
        raise TruncationError(
            f"tail bound {tail:.3e} exceeds target {policy.tail_bound_target:.3e} (c_max={policy.c_max})"
        )
    return BottomRowEnumeration(np.concatenate(cs), np.concatenate(ds), tail, R)


def enumerate_bottom_box(xlo: float, xhi: float, ylo: float, yhi: float, sigma: float, tol: float):
    """One coset set valid for every point of a box.

    Contains, for each z in the box, every coset with |cz + d| <= R, where R is
    chosen so that the disk tail is below ``tol`` at the worst corner.
    Returns (c, d, R).
    """
    if sigma < SIGMA_FLOOR:
        raise ValueError(f"sigma = {sigma} below the feasibility floor {SIGMA_FLOOR}")
    R = max(
        radius_for_tolerance(complex(x, y), sigma, tol) for x in (xlo, xhi) for y in (ylo, yhi)
    )
    cs, ds = [np.array([0])], [np.array([1])]
    for c in range(1, int(math.floor(R / ylo)) + 1):
        W = math.sqrt(max(R * R - (c * ylo) ** 2, 0.0))
        lo, hi = math.ceil(-c * xhi - W), math.floor(-c * xlo + W)
        d = _coprime_window(c, lo, hi, int(round(-c * 0.5 * (xlo + xhi))))
        cs.append(np.full(d.size, c))
        ds.append(d)
    return np.concatenate(cs), np.concatenate(ds), R


def box_tail_bound(x, y, sigma: float, R: float) -> np.ndarray:
    """Disk tail bound evaluated pointwise (vectorised over x, y)."""
    z = np.asarray(x) + 1j * np.asarray(y)
    D = 0.5 * np.maximum(np.abs(1 + z), np.abs(1 - z))
    u = R - 2 * D
    yy = z.imag
    with np.errstate(invalid="ignore", divide="ignore"):
        full = (2 * np.pi / yy) * (u ** (2 - 2 * sigma) / (2 * sigma - 2) + D * u ** (1 - 2 * sigma) / (2 * sigma - 1))
        out = 0.5 * yy ** sigma * full
    return np.where(u > 0, out, np.inf)


# ------------------------------------------------------------ shell truncation


def mode_tail_bound(y: float, sigma: float, c_max: int, d_half: float) -> float:
    """Bound on any Fourier coefficient (in x over one period) of the coset sum
    discarded by keeping shells c <= c_max with |cx + d| <= d_half.

    Shells c > c_max: the period average of sum_d |term| is
    (phi(c)/c) * y^sigma (cy)^(1-2 sigma) * B(sigma).  Inside kept shells the
    dropped d have |cx + d| > d_half; their sum is bounded by an integral.
    """
    if d_half <= 1:
        return math.inf
    outer = y ** (1 - sigma) * _beta_half(sigma) * float(c_max) ** (2 - 2 * sigma) / (2 * sigma - 2)
    inner = c_max * 2 * y ** sigma * (d_half - 1) ** (1 - 2 * sigma) / (2 * sigma - 1)
    return outer + inner


def shells_for_tolerance(y_min: float, y_max: float, sigma: float, tol: float, max_terms: float = 5e6):
    """(c_max, d_half) making ``mode_tail_bound`` <= tol for y in [y_min, y_max]."""
    if sigma < SIGMA_FLOOR:
        raise ValueError(f"sigma = {sigma} below the feasibility floor {SIGMA_FLOOR}")
    B = _beta_half(sigma)
    # outer part grows as y decreases (sigma > 1)
    C = (0.5 * tol * (2 * sigma - 2) / (y_min ** (1 - sigma) * B)) ** (1.0 / (2 - 2 * sigma))
    C = max(1, int(math.ceil(C)))
    U = 1 + (0.5 * tol * (2 * sigma - 1) / (C * 2 * y_max ** sigma)) ** (1.0 / (1 - 2 * sigma))
    U = max(U, 2.0)
    n_terms = C * 2 * U
    if n_terms > max_terms:
        raise TruncationError(
            f"mode tolerance {tol:.1e} at sigma={sigma} needs c_max={C}, |u|<={U:.0f} (~{n_terms:.1e} terms)"
        )
    return C, U


# ------------------------------------------------------------------ top columns


@dataclass(frozen=True)
class TopColumnEnumeration:
    a: np.ndarray
    c: np.ndarray
    weight: np.ndarray
    tail_weight: float

    def __iter__(self) -> Iterator[TopColumnRep]:
        for a, c in zip(self.a.tolist(), self.c.tolist()):
            yield TopColumnRep(a, c)

    def __len__(self):
        return len(self.a)


def top_tail_bound(exponent: float, R: float) -> float:
    """Bound for sum over c >= 1, a^2 + c^2 > R^2 of (a^2 + c^2)^(-exponent)."""
    u = R - math.sqrt(2)
    if u <= 0:
        return math.inf
    return math.pi * u ** (2 - 2 * exponent) / (2 * exponent - 2)


def enumerate_top(exponent: float, eps: float) -> TopColumnEnumeration:
    """Boundary atoms a/c with weight (a^2 + c^2)^(-exponent) >= eps.

    The atom at infinity, (1, 0), has weight 1 and comes first; the rest are
    ordered by increasing a^2 + c^2.  The atom weights are measured relative
    to that of the atom at infinity.
    """
    if exponent < 2:
        raise ValueError("exponent must be at least 2")
    R = eps ** (-0.5 / exponent)
    Ri = int(math.floor(R))
    c = np.arange(1, Ri + 1)
    a = np.arange(-Ri, Ri + 1)
    A, C = np.meshgrid(a, c, indexing="xy")
    A, C = A.ravel(), C.ravel()
    n2 = A * A + C * C
    keep = (n2 <= R * R) & (np.gcd(A, C) == 1)
    A, C, n2 = A[keep], C[keep], n2[keep]
    order = np.lexsort((A, C, n2))
    A, C, n2 = A[order], C[order], n2[order]
    w = n2.astype(float) ** (-exponent)
    return TopColumnEnumeration(
        np.concatenate([[1], A]),
        np.concatenate([[0], C]),
        np.concatenate([[1.0], w]),
        top_tail_bound(exponent, R),
    )


# -------------------------------------------------------------------- reduction


def reduce_arrays(x, y, max_iter: int = REDUCE_MAX_ITER):
    """Vectorised reduction into F.

    Returns (x_red, y_red, (A, B, C, D)) with integral A..D (as floats) such
    that the reduced point is (A z + B) / (C z + D).
    """
    shape = np.shape(x)
    x = np.array(x, dtype=float, copy=True).ravel()
    y = np.array(y, dtype=float, copy=True).ravel()
    A = np.ones_like(x)
    B = np.zeros_like(x)
    C = np.zeros_like(x)
    D = np.ones_like(x)
    active = np.ones(x.shape, dtype=bool)
    for _ in range(max_iter):
        n = np.round(x[active])
        x[active] -= n
        # translation T^-n: rows (A - nC, B - nD)
        A[active] -= n * C[active]
        B[active] -= n * D[active]
        r2 = x[active] ** 2 + y[active] ** 2
        flip = r2 < 1.0
        if not flip.any():
            break
        idx = np.flatnonzero(active)[flip]
        xr, yr, rr = x[idx], y[idx], r2[flip]
        x[idx] = -xr / rr
        y[idx] = yr / rr
        # S = [[0, -1], [1, 0]]: rows (A, B) <- (-C, -D), (C, D) <- (A, B)
        A[idx], B[idx], C[idx], D[idx] = -C[idx], -D[idx], A[idx].copy(), B[idx].copy()
        active[:] = False
        active[idx] = True
    else:
        raise RuntimeError("reduction did not terminate; input is corrupted")
    return x.reshape(shape), y.reshape(shape), tuple(m.reshape(shape) for m in (A, B, C, D))


def reduce_to_F(z: HPoint):
    """Reduce ``z`` into F.  Returns (z_reduced, M) with z_reduced = M(z)."""
    x, y, (A, B, C, D) = reduce_arrays(np.array([z.x]), np.array([z.y]))
    return HPoint(float(x[0]), float(y[0])), UnimodularMatrix(float(A[0]), float(B[0]), float(C[0]), float(D[0]))
