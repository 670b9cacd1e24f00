"""The limiting measure mu_nu on the unit tangent bundle of the modular surface.

Two constructions are implemented and cross-checked.

Propagation: flow the downward cusp frames (r, theta) for time t and weight
by e^{2 nu (r - t)}.  A downward frame at x + iy flowed by t is the downward
frame at x + i y e^{-t}, so with u = r - t the pairing is

    int int e^{2 nu u} a(reduce(x + i e^u / (2 pi), down)) du d theta,

over u in (R_cusp - t, log(2 pi y_top)], which only depends on t through the
lower cut-off.

Boundary atoms: the lifted measure on the unit tangent bundle of H is a sum
over boundary points a/c of (a^2 + c^2)^{-(2 nu + 1)} times a measure on the
geodesics leaving a/c.  In circle angles (q = tan(alpha/2)) and chart time t
that measure is

    (2 pi)^{2 nu + 1} * (1/2) |sin((alpha1 - alpha2) / 2)|^{-2(nu + 1)} e^{-2 nu t} d alpha2 dt,

and for the atom at infinity it is (2 pi)^{2 nu + 1} y^{2 nu - 1} dx dy on
downward frames.  Pairing a Gamma-periodic observable with the measure on
the quotient means integrating over frames based in F only; since the
observable's support box lies in F no translates enter.

Pushforward: unfolding the propagation integral over the strip gives the
position density (2 pi)^{2 nu + 1} sum_{Gamma_inf \\ Gamma} (Im gamma z)^{2 nu + 1}
against dVol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .eisenstein import coset_sum_many
from .hyperbolic import (
    R_CUSP,
    chart_T_angles,
    chart_geometry_angles,
    flow_arrays,
    frame_angle_arrays,
    frame_arrays,
    frame_base_arrays,
)
from .modgroup import enumerate_top, reduce_arrays
from .observables import PhaseObservable, PositionObservable
from .specfun import compensated_sum

TWO_PI = 2 * math.pi
DOWN = 1.5 * math.pi


@dataclass(frozen=True)
class PropagationConfig:
    t: float = 10.0
    r_grid: int = 2048
    theta_grid: int = 4096
    r_max_offset: float | None = None  # default: log(2 pi y_top) of the observable

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError("t must be positive")
        if self.r_grid < 32 or self.theta_grid < 32:
            raise ValueError("grids need at least 32 nodes")


@dataclass(frozen=True)
class Pairing:
    value: float
    error: float  # difference to the half-resolution estimate

    def __float__(self):
        return self.value


def as_phase(a) -> PhaseObservable:
    return a.lift() if isinstance(a, PositionObservable) else a


def reduce_frames(a, b, c, d):
    """Move frames so that their base points lie in F.  Returns (x, y, phi)."""
    x, y = frame_base_arrays(a, b, c, d)
    xr, yr, (A, B, C, D) = reduce_arrays(x, y)
    c2 = C * a + D * c
    d2 = C * b + D * d
    return xr, yr, frame_angle_arrays(None, None, c2, d2)


def _trap_1d(n, lo, hi):
    """Interior trapezoid nodes for an integrand vanishing at both ends."""
    h = (hi - lo) / n
    return lo + h * np.arange(1, n), h


# ------------------------------------------------------------------ propagation


def _propagation_rows(a: PhaseObservable, nu: float, u_lo: float, u_hi: float, n_r: int, n_theta: int,
                      back: float = 0.0, chunk_rows: int = 16):
    """Per-r-node theta sums of the propagation integrand on a fixed grid in
    u = r - t, optionally composing the observable with the time ``-back``
    flow.  Returns (u_nodes, row_sums, du)."""
    du = (u_hi - u_lo) / n_r
    u = u_hi - du * np.arange(n_r)  # anchored at the top so grids at different t nest
    x = (np.arange(n_theta) + 0.5) / n_theta
    rows = np.zeros(n_r)
    for k in range(0, n_r, chunk_rows):
        uu = u[k : k + chunk_rows]
        Y = np.exp(uu) / TWO_PI
        X, YY = np.meshgrid(x, Y)
        fa, fb, fc, fd = frame_arrays(X, YY, DOWN)
        if back:
            fa, fb, fc, fd = flow_arrays(fa, fb, fc, fd, -back)
        xr, yr, phi = reduce_frames(fa, fb, fc, fd)
        vals = a(xr, yr, phi)
        rows[k : k + chunk_rows] = vals.sum(axis=1) * (TWO_PI / n_theta) * np.exp(2 * nu * uu)
    return u, rows, du


def _top_offset(a: PhaseObservable, cfg: PropagationConfig) -> float:
    if cfg.r_max_offset is not None:
        return cfg.r_max_offset
    return math.log(TWO_PI * a.box[3]) + 1e-9


def mu_pair_propagation(a, nu: float, cfg: PropagationConfig = PropagationConfig()) -> Pairing:
    """e^{-2 nu t} int int e^{2 nu r} a(exp(tV)(r, theta, down)) dr d theta."""
    if not nu > 0:
        raise ValueError("nu must be positive")
    a = as_phase(a)
    u_hi = _top_offset(a, cfg)
    u_lo = R_CUSP - cfg.t
    u, rows, du = _propagation_rows(a, nu, u_lo, u_hi, cfg.r_grid, cfg.theta_grid)
    full = compensated_sum(rows) * du
    half = compensated_sum(rows[::2]) * 2 * du
    return Pairing(float(full.real), float(abs(full - half)))


def decay_check(a, nu: float, s: float, cfg: PropagationConfig = PropagationConfig()):
    """(lhs, rhs) with lhs the pairing of a composed with the time -s flow and
    rhs = e^{-2 nu s} times the pairing of a, on one shared quadrature grid."""
    if not 0 <= s <= 4:
        raise ValueError("s must lie in [0, 4]")
    if s != 0 and s < 0.25:
        raise ValueError("s must lie in [0.25, 4]")
    if s >= cfg.t:
        raise ValueError("flow time must exceed s")
    a = as_phase(a)
    rhs = math.exp(-2 * nu * s) * mu_pair_propagation(a, nu, cfg).value
    if s == 0:
        return rhs, rhs
    # the flowed observable reaches s higher into the cusp
    u_hi = _top_offset(a, cfg) + s
    _, rows, du = _propagation_rows(a, nu, R_CUSP - cfg.t, u_hi, cfg.r_grid, cfg.theta_grid, back=s)
    lhs = (compensated_sum(rows) * du).real
    return lhs, rhs


# ----------------------------------------------------------------- atom series


def _ball_radius(box, center):
    cx, cy = center.real, center.imag
    d = 0.0
    for x in box[:2]:
        for y in box[2:]:
            d = max(d, 2 * math.asinh(math.hypot(x - cx, y - cy) / (2 * math.sqrt(y * cy))))
    return d


def _infinity_atom(a: PhaseObservable, nu: float, n: int):
    xlo, xhi, ylo, yhi = a.box
    xs, hx = _trap_1d(n, xlo, xhi)
    ys, hy = _trap_1d(n, ylo, yhi)
    X, Y = np.meshgrid(xs, ys)
    vals = a(X, Y, np.full_like(X, DOWN)) * Y ** (2 * nu - 1)
    full = vals.sum() * hx * hy
    half = vals[1::2, 1::2].sum() * 4 * hx * hy
    return full, half


def _delta_window(alpha1, center, rho, samples: int = 4096):
    delta = TWO_PI * (np.arange(1, samples) / samples)
    dist, _ = chart_geometry_angles(alpha1, alpha1 + delta, center)
    hit = np.flatnonzero(dist < rho)
    if hit.size == 0:
        return None
    lo = delta[hit[0] - 1] if hit[0] > 0 else 1e-12
    hi = delta[hit[-1] + 1] if hit[-1] + 1 < delta.size else TWO_PI - 1e-12
    return lo, hi


def _finite_atom(a: PhaseObservable, nu: float, alpha1: float, center: complex, rho: float, n: int):
    win = _delta_window(alpha1, center, rho)
    if win is None:
        return 0.0, 0.0
    delta, hd = _trap_1d(n, *win)
    dist, tc = chart_geometry_angles(alpha1, alpha1 + delta, center)
    ratio = np.clip(math.cosh(rho) / np.cosh(dist), 1.0, None)
    half_width = np.arccosh(ratio)
    tau, ht = _trap_1d(n, -1.0, 1.0)
    T = tc[:, None] + half_width[:, None] * tau[None, :]
    D = np.broadcast_to(delta[:, None], T.shape)
    fa, fb, fc, fd = chart_T_angles(alpha1, alpha1 + D, T)
    x, y = frame_base_arrays(fa, fb, fc, fd)
    phi = frame_angle_arrays(fa, fb, fc, fd)
    dens = 0.5 * np.abs(np.sin(0.5 * D)) ** (-2 * (nu + 1)) * np.exp(-2 * nu * T)
    vals = a(x, y, phi) * dens * half_width[:, None]
    full = vals.sum() * hd * ht
    half = vals[1::2, 1::2].sum() * 4 * hd * ht
    return full, half


def mu_pair_ps_series(a, nu: float, eps: float = 1e-12, n: int = 128):
    """Pairing from the boundary-atom representation.

    Returns (Pairing, atom_tail_weight).  ``n`` is the tensor grid size per
    atom; the error is the change against the half-resolution sub-grid.
    """
    if nu < 0.5:
        raise ValueError("nu must be at least 1/2")
    a = as_phase(a)
    atoms = enumerate_top(2 * nu + 1, eps)
    xlo, xhi, ylo, yhi = a.box
    center = complex(0.5 * (xlo + xhi), 0.5 * (ylo + yhi))
    rho = _ball_radius(a.box, center)
    full, half = _infinity_atom(a, nu, n)
    fulls, halves = [full], [half]
    for ac, cc, w in zip(atoms.a[1:], atoms.c[1:], atoms.weight[1:]):
        alpha1 = 2 * math.atan2(ac, cc)
        f, h = _finite_atom(a, nu, alpha1, center, rho, n)
        fulls.append(w * f)
        halves.append(w * h)
    pref = TWO_PI ** (2 * nu + 1)
    value = pref * math.fsum(fulls)
    return Pairing(float(value), float(abs(value - pref * math.fsum(halves)))), atoms.tail_weight


# ------------------------------------------------------------------ pushforward


def pushforward_density(nu: float, x, y, tol: float = 1e-10, threads: int = 1):
    """(2 pi)^{2 nu + 1} sum (Im gamma z)^{2 nu + 1}; returns (values, tail)."""
    if nu < 0.7:
        raise ValueError("nu must be at least 0.7")
    pref = TWO_PI ** (2 * nu + 1)
    vals, tail = coset_sum_many(2 * nu + 1, x, y, tol / pref, threads=threads)
    return pref * vals.real, pref * tail


def pushforward_pair(a: PositionObservable, nu: float, tol: float = 1e-10, n: int = 256,
                     threads: int = 1) -> Pairing:
    """int_F a(z) * density(z) dVol by tensor trapezoid on the support box."""
    xlo, xhi, ylo, yhi = a.box
    xs, hx = _trap_1d(n, xlo, xhi)
    ys, hy = _trap_1d(n, ylo, yhi)
    X, Y = np.meshgrid(xs, ys)
    av = a(X, Y)
    vals = np.zeros_like(av)
    nz = av != 0
    if nz.any():
        dens, _ = pushforward_density(nu, X[nz], Y[nz], tol, threads)
        vals[nz] = av[nz] * dens / Y[nz] ** 2
    full = vals.sum() * hx * hy
    half = vals[1::2, 1::2].sum() * 4 * hx * hy
    return Pairing(float(full), float(abs(full - half)))
