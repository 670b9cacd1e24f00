"""Eisenstein functions of the modular surface off the real axis.

E(lambda; z) = (2 pi)^(1/2 - i lambda) * sum over Gamma_inf \\ Gamma of
(Im gamma z)^(1/2 - i lambda), normalised so that the incoming zero mode in
the cusp coordinates z = (theta + i e^r) / (2 pi) is exactly e^((1/2 - i lambda) r).

Fourier modes in the cusp satisfy

    [(D_r + i/2)^2 + k^2 e^{2r} - lambda^2] u_k = 0,   D_r = -i d/dr.

Writing u_k = e^{r/2} v and x = |k| e^r turns this into
x^2 v'' + x v' - (x^2 + (i lambda)^2) v = 0, so the decaying solution is
u_k(r) = const * e^{r/2} K_{i lambda}(|k| e^r).  For k = 0 the equation has
constant coefficients: u_0 = u_+ e^{(1/2 + i lambda) r} + u_- e^{(1/2 - i lambda) r}.

Substituting the series into the zero-mode integral gives
u_+ = (2 pi)^(-2 i lambda) * sqrt(pi) zeta(-2 i lambda) Gamma(-i lambda)
/ (zeta(1 - 2 i lambda) Gamma(1/2 - i lambda)); the prefactor comes from the
2 pi in the cusp coordinates and has modulus (2 pi)^(2 Im lambda).
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .hyperbolic import R_CUSP, HPoint
from .modgroup import (
    enumerate_bottom,
    enumerate_bottom_box,
    box_tail_bound,
    mode_tail_bound,
    policy_for_tolerance,
    reduce_arrays,
    reduce_to_F,
    shells_for_tolerance,
)
from .specfun import AccuracyBudget, RowAccumulator, bessel_k_cx_order, compensated_sum, lgamma_cx, zeta_cx

NU_FLOOR = 0.7
MAX_THETA_NODES = 10_000_000
MODE_RADII = (math.log(4 * math.pi), math.log(4 * math.pi) + 0.7)
TWO_PI = 2 * math.pi


class InfeasibleError(RuntimeError):
    pass


@dataclass(frozen=True)
class SpectralParam:
    """lambda = 1/h + i nu."""

    h: float
    nu: float

    def __post_init__(self):
        if not (self.h > 0 and self.nu > 0):
            raise ValueError("need h > 0 and nu > 0")
        if self.h > 1:
            raise ValueError("need h <= 1")

    @classmethod
    def from_lambda(cls, lam: complex) -> "SpectralParam":
        lam = complex(lam)
        return cls(1.0 / lam.real, lam.imag)

    @property
    def lam(self) -> complex:
        return complex(1.0 / self.h, self.nu)

    @property
    def s(self) -> complex:
        """Exponent 1/2 - i lambda of the series terms."""
        return 0.5 - 1j * self.lam

    @property
    def sigma(self) -> float:
        return 0.5 + self.nu

    @property
    def prefactor(self) -> complex:
        return cmath.exp(self.s * math.log(TWO_PI))


@dataclass(frozen=True)
class EisensteinValue:
    value: complex
    tail_bound: float


@dataclass(frozen=True)
class ModeCoefficients:
    u_plus: complex
    u_minus: complex
    condition: float = 1.0


def _require_series(p: SpectralParam):
    if p.nu < NU_FLOOR:
        raise ValueError(f"nu = {p.nu} below the series floor {NU_FLOOR}")


def _terms(s: complex, x, y, c, d):
    u = c * x + d
    # exp(s * log Im) with a real log keeps the phase accurate for large |lambda|
    return np.exp(s * (np.log(y) - np.log(u * u + (c * y) ** 2)))


def eval_E(p: SpectralParam, z: HPoint, tol: float = 1e-8) -> EisensteinValue:
    """E(lambda; z) with certified truncation error at most ``tol``."""
    _require_series(p)
    zr, _ = reduce_to_F(z)
    pref = p.prefactor
    policy = policy_for_tolerance(zr, p.sigma, tol / abs(pref))
    en = enumerate_bottom(zr, p.sigma, policy)
    vals = _terms(p.s, zr.x, zr.y, en.c.astype(float), en.d.astype(float))
    return EisensteinValue(pref * compensated_sum(vals), en.tail_bound * abs(pref))


def _grid_sum(exponent, x, y, c, d, block: int = 32):
    acc = RowAccumulator(x.shape, complex if isinstance(exponent, complex) else float)
    cf, df = c.astype(float), d.astype(float)
    logy = np.log(y)[:, None]
    for k in range(0, cf.size, block):
        cb, db = cf[k : k + block], df[k : k + block]
        u = x[:, None] * cb + db
        L = logy - np.log(u * u + (y[:, None] * cb) ** 2)
        acc.add(np.exp(exponent * L))
    return acc.value


def coset_sum_many(exponent, x, y, tol: float, threads: int = 1, chunk: int = 32768):
    """Sum of (Im gamma z)^exponent over cosets at many points.

    Points are reduced into F first.  A single coset set covering the bounding
    box of the reduced points is used, so for fixed inputs the truncated sum
    is a fixed finite combination of exact eigenfunctions.  Returns
    (values, tail_bounds) with the bound computed at real exponent
    Re(exponent).
    """
    x = np.asarray(x, float).ravel()
    y = np.asarray(y, float).ravel()
    xr, yr, _ = reduce_arrays(x, y)
    sigma = float(np.real(exponent))
    c, d, R = enumerate_bottom_box(xr.min(), xr.max(), yr.min(), yr.max(), sigma, tol)
    slices = [slice(i, i + chunk) for i in range(0, xr.size, chunk)]

    def work(sl):
        return _grid_sum(exponent, xr[sl], yr[sl], c, d)

    if threads > 1 and len(slices) > 1:
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(work, slices))
    else:
        parts = [work(sl) for sl in slices]
    vals = np.concatenate(parts) if parts else np.empty(0, complex)
    return vals, box_tail_bound(xr, yr, sigma, R)


def eval_E_many(p: SpectralParam, x, y, tol: float = 1e-6, threads: int = 1):
    """Vectorised ``eval_E``; returns (values, tail_bounds)."""
    _require_series(p)
    pref = p.prefactor
    vals, bound = coset_sum_many(p.s, x, y, tol / abs(pref), threads=threads)
    return pref * vals, bound * abs(pref)


def helmholtz_residual(p: SpectralParam, z: HPoint, spacing: float = 1e-3, tol: float = 1e-9) -> float:
    """Relative residual |(Delta - 1/4 - lambda^2) E| / |lambda^2 E| by the
    five-point stencil, with Delta = -y^2 (d_xx + d_yy)."""
    hs = spacing
    xs = np.array([z.x, z.x + hs, z.x - hs, z.x, z.x])
    ys = np.array([z.y, z.y, z.y, z.y + hs, z.y - hs])
    # evaluate on unreduced points with one coset set so the truncation is smooth
    _require_series(p)
    c, d, _ = enumerate_bottom_box(xs.min(), xs.max(), ys.min(), ys.max(), p.sigma, tol / abs(p.prefactor))
    E = p.prefactor * _grid_sum(p.s, xs, ys, c, d)
    lap = -z.y ** 2 * (E[1] + E[2] + E[3] + E[4] - 4 * E[0]) / hs ** 2
    lam2 = p.lam ** 2
    return abs(lap - (0.25 + lam2) * E[0]) / abs(lam2 * E[0])


# ----------------------------------------------------------------- cusp modes


def theta_nodes(p: SpectralParam, k: int, r: float) -> int:
    """Trapezoid node count on the cusp circle of radius r.

    The phase of every series term moves at most |lambda| e^{-r} radians per
    unit theta, so 8 nodes per unit of that rate (plus the mode number)
    resolve the integrand.
    """
    n = max(64, int(math.ceil(8 * (abs(k) + abs(p.lam) * math.exp(-r)))))
    if n > MAX_THETA_NODES:
        raise InfeasibleError(f"{n} theta nodes exceed {MAX_THETA_NODES}")
    return n


def circle_values(p: SpectralParam, r: float, tol: float, n_theta: int, max_terms: float = 5e6):
    """E on ``n_theta`` equispaced nodes of the cusp circle at radius r, using
    shell truncation.  Returns (values, mode_bound) where mode_bound bounds the
    error of any Fourier coefficient extracted from the values."""
    _require_series(p)
    if r <= R_CUSP:
        raise ValueError(f"r = {r} is not inside the cusp region")
    y = math.exp(r) / TWO_PI
    pref = p.prefactor
    series_tol = tol / abs(pref)
    try:
        C, U = shells_for_tolerance(y, y, p.sigma, series_tol, max_terms=max_terms)
    except Exception as exc:
        raise InfeasibleError(str(exc)) from exc
    x = np.arange(n_theta) / n_theta
    s = p.s
    acc = RowAccumulator(x.shape)
    acc.add(np.full(x.shape, cmath.exp(s * math.log(y))))
    M = int(math.floor(2 * U)) + 2
    offsets = np.arange(M, dtype=float)
    for c in range(1, C + 1):
        d0 = np.ceil(-c * x - U)
        d = d0[:, None] + offsets
        u = c * x[:, None] + d
        keep = (np.abs(u) <= U) & (np.gcd(d.astype(np.int64), c) == 1)
        L = math.log(y) - np.log(u * u + (c * y) ** 2)
        acc.add(np.where(keep, np.exp(s * L), 0))
    bound = mode_tail_bound(y, p.sigma, C, U) * abs(pref)
    return pref * acc.value, bound


def eval_mode(p: SpectralParam, k: int, r: float, tol: float = 1e-6, n_theta: int | None = None) -> complex:
    """Fourier coefficient u_k(r) = (1/2 pi) int E(r, theta) e^{-ik theta} d theta."""
    n = n_theta or theta_nodes(p, k, r)
    vals, _ = circle_values(p, r, tol, n)
    theta = TWO_PI * np.arange(n) / n
    return compensated_sum(vals * np.exp(-1j * k * theta)) / n


def solve_zero_mode(lam: complex, r1: float, r2: float, u1: complex, u2: complex) -> ModeCoefficients:
    """Solve u_0(r_i) = u_+ e^{(1/2+i lam) r_i} + u_- e^{(1/2-i lam) r_i}.

    Basis functions are scaled by their values at r1 before solving; the
    reported condition number is that of the scaled 2x2 system.
    """
    ep = lambda r: cmath.exp((0.5 + 1j * lam) * r)
    em = lambda r: cmath.exp((0.5 - 1j * lam) * r)
    A = np.array([[1.0, 1.0], [ep(r2) / ep(r1), em(r2) / em(r1)]], dtype=complex)
    sol = np.linalg.solve(A, np.array([u1, u2], dtype=complex))
    return ModeCoefficients(sol[0] / ep(r1), sol[1] / em(r1), float(np.linalg.cond(A)))


def fit_zero_mode(p: SpectralParam, r1: float, r2: float, tol: float = 1e-6) -> ModeCoefficients:
    if r1 == r2 or min(r1, r2) <= R_CUSP:
        raise ValueError("need distinct radii inside the cusp region")
    if not 0.2 <= abs(r1 - r2) <= 2:
        raise ValueError("|r1 - r2| must lie in [0.2, 2]")
    u1 = eval_mode(p, 0, r1, tol)
    u2 = eval_mode(p, 0, r2, tol)
    coef = solve_zero_mode(p.lam, r1, r2, u1, u2)
    if coef.condition > 1e6:
        raise InfeasibleError(f"condition number {coef.condition:.2e} too large; choose other radii")
    return coef


def scattering_from_modes(p: SpectralParam, tol: float = 1e-6) -> complex:
    """Outgoing zero-mode coefficient u_+ fitted at the default radii."""
    return fit_zero_mode(p, MODE_RADII[0], MODE_RADII[1], tol).u_plus


def scattering_zeta(lam: complex, zeta_terms_factor: int = 1) -> complex:
    """sqrt(pi) zeta(-2i lam) Gamma(-i lam) / (zeta(1 - 2i lam) Gamma(1/2 - i lam))."""
    lam = complex(lam)
    if not lam.imag > 0:
        raise ValueError("need Im lambda > 0")
    if abs(lam.real) > 500:
        raise ValueError("|Re lambda| must be at most 500")
    a, b = -2j * lam, 1 - 2j * lam

    def zeta(w):
        n = max(20, int(math.ceil(2 * abs(w.imag)))) * zeta_terms_factor
        return zeta_cx(w, n_terms=n)

    log_gamma_ratio = lgamma_cx(-1j * lam) - lgamma_cx(0.5 - 1j * lam)
    return math.sqrt(math.pi) * zeta(a) / zeta(b) * cmath.exp(log_gamma_ratio)


def cusp_phase(lam: complex) -> complex:
    """(2 pi)^(-2 i lambda): converts the classical coefficient to the one in
    the cusp coordinates (theta + i e^r) / (2 pi)."""
    return cmath.exp(-2j * complex(lam) * math.log(TWO_PI))


def bessel_mode_ratio(p, k: int, radii: Sequence[float], tol: float = 1e-6,
                      budget: AccuracyBudget | None = None) -> list:
    """u_k(r) / (e^{r/2} K_{i lambda}(|k| e^r)) at each radius; constant when
    the mode solves the separated equation."""
    if k == 0:
        raise ValueError("k must be nonzero")
    if not isinstance(p, SpectralParam):
        p = SpectralParam.from_lambda(p)
    if abs(p.lam.real) > 30:
        raise ValueError("|Re lambda| must be at most 30 for the Bessel route")
    budget = budget or AccuracyBudget(abs_tol=1e-300, rel_tol=1e-12)
    out = []
    for r in radii:
        uk = eval_mode(p, k, r, tol)
        K = bessel_k_cx_order(1j * p.lam, abs(k) * math.exp(r), budget)
        out.append(uk / (math.exp(0.5 * r) * K))
    return out
