"""Acceptance criteria, one test each.  Every test records a PASS/FAIL line
(collected in the terminal summary) and then asserts the same condition."""

import math
import time

import numpy as np
import pytest

from eisenlab.eisenstein import (
    MODE_RADII,
    InfeasibleError,
    SpectralParam,
    bessel_mode_ratio,
    cusp_phase,
    eval_E,
    fit_zero_mode,
    helmholtz_residual,
    scattering_from_modes,
    scattering_zeta,
)
from eisenlab.experiments import ExperimentConfig, loglog_slope, run_measure_xval, run_theorem1
from eisenlab.hyperbolic import HPoint, UnimodularMatrix, mobius_apply
from eisenlab.modgroup import TruncationPolicy, enumerate_bottom
from eisenlab.specfun import bessel_k_cx_order, compensated_sum, lgamma_cx, zeta_cx

DUAL_TOL = 3e-7


@pytest.fixture(scope="module")
def measure_report():
    t0 = time.perf_counter()
    rep = run_measure_xval(ExperimentConfig(experiment="measure", nu=2.0))
    return rep, time.perf_counter() - t0


def test_c1_normalisation(criterion):
    t0 = time.perf_counter()
    coef = fit_zero_mode(SpectralParam.from_lambda(30 + 2j), *MODE_RADII)
    wall = time.perf_counter() - t0
    err = abs(coef.u_minus - 1)
    ok = err < 1e-6 and wall < 30
    criterion(1, "normalisation u_minus = 1", ok, f"|u_minus - 1| = {err:.2e}, {wall:.1f} s")
    assert ok


def test_c2_dual_route(criterion):
    details, ok = [], True
    for lam in (10 + 1j, 10 + 2j, 20 + 2j):
        Sz = scattering_zeta(lam)
        try:
            Sm = scattering_from_modes(SpectralParam.from_lambda(lam), DUAL_TOL)
        except InfeasibleError as exc:
            ok = False
            details.append(f"{lam}: modes route infeasible ({exc})")
            continue
        diff = abs(abs(Sm) - abs(Sz))
        phase = abs(abs(Sm / Sz) - 1)
        ok &= diff < 1e-6 and phase < 1e-6
        details.append(f"{lam}: ||Sm|-|Sz|| = {diff:.3g}, ||Sm/Sz|-1| = {phase:.3g}")
    criterion(2, "dual-route scattering moduli", ok, "; ".join(details))
    assert ok


def test_c2_cusp_phase_factor(criterion):
    # companion to criterion 2: the modes route equals (2 pi)^(-2i lambda) times the zeta formula
    details, ok = [], True
    for lam in (10 + 2j, 20 + 2j):
        Sm = scattering_from_modes(SpectralParam.from_lambda(lam), DUAL_TOL)
        Sc = cusp_phase(lam) * scattering_zeta(lam)
        diff, phase = abs(abs(Sm) - abs(Sc)), abs(abs(Sm / Sc) - 1)
        ok &= diff < 1e-6 and phase < 1e-6
        details.append(f"{lam}: ||Sm|-|Sc|| = {diff:.3g}, ||Sm/Sc|-1| = {phase:.3g}")
    criterion("2b", "dual route with cusp phase factor", ok, "; ".join(details))
    assert ok


def test_c3_scattering_decay(criterion):
    t0 = time.perf_counter()
    res = [25.0, 50.0, 100.0, 200.0]
    mods = [abs(scattering_zeta(complex(r, 0.75))) for r in res]
    wall = time.perf_counter() - t0
    decreasing = all(b < a for a, b in zip(mods, mods[1:]))
    slope = loglog_slope(res, mods)
    ok = decreasing and slope <= -0.35 and wall < 10
    table = ", ".join(f"{m:.5f}" for m in mods)
    criterion(3, "scattering decay at nu = 3/4", ok, f"|S| = [{table}], slope {slope:.3f}, {wall:.2f} s")
    assert ok


def test_c4_theorem1(criterion):
    t0 = time.perf_counter()
    rep = run_theorem1(ExperimentConfig())
    wall = time.perf_counter() - t0
    errs = [r.rel_err for r in rep.rows]
    ok = all(b < a for a, b in zip(errs, errs[1:])) and errs[-1] < 0.1 and wall <= 1800
    criterion(4, "|E|^2 pairing converges to the limit measure", ok,
              "rel errors " + ", ".join(f"{e:.3g}" for e in errs) + f", {wall:.0f} s")
    assert ok


def test_c5_dual_construction(criterion, measure_report):
    rep, wall = measure_report
    rows = [r for r in rep.rows if r.kind == "ps_vs_prop"]
    ok = len(rows) == 3 and all(r.rel_err < 0.02 for r in rows) and wall < 300
    criterion(5, "atom series vs propagation", ok,
              "rel errors " + ", ".join(f"{r.rel_err:.2e}" for r in rows) + f", {wall:.0f} s")
    assert ok


def test_c6_decay_law(criterion, measure_report):
    rep, _ = measure_report
    rows = [r for r in rep.rows if r.kind == "decay"]
    pairs = {(r.param("s"), r.param("nu")) for r in rows}
    ok = pairs == {(s, nu) for s in (0.5, 1.0, 2.0) for nu in (1.0, 2.0)} and all(r.rel_err < 0.01 for r in rows)
    criterion(6, "decay ratio e^(-2 nu s)", ok, f"max rel error {max(r.rel_err for r in rows):.2e}")
    assert ok


def test_c7_mode_equation(criterion):
    radii = [2.0, 2.25, math.log(4 * math.pi)]
    spread = []
    for k in (1, -1):
        q = bessel_mode_ratio(6 + 2j, k, radii)
        spread.append(max(abs(v / q[0] - 1) for v in q))
    ok = max(spread) < 1e-3
    criterion(7, "modes solve the separated equation", ok, f"ratio spread k=1: {spread[0]:.2e}, k=-1: {spread[1]:.2e}")
    assert ok


def test_c8_pde_residual(criterion):
    p = SpectralParam.from_lambda(6 + 2j)
    res = [helmholtz_residual(p, z) for z in (HPoint(0.1, 1.3), HPoint(-0.3, 1.1), HPoint(0.25, 2.0))]
    ok = max(res) < 1e-4
    criterion(8, "Helmholtz residual", ok, "residuals " + ", ".join(f"{r:.2e}" for r in res))
    assert ok


def _gamma_invariance():
    rng = np.random.default_rng(2024)
    p, tol = SpectralParam.from_lambda(4 + 2.5j), 1e-6
    worst = 0.0
    for _ in range(100):
        z = HPoint(rng.uniform(-0.5, 0.5), rng.uniform(0.9, 2.5))
        g = UnimodularMatrix.identity()
        for _ in range(3):
            g = g @ UnimodularMatrix(1, int(rng.integers(-3, 4)), 0, 1) @ UnimodularMatrix(0, -1, 1, 0)
        worst = max(worst, abs(eval_E(p, z, tol).value - eval_E(p, mobius_apply(g, z), tol).value) / (2 * tol))
    return worst


def _completeness():
    R2 = 10 ** 4
    pol = TruncationPolicy(term_floor=(1 / R2) ** 2.5 * (1 - 1e-12), tail_bound_target=1e9, c_max=10 ** 6)
    en = enumerate_bottom(HPoint(0, 1), 2.5, pol)
    brute = {(0, 1)} | {(c, d) for c in range(1, 101) for d in range(-100, 101)
                        if c * c + d * d <= R2 and math.gcd(c, d) == 1}
    got = list(zip(en.c.tolist(), en.d.tolist()))
    return len(got) == len(set(got)) and set(got) == brute


def _sum_determinism():
    rng = np.random.default_rng(1)
    terms = rng.standard_normal(200_000) * 10.0 ** rng.integers(-8, 8, 200_000)
    serial = compensated_sum(terms)
    return all(compensated_sum(terms, chunks=8, workers=w) == serial for w in (1, 2, 4))


def _special_function_oracles():
    rng = np.random.default_rng(3)
    zs = rng.uniform(0.1, 40, 200) + 1j * rng.uniform(-300, 300, 200)
    gamma = max(abs(np.exp(lgamma_cx(z + 1) - lgamma_cx(z)) / z - 1) for z in zs) < 1e-11
    zeta = abs(zeta_cx(2) - math.pi ** 2 / 6) < 1e-14 and abs(zeta_cx(0.5 + 14.134725141734693790j)) < 1e-12
    bessel = abs(bessel_k_cx_order(0.5, 2.0).real - math.sqrt(math.pi / 4) * math.exp(-2)) < 1e-12
    return gamma and zeta and bessel


def test_c9_infrastructure(criterion):
    worst = _gamma_invariance()
    parts = {
        "gamma_invariance": worst <= 1,
        "enumeration_complete": _completeness(),
        "sum_deterministic": _sum_determinism(),
        "special_functions": _special_function_oracles(),
    }
    ok = all(parts.values())
    detail = ", ".join(f"{k}={'ok' if v else 'bad'}" for k, v in parts.items())
    criterion(9, "infrastructure properties", ok, f"{detail}; worst invariance gap / (2 tol) = {worst:.2e}")
    assert ok
