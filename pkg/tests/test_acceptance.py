"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line."""

import math

import numpy as np
import pytest

from helegraph.dtn import BoundaryLaw
from helegraph.elliptic import (MAX_PRINCIPLE_RECORD, SolverConfig, flatten, greens_boundary_ratio,
                                harmonic_measure_decay, physical_coordinates, solve_bulk)
from helegraph.evolution import FlowConfig, dini_initial_data, evolve
from helegraph.interface import ClassKParams, DiniModulus, make_interface, seminorm
from helegraph.parabolic import (KernelClassParams, difference_quotient_check, extremal, linear_apply, random_member,
                                 scaling_check)
from helegraph.probe import (BumpSpec, bump_sandwich_test, constant_shift_test, decay_test, default_bumps, gcp_test,
                             probe_drift, probe_kernel, rotation_estimate_test, symbol_check)
from helegraph import whitney

from conftest import ACCEPTANCE_LINES, TWO_PI, grid

ONE = BoundaryLaw("one_phase_identity")
DIFF = BoundaryLaw("difference")

pytestmark = pytest.mark.slow


def record(number, passed, detail):
    line = f"{'PASS' if passed else 'FAIL'} criterion {number:2d}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert passed, line


def test_01_planar_flow():
    f0 = make_interface(np.ones(128), TWO_PI, 2.0)
    cfg = FlowConfig(solver=SolverConfig(ny=128), klass=ClassKParams(0.2, 2.0, 1.0), dt_max=1e-2)
    traj = evolve(f0, ONE, 0.5, cfg=cfg)
    err = float(np.abs(traj.final.f.samples - math.sqrt(2.0)).max() / math.sqrt(2.0))
    record(1, err <= 1e-3, f"planar flow rel error {err:.3e} <= 1e-3 ({traj.report['steps']} steps)")


def test_02_two_phase_equilibrium():
    f0 = make_interface(np.ones(32), TWO_PI, 2.0)
    traj = evolve(f0, DIFF, 1.0, cadence=0.1, cfg=FlowConfig(solver=SolverConfig(ny=32)))
    dev = max(max(abs(d.min_f - 1), abs(d.max_f - 1)) for d in traj.diagnostics)
    record(2, dev <= 1e-6, f"equilibrium max|f-1| {dev:.3e} <= 1e-6 over {len(traj.diagnostics)} steps")


def test_03_linearized_symbol():
    rep = symbol_check(1.0, 2.0, ONE, [1, 2, 4, 8], nx=256, cfg=SolverConfig(ny=128))
    errs = ", ".join(f"xi={r['xi']:g}: {r['rel_error']:.2e}" for r in rep.measured["rows"])
    xi1 = rep.measured["rows"][0]["measured"]
    ok = rep.passed and abs(xi1 - (-1.3130)) <= 0.01 * 1.3130
    record(3, ok, f"symbol rel errors {errs} (xi=1 measured {xi1:.4f})")


def test_04_kernel_bounds():
    nx, P = 512, TWO_PI
    R0 = min(P / 4, 5 * 0.2)
    h = np.geomspace(0.1, R0, 7)
    hs = np.concatenate([h, -h])
    cfg = SolverConfig(ny=128)
    x = grid(nx)
    Cs, positive = [], True
    for vals in (np.ones(nx), 1 + 0.2 * np.cos(x)):
        f = make_interface(vals, P, 2.0)
        k = probe_kernel(f, ONE, bumps=default_bumps(f, hs), cfg=cfg, R0=R0)
        positive &= bool(np.all(k.K_values > 0))
        Cs.append(k.C)
    g = make_interface(1 + 0.2 * np.cos(x + 0.7), P, 2.0)
    kg = probe_kernel(g, ONE, bumps=default_bumps(g, hs), cfg=cfg, R0=R0)
    positive &= bool(np.all(kg.K_values > 0))
    Cs.append(kg.C)
    drift = probe_drift(g, ONE, [1.0], list(np.geomspace(0.1, 1.0, 4)), cfg=cfg, kernel=kg)
    comp = drift.measured["C_comp"]
    C = max(Cs)
    ok = positive and C <= 20 and math.isfinite(comp)
    record(4, ok, f"K > 0: {positive}, C = {C:.3f} <= 20, drift compensation bound {comp:.3f} over r in [0.1, 1]")


def test_05_gcp():
    cfg = SolverConfig(ny=64)
    rep = gcp_test(7, DIFF, n_pairs=100, nx=128, cfg=cfg)
    n_bad = len(rep.measured["violations"])
    record(5, rep.passed, f"GCP {rep.measured['n_ok']}/100 ordered pairs, {n_bad} violations beyond "
                          f"{rep.tolerances['tol']:.0e}, min margin {rep.measured['min_margin']:.3e}")


def test_06_lipschitz_lemmas():
    cfg = SolverConfig(ny=128)
    f = make_interface(np.ones(256), TWO_PI, 2.0)
    g = make_interface(1 + 0.2 * np.cos(grid(256)), TWO_PI, 2.0)
    sand = bump_sandwich_test(f, ONE, [BumpSpec(0.5, 0.2, 0.05), BumpSpec(-0.6, 0.3, 0.05), BumpSpec(-0.3, 0.1, 0.02)],
                              cfg=cfg)
    shifts = [constant_shift_test(g, DIFF, [0.01, 0.05], phase=ph, cfg=cfg) for ph in ("plus", "minus")]
    flat_shift = constant_shift_test(f, ONE, [0.01, 0.05], cfg=cfg)
    closed = max(abs(r["flux_at_x0"] - 1 / (1 + r["eps"])) for r in flat_shift.measured["rows"])
    rot = rotation_estimate_test(g, ONE, [0.01, 0.005], cfg=cfg)
    reps = [sand, *shifts, flat_shift, rot]
    Cs = [r.measured["C"] for r in reps]
    ok = all(r.passed for r in reps) and all(math.isfinite(c) for c in Cs) and closed <= 1e-8
    record(6, ok, f"sandwich C={Cs[0]:.3f}, shift C={Cs[1]:.3f}/{Cs[2]:.3f}, rotation C={Cs[4]:.3f}, "
                  f"flat shift vs 1/(c+eps) {closed:.1e} <= 1e-8")


def test_07_decay():
    P = 16 * math.pi
    f = make_interface(np.full(256, 3.0), P, 6.0)
    rep = decay_test(f, ONE, [P / 32, P / 16, P / 8], cfg=SolverConfig(ny=64))
    record(7, rep.passed and rep.measured["alpha"] > 0, f"decay alpha = {rep.measured['alpha']:.3f} > 0")


def test_08_appendix_estimates():
    cfg = SolverConfig(ny=256)
    x = grid(256)
    Cg, spread, alphas = [], [], []
    for vals in (np.ones(256), 1 + 0.2 * np.cos(x)):
        f = make_interface(vals, TWO_PI, 2.0)
        Cg.append(greens_boundary_ratio(f, cfg).C)
        d = harmonic_measure_decay(f, 0, [TWO_PI / 16, TWO_PI / 8, TWO_PI / 4], cfg=cfg)
        spread.append(float(d.ratio_spread.max()))
        alphas.append(d.alpha)
    ok = max(Cg) <= 50 and max(spread) <= 0.1 and min(alphas) > 0
    record(8, ok, f"Green's C = {max(Cg):.3f} <= 50, W/s spread {max(spread):.2%} <= 10%, "
                  f"alpha = {min(alphas):.3f} > 0")


def _whitney_checks():
    flags = {}
    for N, m in ((1, 4), (2, 2)):
        d = whitney.decompose(m, N)
        for key, v in d.cube_properties().items():
            if isinstance(v, bool):
                flags[f"cube.{key}.N{N}"] = v
        for key, v in d.partition_properties(n_points=1000, seed=N).items():
            if isinstance(v, bool):
                flags[f"partition.{key}.N{N}"] = v
        z = np.zeros(N)
        z[0] = 3 * d.h
        flags[f"translation.cubes.N{N}"] = d.translated(z).cube_set() == d.cube_set()
    f = lambda y: np.exp(-np.asarray(y) ** 2) * np.cos(2 * np.asarray(y))  # noqa: E731
    dec = whitney.decompose(4, 1)
    z = 3 * dec.h
    xs = (np.arange(-200, 200) + 0.375) / 128
    p = whitney.project(f, 4, dec=dec)
    pz = whitney.project(lambda y: f(np.asarray(y) + z), 4, dec=dec)
    flags["translation.projection"] = bool(np.array_equal(pz(xs), p(xs + z)))
    xl = np.linspace(-1, 1, 4001)
    lips = [float(np.max(np.abs(np.diff(whitney.project(np.sin, m)(xl)) / np.diff(xl)))) for m in range(2, 7)]
    flags["lipschitz.uniform"] = max(lips) <= 3.0
    w = lambda y: np.where(np.asarray(y) > 0, np.abs(y) ** 1.5, 0.0)  # noqa: E731
    ms = np.arange(2, 9)
    hs = 2.0 ** -ms
    neg = np.array([-whitney.project(w, int(m))(np.linspace(-2 * h, 2 * h, 2001)).min() for m, h in zip(ms, hs)])
    beta = float(np.polyfit(np.log(hs), np.log(neg), 1)[0]) if np.all(neg > 0) else float("inf")
    flags["negativity.beta"] = beta > 0
    J = lambda g, y: whitney.fractional_laplacian(g, y, 1.0)  # noqa: E731
    xe = np.linspace(-1, 1, 21)
    exact = whitney.fractional_laplacian(f, xe)
    errs = np.array([np.abs(whitney.approximate(J, m)(f)(xe) - exact).max() for m in range(3, 7)])
    rate = float(-np.polyfit(np.arange(3, 7), np.log2(errs), 1)[0])
    flags["approximation.trend"] = bool(np.all(np.diff(errs) < 0) and rate > 0)
    return flags, lips, beta, errs, rate


def test_09_whitney():
    flags, lips, beta, errs, rate = _whitney_checks()
    failed = [k for k, v in flags.items() if not v]
    record(9, not failed, f"Whitney {sum(flags.values())}/{len(flags)} checks; Lip(pi_m) {max(lips):.3f}, "
                          f"beta = {beta:.2f}, J^m error {errs[0]:.2e} -> {errs[-1]:.2e} (rate {rate:.2f})"
                          + (f"; failed {failed}" if failed else ""))


def test_10_parabolic():
    params = KernelClassParams(2.0, 1.0)
    rng = np.random.default_rng(1)
    x = grid(256)
    worst_sym, worst_gen, verified = -np.inf, -np.inf, 0
    for i in range(50):
        symmetric = i % 2 == 0
        mem = random_member(rng, params, symmetric=symmetric)
        verified += mem.verified
        u = sum(rng.normal() / (k + 1) ** 2 * np.cos((k + 1) * x + rng.uniform(0, 6.3)) for k in range(6))
        lu = linear_apply(u, mem, TWO_PI)
        excess = max((extremal(u, params, "minus", TWO_PI) - lu).max(), (lu - extremal(u, params, "plus", TWO_PI)).max())
        if symmetric:
            worst_sym = max(worst_sym, excess)
        else:
            worst_gen = max(worst_gen, excess)
    sandwich_ok = verified == 50 and worst_sym <= 1e-12 and worst_gen <= 1e-12
    scal = scaling_check(lambda y: np.exp(-np.asarray(y) ** 2), 0.5, params, member=random_member(rng, params))
    xs = grid(64)
    f0 = make_interface(1 + 0.2 * np.cos(xs) + 0.05 * np.sin(3 * xs), TWO_PI, 2.0)
    traj = evolve(f0, DIFF, 0.4, cadence=0.01, cfg=FlowConfig(solver=SolverConfig(ny=32)))
    A = float(np.abs(f0.samples).max() + seminorm(f0, "lipschitz").value)
    dq = difference_quotient_check([(s.t, s.f.samples) for s in traj.snapshots], [1, 2, 4], params, A, TWO_PI)
    frac = min(dq.min_frac_sub, dq.min_frac_super)
    ok = sandwich_ok and scal.passed and dq.passed
    record(10, ok, f"sandwich on {verified}/50 verified members (worst excess {max(worst_sym, worst_gen):.2e}), "
                   f"scaling error {max(scal.max_error.values()):.2e} <= 1e-4, "
                   f"difference-quotient residuals satisfied on {frac:.1%} >= 95% of nodes")


def test_11_regularity():
    P, nx = TWO_PI, 64
    f0 = make_interface(dini_initial_data(grid(nx), P, 1.0, 0.3, 1.5), P, 2.0)
    klass = ClassKParams(0.2, 2.0, 1.0, DiniModulus("log", power=1.5))
    cfg = FlowConfig(solver=SolverConfig(ny=32), klass=klass, gammas=(0.1, 0.25, 0.5))
    T = 0.4
    traj = evolve(f0, DIFF, T, cfg=cfg)
    reg = traj.report["regularity"]["0.1"]
    late = np.array(reg["holder_late_series"])
    times = np.array([d.t for d in traj.diagnostics if T / 2 - 1e-12 <= d.t <= T + 1e-12])
    slope = float(np.polyfit(times, late, 1)[0])
    ghat = reg["gamma_hat"]
    ok = bool(np.all(np.isfinite(late))) and slope <= 0 and ghat > 0
    record(11, ok, f"[f']_0.1 on [T/2, T] in [{late.min():.4f}, {late.max():.4f}], trend slope {slope:.3f} <= 0, "
                   f"gamma_hat = {ghat:.3f} > 0")


def _manufactured_error(nx):
    x = grid(nx)
    f = make_interface(1 + 0.2 * np.cos(x), TWO_PI, 2.0)
    ny = nx // 2
    p = flatten(f, "plus", ny=ny)
    X, Y = physical_coordinates(p)
    U = np.sin(X) * np.sinh(Y) + Y**2
    p = p.with_data(bottom=U[:, 0], top=U[:, -1], source=-p.thickness[:, None] * 2.0 * np.ones_like(U))
    return float(np.abs(solve_bulk(p, SolverConfig(ny=ny)).values - U).max())


def test_12_elliptic_solver():
    ratio = _manufactured_error(64) / _manufactured_error(128)
    worst = MAX_PRINCIPLE_RECORD["worst"]
    ok = 3.5 <= ratio <= 4.5 and worst <= 1e-12
    record(12, ok, f"manufactured convergence ratio {ratio:.3f} in [3.5, 4.5], "
                   f"worst maximum-principle excess over the session {worst:.1e} <= 1e-12")
