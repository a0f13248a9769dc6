"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

from casimir_sta.errors import InvalidCycle
from casimir_sta.moore import RecursiveMooreFunction, WkbMooreFunction, extract_residual, mode_function, moore_residual
from casimir_sta.otto import (
    OttoCycleSpec,
    cycle_adiabatic,
    cycle_finite_time,
    efficiency_at_speed,
    power_decay_fit,
    speed_for_lengths,
)
from casimir_sta.sta import EffectiveTrajectory, effective_speed, effective_trajectory
from casimir_sta.stress import ThermalState, adiabaticity_parameter, stress_tensor, thermal_F
from casimir_sta.trajectory import (
    CompositeTrajectory,
    LinearSegmentTrajectory,
    SampledTrajectory,
    SmoothstepTrajectory,
    StepTrajectory,
    validate,
)
from oracles import mp_thermal_F


@pytest.fixture()
def verdict(capsys):
    def emit(label, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        assert ok, detail

    return emit


@pytest.fixture(scope="module")
def power_sweep():
    """P_sta and P_ref on tau in [0.1, 10] and at tau = 20 for (L0=1, eps=0.3, T0=1, T1=5)."""
    rows = []
    for tau in list(np.geomspace(0.1, 10.0, 13)) + [20.0]:
        sta = cycle_finite_time(OttoCycleSpec(1.0, 0.7, 1.0, 5.0, "sta", float(tau)))
        spec_ref = OttoCycleSpec(1.0, 0.7, 1.0, 5.0, "reference", float(tau))
        physical = validate(spec_ref.reference_stroke(1.0, 0.7)).physical
        ref = cycle_finite_time(spec_ref) if physical else None
        rows.append((float(tau), sta, ref))
    return rows


def test_ac1_sta_certificate(verdict):
    t0 = time.perf_counter()
    ref = SmoothstepTrajectory.from_eps(1.0, 0.3, 1.0)
    sta = extract_residual(RecursiveMooreFunction(EffectiveTrajectory(ref), check=False)).sup_deviation
    elapsed = time.perf_counter() - t0
    raw = extract_residual(ref).sup_deviation
    ok = sta < 1e-8 and raw >= 100 * sta and elapsed < 10.0
    verdict(
        "AC1 STA certificate",
        ok,
        f"sup_sta={sta:.3g} (<1e-8), sup_raw={raw:.4g} (ratio {raw / max(sta, 1e-300):.3g} >= 100), "
        f"runtime {elapsed:.2f}s (<10s)",
    )


def test_ac2_step_limit(verdict):
    L0, L1 = 1.0, 0.7
    ts = np.linspace(-L0, L1, 1000)
    closed = (2 * L0 * L1 - ts * (L0 - L1)) / (L0 + L1)
    step = StepTrajectory(L0, L1, 0.0)
    err_step = max(abs(effective_trajectory(step, t) - c) for t, c in zip(ts, closed))
    eff = EffectiveTrajectory(SmoothstepTrajectory(L0, L1, 1e-3))
    err_fast = max(abs(eff.eval(t) - c) for t, c in zip(ts, closed))
    ok = err_step < 1e-10 and err_fast < 5e-3
    verdict("AC2 step limit", ok, f"step sup err {err_step:.3g} (<1e-10), tau=1e-3 sup err {err_fast:.3g} (<5e-3)")


def test_ac3_static_plateaus(verdict):
    ref = SmoothstepTrajectory.from_eps(1.0, 0.3, 1.0)
    th = ThermalState(0.0, 1.0)
    worst = 0.0
    for R in (WkbMooreFunction(ref), RecursiveMooreFunction(EffectiveTrajectory(ref), check=False)):
        for t, target in ((-1.5, -math.pi / 24), (-1.0, -math.pi / 24), (2.4, -math.pi / (24 * 0.49)), (3.0, -math.pi / (24 * 0.49))):
            L = R.trajectory.eval(t)
            for x in np.linspace(0.0, L, 11):
                worst = max(worst, abs(stress_tensor(R, th, x, t).Ttt - target))
    verdict("AC3 static plateaus", worst < 1e-8, f"max |T_tt - plateau| = {worst:.3g} (<1e-8); -pi/24 and -pi/(24*0.49)")


def test_ac4_qstar(verdict):
    ref = SmoothstepTrajectory.from_eps(1.0, 0.3, 1.0)
    R_sta = WkbMooreFunction(ref)
    R_ref = RecursiveMooreFunction(ref)
    t_final = ref.t_end + ref.L1
    details, ok = [], True
    for T in (0.0, 1.0, 5.0):
        th = ThermalState(T, 1.0)
        q0 = adiabaticity_parameter(R_sta, None, th, R_sta.trajectory.t_start)
        mid = max(abs(adiabaticity_parameter(R_sta, None, th, t) - 1) for t in np.linspace(-0.8, 1.5, 12))
        qs = abs(adiabaticity_parameter(R_sta, None, th, t_final) - 1)
        qr = abs(adiabaticity_parameter(R_ref, ref, th, t_final) - 1)
        good = abs(q0 - 1) < 1e-6 and mid > 1e-3 and qs < 1e-6 and qr >= 10 * qs
        ok &= good
        details.append(f"T={T:g}: |Q0-1|={abs(q0 - 1):.1g}, mid dev {mid:.3g}, end sta {qs:.1g}, end ref {qr:.3g}")
    verdict("AC4 Q* return", ok, "; ".join(details))


def test_ac5_otto_identities(verdict):
    rng = np.random.default_rng(2024)
    res = cycle_finite_time(OttoCycleSpec(1.0, 0.7, 1.0, 5.0, "sta", 1.0))
    err_eta = abs(res.eta - 0.3)
    err_ad = abs(cycle_adiabatic(OttoCycleSpec(1.0, 0.7, 1.0, 5.0)).eta_ad - 0.3)
    L0 = 10 ** rng.uniform(-2, 2, 1000)
    L1 = L0 * rng.uniform(1e-6, 1.0, 1000)
    err_speed = max(abs(efficiency_at_speed(speed_for_lengths(a, b)) - (1 - b / a)) for a, b in zip(L0, L1))
    mismatches = 0
    for _ in range(400):
        L0c = rng.uniform(0.1, 10.0)
        L1c = L0c * rng.uniform(0.05, 1.0)
        T0 = rng.uniform(0.01, 10.0)
        T1 = T0 * rng.uniform(0.0, 1.0)
        expect = 1 - L1c / L0c > 1 - T1 / T0
        try:
            cycle_adiabatic(OttoCycleSpec(L0c, L1c, T0, T1))
            raised = False
        except InvalidCycle:
            raised = True
        mismatches += raised != expect
    ok = err_eta < 1e-9 and err_ad < 1e-9 and err_speed < 1e-12 and mismatches == 0
    verdict(
        "AC5 Otto identities",
        ok,
        f"|eta-0.3| from stroke energies {err_eta:.2g}, adiabatic {err_ad:.2g} (<1e-9); "
        f"efficiency_at_speed identity max err {err_speed:.2g} on 1000 pairs; Carnot detection mismatches {mismatches}/400",
    )


def test_ac6_engine(verdict, power_sweep):
    in_range = [r for r in power_sweep if r[0] <= 10.0]
    compared = [(tau, s.P, r.P) for tau, s, r in in_range if r is not None]
    skipped = [tau for tau, _, r in in_range if r is None]
    dominance = all(ps >= pr for _, ps, pr in compared)
    _, s20, r20 = power_sweep[-1]
    gap20 = (s20.P - r20.P) / s20.P
    fastest = min(compared)
    fit = power_decay_fit(1.0, 0.1, 0.0, 0.0, np.geomspace(0.25, 0.6, 8))
    ok = dominance and gap20 < 0.01 and fastest[2] < 0 and abs(fit.exponent + 4) <= 0.5
    verdict(
        "AC6 power sweep",
        ok,
        f"P_sta >= P_ref at {len(compared)} physical taus (skipped superluminal {['%.3g' % t for t in skipped]}); "
        f"gap at tau=20 {gap20:.2g} (<1%); P_ref({fastest[0]:.3g}) = {fastest[2]:.3g} (<0); "
        f"vacuum eps=0.1 fit exponent {fit.exponent:.3f} (-4 +- 0.5)",
    )


def _property_trajectories():
    ref = SmoothstepTrajectory.from_eps(1.0, 0.3, 1.0)
    ts = np.linspace(0.0, 2.0, 81)
    return {
        "smoothstep": RecursiveMooreFunction(ref),
        "effective": RecursiveMooreFunction(EffectiveTrajectory(ref), check=False),
        "wkb": WkbMooreFunction(ref),
        "linear": RecursiveMooreFunction(LinearSegmentTrajectory(1.0, 0.8, 0.0, 1.0)),
        "sampled": RecursiveMooreFunction(SampledTrajectory(tuple(ts), tuple(1.0 - 0.1 * np.sin(np.pi * ts / 2) ** 2))),
        "composite": RecursiveMooreFunction(
            CompositeTrajectory(((-math.inf, SmoothstepTrajectory(1.0, 0.8, 1.0)), (1.5, SmoothstepTrajectory(0.8, 0.6, 1.5, 2.0))))
        ),
    }


def _fd5(f, x, h):
    return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h)


def test_ac7_properties(verdict, power_sweep):
    rng = np.random.default_rng(7)
    sols = _property_trajectories()
    moore = 0.0
    dirichlet = 0.0
    deriv_rel, deriv_abs, n_rel, n_abs = 0.0, 0.0, 0, 0
    for R in sols.values():
        wall = R.trajectory
        lo, hi = wall.t_start - 2.0, wall.t_end + 4.0
        for t in rng.uniform(lo, hi, 1000):
            moore = max(moore, abs(moore_residual(R, t)))
        for t in rng.uniform(lo, hi, 50):
            L = wall.eval(t)
            n = int(rng.integers(1, 8))
            dirichlet = max(dirichlet, abs(mode_function(R, n, 0.0, t)), abs(mode_function(R, n, L, t)))
        kinks = R.kinks(lo - 2.0, hi + 2.0)
        count = 0
        while count < 100:
            z = rng.uniform(lo, hi)
            if kinks and min(abs(z - k) for k in kinks) < 1e-2:
                continue
            count += 1
            jet = R.jet(z)
            for k in range(3):
                exact = jet[k + 1]
                fd = _fd5(lambda s: R.jet(s)[k], z, 2.5e-4)
                if abs(exact) > 1e-9:
                    deriv_rel = max(deriv_rel, abs(fd - exact) / abs(exact))
                    n_rel += 1
                else:
                    deriv_abs = max(deriv_abs, abs(fd - exact))
                    n_abs += 1
    speed = 0.0
    for _ in range(1000):
        if rng.random() < 0.1:
            traj = StepTrajectory(1.0, rng.uniform(0.05, 1.0))
            t = rng.uniform(-1.5, 1.5)
        else:
            tau = 10 ** rng.uniform(-3, 1)
            traj = SmoothstepTrajectory.from_eps(1.0, rng.uniform(0.0, 0.95), tau)
            t = rng.uniform(-1.5, tau + 1.5)
        speed = max(speed, abs(effective_speed(traj, t)))
    strokes = [s for _, sta, ref in power_sweep for res in (sta, ref) if res is not None for s in res.strokes]
    min_fric = min(s.w_fric for s in strokes)
    ok = moore < 1e-10 and speed <= 1 and dirichlet < 1e-10 and deriv_rel < 1e-5 and deriv_abs < 1e-9 and min_fric >= -1e-12
    verdict(
        "AC7 properties",
        ok,
        f"Moore residual {moore:.2g} (<1e-10, {len(sols)}x1000 times); max |v_eff| {speed:.4f} (<=1, 1000 draws); "
        f"Dirichlet {dirichlet:.2g} (<1e-10); derivative rel err {deriv_rel:.2g} (<1e-5, {n_rel} checks), "
        f"abs err where exact derivative vanishes {deriv_abs:.2g} ({n_abs} checks); "
        f"min friction {min_fric:.2g} over {len(strokes)} strokes (>= -1e-12 roundoff)",
    )


def test_ac8_thermal_factor(verdict):
    rng = np.random.default_rng(8)
    T = 10 ** rng.uniform(-1.5, 2, 20)
    L0 = 10 ** rng.uniform(-1, 1.5, 20)
    rel = max(abs(thermal_F(a, b) - mp_thermal_F(a, b)) / mp_thermal_F(a, b) for a, b in zip(T, L0))
    k = 10 ** rng.uniform(-1, 1, 20)
    prod = max(abs(thermal_F(a * c, b / c) - thermal_F(a, b)) / thermal_F(a, b) for a, b, c in zip(T, L0, k))
    ok = rel < 1e-12 and prod < 1e-12
    verdict("AC8 thermal factor", ok, f"max rel err vs mpmath {rel:.2g} (<1e-12, 20 points); T*L0 invariance {prod:.2g}")
