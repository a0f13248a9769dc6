import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from casimir_sta.errors import DomainError, SingularityError
from casimir_sta.moore import RecursiveMooreFunction
from casimir_sta.stress import (
    CASIMIR,
    ThermalState,
    adiabatic_energy,
    adiabaticity_parameter,
    density_grid,
    energy_curve,
    g_function,
    stress_tensor,
    thermal_F,
    total_energy,
)
from casimir_sta.trajectory import StaticTrajectory
from oracles import mp_thermal_F

F_5_1 = 10.720869083857046  # extended-precision oracle value
QSTAR_REF_T0 = 0.8526432048798168  # frozen: reference stroke, vacuum, after the motion


def test_thermal_F_golden():
    assert thermal_F(5.0, 1.0) == pytest.approx(F_5_1, rel=1e-14)
    assert thermal_F(0.0, 1.0) == 0.0
    with pytest.raises(DomainError):
        thermal_F(-1.0, 1.0)


@settings(max_examples=15, deadline=None)
@given(T=st.floats(0.01, 50.0), L0=st.floats(0.05, 20.0))
def test_thermal_F_oracle(T, L0):
    assert thermal_F(T, L0) == pytest.approx(mp_thermal_F(T, L0), rel=1e-12, abs=1e-300)


@settings(max_examples=30, deadline=None)
@given(T=st.floats(0.05, 20.0), L0=st.floats(0.1, 10.0), k=st.floats(0.25, 4.0))
def test_thermal_F_product_only(T, L0, k):
    assert thermal_F(T * k, L0 / k) == pytest.approx(thermal_F(T, L0), rel=1e-12)


def test_high_temperature_limit():
    # sum n pi/(exp(n a) - 1) -> pi^3 / (6 a^2) for a -> 0
    T = 200.0
    a = math.pi / T
    assert thermal_F(T, 1.0) == pytest.approx(math.pi**3 / (6 * a * a) - 0.5 * math.pi / a, rel=1e-3)


def test_static_energy_density():
    R = RecursiveMooreFunction(StaticTrajectory(1.0))
    th = ThermalState(0.0, 1.0)
    s = stress_tensor(R, th, 0.3, 2.0)
    assert s.Ttt == pytest.approx(CASIMIR, abs=1e-14)
    assert s.Ttx == pytest.approx(0.0, abs=1e-14)
    assert s.Txx == s.Ttt and s.Txt == s.Ttx


def test_energy_equals_density_integral(R_ref, ref):
    """Null-coordinate energy vs. direct x-integration of T_tt."""
    th = ThermalState(1.0, 1.0)
    for t in (0.4, 1.2, 2.3):
        L = ref.eval(t)
        direct = quad(lambda x: stress_tensor(R_ref, th, x, t).Ttt, 0.0, L, epsabs=1e-12, limit=200)[0]
        assert total_energy(R_ref, ref, th, t) == pytest.approx(direct, abs=1e-9)


def test_static_energy_plateaus(R_wkb):
    th = ThermalState(0.0, 1.0)
    assert total_energy(R_wkb, None, th, -1.0) == pytest.approx(CASIMIR, abs=1e-12)
    assert total_energy(R_wkb, None, th, 2.4) == pytest.approx(CASIMIR / 0.7, abs=1e-12)


def test_reference_terminal_qstar(R_ref, ref):
    th = ThermalState(0.0, 1.0)
    assert adiabaticity_parameter(R_ref, ref, th, 1.7) == pytest.approx(QSTAR_REF_T0, abs=1e-9)


def test_shortcut_qstar_returns(R_wkb):
    th = ThermalState(1.0, 1.0)
    curve = energy_curve(R_wkb, th, [-1.2, 0.3, 1.7])
    assert curve[0].Qstar == pytest.approx(1.0, abs=1e-12)
    assert abs(curve[1].Qstar - 1.0) > 1e-3
    assert curve[2].Qstar == pytest.approx(1.0, abs=1e-12)


def test_singular_adiabatic_energy(R_wkb):
    from scipy.optimize import brentq

    T_star = brentq(lambda T: thermal_F(T, 1.0) + CASIMIR, 0.1, 2.0, xtol=1e-15)
    th = ThermalState(T_star, 1.0)
    with pytest.raises(SingularityError):
        adiabaticity_parameter(R_wkb, None, th, 0.0)
    assert energy_curve(R_wkb, th, [0.0])[0].Qstar is None


def test_g_function_rejects_folded_map():
    class Folded(RecursiveMooreFunction):
        def jet(self, z, side=1):
            return (0.0, -1.0, 0.0, 0.0)

    R = Folded(StaticTrajectory(1.0))
    with pytest.raises(SingularityError):
        g_function(R, 0.0, ThermalState(0.0, 1.0))


def test_density_grid_marks_outside(R_wkb):
    grid = density_grid(R_wkb, ThermalState(0.0, 1.0), [2.0], [0.0, 0.5, 0.9])
    assert grid[-1][2] is None
    assert grid[1].Ttt == pytest.approx(CASIMIR / 0.49, abs=1e-12)
    with pytest.raises(DomainError):
        stress_tensor(R_wkb, ThermalState(0.0, 1.0), 0.9, 2.0)
    with pytest.raises(DomainError):
        adiabatic_energy(0.0, ThermalState(0.0, 1.0))
