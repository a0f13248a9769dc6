"""Renormalised stress tensor and energies of the cavity field at finite temperature.

Everything is built from the null-ray function

    G(z) = -(1/24 pi) [R'''/R' - 3/2 (R''/R')^2] + (R')^2/2 (-pi/24 + F)

with ``T_tt = T_xx = G(t-x) + G(t+x)`` and ``T_tx = T_xt = G(t+x) - G(t-x)``.
F carries the thermal occupation fixed when the field was last thermalised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, QuadratureError, SingularityError
from .moore import MooreFunction
from .trajectory import Trajectory

__all__ = [
    "CASIMIR",
    "ThermalState",
    "StressSample",
    "EnergySample",
    "thermal_F",
    "g_function",
    "stress_tensor",
    "total_energy",
    "adiabatic_energy",
    "adiabaticity_parameter",
    "density_grid",
    "energy_curve",
]

#: static Casimir coefficient of E = CASIMIR / L
CASIMIR = -math.pi / 24.0
_TAIL = 50.0
_CHUNK = 1 << 20


def thermal_F(T: float, L0: float) -> float:
    """Thermal factor ``sum_{n>=1} n pi / (exp(n pi / (L0 T)) - 1)``.

    Depends on T and L0 only through their product. The sum is cut once
    ``n pi/(L0 T)`` exceeds 50, where the remaining tail is below 1e-20 of the
    leading term.
    """
    if T < 0 or not L0 > 0:
        raise DomainError(f"need T >= 0 and L0 > 0, got T={T}, L0={L0}")
    if T == 0:
        return 0.0
    a = math.pi / (L0 * T)
    n_max = int(math.ceil(_TAIL / a)) + 8
    parts = []
    for start in range(1, n_max + 1, _CHUNK):
        n = np.arange(start, min(start + _CHUNK, n_max + 1), dtype=float)
        with np.errstate(over="ignore"):  # exp overflow just means a zero term
            parts.extend((n * math.pi / np.expm1(n * a)).tolist())
    return math.fsum(parts)


@dataclass(frozen=True)
class ThermalState:
    """Occupation frozen at thermalisation: temperature ``T`` at cavity length ``L0_therm``."""

    T: float
    L0_therm: float
    F_value: float = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "F_value", thermal_F(self.T, self.L0_therm))

    @property
    def energy_coefficient(self) -> float:
        """``-pi/24 + F``: the static energy is this over L."""
        return CASIMIR + self.F_value


@dataclass(frozen=True)
class StressSample:
    t: float
    x: float
    Ttt: float
    Ttx: float

    @property
    def Txx(self) -> float:
        return self.Ttt

    @property
    def Txt(self) -> float:
        return self.Ttx


@dataclass(frozen=True)
class EnergySample:
    t: float
    E: float
    E_ad: float
    Qstar: float | None


def g_function(R: MooreFunction, z: float, th: ThermalState, side: int = 1) -> float:
    """G(z) for Moore function R in thermal state ``th``."""
    _, R1, R2, R3 = R.jet(z, side)
    if not R1 > 0:
        raise SingularityError(f"R'({z}) = {R1} is not positive")
    a = R2 / R1
    return -(R3 / R1 - 1.5 * a * a) / (24.0 * math.pi) + 0.5 * R1 * R1 * th.energy_coefficient


def stress_tensor(R: MooreFunction, th: ThermalState, x: float, t: float, tol: float = 1e-12) -> StressSample:
    """(T_tt, T_tx) at (t, x) inside the cavity."""
    L = R.trajectory.eval(t)
    if x < -tol or x > L + tol:
        raise DomainError(f"x = {x} outside the cavity [0, {L}] at t = {t}")
    gm = g_function(R, t - x, th)
    gp = g_function(R, t + x, th)
    return StressSample(t, x, gm + gp, gp - gm)


def total_energy(
    R: MooreFunction,
    traj: Trajectory | None,
    th: ThermalState,
    t: float,
    epsabs: float = 1e-12,
    epsrel: float = 1e-12,
) -> float:
    """E(t) = integral of T_tt over the cavity = integral of G over [t - L, t + L].

    The null interval is split at the kinks of R''' so each panel is smooth.
    """
    wall = traj if traj is not None else R.trajectory
    L = wall.eval(t)
    lo, hi = t - L, t + L
    pts = R.kinks(lo, hi)
    res = quad(
        lambda z: g_function(R, z, th),
        lo,
        hi,
        points=pts or None,
        epsabs=epsabs,
        epsrel=epsrel,
        limit=400,
        full_output=1,
    )
    value, err = res[0], res[1]
    if len(res) == 4 and err > max(1e3 * epsabs, 1e-8):
        raise QuadratureError(f"energy quadrature at t={t}: {res[3]} (error estimate {err:.3g})")
    return value


def adiabatic_energy(L: float, th: ThermalState) -> float:
    """``(-pi/24 + F)/L`` with F frozen at the thermalisation length."""
    if not L > 0:
        raise DomainError(f"length must be positive, got {L}")
    return th.energy_coefficient / L


def _singular(th: ThermalState, rel: float) -> bool:
    return abs(th.energy_coefficient) <= rel * max(-CASIMIR, th.F_value)


def adiabaticity_parameter(
    R: MooreFunction,
    traj: Trajectory | None,
    th: ThermalState,
    t: float,
    singular_band: float = 1e-9,
    epsabs: float = 1e-12,
) -> float:
    """Q*(t) = E(t) / E_ad(L(t)).

    Raises:
        SingularityError: when the Casimir and thermal parts of E_ad cancel to
            within ``singular_band`` (relative).
    """
    if _singular(th, singular_band):
        raise SingularityError(f"adiabatic energy vanishes for T*L0 = {th.T * th.L0_therm}")
    wall = traj if traj is not None else R.trajectory
    return total_energy(R, wall, th, t, epsabs=epsabs) / adiabatic_energy(wall.eval(t), th)


def density_grid(
    R: MooreFunction, th: ThermalState, ts: Iterable[float], xs: Iterable[float]
) -> list[StressSample | tuple[float, float, None, None]]:
    """Stress samples on a rectangular (t, x) grid; cells outside the cavity carry ``None``."""
    xs = list(xs)
    out = []
    for t in ts:
        L = R.trajectory.eval(t)
        for x in xs:
            if -1e-12 <= x <= L + 1e-12:
                out.append(stress_tensor(R, th, min(max(x, 0.0), L), t))
            else:
                out.append((float(t), float(x), None, None))
    return out


def energy_curve(
    R: MooreFunction,
    th: ThermalState,
    ts: Iterable[float],
    traj: Trajectory | None = None,
    singular_band: float = 1e-9,
    epsabs: float = 1e-12,
) -> list[EnergySample]:
    """E(t), E_ad(t) and Q*(t) along a time grid; Q* is ``None`` where ill-conditioned."""
    wall = traj if traj is not None else R.trajectory
    out = []
    for t in ts:
        E = total_energy(R, wall, th, t, epsabs=epsabs)
        E_ad = adiabatic_energy(wall.eval(t), th)
        q = None if _singular(th, singular_band) else E / E_ad
        out.append(EnergySample(float(t), E, E_ad, q))
    return out
