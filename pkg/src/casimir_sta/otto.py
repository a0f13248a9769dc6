"""Quantum Otto cycles with the cavity field as working medium.

Cycle used throughout (thermalisation instantaneous, no work exchanged there):

1. field thermalised with the cold bath at the long length L0;
2. compression L0 -> L1 (the stroke feeding the hot contact, ``AB``);
3. thermalisation with the hot bath at L1 (heat Q absorbed);
4. expansion L1 -> L0 (the stroke feeding the cold contact, ``CD``).

Per-stroke work ``w`` is the field's energy change (positive when energy is
delivered to the field). The engine output is ``W = -(w_AB + w_CD)``, so that
``W = W_ad - w_fric_AB - w_fric_CD`` and ``Q = Q_ad - w_fric_AB``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from .errors import DomainError, FitError, InvalidCycle
from .moore import MooreFunction, RecursiveMooreFunction, WkbMooreFunction
from .sta import EffectiveTrajectory
from .stress import ThermalState, total_energy
from .trajectory import SmoothstepTrajectory, StepTrajectory, Trajectory, validate

__all__ = [
    "OttoCycleSpec",
    "OttoCycleResult",
    "StrokeResult",
    "DecayFit",
    "adiabatic_stroke_work",
    "cycle_adiabatic",
    "cycle_finite_time",
    "power",
    "max_sta_power",
    "efficiency_at_speed",
    "speed_for_lengths",
    "carnot_efficiency",
    "power_decay_fit",
    "friction_work",
]

STROKE_KINDS = ("reference", "sta")


@dataclass(frozen=True)
class OttoCycleSpec:
    """Cycle geometry and baths.

    ``T0`` and ``T1`` may be given in either order: the larger one is the hot
    bath, coupled at the short length L1.
    """

    L0: float
    L1: float
    T0: float
    T1: float
    stroke_kind: str = "sta"
    tau: float = 1.0
    family: str = "smoothstep"
    solver: str = "recursion"

    def __post_init__(self) -> None:
        if not (self.L0 > 0 and self.L1 > 0):
            raise DomainError("cycle lengths must be positive")
        if self.L1 > self.L0:
            raise DomainError(f"need L1 <= L0, got L0={self.L0}, L1={self.L1}")
        if self.T0 < 0 or self.T1 < 0:
            raise DomainError("temperatures must be non-negative")
        if self.stroke_kind not in STROKE_KINDS:
            raise DomainError(f"stroke_kind must be one of {STROKE_KINDS}")
        if self.family not in ("smoothstep", "step"):
            raise DomainError(f"unknown trajectory family {self.family!r}")
        if self.family == "smoothstep" and not self.tau > 0:
            raise DomainError("smoothstep strokes need tau > 0")
        if self.solver not in ("recursion", "wkb"):
            raise DomainError(f"unknown solver {self.solver!r}")

    @property
    def eps(self) -> float:
        return 1.0 - self.L1 / self.L0

    @property
    def T_hot(self) -> float:
        return max(self.T0, self.T1)

    @property
    def T_cold(self) -> float:
        return min(self.T0, self.T1)

    @property
    def cold_state(self) -> ThermalState:
        return ThermalState(self.T_cold, self.L0)

    @property
    def hot_state(self) -> ThermalState:
        return ThermalState(self.T_hot, self.L1)

    @property
    def stroke_duration(self) -> float:
        return 0.0 if self.family == "step" else self.tau

    @property
    def cycle_time(self) -> float:
        """Full cycle 2(L0 + L1 + tau): two shortcut strokes, instant thermalisation."""
        return 2.0 * (self.L0 + self.L1 + self.stroke_duration)

    def reference_stroke(self, L_from: float, L_to: float) -> Trajectory:
        if self.family == "step":
            return StepTrajectory(L_from, L_to)
        return SmoothstepTrajectory(L_from, L_to, self.tau)

    def metadata(self) -> dict:
        return {
            "L0": self.L0,
            "L1": self.L1,
            "T0": self.T0,
            "T1": self.T1,
            "T_hot": self.T_hot,
            "T_cold": self.T_cold,
            "hot_bath_length": self.L1,
            "cold_bath_length": self.L0,
            "stroke_kind": self.stroke_kind,
            "tau": self.tau,
            "family": self.family,
            "solver": self.solver,
            "power_normalisation": "W / (2 (L0 + L1 + tau)) for both stroke kinds",
        }


@dataclass(frozen=True)
class StrokeResult:
    name: str
    L_from: float
    L_to: float
    E_before: float
    E_after: float
    w_ad: float

    @property
    def w(self) -> float:
        return self.E_after - self.E_before

    @property
    def w_fric(self) -> float:
        return self.w - self.w_ad


@dataclass(frozen=True)
class OttoCycleResult:
    W_ad: float
    W: float
    Q_ad: float
    Q: float
    w_fric_AB: float
    w_fric_CD: float
    eta: float
    eta_ad: float
    P: float
    cycle_time: float
    strokes: tuple[StrokeResult, ...] = ()
    metadata: dict = field(default_factory=dict)


def carnot_efficiency(T0: float, T1: float) -> float:
    """1 - T_cold/T_hot with the hot bath being the larger temperature."""
    hot, cold = max(T0, T1), min(T0, T1)
    if hot == 0:
        return 0.0
    return 1.0 - cold / hot


def adiabatic_stroke_work(L_from: float, L_to: float, th: ThermalState) -> float:
    """Energy change of the field along an infinitely slow stroke at frozen occupation."""
    if not (L_from > 0 and L_to > 0):
        raise DomainError("lengths must be positive")
    return th.energy_coefficient * (1.0 / L_to - 1.0 / L_from)


def _check_carnot(spec: OttoCycleSpec) -> None:
    eta_otto = 1.0 - spec.L1 / spec.L0
    eta_c = carnot_efficiency(spec.T0, spec.T1)
    if eta_otto > eta_c:
        raise InvalidCycle(
            f"Otto efficiency 1 - L1/L0 = {eta_otto:.6g} exceeds Carnot bound {eta_c:.6g}"
        )


def cycle_adiabatic(spec: OttoCycleSpec, check_carnot: bool = True) -> OttoCycleResult:
    """Cycle with infinitely slow (or shortcut) strokes: no friction."""
    if check_carnot:
        _check_carnot(spec)
    cold, hot = spec.cold_state, spec.hot_state
    w_ab = adiabatic_stroke_work(spec.L0, spec.L1, cold)
    w_cd = adiabatic_stroke_work(spec.L1, spec.L0, hot)
    W_ad = -(w_ab + w_cd)
    Q_ad = (hot.energy_coefficient - cold.energy_coefficient) / spec.L1
    eta_ad = W_ad / Q_ad if Q_ad != 0 else math.nan
    return OttoCycleResult(
        W_ad=W_ad,
        W=W_ad,
        Q_ad=Q_ad,
        Q=Q_ad,
        w_fric_AB=0.0,
        w_fric_CD=0.0,
        eta=eta_ad,
        eta_ad=eta_ad,
        P=W_ad / spec.cycle_time,
        cycle_time=spec.cycle_time,
        metadata=spec.metadata(),
    )


def _stroke_moore(spec: OttoCycleSpec, ref: Trajectory) -> MooreFunction:
    if spec.stroke_kind == "reference":
        return RecursiveMooreFunction(ref)
    if spec.solver == "wkb":
        return WkbMooreFunction(ref)
    wall = EffectiveTrajectory(ref)
    # the effective wall is subluminal by construction; skip the costly scan
    return RecursiveMooreFunction(wall, check=False)


def _run_stroke(
    spec: OttoCycleSpec, name: str, L_from: float, L_to: float, th: ThermalState, epsabs: float
) -> StrokeResult:
    ref = spec.reference_stroke(L_from, L_to)
    R = _stroke_moore(spec, ref)
    wall = R.trajectory
    E_before = total_energy(R, wall, th, wall.t_start, epsabs=epsabs)
    # mirror at rest from t_end on: the energy is conserved afterwards
    E_after = total_energy(R, wall, th, wall.t_end, epsabs=epsabs)
    return StrokeResult(name, L_from, L_to, E_before, E_after, adiabatic_stroke_work(L_from, L_to, th))


def cycle_finite_time(
    spec: OttoCycleSpec, check_carnot: bool = True, epsabs: float = 1e-12
) -> OttoCycleResult:
    """Cycle whose work strokes are solved exactly with the Moore recursion.

    Raises:
        DomainError: if a reference stroke is superluminal (Moore recursion undefined).
        InvalidCycle: if the geometry beats the Carnot bound.
    """
    if check_carnot:
        _check_carnot(spec)
    if spec.stroke_kind == "reference":
        if spec.family == "step":
            raise DomainError("a step stroke cannot be driven directly; use stroke_kind='sta'")
        report = validate(spec.reference_stroke(spec.L0, spec.L1))
        if not report.physical:
            raise DomainError(f"reference stroke is {report}")
    ad = cycle_adiabatic(spec, check_carnot=False)
    cold, hot = spec.cold_state, spec.hot_state
    ab = _run_stroke(spec, "AB", spec.L0, spec.L1, cold, epsabs)
    cd = _run_stroke(spec, "CD", spec.L1, spec.L0, hot, epsabs)
    W = -(ab.w + cd.w)
    Q = hot.energy_coefficient / spec.L1 - ab.E_after
    return OttoCycleResult(
        W_ad=ad.W_ad,
        W=W,
        Q_ad=ad.Q_ad,
        Q=Q,
        w_fric_AB=ab.w_fric,
        w_fric_CD=cd.w_fric,
        eta=W / Q if Q != 0 else math.nan,
        eta_ad=ad.eta_ad,
        P=W / spec.cycle_time,
        cycle_time=spec.cycle_time,
        strokes=(ab, cd),
        metadata=spec.metadata(),
    )


def max_sta_power(spec: OttoCycleSpec) -> float:
    """Upper bound W_ad / (2 (L0 + L1)) reached by shortcut strokes as tau -> 0."""
    return cycle_adiabatic(spec, check_carnot=False).W_ad / (2.0 * (spec.L0 + spec.L1))


def power(result: OttoCycleResult, spec: OttoCycleSpec, tol: float = 1e-9) -> float:
    """P = W / cycle_time; for shortcut cycles also checks the speed-limit bound."""
    if not result.cycle_time > 0:
        raise DomainError("cycle time must be positive")
    P = result.W / result.cycle_time
    if spec.stroke_kind == "sta":
        bound = max_sta_power(spec)
        if P > bound + tol * max(1.0, abs(bound)):
            raise InvalidCycle(f"shortcut power {P} above bound {bound}")
    return P


def speed_for_lengths(L0: float, L1: float) -> float:
    """Constant wall speed (L0 - L1)/(L0 + L1) of the fastest shortcut."""
    return (L0 - L1) / (L0 + L1)


def efficiency_at_speed(v: float) -> float:
    """Otto efficiency 1 - (1 - v)/(1 + v) reachable with wall speed at most v."""
    if not 0.0 <= v < 1.0:
        raise DomainError(f"speed must satisfy 0 <= v < 1, got {v}")
    return 2.0 * v / (1.0 + v)


@dataclass(frozen=True)
class DecayFit:
    applicable: bool
    exponent: float
    stderr: float
    ci95: tuple[float, float]
    taus: np.ndarray
    friction: np.ndarray

    def __str__(self) -> str:
        if not self.applicable:
            return "friction indistinguishable from zero: decay fit not applicable"
        lo, hi = self.ci95
        return f"friction ~ tau^{self.exponent:.3f} (95% CI [{lo:.3f}, {hi:.3f}], {len(self.taus)} points)"


def friction_work(spec: OttoCycleSpec) -> float:
    """Total friction W_ad - W of one finite-time cycle."""
    res = cycle_finite_time(spec, check_carnot=False)
    return res.W_ad - res.W


def power_decay_fit(
    L0: float,
    eps: float,
    T0: float,
    T1: float,
    taus: Sequence[float],
    stroke_kind: str = "reference",
    noise_floor: float = 1e-9,
) -> DecayFit:
    """Log-log slope of the cycle friction work against tau.

    Taus whose reference stroke is superluminal, and frictions under
    ``noise_floor * |W_ad|``, are dropped.

    Raises:
        FitError: fewer than four usable points for reference strokes.
    """
    L1 = L0 * (1.0 - eps)
    used_t, used_f = [], []
    for tau in taus:
        spec = OttoCycleSpec(L0, L1, T0, T1, stroke_kind, float(tau))
        if stroke_kind == "reference" and not validate(spec.reference_stroke(L0, L1)).physical:
            continue
        f = friction_work(spec)
        floor = noise_floor * max(1.0, abs(cycle_adiabatic(spec, check_carnot=False).W_ad))
        if f > floor:
            used_t.append(float(tau))
            used_f.append(f)
    taus_a, fr_a = np.array(used_t), np.array(used_f)
    if stroke_kind == "sta" and len(used_t) < 4:
        return DecayFit(False, math.nan, math.nan, (math.nan, math.nan), taus_a, fr_a)
    if len(used_t) < 4:
        raise FitError(f"only {len(used_t)} usable points for the decay fit")
    lr = stats.linregress(np.log(taus_a), np.log(fr_a))
    half = stats.t.ppf(0.975, len(used_t) - 2) * lr.stderr
    return DecayFit(True, float(lr.slope), float(lr.stderr), (lr.slope - half, lr.slope + half), taus_a, fr_a)
