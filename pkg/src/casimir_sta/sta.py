"""Shortcuts to adiabaticity for the cavity field.

The WKB Moore function of a reference wall ``L_ref`` is the phase
``phase(z) = integral_0^z dt / L_ref(t)``. The wall on which those WKB modes
obey the Dirichlet condition exactly, ``L_eff``, solves

    phase(t + L_eff(t)) - phase(t - L_eff(t)) = 2

pointwise in t. Driving the mirror along ``L_eff`` reproduces the adiabatic
outcome of ``L_ref`` in finite time.
"""

from __future__ import annotations

import bisect
import cmath
import math
from functools import cached_property
from typing import Callable, NamedTuple

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy.optimize import brentq

from .errors import BracketError, ConvergenceError, DomainError, QuadratureError
from .trajectory import Trajectory

__all__ = [
    "WkbPhase",
    "EffectiveTrajectory",
    "EffectiveFrequency",
    "wkb_phase",
    "effective_trajectory",
    "effective_trajectory_step",
    "effective_speed",
    "effective_frequency",
]

_PANEL_DEGREE = 40
_PANEL_TAIL_TOL = 2e-16
_MAX_PANEL_DEPTH = 40
_XTOL = 1e-15
_RTOL = 4 * np.finfo(float).eps
_MAXITER = 200


class WkbPhase:
    """Cumulative phase of a reference trajectory with its derivatives.

    ``1/L`` is represented on each smooth piece by Chebyshev panels, refined
    until the trailing coefficients drop below double precision; the panels'
    antiderivatives are then cached. Outside ``[t_start, t_end]`` the phase is
    affine. The base point is fixed by ``phase(0) = 0``.
    """

    def __init__(self, reference: Trajectory):
        self.reference = reference
        ref = reference
        self._L0 = ref.L0
        self._L1 = ref.L1
        knots = sorted(set(ref.breakpoints))
        self._lo = knots[0] if knots else 0.0
        self._hi = knots[-1] if knots else 0.0
        self._edges: list[float] = []
        self._panels: list[tuple[float, float, np.ndarray, float]] = []
        total = 0.0
        for a, b in zip(knots[:-1], knots[1:]):
            if b <= a:
                continue
            for pa, pb, coef in self._build_panels(a, b, 0):
                self._edges.append(pa)
                self._panels.append((pa, pb, coef, total))
                total += float(C.chebval(1.0, coef))
        self._span_integral = total
        self._offset = 0.0
        self._offset = self.value(0.0)

    def _inv_length(self, a: float, b: float) -> Callable[[np.ndarray], np.ndarray]:
        ref = self.reference

        def f(x):
            # interpolation nodes are interior to [a, b]: no junction ambiguity
            return np.array([1.0 / ref.derivs(float(t))[0] for t in np.atleast_1d(x)])

        return f

    def _build_panels(self, a: float, b: float, depth: int):
        f = self._inv_length(a, b)
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        coef = C.chebinterpolate(lambda x: f(mid + half * x), _PANEL_DEGREE)
        scale = np.max(np.abs(coef))
        if np.max(np.abs(coef[-4:])) <= _PANEL_TAIL_TOL * scale * _PANEL_DEGREE:
            # antiderivative in the panel variable x in [-1, 1], zero at x = -1
            integ = C.chebint(coef, lbnd=-1.0) * half
            return [(a, b, integ)]
        if depth >= _MAX_PANEL_DEPTH:
            raise QuadratureError(f"phase panels failed to converge on [{a}, {b}]")
        return self._build_panels(a, mid, depth + 1) + self._build_panels(mid, b, depth + 1)

    def _raw(self, z: float) -> float:
        """Antiderivative of 1/L with value 0 at the first breakpoint."""
        if z <= self._lo:
            return (z - self._lo) / self._L0
        if z >= self._hi:
            return self._span_integral + (z - self._hi) / self._L1
        i = bisect.bisect_right(self._edges, z) - 1
        a, b, coef, base = self._panels[i]
        x = (2.0 * z - a - b) / (b - a)
        return base + float(C.chebval(x, coef))

    def value(self, z: float) -> float:
        return self._raw(float(z)) - self._offset

    __call__ = value

    def derivs(self, z: float, side: int = 1) -> tuple[float, float, float, float]:
        """(phase, phase', phase'', phase''') at z."""
        L, dL, ddL, _ = self.reference.derivs(z, side)
        return (
            self.value(z),
            1.0 / L,
            -dL / L**2,
            (2.0 * dL * dL - L * ddL) / L**3,
        )

    def inverse(self, y: float) -> float:
        """The z with phase(z) = y."""
        lo, hi = self.reference.length_bounds
        a, b = sorted((y * lo, y * hi))
        a -= 1e-9 + 1e-9 * abs(a)
        b += 1e-9 + 1e-9 * abs(b)
        return _root(lambda z: self.value(z) - y, a, b)


def wkb_phase(traj_ref: Trajectory) -> WkbPhase:
    """Build the cumulative WKB phase of ``traj_ref``."""
    return WkbPhase(traj_ref)


def _root(f: Callable[[float], float], a: float, b: float) -> float:
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0:
        raise BracketError(f"no sign change on [{a}, {b}]")
    try:
        return brentq(f, a, b, xtol=_XTOL, rtol=_RTOL, maxiter=_MAXITER)
    except RuntimeError as exc:
        raise ConvergenceError(str(exc)) from exc


def _solve_length(phase: WkbPhase, t: float) -> float:
    """Solve phase(t + l) - phase(t - l) = 2 for l > 0."""
    lo, hi = phase.reference.length_bounds

    def g(ell: float) -> float:
        return phase.value(t + ell) - phase.value(t - ell) - 2.0

    a, b = lo * (1 - 1e-6), hi * (1 + 1e-6)
    for _ in range(60):
        if g(a) <= 0.0:
            break
        a *= 0.5
    for _ in range(60):
        if g(b) >= 0.0:
            break
        b *= 2.0
    return _root(g, a, b)


class EffectiveTrajectory(Trajectory):
    """The shortcut wall L_eff associated with a reference trajectory.

    Static at ``L0`` up to ``t_start - L0`` and at ``L1`` from ``t_end + L1`` on.
    Derivatives up to third order follow from differentiating the defining
    equation, so they only need the reference's first two derivatives.
    """

    kind = "effective"
    validation_points = 801

    def __init__(self, reference: Trajectory, phase: WkbPhase | None = None):
        self.reference = reference
        self.phase = phase if phase is not None else WkbPhase(reference)

    @property
    def L0(self) -> float:  # type: ignore[override]
        return self.reference.L0

    @property
    def L1(self) -> float:  # type: ignore[override]
        return self.reference.L1

    @property
    def t_start(self) -> float:  # type: ignore[override]
        return self.reference.t_start - self.reference.L0

    @property
    def t_end(self) -> float:  # type: ignore[override]
        return self.reference.t_end + self.reference.L1

    @property
    def length_bounds(self) -> tuple[float, float]:
        return self.reference.length_bounds

    @cached_property
    def breakpoints(self) -> tuple[float, ...]:  # type: ignore[override]
        pts = {self.t_start, self.t_end}
        ph = self.phase
        for tj in self.reference.breakpoints:
            y = ph.value(tj)
            # times at which the advanced / retarded foot crosses tj
            for other in (ph.inverse(y - 2.0), ph.inverse(y + 2.0)):
                t = 0.5 * (tj + other)
                if self.t_start < t < self.t_end:
                    pts.add(t)
        return tuple(sorted(pts))

    def eval(self, t: float) -> float:
        t = float(t)
        if t <= self.t_start:
            return self.L0
        if t >= self.t_end:
            return self.L1
        return _solve_length(self.phase, t)

    def _derivs(self, t, side):
        if t < self.t_start or (t == self.t_start and side < 0):
            return self.L0, 0.0, 0.0, 0.0
        if t > self.t_end or (t == self.t_end and side > 0):
            return self.L1, 0.0, 0.0, 0.0
        ell = _solve_length(self.phase, t)
        ref = self.reference
        La, ra1, ra2, _ = ref.derivs(t + ell, side)
        Lb, rb1, rb2, _ = ref.derivs(t - ell, side)
        S = La + Lb
        p = (La - Lb) / S
        dLa = ra1 * (1.0 + p)
        dLb = rb1 * (1.0 - p)
        N = 2.0 * (dLa * Lb - La * dLb)
        q = N / (S * S)
        ddLa = ra2 * (1.0 + p) ** 2 + ra1 * q
        ddLb = rb2 * (1.0 - p) ** 2 - rb1 * q
        dN = 2.0 * (ddLa * Lb - La * ddLb)
        dS = dLa + dLb
        s = (dN * S - 2.0 * N * dS) / S**3
        return ell, p, q, s

    def to_spec(self):
        return {"kind": "effective", "reference": self.reference.to_spec()}


def effective_trajectory(traj_ref: Trajectory, t: float, phase: WkbPhase | None = None) -> float:
    """L_eff(t) for the reference trajectory ``traj_ref``.

    Raises:
        BracketError: if no root can be bracketed (invalid reference).
        ConvergenceError: if the root finder runs out of iterations.
    """
    return EffectiveTrajectory(traj_ref, phase).eval(t)


def effective_trajectory_step(L0: float, L1: float, t: float) -> float:
    """Closed-form shortcut for an instantaneous jump L0 -> L1 at t = 0.

    Linear motion from L0 at t = -L0 to L1 at t = L1.
    """
    if not (L0 > 0 and L1 > 0):
        raise DomainError("lengths must be positive")
    if t < -L0:
        return L0
    if t > L1:
        return L1
    return (2.0 * L0 * L1 - t * (L0 - L1)) / (L0 + L1)


def effective_speed(traj_ref: Trajectory, t: float, phase: WkbPhase | None = None) -> float:
    """Signed wall speed dL_eff/dt (negative while compressing).

    Computed from the reference lengths at the two feet of the null rays,
    ``(L(t+l) - L(t-l)) / (L(t-l) + L(t+l))``, hence bounded by 1 in modulus.
    """
    ell = effective_trajectory(traj_ref, t, phase)
    La = traj_ref.eval(t + ell)
    Lb = traj_ref.eval(t - ell)
    return (La - Lb) / (La + Lb)


class EffectiveFrequency(NamedTuple):
    omega_sq: float
    imaginary: bool

    @property
    def omega(self) -> float | complex:
        if self.imaginary:
            return cmath.sqrt(self.omega_sq)
        return math.sqrt(self.omega_sq)


def effective_frequency(
    omega_ref: Callable[[float], tuple[float, float, float]], t: float
) -> EffectiveFrequency:
    """Frequency for which the adiabatic oscillator solution at ``omega_ref`` is exact.

    ``omega_ref(t)`` returns (omega, d omega/dt, d^2 omega/dt^2). A negative
    squared result is returned unchanged with ``imaginary=True``.
    """
    w, dw, ddw = omega_ref(t)
    if not w > 0:
        raise DomainError(f"reference frequency must be positive, got {w}")
    w2 = w * w + 0.5 * (ddw / w - 1.5 * (dw / w) ** 2)
    return EffectiveFrequency(w2, w2 < 0)
