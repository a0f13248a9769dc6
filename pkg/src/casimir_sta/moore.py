"""Moore functions R(z) for a cavity with a moving right wall.

R maps the null coordinates t +- x so that both walls are at rest:
``R(t + L(t)) - R(t - L(t)) = 2``. With the IN normalisation ``R(z) = z/L0``
for ``z <= t_start + L0`` the equation fixes R everywhere by following null
rays back to the static past: if ``t + L(t) = z`` then ``R(z) = 2 + R(t - L(t))``.
Derivatives are carried along the same chain.
"""

from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import BracketError, ConvergenceError, DomainError
from .sta import EffectiveTrajectory, WkbPhase
from .trajectory import Trajectory, validate

__all__ = [
    "DEFAULT_TOL_MOORE",
    "MooreFunction",
    "RecursiveMooreFunction",
    "WkbMooreFunction",
    "Residual",
    "ray_advance",
    "ray_retreat",
    "solve_in",
    "derivatives",
    "extract_residual",
    "mode_function",
    "moore_residual",
]

DEFAULT_TOL_MOORE = 1e-10
_XTOL = 1e-13
_RTOL = 4 * np.finfo(float).eps
_MAXITER = 200


def _bracketed_root(f: Callable[[float], float], a: float, b: float) -> float:
    """Root of an increasing function; widens [a, b] until it straddles zero."""
    width = max(b - a, 1e-3)
    for _ in range(64):
        if f(a) <= 0.0:
            break
        a -= width
        width *= 2.0
    else:
        raise BracketError("could not bracket null-ray foot from below")
    width = max(b - a, 1e-3)
    for _ in range(64):
        if f(b) >= 0.0:
            break
        b += width
        width *= 2.0
    else:
        raise BracketError("could not bracket null-ray foot from above")
    if a == b:
        return a
    try:
        return brentq(f, a, b, xtol=_XTOL, rtol=_RTOL, maxiter=_MAXITER)
    except RuntimeError as exc:
        raise ConvergenceError(str(exc)) from exc


def ray_advance(traj: Trajectory, z_minus: float) -> tuple[float, float]:
    """Follow a right-moving ray from null coordinate ``z_minus`` to the wall.

    Returns the bounce time t with ``t - L(t) = z_minus`` and the outgoing
    coordinate ``z_plus = t + L(t)``.
    """
    lo, hi = traj.length_bounds
    t = _bracketed_root(lambda s: s - traj.eval(s) - z_minus, z_minus + lo, z_minus + hi)
    return t, t + traj.eval(t)


def ray_retreat(traj: Trajectory, z_plus: float) -> tuple[float, float]:
    """Inverse of :func:`ray_advance`: the bounce time and incoming coordinate for ``z_plus``."""
    lo, hi = traj.length_bounds
    t = _bracketed_root(lambda s: s + traj.eval(s) - z_plus, z_plus - hi, z_plus - lo)
    return t, t - traj.eval(t)


class MooreFunction:
    """Common interface: value and derivatives of R, plus the wall it lives in."""

    source: str
    trajectory: Trajectory

    @property
    def in_length(self) -> float:
        return self.trajectory.L0

    @property
    def out_length(self) -> float:
        return self.trajectory.L1

    def jet(self, z: float, side: int = 1) -> tuple[float, float, float, float]:
        """(R, R', R'', R''') at z."""
        raise NotImplementedError

    def value(self, z: float) -> float:
        return self.jet(z)[0]

    __call__ = value

    def derivatives(self, z: float, order: int = 3, side: int = 1) -> tuple[float, ...]:
        if not 1 <= order <= 3:
            raise DomainError(f"order must be 1, 2 or 3, got {order}")
        return self.jet(z, side)[1 : order + 1]

    def kinks(self, lo: float, hi: float) -> list[float]:
        """Null coordinates in (lo, hi) where R''' may jump."""
        return []


class RecursiveMooreFunction(MooreFunction):
    """IN Moore function of an arbitrary physical trajectory, by characteristic recursion.

    Each step back along a ray contributes the bounce-map factors
    ``u' = (1 - L')/(1 + L')`` and its z-derivatives; the chain rule then
    rebuilds R', R'', R''' on the way forward. Results are memoised per z in
    a bounded LRU table, which is safe under concurrent reads.
    """

    source = "recursion"

    def __init__(self, trajectory: Trajectory, check: bool = True, cache_size: int = 1 << 16):
        if check:
            report = validate(trajectory)
            if not report.physical:
                raise DomainError(f"cannot solve Moore equation for {report}")
        self.trajectory = trajectory
        self._z_in = trajectory.t_start + trajectory.L0
        self._cached = functools.lru_cache(maxsize=cache_size)(self._compute)

    def _compute(self, z: float, side: int) -> tuple[float, float, float, float]:
        traj = self.trajectory
        L0 = traj.L0
        factors = []
        while z > self._z_in:
            t, z = ray_retreat(traj, z)
            _, p, q, s = traj.derivs(t, side)
            w = 1.0 + p
            factors.append(((1.0 - p) / w, -2.0 * q / w**3, -2.0 * s / w**4 + 6.0 * q * q / w**5))
        R, R1, R2, R3 = z / L0, 1.0 / L0, 0.0, 0.0
        for u1, u2, u3 in reversed(factors):
            R, R1, R2, R3 = (
                R + 2.0,
                R1 * u1,
                R2 * u1 * u1 + R1 * u2,
                R3 * u1**3 + 3.0 * R2 * u1 * u2 + R1 * u3,
            )
        return R, R1, R2, R3

    def jet(self, z: float, side: int = 1) -> tuple[float, float, float, float]:
        return self._cached(float(z), 1 if side >= 0 else -1)

    def bounce_depth(self, z: float) -> int:
        n = 0
        while z > self._z_in:
            _, z = ray_retreat(self.trajectory, z)
            n += 1
        return n

    def kinks(self, lo: float, hi: float) -> list[float]:
        traj = self.trajectory
        out = []
        seeds = [b + traj.eval(b) for b in traj.breakpoints]
        seeds.append(self._z_in)
        for z in set(seeds):
            # forward images of a junction under the bounce map
            while z < hi:
                if z > lo:
                    out.append(z)
                _, z = ray_advance(traj, z)
        return sorted(set(out))


class WkbMooreFunction(MooreFunction):
    """The adiabatic Moore function ``R(z) = integral_0^z dt/L_ref(t)``.

    It is an exact solution of the Moore equation on the effective wall of
    ``reference``, which is therefore the default ``trajectory``.
    """

    source = "analytic_wkb"

    def __init__(self, reference: Trajectory, wall: Trajectory | None = None):
        self.reference = reference
        self.phase = WkbPhase(reference)
        self.trajectory = wall if wall is not None else EffectiveTrajectory(reference, self.phase)

    def jet(self, z: float, side: int = 1) -> tuple[float, float, float, float]:
        return self.phase.derivs(float(z), side)

    def kinks(self, lo: float, hi: float) -> list[float]:
        return sorted(b for b in set(self.reference.breakpoints) if lo < b < hi)


def solve_in(traj: Trajectory, z: float) -> float:
    """R_IN(z) for ``traj`` by recursion along null rays."""
    return RecursiveMooreFunction(traj).value(z)


def derivatives(R: MooreFunction, z: float, order: int = 3) -> tuple[float, ...]:
    """(R', ..., R^(order)) at z."""
    return R.derivatives(z, order)


def moore_residual(R: MooreFunction, t: float) -> float:
    """``R(t + L(t)) - R(t - L(t)) - 2`` on the wall of R."""
    L = R.trajectory.eval(t)
    return R.value(t + L) - R.value(t - L) - 2.0


@dataclass(frozen=True)
class Residual:
    """Non-constant part of R_IN(z) - z/L1 over one OUT period.

    ``sup_deviation`` near zero means IN and OUT modes coincide: no particles
    were created by the motion.
    """

    period: float
    z: np.ndarray
    r: np.ndarray
    mean: float
    sup_deviation: float
    l2_deviation: float
    periodicity_error: float


def extract_residual(
    traj: Trajectory | MooreFunction, n_samples: int = 64, check_period: bool = True
) -> Residual:
    """Sample ``R_IN(z) - z/L1`` on ``[t_end + L1, t_end + 3 L1)``.

    Accepts a trajectory (solved by recursion) or an existing Moore function.
    The additive constant of R is unphysical, so the mean is removed.
    """
    R = traj if isinstance(traj, MooreFunction) else RecursiveMooreFunction(traj)
    wall = R.trajectory
    L1 = wall.L1
    period = 2.0 * L1
    z = wall.t_end + L1 + period * np.arange(n_samples) / n_samples
    d = np.array([R.value(zi) - zi / L1 for zi in z])
    mean = float(np.mean(d))
    r = d - mean
    per_err = 0.0
    if check_period:
        d2 = np.array([R.value(zi + period) - (zi + period) / L1 for zi in z[:: max(1, n_samples // 8)]])
        per_err = float(np.max(np.abs(d2 - d[:: max(1, n_samples // 8)])))
    return Residual(
        period=period,
        z=z,
        r=r,
        mean=mean,
        sup_deviation=float(np.max(np.abs(r))),
        l2_deviation=float(np.sqrt(np.mean(r * r))),
        periodicity_error=per_err,
    )


def mode_function(R: MooreFunction, n: int, x: float, t: float, tol: float = 1e-12) -> complex:
    """Field mode ``(exp(-i n pi R(t+x)) - exp(-i n pi R(t-x))) / sqrt(4 pi n)``.

    Raises:
        DomainError: if x lies outside [0, L(t)] (up to ``tol``) or n < 1.
    """
    if n < 1 or int(n) != n:
        raise DomainError(f"mode index must be a positive integer, got {n}")
    L = R.trajectory.eval(t)
    if x < -tol or x > L + tol:
        raise DomainError(f"x = {x} outside the cavity [0, {L}] at t = {t}")
    k = n * math.pi
    return (cmath.exp(-1j * k * R.value(t + x)) - cmath.exp(-1j * k * R.value(t - x))) / math.sqrt(
        4.0 * math.pi * n
    )
