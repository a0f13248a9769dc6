"""Mirror worldlines L(t) for the right wall of the cavity.

The left wall sits at x = 0 for all times. Every trajectory is static
(length ``L0``) before ``t_start`` and static (length ``L1``) after ``t_end``;
in between it follows one of the families below. All classes are immutable
after construction and evaluate on plain floats, because the Moore solver and
the shortcut solver call them from inside scalar root finders.

Derivatives are exact (analytic, or from the interpolating polynomial for
sampled data). At a junction the one-sided value is selected by ``side``:
``+1`` is the right limit (default), ``-1`` the left limit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, NamedTuple, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DiscontinuityError, TrajectorySpecError

__all__ = [
    "Trajectory",
    "StaticTrajectory",
    "SmoothstepTrajectory",
    "StepTrajectory",
    "LinearSegmentTrajectory",
    "SampledTrajectory",
    "CompositeTrajectory",
    "TrajectoryDerivs",
    "ValidationReport",
    "smoothstep",
    "smoothstep_derivs",
    "eval",
    "eval_derivs",
    "validate",
    "trajectory_from_spec",
    "load_trajectory",
]

_JUNCTION_TOL = 1e-9


def smoothstep(u: float) -> float:
    """Quintic ramp 10u^3 - 15u^4 + 6u^5 on [0, 1]."""
    return u * u * u * (10.0 + u * (-15.0 + 6.0 * u))


def smoothstep_derivs(u: float) -> tuple[float, float, float, float]:
    """Value and first three derivatives (with respect to u) of the quintic ramp."""
    u2 = u * u
    d0 = u2 * u * (10.0 + u * (-15.0 + 6.0 * u))
    d1 = 30.0 * u2 * (1.0 - u) ** 2
    d2 = 60.0 * u * (1.0 + u * (-3.0 + 2.0 * u))
    d3 = 60.0 + u * (-360.0 + 360.0 * u)
    return d0, d1, d2, d3


class TrajectoryDerivs(NamedTuple):
    """Length, speed and acceleration at one time.

    ``side`` is ``"interior"`` away from junctions, otherwise ``"left"`` or
    ``"right"`` naming which one-sided limit was taken.
    """

    L: float
    dL: float
    ddL: float
    side: str


@dataclass(frozen=True)
class ValidationReport:
    min_length: float
    max_speed: float
    continuity_class: int
    physical: bool
    reasons: tuple[str, ...] = ()

    def __str__(self) -> str:
        verdict = "physical" if self.physical else "non-physical"
        extra = f" ({'; '.join(self.reasons)})" if self.reasons else ""
        return (
            f"{verdict}: min L = {self.min_length:.6g}, max |L'| = {self.max_speed:.6g}, "
            f"C^{self.continuity_class}{extra}"
        )


class Trajectory:
    """Base class. Subclasses implement :meth:`_derivs`.

    Attributes:
        kind: family name.
        L0, L1: initial and final lengths.
        t_start, t_end: times bounding the non-static segment.
    """

    kind = "abstract"
    #: number of scan points used by :func:`validate`
    validation_points = 20001

    L0: float
    L1: float
    t_start: float
    t_end: float

    # -- to be provided by subclasses -------------------------------------
    def _derivs(self, t: float, side: int) -> tuple[float, float, float, float]:
        """Return (L, L', L'', L''') at ``t`` taking the ``side`` limit at junctions."""
        raise NotImplementedError

    @property
    def breakpoints(self) -> tuple[float, ...]:
        """Times where some derivative of order <= 3 may jump."""
        return (self.t_start, self.t_end)

    @property
    def length_bounds(self) -> tuple[float, float]:
        """Conservative (min, max) of L over all times."""
        return (min(self.L0, self.L1), max(self.L0, self.L1))

    def analytic_max_speed(self) -> float | None:
        return None

    def to_spec(self) -> dict[str, Any]:
        raise NotImplementedError

    # -- public evaluation ---------------------------------------------------
    def __call__(self, t: float) -> float:
        return self.eval(t)

    def eval(self, t: float) -> float:
        return self._derivs(float(t), 1)[0]

    def derivs(self, t: float, side: int = 1) -> tuple[float, float, float, float]:
        """(L, L', L'', L''') as plain floats; ``side`` selects the junction limit."""
        return self._derivs(float(t), 1 if side >= 0 else -1)

    def eval_derivs(self, t: float, side: int = 1) -> TrajectoryDerivs:
        t = float(t)
        L, dL, ddL, _ = self.derivs(t, side)
        tag = "interior"
        if any(t == b for b in self.breakpoints):
            tag = "right" if side >= 0 else "left"
        return TrajectoryDerivs(L, dL, ddL, tag)

    def sample(self, ts: Sequence[float] | np.ndarray) -> np.ndarray:
        return np.array([self.eval(t) for t in np.asarray(ts, dtype=float)])

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.to_spec()})"


@dataclass(frozen=True, repr=False)
class StaticTrajectory(Trajectory):
    L0: float
    kind = "static"

    def __post_init__(self) -> None:
        if not self.L0 > 0:
            raise TrajectorySpecError(f"L0 must be positive, got {self.L0}")

    @property
    def L1(self) -> float:  # type: ignore[override]
        return self.L0

    @property
    def t_start(self) -> float:  # type: ignore[override]
        return 0.0

    @property
    def t_end(self) -> float:  # type: ignore[override]
        return 0.0

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return ()

    def analytic_max_speed(self) -> float:
        return 0.0

    def _derivs(self, t, side):
        return self.L0, 0.0, 0.0, 0.0

    def to_spec(self):
        return {"kind": "static", "L0": self.L0}


@dataclass(frozen=True, repr=False)
class SmoothstepTrajectory(Trajectory):
    """L(t) = L0 + (L1 - L0) * ramp((t - t0)/tau) for t0 <= t <= t0 + tau.

    With ``L1 = L0 * (1 - eps)`` this is the compression family used
    throughout; ``L1 > L0`` gives the matching expansion.
    """

    L0: float
    L1: float
    tau: float
    t0: float = 0.0
    kind = "smoothstep"

    def __post_init__(self) -> None:
        if not (self.L0 > 0 and self.L1 > 0):
            raise TrajectorySpecError("lengths must be positive")
        if not self.tau > 0:
            raise TrajectorySpecError(f"tau must be positive, got {self.tau}")

    @classmethod
    def from_eps(cls, L0: float, eps: float, tau: float, t0: float = 0.0) -> "SmoothstepTrajectory":
        if not 0.0 <= eps < 1.0:
            raise TrajectorySpecError(f"eps must lie in [0, 1), got {eps}")
        return cls(L0, L0 * (1.0 - eps), tau, t0)

    @property
    def eps(self) -> float:
        return 1.0 - self.L1 / self.L0

    @property
    def t_start(self) -> float:  # type: ignore[override]
        return self.t0

    @property
    def t_end(self) -> float:  # type: ignore[override]
        return self.t0 + self.tau

    def analytic_max_speed(self) -> float:
        # ramp' peaks at u = 1/2 with value 15/8
        return abs(self.L1 - self.L0) * 15.0 / (8.0 * self.tau)

    def _derivs(self, t, side):
        t0, t1 = self.t0, self.t0 + self.tau
        if t < t0 or (t == t0 and side < 0):
            return self.L0, 0.0, 0.0, 0.0
        if t > t1 or (t == t1 and side > 0):
            return self.L1, 0.0, 0.0, 0.0
        tau = self.tau
        dl = self.L1 - self.L0
        d0, d1, d2, d3 = smoothstep_derivs((t - t0) / tau)
        return self.L0 + dl * d0, dl * d1 / tau, dl * d2 / tau**2, dl * d3 / tau**3

    def to_spec(self):
        spec = {"kind": "smoothstep", "L0": self.L0, "L1": self.L1, "tau": self.tau}
        if self.t0:
            spec["t0"] = self.t0
        return spec


@dataclass(frozen=True, repr=False)
class StepTrajectory(Trajectory):
    """Instantaneous jump from L0 to L1 at ``t0``. Non-physical by construction.

    Only the closed-form shortcut and the tau -> 0 Otto limit consume it.
    At ``t0`` itself :meth:`eval` returns the right limit ``L1``.
    """

    L0: float
    L1: float
    t0: float = 0.0
    kind = "step"

    def __post_init__(self) -> None:
        if not (self.L0 > 0 and self.L1 > 0):
            raise TrajectorySpecError("lengths must be positive")

    @property
    def t_start(self) -> float:  # type: ignore[override]
        return self.t0

    @property
    def t_end(self) -> float:  # type: ignore[override]
        return self.t0

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return (self.t0,)

    def analytic_max_speed(self) -> float:
        return math.inf if self.L0 != self.L1 else 0.0

    def eval(self, t: float) -> float:
        return self.L0 if t < self.t0 else self.L1

    def _derivs(self, t, side):
        if t == self.t0 and self.L0 != self.L1:
            raise DiscontinuityError(f"step trajectory jumps at t = {self.t0}")
        return self.eval(t), 0.0, 0.0, 0.0

    def to_spec(self):
        spec = {"kind": "step", "L0": self.L0, "L1": self.L1}
        if self.t0:
            spec["t0"] = self.t0
        return spec


@dataclass(frozen=True, repr=False)
class LinearSegmentTrajectory(Trajectory):
    """Constant-speed motion from L0 at ``t_start`` to L1 at ``t_end`` (C^0 junctions)."""

    L0: float
    L1: float
    t_start: float
    t_end: float
    kind = "linear_segment"

    def __post_init__(self) -> None:
        if not (self.L0 > 0 and self.L1 > 0):
            raise TrajectorySpecError("lengths must be positive")
        if not self.t_end > self.t_start:
            raise TrajectorySpecError("t_end must exceed t_start")

    @property
    def speed(self) -> float:
        return (self.L1 - self.L0) / (self.t_end - self.t_start)

    def analytic_max_speed(self) -> float:
        return abs(self.speed)

    def _derivs(self, t, side):
        if t < self.t_start or (t == self.t_start and side < 0):
            return self.L0, 0.0, 0.0, 0.0
        if t > self.t_end or (t == self.t_end and side > 0):
            return self.L1, 0.0, 0.0, 0.0
        v = self.speed
        return self.L0 + v * (t - self.t_start), v, 0.0, 0.0

    def to_spec(self):
        return {
            "kind": "linear_segment",
            "L0": self.L0,
            "L1": self.L1,
            "t_start": self.t_start,
            "t_end": self.t_end,
        }


@dataclass(frozen=True, repr=False, eq=False)
class SampledTrajectory(Trajectory):
    """Natural cubic spline through an ordered (t, L) table, flat outside it."""

    times: tuple[float, ...]
    lengths: tuple[float, ...]
    kind = "sampled"
    _x: list = field(init=False, repr=False)
    _c: list = field(init=False, repr=False)

    def __post_init__(self) -> None:
        t = np.asarray(self.times, dtype=float)
        L = np.asarray(self.lengths, dtype=float)
        if t.ndim != 1 or t.shape != L.shape or t.size < 2:
            raise TrajectorySpecError("samples need matching 1-D t and L arrays with >= 2 points")
        if np.any(np.diff(t) <= 0):
            raise TrajectorySpecError("sample times must be strictly increasing")
        if np.any(L <= 0):
            raise TrajectorySpecError("sample lengths must be positive")
        spline = CubicSpline(t, L, bc_type="natural")
        object.__setattr__(self, "times", tuple(t.tolist()))
        object.__setattr__(self, "lengths", tuple(L.tolist()))
        object.__setattr__(self, "_x", t.tolist())
        # coefficient columns per interval, highest power first
        object.__setattr__(self, "_c", spline.c.T.tolist())

    @property
    def L0(self) -> float:  # type: ignore[override]
        return self.lengths[0]

    @property
    def L1(self) -> float:  # type: ignore[override]
        return self.lengths[-1]

    @property
    def t_start(self) -> float:  # type: ignore[override]
        return self.times[0]

    @property
    def t_end(self) -> float:  # type: ignore[override]
        return self.times[-1]

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return self.times

    @property
    def length_bounds(self) -> tuple[float, float]:
        grid = np.linspace(self.t_start, self.t_end, 20 * len(self.times) + 1)
        vals = self.sample(grid)
        return float(vals.min()), float(vals.max())

    def _derivs(self, t, side):
        x = self._x
        if t < x[0] or (t == x[0] and side < 0):
            return self.L0, 0.0, 0.0, 0.0
        if t > x[-1] or (t == x[-1] and side > 0):
            return self.L1, 0.0, 0.0, 0.0
        if side > 0:
            i = int(np.searchsorted(x, t, side="right")) - 1
        else:
            i = int(np.searchsorted(x, t, side="left")) - 1
        i = min(max(i, 0), len(x) - 2)
        a, b, c, d = self._c[i]
        h = t - x[i]
        return (
            d + h * (c + h * (b + h * a)),
            c + h * (2.0 * b + 3.0 * a * h),
            2.0 * b + 6.0 * a * h,
            6.0 * a,
        )

    def to_spec(self):
        return {"kind": "samples", "t": list(self.times), "L": list(self.lengths)}


@dataclass(frozen=True, repr=False, eq=False)
class CompositeTrajectory(Trajectory):
    """Piecewise trajectory: ``segments[k] = (start_k, traj_k)``.

    ``traj_k`` is used on ``[start_k, start_{k+1})``; the first start is
    ignored (the first piece extends to -infinity).
    """

    segments: tuple[tuple[float, Trajectory], ...]
    kind = "composite"

    def __post_init__(self) -> None:
        segs = tuple((float(s), tr) for s, tr in self.segments)
        if not segs:
            raise TrajectorySpecError("composite trajectory needs at least one segment")
        starts = [s for s, _ in segs]
        if any(b <= a for a, b in zip(starts[1:], starts[2:])):
            raise TrajectorySpecError("segment starts must be increasing")
        object.__setattr__(self, "segments", segs)

    def _piece(self, t: float, side: int) -> Trajectory:
        chosen = self.segments[0][1]
        for s, tr in self.segments[1:]:
            if t > s or (t == s and side > 0):
                chosen = tr
            else:
                break
        return chosen

    @property
    def L0(self) -> float:  # type: ignore[override]
        return self.segments[0][1].L0

    @property
    def L1(self) -> float:  # type: ignore[override]
        return self.segments[-1][1].L1

    @property
    def t_start(self) -> float:  # type: ignore[override]
        pts = self.breakpoints
        return pts[0] if pts else 0.0

    @property
    def t_end(self) -> float:  # type: ignore[override]
        pts = self.breakpoints
        return pts[-1] if pts else 0.0

    @property
    def breakpoints(self) -> tuple[float, ...]:
        pts = set()
        bounds = [-math.inf] + [s for s, _ in self.segments[1:]] + [math.inf]
        for k, (_, tr) in enumerate(self.segments):
            lo, hi = bounds[k], bounds[k + 1]
            pts.update(b for b in tr.breakpoints if lo <= b <= hi)
            if k > 0:
                pts.add(lo)
        return tuple(sorted(pts))

    @property
    def length_bounds(self) -> tuple[float, float]:
        lo = min(tr.length_bounds[0] for _, tr in self.segments)
        hi = max(tr.length_bounds[1] for _, tr in self.segments)
        return lo, hi

    def eval(self, t: float) -> float:
        return self._piece(float(t), 1).eval(t)

    def _derivs(self, t, side):
        return self._piece(t, side)._derivs(t, side)

    def to_spec(self):
        return {
            "kind": "composite",
            "segments": [{"start": s, "traj": tr.to_spec()} for s, tr in self.segments],
        }


# -- module-level operations ---------------------------------------------------


def eval(traj: Trajectory, t: float) -> float:  # noqa: A001 - mirrors the method name
    """L(t)."""
    return traj.eval(t)


def eval_derivs(traj: Trajectory, t: float, side: int = 1) -> TrajectoryDerivs:
    """(L, L', L'') with the junction side recorded."""
    return traj.eval_derivs(t, side)


def _continuity_class(traj: Trajectory) -> int:
    """Largest k <= 3 such that derivatives up to order k match at all breakpoints."""
    cls = 3
    for b in traj.breakpoints:
        try:
            left = traj.derivs(b, -1)
            right = traj.derivs(b, 1)
        except DiscontinuityError:
            return -1
        for k in range(4):
            scale = max(1.0, abs(left[k]), abs(right[k]))
            if abs(left[k] - right[k]) > _JUNCTION_TOL * scale:
                cls = min(cls, k - 1)
                break
    return cls


def validate(traj: Trajectory, n_grid: int | None = None) -> ValidationReport:
    """Scan ``traj`` on a grid and decide whether the mirror is physical.

    Non-physical iff max |L'| >= 1 or L <= 0 somewhere. The grid covers the
    moving segment with a margin and always contains the junction times.
    """
    n = n_grid or traj.validation_points
    span = traj.t_end - traj.t_start
    pad = 0.05 * span + 1e-3
    grid = np.union1d(
        np.linspace(traj.t_start - pad, traj.t_end + pad, n),
        np.asarray(traj.breakpoints, dtype=float),
    )
    reasons = []
    cls = _continuity_class(traj)
    lengths = []
    speeds = []
    for t in grid:
        for side in (-1, 1):
            try:
                L, dL, _, _ = traj.derivs(t, side)
            except DiscontinuityError:
                L, dL = traj.eval(t), math.inf
            lengths.append(L)
            speeds.append(abs(dL))
    min_length = float(min(lengths))
    max_speed = float(max(speeds))
    analytic = traj.analytic_max_speed()
    if analytic is not None:
        max_speed = max(max_speed, analytic)
    if min_length <= 0:
        reasons.append("length reaches zero")
    if max_speed >= 1.0:
        reasons.append("superluminal mirror" if math.isfinite(max_speed) else "infinite speed")
    return ValidationReport(min_length, max_speed, cls, not reasons, tuple(reasons))


# -- spec files ------------------------------------------------------------


def _need(spec: dict, *keys: str) -> list:
    missing = [k for k in keys if k not in spec]
    if missing:
        raise TrajectorySpecError(f"trajectory spec of kind {spec.get('kind')!r} lacks {missing}")
    return [spec[k] for k in keys]


def trajectory_from_spec(spec: dict[str, Any]) -> Trajectory:
    """Build a trajectory from its JSON-structured description."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise TrajectorySpecError("trajectory spec must be an object with a 'kind' field")
    kind = spec["kind"]
    try:
        if kind == "static":
            (L0,) = _need(spec, "L0")
            return StaticTrajectory(float(L0))
        if kind == "smoothstep":
            (L0, tau) = _need(spec, "L0", "tau")
            t0 = float(spec.get("t0", 0.0))
            if "eps" in spec:
                return SmoothstepTrajectory.from_eps(float(L0), float(spec["eps"]), float(tau), t0)
            (L1,) = _need(spec, "L1")
            return SmoothstepTrajectory(float(L0), float(L1), float(tau), t0)
        if kind == "step":
            L0, L1 = _need(spec, "L0", "L1")
            return StepTrajectory(float(L0), float(L1), float(spec.get("t0", 0.0)))
        if kind == "linear_segment":
            L0, L1, a, b = _need(spec, "L0", "L1", "t_start", "t_end")
            return LinearSegmentTrajectory(float(L0), float(L1), float(a), float(b))
        if kind in ("samples", "sampled"):
            t, L = _need(spec, "t", "L")
            return SampledTrajectory(tuple(map(float, t)), tuple(map(float, L)))
        if kind == "composite":
            (segs,) = _need(spec, "segments")
            return CompositeTrajectory(
                tuple((float(s["start"]), trajectory_from_spec(s["traj"])) for s in segs)
            )
        if kind == "effective":
            from .sta import EffectiveTrajectory  # sta builds on this module

            (ref,) = _need(spec, "reference")
            return EffectiveTrajectory(trajectory_from_spec(ref))
    except (TypeError, KeyError) as exc:
        raise TrajectorySpecError(f"malformed {kind!r} trajectory spec: {exc}") from exc
    raise TrajectorySpecError(f"unknown trajectory kind {kind!r}")


def load_trajectory(source: str | Path) -> Trajectory:
    """Load a trajectory from a JSON file path or an inline JSON string."""
    text = str(source).strip()
    if not text.startswith("{"):
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise TrajectorySpecError(f"cannot read trajectory file {source}: {exc}") from exc
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TrajectorySpecError(f"invalid trajectory JSON: {exc}") from exc
    return trajectory_from_spec(spec)
