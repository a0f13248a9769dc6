"""Command-line front end: ``casimir-sta {sta,energy,certify,otto}``.

Every table starts with one commented line holding the tool version and the
full configuration as JSON. Exit codes: 0 success, 2 bad configuration,
3 numerical failure.
"""

from __future__ import annotations

import csv
import functools
import io
import json
import math
import sys
from pathlib import Path
from typing import Any, Iterable, Sequence

import click
import numpy as np

from . import __version__
from .errors import CavityError, TrajectorySpecError
from .moore import RecursiveMooreFunction, WkbMooreFunction, extract_residual
from .otto import OttoCycleSpec, cycle_finite_time, power_decay_fit
from .sta import EffectiveTrajectory, effective_speed
from .stress import ThermalState, density_grid, energy_curve
from .trajectory import Trajectory, load_trajectory, validate

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


# -- parsing ------------------------------------------------------------------


def parse_grid(text: str) -> np.ndarray:
    """``a:b:n`` (uniform) or ``log:a:b:n`` (geometric) -> array of n points."""
    parts = text.split(":")
    log = parts[0] == "log"
    if log:
        parts = parts[1:]
    if len(parts) != 3:
        raise click.BadParameter(f"grid must be a:b:n or log:a:b:n, got {text!r}")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise click.BadParameter(f"bad grid {text!r}: {exc}") from exc
    if n < 2:
        raise click.BadParameter("grids need at least 2 points")
    if log:
        if a <= 0 or b <= 0:
            raise click.BadParameter("log grids need positive bounds")
        return np.geomspace(a, b, n)
    return np.linspace(a, b, n)


def parse_temps(text: str) -> list[float]:
    try:
        temps = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise click.BadParameter(f"bad temperature list {text!r}") from exc
    if not temps or any(T < 0 for T in temps):
        raise click.BadParameter("temperatures must be a non-empty list of values >= 0")
    return temps


def _grid_option(name: str, default: str | None, help: str):
    return click.option(name, default=default, help=help, show_default=True)


def _load(traj_arg: str) -> Trajectory:
    try:
        return load_trajectory(traj_arg)
    except TrajectorySpecError as exc:
        raise click.BadParameter(str(exc), param_hint="--traj") from exc


# -- output -------------------------------------------------------------------


def _clean(v: Any) -> Any:
    if isinstance(v, (float, np.floating)):
        v = float(v) + 0.0  # drop the sign of zero
        return None if math.isnan(v) else v
    if isinstance(v, np.integer):
        return int(v)
    return v


def _fmt(v: Any) -> str:
    v = _clean(v)
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render_table(columns: Sequence[str], rows: Iterable[Sequence[Any]], meta: dict, fmt: str) -> str:
    rows = [[_clean(v) for v in r] for r in rows]
    header = {"tool": "casimir-sta", "version": __version__, **meta}
    if fmt == "json":
        payload = {"meta": header, "columns": list(columns), "rows": rows}
        return json.dumps(payload, indent=1, sort_keys=False) + "\n"
    buf = io.StringIO()
    buf.write("# " + json.dumps(header, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _emit(text: str, out: str | None, suffix: str = "") -> None:
    if out is None:
        click.echo(text, nl=False)
        return
    path = Path(out)
    if suffix:
        path = path.with_name(path.stem + suffix + path.suffix)
    path.write_text(text)


def _numeric_guard(func):
    """Map numerical failures to exit code 3."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except click.exceptions.ClickException:
            raise
        except TrajectorySpecError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_CONFIG)
        except (CavityError, ArithmeticError) as exc:
            click.echo(f"numerical failure: {type(exc).__name__}: {exc}", err=True)
            sys.exit(EXIT_NUMERIC)

    return wrapper


# -- commands ---------------------------------------------------------------


common_out = [
    click.option("--out", default=None, help="Output path (default: standard output)."),
    click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True),
]


def with_output(f):
    for opt in reversed(common_out):
        f = opt(f)
    return f


@click.group()
@click.version_option(__version__, prog_name="casimir-sta")
def main() -> None:
    """Shortcuts to adiabaticity for a scalar field in a cavity with a moving mirror."""


@main.command("sta")
@click.option("--traj", required=True, help="Trajectory JSON file or inline JSON.")
@_grid_option("--t-grid", None, "Time grid a:b:n (default spans the whole shortcut).")
@click.option("--n", "n_points", default=1000, show_default=True, help="Points of the default grid.")
@with_output
@_numeric_guard
def cmd_sta(traj, t_grid, n_points, out, fmt):
    """Reference and effective (shortcut) trajectories on a time grid."""
    ref = _load(traj)
    eff = EffectiveTrajectory(ref)
    if t_grid:
        ts = parse_grid(t_grid)
    else:
        if n_points < 2:
            raise click.BadParameter("--n must be >= 2")
        margin = 0.25 * (ref.L0 + ref.L1)
        ts = np.linspace(eff.t_start - margin, eff.t_end + margin, n_points)
    rows = [(t, ref.eval(t), eff.eval(t), effective_speed(ref, t, eff.phase)) for t in ts]
    meta = {"command": "sta", "trajectory": ref.to_spec(), "t_grid": t_grid, "n": n_points}
    _emit(render_table(["t", "L_ref", "L_eff", "v_eff"], rows, meta, fmt), out)


@main.command("energy")
@click.option("--traj", required=True, help="Reference trajectory JSON file or inline JSON.")
@click.option("--temps", default="0", show_default=True, help="Comma-separated temperatures.")
@_grid_option("--t-grid", None, "Time grid a:b:n (default spans the shortcut).")
@_grid_option("--x-grid", None, "Position grid a:b:n for the density map (default 0:L0:21).")
@click.option("--tol-quad", default=1e-12, show_default=True, type=float, help="Absolute energy quadrature tolerance.")
@with_output
@_numeric_guard
def cmd_energy(traj, temps, t_grid, x_grid, tol_quad, out, fmt):
    """Energy density map of the shortcut run and Q*(t) for both runs.

    The density map uses the first temperature. With --out PATH the Q* table
    goes to PATH and the density map to PATH with '.density' inserted.
    """
    if tol_quad <= 0:
        raise click.BadParameter("--tol-quad must be positive")
    ref = _load(traj)
    temp_list = parse_temps(temps)
    R_sta = WkbMooreFunction(ref)
    eff = R_sta.trajectory
    ts = parse_grid(t_grid) if t_grid else np.linspace(eff.t_start, eff.t_end, 69)
    xs = parse_grid(x_grid) if x_grid else np.linspace(0.0, max(ref.L0, ref.L1), 21)
    R_ref = RecursiveMooreFunction(ref, check=False) if validate(ref).physical else None

    th0 = ThermalState(temp_list[0], ref.L0)
    dens = []
    for s in density_grid(R_sta, th0, ts, xs):
        dens.append((s.t, s.x, s.Ttt, s.Ttx) if hasattr(s, "Ttt") else s)

    rows = []
    for T in temp_list:
        th = ThermalState(T, ref.L0)
        runs = [("sta", R_sta)]
        if R_ref is not None:
            runs.insert(0, ("reference", R_ref))
        for name, R in runs:
            for e in energy_curve(R, th, ts, epsabs=tol_quad):
                rows.append((name, T, e.t, e.E, e.E_ad, e.Qstar))
        if R_ref is None:
            rows.extend(("reference", T, t, None, None, None) for t in ts)
    meta = {
        "command": "energy",
        "trajectory": ref.to_spec(),
        "temps": temp_list,
        "density_temperature": temp_list[0],
        "t_grid": t_grid,
        "x_grid": x_grid,
        "tol_quad": tol_quad,
        "reference_physical": R_ref is not None,
    }
    q_cols = ["run", "T", "t", "E", "E_ad", "Qstar"]
    d_cols = ["t", "x", "Ttt", "Ttx"]
    if fmt == "json" or out is None:
        if fmt == "json":
            payload = {
                "meta": {"tool": "casimir-sta", "version": __version__, **meta},
                "qstar": {"columns": q_cols, "rows": [[_clean(v) for v in r] for r in rows]},
                "density": {"columns": d_cols, "rows": [[_clean(v) for v in r] for r in dens]},
            }
            _emit(json.dumps(payload, indent=1) + "\n", out)
        else:
            _emit(render_table(q_cols, rows, meta, fmt) + "\n" + render_table(d_cols, dens, meta, fmt), None)
        return
    _emit(render_table(q_cols, rows, meta, fmt), out)
    _emit(render_table(d_cols, dens, meta, fmt), out, suffix=".density")


@main.command("certify")
@click.option("--traj", required=True, help="Reference trajectory JSON file or inline JSON.")
@click.option("--threshold", default=1e-8, show_default=True, type=float, help="PASS iff shortcut residual is below.")
@click.option("--tol-moore", default=1e-10, show_default=True, type=float, help="Moore-equation residual tolerance.")
@click.option("--samples", default=64, show_default=True, type=int, help="Residual samples per period.")
@with_output
@_numeric_guard
def cmd_certify(traj, threshold, tol_moore, samples, out, fmt):
    """Particle-creation certificate: OUT residual of the raw and shortcut walls."""
    if threshold <= 0 or tol_moore <= 0 or samples < 2:
        raise click.BadParameter("threshold, tolerance and sample count must be positive")
    ref = _load(traj)
    rows = []
    eff = EffectiveTrajectory(ref)
    sta_res = extract_residual(RecursiveMooreFunction(eff, check=False), n_samples=samples)
    if validate(ref).physical:
        raw = extract_residual(RecursiveMooreFunction(ref, check=False), n_samples=samples)
        rows.append(("reference", raw.sup_deviation, raw.l2_deviation, raw.periodicity_error,
                     "PASS" if raw.sup_deviation < threshold else "FAIL"))
    else:
        rows.append(("reference", None, None, None, "NON-PHYSICAL"))
    rows.append(("sta", sta_res.sup_deviation, sta_res.l2_deviation, sta_res.periodicity_error,
                 "PASS" if sta_res.sup_deviation < threshold else "FAIL"))
    meta = {
        "command": "certify",
        "trajectory": ref.to_spec(),
        "threshold": threshold,
        "tol_moore": tol_moore,
        "samples": samples,
        "verdict": rows[-1][-1],
        "periodic_within_tol": bool(sta_res.periodicity_error < tol_moore),
    }
    cols = ["run", "sup_deviation", "l2_deviation", "periodicity_error", "verdict"]
    _emit(render_table(cols, rows, meta, fmt), out)


@main.command("otto")
@click.option("--L0", "L0", default=1.0, show_default=True, type=float)
@click.option("--eps", default=0.3, show_default=True, type=float, help="Compression amplitude, L1 = L0 (1 - eps).")
@click.option("--T0", "T0", default=1.0, show_default=True, type=float)
@click.option("--T1", "T1", default=5.0, show_default=True, type=float)
@_grid_option("--tau-grid", "log:0.1:10:13", "Stroke durations for the power sweep.")
@click.option("--solver", type=click.Choice(["recursion", "wkb"]), default="recursion", show_default=True,
              help="Moore solver for the shortcut strokes.")
@click.option("--fit-eps", default=0.1, show_default=True, type=float, help="Amplitude for the friction decay fit.")
@_grid_option("--fit-tau-grid", "log:0.25:0.6:8", "Fast-regime durations for the decay fit.")
@click.option("--fit-temps", default="0,0", show_default=True, help="Bath temperatures T0,T1 for the decay fit.")
@click.option("--tol-quad", default=1e-12, show_default=True, type=float)
@with_output
@_numeric_guard
def cmd_otto(L0, eps, T0, T1, tau_grid, solver, fit_eps, fit_tau_grid, fit_temps, tol_quad, out, fmt):
    """Otto-cycle power sweep over tau (reference vs shortcut) plus the friction decay fit.

    Reference strokes that would need a superluminal mirror are emitted as nulls.
    With --out PATH a JSON sidecar PATH.meta.json holds metadata and the fit.
    """
    if not 0 <= eps < 1 or not 0 <= fit_eps < 1:
        raise click.BadParameter("eps must lie in [0, 1)")
    if L0 <= 0 or T0 < 0 or T1 < 0:
        raise click.BadParameter("need L0 > 0 and non-negative temperatures")
    taus = parse_grid(tau_grid)
    if np.any(taus <= 0):
        raise click.BadParameter("tau grid must be positive")
    fit_T = parse_temps(fit_temps)
    if len(fit_T) != 2:
        raise click.BadParameter("--fit-temps takes exactly two values")
    L1 = L0 * (1.0 - eps)
    rows = []
    for tau in taus:
        for kind in ("reference", "sta"):
            spec = OttoCycleSpec(L0, L1, T0, T1, kind, float(tau), solver=solver)
            if kind == "reference" and not validate(spec.reference_stroke(L0, L1)).physical:
                rows.append((tau, kind, None, None, None, None, None, None))
                continue
            r = cycle_finite_time(spec, epsabs=tol_quad)
            rows.append((tau, kind, r.W, r.W_ad, r.Q, r.eta, r.eta_ad, r.P))
    fit = power_decay_fit(L0, fit_eps, fit_T[0], fit_T[1], parse_grid(fit_tau_grid))
    fit_report = {
        "eps": fit_eps,
        "T0": fit_T[0],
        "T1": fit_T[1],
        "tau_grid": fit_tau_grid,
        "applicable": fit.applicable,
        "exponent": _clean(fit.exponent),
        "stderr": _clean(fit.stderr),
        "ci95": [_clean(v) for v in fit.ci95],
    }
    meta = {
        "command": "otto",
        "cycle": OttoCycleSpec(L0, L1, T0, T1, "sta", float(taus[0]), solver=solver).metadata(),
        "tau_grid": tau_grid,
        "tol_quad": tol_quad,
        "decay_fit": fit_report,
    }
    meta["cycle"].pop("tau")
    meta["cycle"].pop("stroke_kind")
    cols = ["tau", "stroke_kind", "W", "W_ad", "Q", "eta", "eta_ad", "P"]
    _emit(render_table(cols, rows, meta, fmt), out)
    if out is not None:
        side = {"tool": "casimir-sta", "version": __version__, **meta}
        Path(str(out) + ".meta.json").write_text(json.dumps(side, indent=1, sort_keys=True) + "\n")
    else:
        click.echo(f"# decay fit: {fit}", err=True)


if __name__ == "__main__":  # pragma: no cover
    main()
