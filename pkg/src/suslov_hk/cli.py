"""Command-line front end: ``suslov-hk <mode> [options]``.

Modes
-----
sim3         iterate the 3D map and write one row per step
simN         iterate the n-dimensional map
closedform   compare the iterated map with the exact orbit through omega0
conserve     report the drift of the first integral (energy for simN)
convergence  estimate the order of accuracy against an RK4 reference
figures      run one of the four published parameter presets
sweep        run several config files concurrently

Options may come from a flat ``key = value`` config file; flags override it.
Exit codes: 0 success, 2 configuration error, 3 pole abort, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .closedform import fit_params, omega_closed
from .errors import ConfigError, PoleAbort, PoleError, SuslovError, UnknownFigure
from .model3 import BodyOmega, Inertia3, hk_step, to_planar, trajectory
from .modeln import NDInertia, energy_nd, hk_step_nd
from .reference import (
    estimate_order,
    euler_step_planar,
    iterate,
    planar_system,
    rk4_integrate,
    suslov3d_system,
)

MODES = ("sim3", "simN", "closedform", "conserve", "convergence", "figures")
EXIT_OK, EXIT_CONFIG, EXIT_POLE, EXIT_IO = 0, 2, 3, 4

# (eps, I1, I2, I13, I23) of the four published pictures
FIGURE_PRESETS = {
    1: (0.2, 4.0, 1.0, -0.5, -0.3),
    2: (0.2, 4.0, 3.0, -0.4, -0.2),
    3: (0.02, 4.0, 2.0, 0.0, -0.2),
    4: (1.0, 3.0, 3.0, -0.2, -0.2),
}
# initial conditions are not published; this choice is recorded in the metadata
PRESET_OMEGA0 = (1.0, 1.0)
PRESET_STEPS = 1000


@dataclass(frozen=True)
class ScenarioConfig:
    mode: str
    inertia3: Optional[Inertia3] = None
    nd_inertia: Optional[NDInertia] = None
    omega0: Optional[tuple[float, ...]] = None
    epsilon: Optional[float] = None
    steps: Optional[int] = None
    output_format: str = "csv"
    output_path: Optional[str] = None
    figure_id: Optional[int] = None
    t_end: float = 1.0

    def echo(self) -> dict:
        """Deterministic description of the configuration for metadata."""
        return {
            "mode": self.mode,
            "figure_id": self.figure_id,
            "epsilon": self.epsilon,
            "steps": self.steps,
            "inertia3": None
            if self.inertia3 is None
            else [self.inertia3.I1, self.inertia3.I2, self.inertia3.I13, self.inertia3.I23],
            "nd_diag": None if self.nd_inertia is None else list(self.nd_inertia.diag),
            "nd_off": None if self.nd_inertia is None else list(self.nd_inertia.off),
            "omega0": None if self.omega0 is None else list(self.omega0),
            "t_end": self.t_end if self.mode == "convergence" else None,
        }


@dataclass
class RunSummary:
    steps_completed: int = 0
    max_F_drift: float = 0.0
    final_constraint_residual: float = 0.0
    pole_encountered: bool = False
    wall_time: float = 0.0
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = {
            "steps_completed": self.steps_completed,
            "max_F_drift": self.max_F_drift,
            "final_constraint_residual": self.final_constraint_residual,
            "pole_encountered": self.pole_encountered,
            "wall_time": self.wall_time,
        }
        d.update(self.extra)
        return d


def preset(figure_id: int, steps: int = PRESET_STEPS) -> ScenarioConfig:
    """Configuration reproducing the parameters of published picture ``figure_id``."""
    if figure_id not in FIGURE_PRESETS:
        raise UnknownFigure(f"unknown figure {figure_id!r}; choose from 1, 2, 3, 4")
    eps, I1, I2, I13, I23 = FIGURE_PRESETS[figure_id]
    return ScenarioConfig(
        mode="figures",
        inertia3=Inertia3(I1, I2, I13, I23),
        omega0=PRESET_OMEGA0,
        epsilon=eps,
        steps=steps,
        figure_id=figure_id,
    )


def fmt(v: float) -> str:
    return format(v, ".17g")


# -- configuration ----------------------------------------------------------


def parse_config_file(path) -> dict[str, str]:
    """Read ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _floats(text: str, name: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(s) for s in text.split(","))
    except ValueError:
        raise ConfigError(f"{name}: expected comma-separated numbers, got {text!r}") from None
    if not all(math.isfinite(v) for v in vals):
        raise ConfigError(f"{name}: values must be finite")
    return vals


def _number(text: str, name: str, kind=float):
    try:
        return kind(text)
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {text!r}") from None


KNOWN_KEYS = {
    "mode", "epsilon", "steps", "inertia", "omega0", "figure", "format", "out",
    "nd_diag", "nd_off", "t_end",
}


def build_config(values: dict[str, str]) -> ScenarioConfig:
    """Validate raw string settings for one run and assemble a ScenarioConfig."""
    unknown = set(values) - KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown settings: {sorted(unknown)}")
    mode = values.get("mode")
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")

    def has(key):
        return values.get(key) is not None

    fmt_ = values.get("format") or "csv"
    if fmt_ not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {fmt_!r}")
    out = values.get("out")
    steps = _number(values["steps"], "steps", int) if has("steps") else None
    if steps is not None and steps < 1:
        raise ConfigError(f"steps must be at least 1, got {steps}")
    omega0 = _floats(values["omega0"], "omega0") if has("omega0") else None
    t_end = _number(values["t_end"], "t_end") if has("t_end") else 1.0
    if not t_end > 0:
        raise ConfigError(f"t_end must be positive, got {t_end}")
    nd = has("nd_diag") or has("nd_off")
    explicit3 = has("inertia") or has("epsilon")

    if has("figure"):
        if mode in ("simN",) or nd:
            raise ConfigError("figure presets are three-dimensional")
        if explicit3:
            raise ConfigError("figure presets fix inertia and epsilon; do not pass them too")
        cfg = preset(_number(values["figure"], "figure", int))
        cfg = replace(
            cfg,
            mode=mode,
            omega0=omega0 or cfg.omega0,
            steps=steps or cfg.steps,
            output_format=fmt_,
            output_path=out,
            t_end=t_end,
        )
        if len(cfg.omega0) != 2:
            raise ConfigError("omega0 must have two components")
        return cfg
    if mode == "figures":
        raise ConfigError("mode 'figures' requires a figure id (1-4)")

    epsilon = _number(values["epsilon"], "epsilon") if has("epsilon") else None
    if epsilon is None:
        raise ConfigError(f"mode {mode!r} requires epsilon")
    if not epsilon > 0:
        raise ConfigError(f"epsilon must be positive, got {epsilon}")
    if omega0 is None:
        raise ConfigError(f"mode {mode!r} requires omega0")
    if steps is None and mode != "convergence":
        raise ConfigError(f"mode {mode!r} requires steps")

    if mode == "simN" or (mode == "conserve" and nd):
        if has("inertia"):
            raise ConfigError("n-dimensional runs take nd_diag/nd_off, not inertia")
        if not (has("nd_diag") and has("nd_off")):
            raise ConfigError("n-dimensional runs require nd_diag and nd_off")
        try:
            nd_inertia = NDInertia(_floats(values["nd_diag"], "nd_diag"), _floats(values["nd_off"], "nd_off"))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if len(omega0) != nd_inertia.n - 1:
            raise ConfigError(f"omega0 must have {nd_inertia.n - 1} components")
        return ScenarioConfig(mode, None, nd_inertia, omega0, epsilon, steps, fmt_, out, None, t_end)

    if nd:
        raise ConfigError(f"mode {mode!r} is three-dimensional; nd_diag/nd_off not allowed")
    if not has("inertia"):
        raise ConfigError(f"mode {mode!r} requires inertia I1,I2,I13,I23")
    vals = _floats(values["inertia"], "inertia")
    if len(vals) != 4:
        raise ConfigError("inertia takes exactly four values I1,I2,I13,I23")
    try:
        inertia = Inertia3(*vals)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if len(omega0) != 2:
        raise ConfigError("omega0 must have two components")
    return ScenarioConfig(mode, inertia, None, omega0, epsilon, steps, fmt_, out, None, t_end)


# -- output -----------------------------------------------------------------


def _metadata(config: ScenarioConfig) -> dict:
    return {
        "version": __version__,
        "config": config.echo(),
        "omega0": list(config.omega0) if config.omega0 is not None else None,
        "omega0_source": "preset default (not published)"
        if config.figure_id is not None and tuple(config.omega0) == PRESET_OMEGA0
        else "user",
    }


def render(header: list[str], rows: list[list[float]], config: ScenarioConfig) -> str:
    if config.output_format == "json":
        doc = {
            "metadata": _metadata(config),
            "rows": [
                {k: (int(v) if k == "n" else float(fmt(v))) for k, v in zip(header, row)} for row in rows
            ],
        }
        return json.dumps(doc, indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([str(int(v)) if k == "n" else fmt(v) for k, v in zip(header, row)])
    return buf.getvalue()


def write_output(header, rows, config: ScenarioConfig, stdout=None) -> None:
    text = render(header, rows, config)
    if config.output_path in (None, "-"):
        (stdout or sys.stdout).write(text)
        return
    path = Path(config.output_path)
    path.write_text(text)
    if config.output_format == "csv":
        meta = Path(str(path) + ".meta.json")
        meta.write_text(json.dumps(_metadata(config), indent=1) + "\n")


# -- runs -------------------------------------------------------------------

SIM3_HEADER = ["n", "t", "omega1", "omega2", "x", "y", "F", "E", "constraint"]


def nd_header(n: int) -> list[str]:
    return ["n", "t"] + [f"omega_{i}n" for i in range(1, n)]


def relative_drift(values) -> float:
    """max_k |v_k - v_0| / |v_0| (absolute if v_0 = 0)."""
    v0 = values[0]
    scale = abs(v0) if v0 != 0 else 1.0
    return max(abs(v - v0) for v in values) / scale


def _simulate3(config: ScenarioConfig):
    rows, pole = [], None
    try:
        for s in trajectory(BodyOmega(*config.omega0), config.inertia3, config.epsilon, config.steps):
            rows.append(
                [s.n, s.t, s.omega.omega1, s.omega.omega2, s.planar.x, s.planar.y, s.F, s.energy, s.constraint]
            )
    except PoleError as exc:
        pole = exc
    summary = RunSummary(
        steps_completed=len(rows) - 1,
        max_F_drift=relative_drift([r[6] for r in rows]),
        final_constraint_residual=rows[-1][8],
        pole_encountered=pole is not None,
    )
    return SIM3_HEADER, rows, summary, pole


def _simulateN(config: ScenarioConfig):
    inertia, eps = config.nd_inertia, config.epsilon
    w = np.asarray(config.omega0, dtype=float)
    rows, energies, pole = [], [], None
    try:
        for n in range(config.steps + 1):
            if n:
                w = hk_step_nd(w, inertia, eps)
            rows.append([n, n * eps, *w.tolist()])
            energies.append(energy_nd(w, inertia))
    except PoleError as exc:
        pole = exc
    p = np.asarray(inertia.off)
    pp = p @ p
    # distance from the steady-state family omega = c * (I_1n, ..., I_{n-1,n})
    off_line = w - (w @ p / pp) * p if pp else w
    summary = RunSummary(
        steps_completed=len(rows) - 1,
        max_F_drift=relative_drift(energies),
        final_constraint_residual=float(np.linalg.norm(off_line)),
        pole_encountered=pole is not None,
        extra={"drift_quantity": "energy (diagnostic; not a first integral of the map)"},
    )
    return nd_header(inertia.n), rows, summary, pole


def _finish(header, rows, summary, pole, config, t_start, stdout=None, write=True):
    summary.wall_time = time.perf_counter() - t_start
    if write:
        write_output(header, rows, config, stdout)
    if pole is not None:
        raise PoleAbort(f"pole after {summary.steps_completed} steps: {pole}", summary)
    return summary


def audit_conservation(config: ScenarioConfig, stdout=None) -> RunSummary:
    """Maximum relative drift of the first integral (energy for n-D runs)."""
    t0 = time.perf_counter()
    sim = _simulateN if config.nd_inertia is not None else _simulate3
    header, rows, summary, pole = sim(config)
    return _finish(header, rows, summary, pole, config, t0, stdout, write=config.output_path is not None)


def compare_closedform(config: ScenarioConfig, stdout=None) -> RunSummary:
    """Iterate the map and evaluate the exact orbit side by side."""
    t0 = time.perf_counter()
    inertia, eps = config.inertia3, config.epsilon
    omega = BodyOmega(*config.omega0)
    params = fit_params(omega, inertia, eps)
    header = ["n", "omega1_iter", "omega2_iter", "omega1_closed", "omega2_closed", "diff1", "diff2"]
    rows, pole = [], None
    try:
        for n in range(config.steps + 1):
            if n:
                omega = hk_step(omega, inertia, eps)
            c = omega_closed(n, params)
            d1, d2 = abs(omega.omega1 - c.omega1), abs(omega.omega2 - c.omega2)
            rows.append([n, omega.omega1, omega.omega2, c.omega1, c.omega2, d1, d2])
    except PoleError as exc:
        pole = exc
    summary = RunSummary(
        steps_completed=len(rows) - 1,
        final_constraint_residual=to_planar(omega, inertia).x,
        pole_encountered=pole is not None,
        extra={
            "max_diff": max(max(r[5], r[6]) for r in rows),
            "h": params.h,
            "k1": params.k1,
            "k2": params.k2,
            "sign_x": params.sign_x,
        },
    )
    return _finish(header, rows, summary, pole, config, t0, stdout)


def convergence_study(config: ScenarioConfig, stdout=None) -> RunSummary:
    """Order of the 3D map against RK4 (dt = eps/100), with forward Euler as control."""
    t0 = time.perf_counter()
    inertia, t_end = config.inertia3, config.t_end
    levels = [config.epsilon / 2**k for k in range(4)]
    state0 = np.asarray(config.omega0, dtype=float)
    sys3 = suslov3d_system(inertia)
    planar0 = to_planar(BodyOmega(*state0), inertia)
    sysp = planar_system(inertia)

    def hk(eps):
        return iterate(lambda w, e: hk_step(w, inertia, e), BodyOmega(*state0), eps, t_end)

    def euler(eps):
        return iterate(lambda p, e: euler_step_planar(p, inertia, e), planar0, eps, t_end)

    try:
        rep_hk = estimate_order(hk, lambda eps: rk4_integrate(sys3, state0, t_end, eps / 100), levels)
        rep_eu = estimate_order(euler, lambda eps: rk4_integrate(sysp, tuple(planar0), t_end, eps / 100), levels)
    except PoleError as exc:
        raise PoleAbort(str(exc), RunSummary(pole_encountered=True)) from exc
    header = ["method", "eps", "error"]
    rows = [["hk", e, err] for e, err in zip(rep_hk.eps_levels, rep_hk.errors)]
    rows += [["euler_planar", e, err] for e, err in zip(rep_eu.eps_levels, rep_eu.errors)]
    summary = RunSummary(
        steps_completed=round(t_end / levels[-1]),
        extra={"order_hk": rep_hk.estimated_order, "order_euler_control": rep_eu.estimated_order},
    )
    summary.wall_time = time.perf_counter() - t0
    if config.output_format == "json":
        text = json.dumps(
            {"metadata": _metadata(config), "rows": [dict(zip(header, r)) for r in rows]}, indent=1
        ) + "\n"
    else:
        text = "method,eps,error\n" + "".join(f"{m},{fmt(e)},{fmt(err)}\n" for m, e, err in rows)
    if config.output_path in (None, "-"):
        (stdout or sys.stdout).write(text)
    else:
        Path(config.output_path).write_text(text)
    return summary


def run(config: ScenarioConfig, stdout=None) -> RunSummary:
    """Execute one scenario, write its output and return the summary.

    Raises PoleAbort (carrying the partial summary) after writing the rows
    computed before the pole.
    """
    if config.mode in ("sim3", "figures"):
        t0 = time.perf_counter()
        return _finish(*_simulate3(config), config, t0, stdout)
    if config.mode == "simN":
        t0 = time.perf_counter()
        return _finish(*_simulateN(config), config, t0, stdout)
    if config.mode == "conserve":
        return audit_conservation(config, stdout)
    if config.mode == "closedform":
        return compare_closedform(config, stdout)
    if config.mode == "convergence":
        return convergence_study(config, stdout)
    raise ConfigError(f"unknown mode {config.mode!r}")


# -- entry point ------------------------------------------------------------


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="suslov-hk", description=__doc__.split("\n")[0])
    p.add_argument("mode", choices=MODES + ("sweep",))
    p.add_argument("configs", nargs="*", help="config files (sweep mode only)")
    p.add_argument("--config", help="flat key = value settings file")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--inertia", help="I1,I2,I13,I23")
    p.add_argument("--omega0", help="W1,W2 (or n-1 values for simN)")
    p.add_argument("--figure", type=int, choices=range(1, 5), metavar="{1,2,3,4}")
    p.add_argument("--nd-diag", help="I_11,...,I_nn")
    p.add_argument("--nd-off", help="I_1n,...,I_{n-1,n}")
    p.add_argument("--t-end", type=float, help="final time for the convergence study")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--out", help="output path ('-' or omitted: stdout)")
    return p


def _settings(args, mode: str, config_path=None) -> dict[str, str]:
    values = parse_config_file(config_path) if config_path else {}
    values.setdefault("mode", mode)
    if mode != "sweep":
        values["mode"] = mode
    for key in ("epsilon", "steps", "inertia", "omega0", "figure", "nd_diag", "nd_off", "t_end", "format", "out"):
        v = getattr(args, key, None)
        if v is not None:
            values[key] = str(v)
    return values


def _execute(values: dict[str, str], stdout, stderr) -> int:
    try:
        config = build_config(values)
        summary = run(config, stdout)
    except PoleAbort as exc:
        if exc.summary is not None:
            stderr.write(json.dumps(exc.summary.as_dict()) + "\n")
        stderr.write(f"suslov-hk: {exc}\n")
        return EXIT_POLE
    except OSError as exc:
        stderr.write(f"suslov-hk: I/O error: {exc}\n")
        return EXIT_IO
    except SuslovError as exc:
        stderr.write(f"suslov-hk: {exc}\n")
        return EXIT_CONFIG
    # conserve without --out writes no rows, so stdout is free for the summary
    rows_on_stdout = config.output_path == "-" or (config.output_path is None and config.mode != "conserve")
    dest = stderr if rows_on_stdout else stdout
    dest.write(json.dumps(summary.as_dict()) + "\n")
    return EXIT_OK


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = make_parser().parse_args(argv)
    if args.mode != "sweep" and args.configs:
        stderr.write("suslov-hk: positional config files are only accepted by 'sweep'\n")
        return EXIT_CONFIG
    if args.mode == "sweep":
        if not args.configs:
            stderr.write("suslov-hk: sweep needs at least one config file\n")
            return EXIT_CONFIG
        jobs = []
        for path in args.configs:
            try:
                values = _settings(args, "sweep", path)
            except OSError as exc:
                stderr.write(f"suslov-hk: I/O error: {exc}\n")
                return EXIT_IO
            except ConfigError as exc:
                stderr.write(f"suslov-hk: {exc}\n")
                return EXIT_CONFIG
            if values.get("out") in (None, "-"):
                stderr.write(f"suslov-hk: {path}: sweep runs need a distinct 'out' path\n")
                return EXIT_CONFIG
            jobs.append(values)
        outs = [v["out"] for v in jobs]
        if len(set(outs)) != len(outs):
            stderr.write("suslov-hk: sweep output paths must be distinct\n")
            return EXIT_CONFIG
        with ThreadPoolExecutor() as pool:
            codes = list(pool.map(lambda v: _execute(v, stdout, stderr), jobs))
        return max(codes)
    try:
        values = _settings(args, args.mode, args.config)
    except OSError as exc:
        stderr.write(f"suslov-hk: I/O error: {exc}\n")
        return EXIT_IO
    except ConfigError as exc:
        stderr.write(f"suslov-hk: {exc}\n")
        return EXIT_CONFIG
    return _execute(values, stdout, stderr)
