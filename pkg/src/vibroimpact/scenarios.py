"""Scenario configuration files and the single-run driver.

A scenario file is INI-style: ``[section]`` headers and ``key = value``
lines, ``#`` comments. Every key is declared in :data:`SCHEMA`; unknown keys
are errors. Numbers accept fractions (``1/3``); lists are comma separated.
"""

from __future__ import annotations

import configparser
import csv
import io
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np

from .analysis import locate_crossings, physical_trajectory, point_mass_energy, string_energy_physical
from .contact_baselines import (PenaltyParams, event_reference, penalty_sdof_system,
                                penalty_string_system)
from .integrators import IntegratorConfig, Trajectory, integrate_adaptive, integrate_fixed
from .models import GalerkinStringModel, ObstacleProfile, PointMassModel, SdofModel, sample_obstacle
from .nonsmooth_core import ConstraintSet, ImpactLaw, IvanovSystem

MODELS = ("point_mass", "sdof", "string")
METHODS = ("ivanov", "penalty", "event_reference")


class ConfigError(ValueError):
    """Invalid scenario configuration."""


def _number(text: str) -> float:
    text = text.strip()
    try:
        return float(text)
    except ValueError:
        return float(Fraction(text.replace(" ", "")))


def _floats(text: str) -> list[float]:
    return [_number(tok) for tok in text.split(",") if tok.strip()]


def _choice(*options):
    def parse(text):
        val = text.strip()
        if val not in options:
            raise ValueError(f"expected one of {', '.join(options)}; got {val!r}")
        return val
    parse.options = options
    return parse


@dataclass(frozen=True)
class Key:
    parse: Callable[[str], Any]
    default: Any
    doc: str


# section -> key -> Key; a default of None means "unset"
SCHEMA: dict[str, dict[str, Key]] = {
    "scenario": {
        "name": Key(str.strip, "scenario", "label used for the output sub-directory"),
        "model": Key(_choice(*MODELS), None, "point_mass | sdof | string (required)"),
        "method": Key(_choice(*METHODS), None, "ivanov | penalty | event_reference (required)"),
    },
    "model": {
        "g": Key(_number, 9.8, "point_mass: gravitational acceleration"),
        "m": Key(_number, 1.0, "sdof: mass"),
        "k_s": Key(_number, 1.0, "sdof: spring stiffness"),
        "c": Key(_number, 0.0, "sdof/string: linear damping coefficient"),
        "d": Key(_number, None, "point_mass/sdof: obstacle position (point_mass 0, sdof 0.5)"),
        "N": Key(int, 201, "string: number of modes = number of interior grid points"),
        "gamma": Key(_number, 1.0, "string: nonlinear stretching coefficient"),
    },
    "impact": {
        "R": Key(_number, None, "coefficient of restitution, 0 < R <= 1 (required for ivanov, event_reference)"),
    },
    "penalty": {
        "k_p": Key(_number, None, "penalty stiffness (required for method penalty)"),
    },
    "obstacle": {
        "kind": Key(_choice("none", "flat", "sinusoidal"), "flat", "string: none | flat | sinusoidal"),
        "support": Key(_floats, [1 / 3, 2 / 3], "string: obstacle support a, b within [0, 1] (sinusoidal default 1/3, 1)"),
        "level": Key(_number, 0.025, "flat: obstacle height d(x) = level"),
        "offset": Key(_number, 0.05, "sinusoidal: d(x) = offset - amplitude*sin(pi*(x - phase))"),
        "amplitude": Key(_number, 0.025, "sinusoidal: see offset"),
        "phase": Key(_number, 1 / 3, "sinusoidal: see offset"),
    },
    "integrator": {
        "scheme": Key(_choice("rk4", "adaptive"), "rk4", "rk4 (fixed dt) | adaptive (Dormand-Prince, rtol/atol)"),
        "dt": Key(_number, 1e-4, "rk4 step size"),
        "t_end": Key(_number, 1.0, "final time"),
        "stride": Key(int, 1, "keep every stride-th step in the output"),
        "rtol": Key(_number, 1e-12, "adaptive / event_reference relative tolerance"),
        "atol": Key(_number, 1e-12, "adaptive / event_reference absolute tolerance"),
        "energy_floor": Key(_number, 0.0, "stop when energy < energy_floor * E(0); 0 disables"),
        "max_impacts": Key(int, 1_000_000, "event_reference: Zeno guard"),
    },
    "initial": {
        "shape": Key(_choice("sine", "explicit"), "sine", "string: sine (amplitude*sin(mode*pi*x)) | explicit"),
        "amplitude": Key(_number, 0.05, "string sine amplitude"),
        "mode": Key(int, 1, "string sine mode number"),
        "p0": Key(_floats, None, "initial displacement(s); scalar for point_mass/sdof (default 1)"),
        "v0": Key(_floats, None, "initial velocity(ies); default 0"),
        "infeasible": Key(_choice("reject", "project"), "reject",
                          "initial points below the obstacle: reject | project (lift onto the obstacle)"),
    },
    "output": {
        "snapshot_times": Key(_floats, [], "string: times at which the full string shape is written"),
        "probe": Key(_choice("midpoint", "all"), "midpoint", "string: trajectory columns, midpoint only or every grid point"),
    },
}


@dataclass
class ScenarioConfig:
    name: str
    model: str
    method: str
    model_params: dict
    R: Optional[float]
    k_p: Optional[float]
    obstacle: dict
    integrator: dict
    initial: dict
    output: dict
    source: Optional[str] = None

    def section_values(self) -> dict[str, dict[str, Any]]:
        return {
            "scenario": {"name": self.name, "model": self.model, "method": self.method},
            "model": dict(self.model_params),
            "impact": {"R": self.R},
            "penalty": {"k_p": self.k_p},
            "obstacle": dict(self.obstacle),
            "integrator": dict(self.integrator),
            "initial": dict(self.initial),
            "output": dict(self.output),
        }

    def echo(self) -> str:
        """Every effective parameter, one ``section.key = value`` per line."""
        lines = []
        for sec, vals in self.section_values().items():
            for key in SCHEMA[sec]:
                lines.append(f"{sec}.{key} = {_fmt_value(vals.get(key))}")
        return "\n".join(lines)

    def integrator_config(self) -> IntegratorConfig:
        it = self.integrator
        return IntegratorConfig(dt=it["dt"], t_end=it["t_end"], rtol=it["rtol"], atol=it["atol"],
                                sample_stride=it["stride"])

    def override(self, changes: dict[str, dict[str, Any]]) -> "ScenarioConfig":
        """Copy with ``{section: {key: value}}`` replaced, re-validated."""
        vals = self.section_values()
        for sec, kv in changes.items():
            for key, value in kv.items():
                if sec not in SCHEMA or key not in SCHEMA[sec]:
                    raise ConfigError(f"unknown key {sec}.{key}")
                vals[sec][key] = value
        return _validate(vals, source=self.source)

    def with_overrides(self, dt: Optional[float] = None, method: Optional[str] = None) -> "ScenarioConfig":
        changes: dict[str, dict[str, Any]] = {}
        if dt is not None:
            changes["integrator"] = {"dt": dt}
        if method is not None:
            changes["scenario"] = {"method": method}
        return self.override(changes)


def _fmt_value(v) -> str:
    if v is None:
        return "unset"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return ", ".join(_fmt_value(x) for x in v)
    return str(v)


def _key_lines(text: str) -> dict[tuple[str, str], int]:
    """Line number of every ``key = value`` inside its section."""
    out: dict[tuple[str, str], int] = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            out[(section, "")] = lineno
        elif section is not None:
            for sep in "=:":
                if sep in line:
                    out[(section, line.split(sep, 1)[0].strip())] = lineno
                    break
    return out


def parse_config_text(text: str, source: str = "<string>") -> ScenarioConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None,
                                       default_section="__defaults__")
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: parse error: {exc}") from None
    lines = _key_lines(text)

    def where(sec, key=""):
        # a missing key is reported at its section header, if there is one
        ln = lines.get((sec, key)) or lines.get((sec, ""))
        return f"{source}:{ln}" if ln else source

    raw: dict[str, dict[str, Any]] = {sec: {} for sec in SCHEMA}
    for sec in parser.sections():
        if sec not in SCHEMA:
            raise ConfigError(f"{where(sec)}: unknown section [{sec}]")
        for key, text_val in parser.items(sec):
            if key not in SCHEMA[sec]:
                raise ConfigError(f"{where(sec, key)}: unknown key {sec}.{key}")
            try:
                raw[sec][key] = SCHEMA[sec][key].parse(text_val)
            except (ValueError, ZeroDivisionError) as exc:
                raise ConfigError(f"{where(sec, key)}: bad value for {sec}.{key}: {exc}") from None
    return _validate(raw, source=source, where=where)


def _validate(raw: dict, source: Optional[str] = None, where=None) -> ScenarioConfig:
    where = where or (lambda sec, key="": source or "<config>")
    vals = {sec: {key: raw.get(sec, {}).get(key, entry.default) for key, entry in keys.items()}
            for sec, keys in SCHEMA.items()}

    def fail(sec, key, msg):
        raise ConfigError(f"{where(sec, key)}: {sec}.{key}: {msg}")

    sc = vals["scenario"]
    for key in ("model", "method"):
        if sc[key] is None:
            fail("scenario", key, "is required")
    model, method = sc["model"], sc["method"]
    if method == "event_reference" and model not in ("sdof", "point_mass"):
        fail("scenario", "method", "event_reference is only available for models sdof and point_mass")

    R = vals["impact"]["R"]
    if method in ("ivanov", "event_reference"):
        if R is None:
            fail("impact", "R", f"is required for method {method}")
        if not 0.0 < R <= 1.0:
            fail("impact", "R", f"must satisfy 0 < R <= 1 (got {R!r}; R <= 0 makes the transform singular)")
    k_p = vals["penalty"]["k_p"]
    if method == "penalty":
        if k_p is None:
            fail("penalty", "k_p", "is required for method penalty")
        if not k_p > 0:
            fail("penalty", "k_p", f"must be positive (got {k_p!r})")

    mp = vals["model"]
    if mp["d"] is None:
        mp["d"] = 0.5 if model == "sdof" else 0.0
    if model == "point_mass" and not mp["g"] > 0:
        fail("model", "g", "must be positive")
    if model == "sdof":
        if not mp["m"] > 0:
            fail("model", "m", "must be positive")
        if mp["k_s"] < 0:
            fail("model", "k_s", "must be non-negative")
    if mp["c"] < 0:
        fail("model", "c", "must be non-negative")
    if model == "string" and mp["N"] < 1:
        fail("model", "N", "must be >= 1")

    ob = vals["obstacle"]
    if "support" not in raw.get("obstacle", {}) and ob["kind"] == "sinusoidal":
        ob["support"] = [1 / 3, 1.0]
    sup = ob["support"]
    if len(sup) != 2 or not 0.0 <= sup[0] <= sup[1] <= 1.0:
        fail("obstacle", "support", f"needs two values 0 <= a <= b <= 1 (got {sup!r})")

    it = vals["integrator"]
    for key in ("dt", "t_end", "rtol", "atol"):
        if not it[key] > 0:
            fail("integrator", key, "must be positive")
    if it["stride"] < 1:
        fail("integrator", "stride", "must be >= 1")
    if it["energy_floor"] < 0:
        fail("integrator", "energy_floor", "must be >= 0")
    if it["max_impacts"] < 1:
        fail("integrator", "max_impacts", "must be >= 1")

    ini = vals["initial"]
    if model != "string":
        for key, default in (("p0", 1.0), ("v0", 0.0)):
            if ini[key] is None:
                ini[key] = [default]
            if len(ini[key]) != 1:
                fail("initial", key, f"needs a single value for model {model}")
    else:
        n = mp["N"]
        if ini["shape"] == "explicit":
            if ini["p0"] is None or len(ini["p0"]) != n:
                fail("initial", "p0", f"explicit shape needs {n} values")
        if ini["v0"] is not None and len(ini["v0"]) not in (1, n):
            fail("initial", "v0", f"needs 1 or {n} values")
        if ini["mode"] < 1:
            fail("initial", "mode", "must be >= 1")

    snaps = vals["output"]["snapshot_times"]
    if any(not 0.0 <= s <= it["t_end"] for s in snaps):
        fail("output", "snapshot_times", f"must lie in [0, t_end={it['t_end']}]")

    return ScenarioConfig(name=sc["name"], model=model, method=method, model_params=mp, R=R, k_p=k_p,
                          obstacle=ob, integrator=it, initial=ini, output=vals["output"], source=source)


def canned_dir() -> Path:
    return Path(str(resources.files("vibroimpact") / "configs"))


def canned_names() -> list[str]:
    return sorted(p.stem for p in canned_dir().glob("*.ini"))


def resolve_config_path(path_or_name: str | Path) -> Path:
    p = Path(path_or_name)
    if p.exists():
        return p
    canned = canned_dir() / f"{path_or_name}.ini"
    if canned.exists():
        return canned
    raise ConfigError(f"{path_or_name}: no such file or canned scenario")


def parse_config(path: str | Path) -> ScenarioConfig:
    """Read and validate a scenario file (a path, or the name of a shipped scenario)."""
    p = resolve_config_path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"{p}: cannot read: {exc}") from None
    return parse_config_text(text, source=str(p))


def defaults_reference() -> str:
    """INI text listing every key with its default and meaning."""
    out = ["# Scenario file reference: every recognised key with its default.",
           "# 'unset' keys have no default; see the comment for when they are required.", ""]
    for sec, keys in SCHEMA.items():
        out.append(f"[{sec}]")
        for key, entry in keys.items():
            out.append(f"# {entry.doc}")
            out.append(f"{key} = {_fmt_value(entry.default)}")
        out.append("")
    return "\n".join(out)


# -- building and running ------------------------------------------------------------------


@dataclass
class Built:
    """Model plus everything needed to integrate and read back one scenario."""

    cfg: ScenarioConfig
    model: Any
    cs: ConstraintSet
    rhs: Callable
    y0: np.ndarray
    system: Optional[IvanovSystem] = None
    energy: Optional[Callable] = None

    @property
    def dim(self) -> int:
        return self.cs.dim

    def physical(self, states) -> tuple[np.ndarray, np.ndarray]:
        """Full ``(x, xdot)`` for integration-state rows."""
        if self.system is not None:
            return self.system.physical(states)
        states = np.atleast_2d(states)
        return states[:, :self.dim], states[:, self.dim:]

    def displacement(self, index: int):
        """``f(traj, times)`` giving the displacement of one coordinate.

        Transformed states are interpolated before reconstruction, so impacts
        between samples do not smear the kink in ``p``.
        """
        def f(traj, times):
            x, _ = self.physical(traj.at(np.atleast_1d(times)))
            return x[:, index]
        return f


def build_model(cfg: ScenarioConfig):
    mp = cfg.model_params
    if cfg.model == "point_mass":
        return PointMassModel(mp["g"])
    if cfg.model == "sdof":
        return SdofModel(mp["m"], mp["k_s"], mp["c"], mp["d"])
    return GalerkinStringModel(mp["N"], mp["gamma"], mp["c"])


def build_obstacle(cfg: ScenarioConfig) -> Optional[ObstacleProfile]:
    ob = cfg.obstacle
    if ob["kind"] == "none":
        return None
    support = (ob["support"][0], ob["support"][1])
    if ob["kind"] == "flat":
        return ObstacleProfile.flat(ob["level"], support)
    return ObstacleProfile.sinusoidal(ob["offset"], ob["amplitude"], ob["phase"], support)


def initial_physical(cfg: ScenarioConfig, model, cs: ConstraintSet):
    ini = cfg.initial
    if cfg.model != "string":
        x0 = np.array(ini["p0"], dtype=float)
        v0 = np.array(ini["v0"], dtype=float)
    else:
        if ini["shape"] == "sine":
            x0 = model.sine_profile(ini["amplitude"], ini["mode"])
        else:
            x0 = np.array(ini["p0"], dtype=float)
        v = ini["v0"] if ini["v0"] is not None else [0.0]
        v0 = np.broadcast_to(np.array(v, dtype=float), x0.shape).copy()
    c = cs.constrained_indices
    below = x0[c] < cs.gaps
    if np.any(below):
        if ini["infeasible"] == "project":
            x0 = x0.copy()
            x0[c] = np.maximum(x0[c], cs.gaps)
            v0[c[below]] = np.maximum(v0[c[below]], 0.0)
        else:
            i = int(c[np.flatnonzero(below)[0]])
            raise ConfigError(
                f"{cfg.source or '<config>'}: initial.p0: initial state violates the obstacle at "
                f"coordinate {i} (p={x0[i]!r} < d={cs.gaps[np.flatnonzero(below)[0]]!r}); "
                "set initial.infeasible = project to lift it onto the obstacle")
    return x0, v0


def build(cfg: ScenarioConfig) -> Built:
    model = build_model(cfg)
    if cfg.model == "string":
        cs = sample_obstacle(build_obstacle(cfg), model.grid)
    else:
        cs = ConstraintSet.single(cfg.model_params["d"])
    x0, v0 = initial_physical(cfg, model, cs)
    N = cs.dim

    if cfg.model == "string":
        def phys_energy(x, xd):
            return string_energy_physical(x, xd, model)
    elif cfg.model == "sdof":
        def phys_energy(x, xd):
            return model.energy(x[..., 0], xd[..., 0])
    else:
        def phys_energy(x, xd):
            return point_mass_energy(x[..., 0] - model_d, xd[..., 0], model.g_grav)
        model_d = cfg.model_params["d"]

    if cfg.method == "ivanov":
        system = IvanovSystem(model.accel, cs, ImpactLaw(cfg.R))
        y0 = system.initial_state(x0, v0)
        return Built(cfg, model, cs, system.rhs, y0, system,
                     lambda y: float(phys_energy(*system.physical(y))))
    y0 = np.concatenate([x0, v0])
    if cfg.method == "penalty":
        pen = PenaltyParams(cfg.k_p)
        if cfg.model == "string":
            rhs = penalty_string_system(model, cs, pen)
        elif cfg.model == "sdof":
            rhs = penalty_sdof_system(model, pen)
        else:
            d = cfg.model_params["d"]

            def rhs(t, y):
                return np.array([y[1], -model.g_grav + pen.k_p * max(d - y[0], 0.0)])
    else:
        rhs = None
    return Built(cfg, model, cs, rhs, y0, None,
                 lambda y: float(phys_energy(y[None, :N], y[None, N:])[0]))


@dataclass
class RunResult:
    built: Built
    trajectory: Trajectory
    physical: Trajectory
    wall_time: float
    impacts: list = field(default_factory=list)

    @property
    def min_gap(self) -> float:
        cs = self.built.cs
        if cs.m == 0:
            return math.inf
        x = self.physical.states[:, :cs.dim]
        return float(np.min(x[:, cs.constrained_indices] - cs.gaps))


def simulate(cfg: ScenarioConfig) -> RunResult:
    """Integrate one scenario in memory."""
    b = build(cfg)
    it = cfg.integrator
    icfg = cfg.integrator_config()
    t_start = time.perf_counter()
    impacts: list = []
    if cfg.method == "event_reference":
        model = b.model
        accel = (lambda p, v, t: -model.g_grav) if cfg.model == "point_mass" else \
            (lambda p, v, t: model.accel(p, v, t))
        traj = event_reference(accel, cfg.model_params["d"], ImpactLaw(cfg.R), float(b.y0[0]), float(b.y0[1]),
                               it["t_end"], rtol=it["rtol"], atol=it["atol"], max_impacts=it["max_impacts"])
        impacts = [(t, 0, vm, vp) for t, vm, vp in traj.metadata["impacts"]]
    else:
        energy = None
        if it["energy_floor"] > 0:
            e0 = b.energy(b.y0)
            icfg.energy_floor = it["energy_floor"] * e0
            energy = b.energy
        integrate = integrate_fixed if it["scheme"] == "rk4" else integrate_adaptive
        traj = integrate(b.rhs, b.y0, icfg, energy=energy)
    wall = time.perf_counter() - t_start
    if b.system is not None:
        phys = physical_trajectory(b.system, traj)
        impacts = [(c.t, c.coordinate, c.v_minus, c.v_plus) for c in locate_crossings(b.system, traj)]
    else:
        phys = traj
    return RunResult(b, traj, phys, wall, impacts)


# -- output --------------------------------------------------------------------------------


def fmt(x) -> str:
    """17 significant digits: round-trips every double."""
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path: Path, header: list[str], rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    path.write_text(buf.getvalue())


def trajectory_table(res: RunResult):
    b = res.built
    x, xd = b.physical(res.trajectory.states)
    t = res.trajectory.times
    with np.errstate(over="ignore", invalid="ignore"):
        energy = np.array([b.energy(y) for y in res.trajectory.states])
    if b.cfg.model != "string":
        header = ["t [time]", "p [length]", "pdot [length/time]"]
        cols = [t, x[:, 0], xd[:, 0]]
        if b.system is not None:
            header += ["eta [length]", "zeta [length/time]"]
            cols += [res.trajectory.states[:, 0], res.trajectory.states[:, 1]]
        header.append("energy [energy]")
        cols.append(energy)
        return header, np.column_stack(cols)
    model = b.model
    if b.cfg.output["probe"] == "midpoint":
        idx = [model.midpoint_index]
    else:
        idx = list(range(model.N))
    header = ["t [-]"]
    header += [f"y(x={model.grid[i]:.6g}) [-]" for i in idx]
    header += [f"ydot(x={model.grid[i]:.6g}) [-]" for i in idx]
    header += ["energy [-]", "min_gap [-]"]
    cs = b.cs
    if cs.m:
        gap = np.min(x[:, cs.constrained_indices] - cs.gaps, axis=1)
    else:
        gap = np.full(t.shape, np.inf)
    return header, np.column_stack([t, x[:, idx], xd[:, idx], energy, gap])


def snapshot_rows(res: RunResult, times):
    b = res.built
    if not len(times):
        return []
    x, _ = b.physical(res.trajectory.at(np.asarray(times, dtype=float)))
    grid = b.model.grid
    rows = []
    for ti, xi in zip(times, x):
        rows.append((ti, 0.0, 0.0))
        rows.extend((ti, g, y) for g, y in zip(grid, xi))
        rows.append((ti, 1.0, 0.0))
    return rows


def write_outputs(res: RunResult, out_dir: Path) -> list[Path]:
    cfg = res.built.cfg
    run_dir = Path(out_dir) / cfg.name
    run_dir.mkdir(parents=True, exist_ok=True)
    written = []
    header, table = trajectory_table(res)
    p = run_dir / "trajectory.csv"
    write_csv(p, header, table)
    written.append(p)
    if cfg.model == "string" and cfg.output["snapshot_times"]:
        p = run_dir / "snapshots.csv"
        write_csv(p, ["t [-]", "x [-]", "y [-]"], snapshot_rows(res, cfg.output["snapshot_times"]))
        written.append(p)
    if res.impacts:
        p = run_dir / "impacts.csv"
        write_csv(p, ["t [time]", "coordinate [index]", "v_minus [length/time]", "v_plus [length/time]"],
                  res.impacts)
        written.append(p)
    meta = res.trajectory.metadata
    summary = [
        cfg.echo(),
        "",
        f"wall_time_s = {res.wall_time:.3f}",
        f"steps = {meta.get('steps')}",
        f"rhs_evals = {meta.get('rhs_evals')}",
        f"samples = {len(res.trajectory)}",
        f"termination = {meta.get('termination', 't_end')}",
        f"impacts = {len(res.impacts)}",
        f"min_gap = {fmt(res.min_gap)}",
    ]
    p = run_dir / "summary.txt"
    p.write_text("\n".join(summary) + "\n")
    written.append(p)
    return written


def run_scenario(cfg: ScenarioConfig, out_dir: str | Path) -> RunResult:
    res = simulate(cfg)
    write_outputs(res, Path(out_dir))
    return res
