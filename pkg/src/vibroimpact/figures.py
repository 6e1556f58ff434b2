"""Figure suites: every run a figure needs, written as tidy CSV tables.

Each suite writes one long-format CSV per panel into ``out_dir/<figure id>/``
plus ``runs.csv`` (one row per run with its status). A failing run is
recorded there and the suite carries on; :class:`SuiteResult.ok` is then
false. Runs inside a dt sweep that blow up numerically are
recorded as ``diverged`` (an infinite error), which is a result rather than
a failure. Wall times are printed, never written, so the CSVs are
byte-reproducible.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .analysis import eigenfrequencies, mse
from .integrators import IntegrationError
from .models import GalerkinStringModel
from .scenarios import ConfigError, RunResult, ScenarioConfig, parse_config, simulate, write_csv

STRING_DTS = (0.0025, 0.0013, 0.0008, 0.0001)
SDOF_DTS = (1e-4, 1e-3, 1e-2, 1e-1)
SDOF_KP = (1e5, 1e6, 1e7)
MSE_SAMPLES = 101


@dataclass
class SuiteResult:
    figure: str
    files: list[Path] = field(default_factory=list)
    runs: list[tuple[str, str]] = field(default_factory=list)

    @property
    def failures(self) -> list[tuple[str, str]]:
        return [r for r in self.runs if r[1].startswith("failed")]

    @property
    def ok(self) -> bool:
        return not self.failures


class _Suite:
    """Bookkeeping shared by the figure runners."""

    def __init__(self, figure: str, out_dir: Path, log: Callable[[str], None]):
        self.result = SuiteResult(figure)
        self.dir = Path(out_dir) / figure
        self.dir.mkdir(parents=True, exist_ok=True)
        self.log = log

    def run(self, label: str, cfg: ScenarioConfig, sweep: bool = False) -> RunResult | None:
        """Simulate one run; in a dt ``sweep`` a numerical blow-up is a result, not a failure."""
        t0 = time.perf_counter()
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                res = simulate(cfg)
        except IntegrationError as exc:
            status = "diverged" if sweep else "failed"
            self.result.runs.append((label, f"{status}: {exc}"))
            self.log(f"  {label}: {status.upper()} ({exc})")
            return None
        except (FloatingPointError, OverflowError, ConfigError, ValueError) as exc:
            self.result.runs.append((label, f"failed: {exc}"))
            self.log(f"  {label}: FAILED ({exc})")
            return None
        self.result.runs.append((label, "ok"))
        self.log(f"  {label}: {len(res.trajectory)} samples, {time.perf_counter() - t0:.1f} s")
        return res

    def note(self, label: str, status: str):
        self.result.runs.append((label, status))

    def write(self, name: str, header, rows):
        path = self.dir / name
        write_csv(path, header, rows)
        self.result.files.append(path)

    def finish(self) -> SuiteResult:
        self.write("runs.csv", ["run", "status"], self.result.runs)
        return self.result


def _midpoint(res: RunResult, times) -> np.ndarray:
    return res.built.displacement(res.built.model.midpoint_index)(res.trajectory, times)


def _shape(res: RunResult, times) -> np.ndarray:
    x, _ = res.built.physical(res.trajectory.at(np.asarray(times, dtype=float)))
    return x


def _full_trajectories(cfg: ScenarioConfig) -> ScenarioConfig:
    return cfg.override({"output": {"probe": "all"}})


def _at_dt(cfg: ScenarioConfig, dt: float) -> ScenarioConfig:
    """Same run at step ``dt``, keeping the output sample spacing (not the stride) fixed."""
    it = cfg.integrator
    stride = max(1, round(it["dt"] * it["stride"] / dt))
    return cfg.override({"integrator": {"dt": dt, "stride": stride}})


# -- point mass and SDOF -------------------------------------------------------------------


def fig3(suite: _Suite):
    cfg = parse_config("fig3_point_mass")
    res = suite.run("point_mass_R0.9", cfg)
    if res is None:
        return
    traj = res.trajectory
    x, xd = res.built.physical(traj.states)
    t = traj.times
    suite.write("fig3a.csv", ["t [s]", "coordinate", "displacement [m]"],
                [(ti, "eta", v) for ti, v in zip(t, traj.states[:, 0])]
                + [(ti, "u", v) for ti, v in zip(t, x[:, 0])])
    suite.write("fig3b.csv", ["t [s]", "coordinate", "velocity [m/s]"],
                [(ti, "zeta", v) for ti, v in zip(t, traj.states[:, 1])]
                + [(ti, "v", v) for ti, v in zip(t, xd[:, 0])])
    energy = [res.built.energy(y) for y in traj.states]
    suite.write("fig3c.csv", ["t [s]", "energy per unit mass [J/kg]"], list(zip(t, energy)))
    suite.write("fig3_impacts.csv", ["n", "t [s]", "v_minus [m/s]", "v_plus [m/s]"],
                [(n, c[0], c[2], c[3]) for n, c in enumerate(res.impacts)])


def fig5(suite: _Suite):
    ref = suite.run("event_reference", parse_config("fig5_sdof_reference"))
    if ref is None:
        return
    rows = []
    candidates = [("ivanov", math.nan, parse_config("fig5_sdof_ivanov"))]
    candidates += [("penalty", kp, parse_config(f"fig5_sdof_penalty_kp{kp:.0e}".replace("+0", "")))
                   for kp in SDOF_KP]
    for method, kp, base in candidates:
        for dt in SDOF_DTS:
            label = f"{method}_kp{kp:.0e}_dt{dt:g}" if method == "penalty" else f"{method}_dt{dt:g}"
            res = suite.run(label, _at_dt(base, dt), sweep=True)
            if res is None:
                e = math.inf
            else:
                e = mse(ref.trajectory, res.trajectory, res.built.displacement(0), n=MSE_SAMPLES,
                        reference_component=0).e
                if not math.isfinite(e):
                    e = math.inf
            rows.append((method, kp, dt, e))
    suite.write("fig5.csv", ["method", "k_p [N/m]", "dt [s]", "e [m^2]"], rows)


# -- string ------------------------------------------------------------------------------


def _snapshots_and_mse(suite: _Suite, prefix: str, base_name: str, tag: str):
    """Snapshot overlay (panel a) and Ivanov-vs-penalty MSE over dt (panel b)."""
    base = _full_trajectories(parse_config(base_name))
    pen_cfg = _full_trajectories(parse_config(base_name.replace("_ivanov", "_penalty")))
    pen = suite.run(f"penalty_kp{pen_cfg.k_p:g}", pen_cfg)
    runs = {dt: suite.run(f"ivanov_dt{dt:g}", _at_dt(base, dt)) for dt in STRING_DTS}
    snaps = base.output["snapshot_times"]
    grid = GalerkinStringModel(base.model_params["N"]).grid
    rows = []
    for label, res in (("ivanov", runs[0.0001]), ("penalty", pen)):
        if res is None:
            continue
        for ti, shape in zip(snaps, _shape(res, snaps)):
            rows.append((label, ti, 0.0, 0.0))
            rows.extend((label, ti, g, y) for g, y in zip(grid, shape))
            rows.append((label, ti, 1.0, 0.0))
    suite.write(f"{prefix}a.csv", ["method", "t [-]", "x [-]", "y [-]"], rows)
    _mse_panel(suite, f"{prefix}b", runs, pen, base.integrator["t_end"], tag)


def _mse_panel(suite, name, runs: dict, pen: RunResult | None, t_end: float, tag: str):
    if pen is None:
        return
    times = np.linspace(0.0, t_end, MSE_SAMPLES)
    ref_shape = _shape(pen, times)
    mid = pen.built.model.midpoint_index
    series, table = [], []
    for dt, res in runs.items():
        if res is None:
            table.append((tag, dt, math.inf, math.inf))
            continue
        sq = (_shape(res, times) - ref_shape) ** 2
        e_t = np.mean(sq, axis=1)
        series.extend((tag, dt, t, e) for t, e in zip(times, e_t))
        table.append((tag, dt, float(np.mean(sq[:, mid])), float(np.mean(e_t))))
    suite.write(f"{name}.csv", ["case", "dt [-]", "t [-]", "e(t) [-]"], series)
    suite.write(f"{name}_table.csv", ["case", "dt [-]", "e_midpoint [-]", "e_mean [-]"], table)


def _midpoint_traces(suite: _Suite, name: str, variants):
    rows = []
    for label, value, res in variants:
        if res is None:
            continue
        t = res.trajectory.times
        rows.extend((label, value, ti, y) for ti, y in zip(t, _midpoint(res, t)))
    suite.write(name, ["method", "parameter", "t [-]", "y(1/2) [-]"], rows)


def _restitution(suite: _Suite, prefix: str):
    base = parse_config(f"{prefix}_ivanov")
    variants = [("ivanov", R, suite.run(f"ivanov_R{R:g}", base.override({"impact": {"R": R}})))
                for R in (1.0, 0.9, 0.8)]
    pen = suite.run("penalty_R1", parse_config(f"{prefix}_penalty"))
    variants.append(("penalty", 1.0, pen))
    return variants


def fig8(suite):
    _snapshots_and_mse(suite, "fig8", "fig8_flat_ivanov", "flat_c0")


def fig10(suite):
    _snapshots_and_mse(suite, "fig10", "fig10_sin_ivanov", "sinusoidal_c0")


def fig9(suite):
    _midpoint_traces(suite, "fig9.csv", _restitution(suite, "fig8_flat"))


def fig11(suite):
    _midpoint_traces(suite, "fig11.csv", _restitution(suite, "fig10_sin"))


def _damping(suite: _Suite, prefix: str, base_name: str, tag: str):
    base = _full_trajectories(parse_config(base_name))
    pen_base = _full_trajectories(parse_config(base_name.replace("_ivanov", "_penalty")))
    ivanov, penalty = {}, {}
    for c in (0.0, 0.1, 0.2):
        ivanov[c] = suite.run(f"ivanov_c{c:g}", base.override({"model": {"c": c}}))
        penalty[c] = suite.run(f"penalty_c{c:g}", pen_base.override({"model": {"c": c}}))
    _midpoint_traces(suite, f"{prefix}a.csv", [("ivanov", c, r) for c, r in ivanov.items()]
                     + [("penalty", c, r) for c, r in penalty.items()])
    # MSE over dt at the largest damping; the base dt run is reused
    c_cfg = base.override({"model": {"c": 0.2}})
    runs = {}
    for dt in STRING_DTS:
        if dt == c_cfg.integrator["dt"]:
            runs[dt] = ivanov[0.2]
        else:
            runs[dt] = suite.run(f"ivanov_c0.2_dt{dt:g}", _at_dt(c_cfg, dt))
    _mse_panel(suite, f"{prefix}b", runs, penalty[0.2], base.integrator["t_end"], tag)


def fig12(suite):
    _damping(suite, "fig12", "fig8_flat_ivanov", "flat_c0.2")


def fig13(suite):
    _damping(suite, "fig13", "fig10_sin_ivanov", "sinusoidal_c0.2")


def omega(suite: _Suite, N: int = 201):
    model = GalerkinStringModel(N)
    try:
        om_m, om_s = eigenfrequencies(model)
    except np.linalg.LinAlgError as exc:
        suite.note(f"eigenfrequencies_N{N}", f"failed: {exc}")
        return
    suite.note(f"eigenfrequencies_N{N}", "ok")
    rel = np.abs(om_s - om_m) / om_m
    suite.write("omega.csv", ["j", "omega_m [-]", "omega_s [-]", "rel_dev [-]"],
                [(j + 1, a, b, r) for j, (a, b, r) in enumerate(zip(om_m[:N - 1], om_s[:N - 1], rel[:N - 1]))])


FIGURES: dict[str, Callable[[_Suite], None]] = {
    "fig3": fig3, "fig5": fig5, "fig8": fig8, "fig9": fig9, "fig10": fig10,
    "fig11": fig11, "fig12": fig12, "fig13": fig13, "omega": omega,
}


def run_figure_suite(figure: str, out_dir: str | Path = "out", log: Callable[[str], None] = print) -> SuiteResult:
    """Run every simulation behind ``figure`` and write its panel CSVs."""
    if figure not in FIGURES:
        raise KeyError(f"unknown figure {figure!r}; known: {', '.join(FIGURES)}")
    suite = _Suite(figure, Path(out_dir), log)
    log(f"{figure}:")
    FIGURES[figure](suite)
    return suite.finish()
