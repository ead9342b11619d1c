"""Parameter grids over a scenario, evaluated analytically and/or by simulation."""
from __future__ import annotations

import csv
import dataclasses
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import __version__
from .aoi import PolicyKind
from .analysis import analyze, format_value
from .config import SCHEMA_VERSION, Scenario, ScenarioError
from .sim.runner import simulate_scenario

# sweep axis name -> scenario field
AXES = {
    "p_s": "access_prob",
    "r_eh": "eh_radius",
    "r_gz": "gz_radius",
    "lambda": "arrival_rate",
    "lambda_s": "st_density",
    "theta": "sinr_threshold",
    "q": "sampling_rate",
}
MAX_POINTS = 10_000
MODES = ("analytic", "simulate", "both")


@dataclass(frozen=True)
class Axis:
    name: str
    values: tuple

    def __post_init__(self):
        if self.name not in AXES:
            raise ScenarioError(f"unknown sweep axis {self.name!r}; expected one of {sorted(AXES)}")
        if not self.values:
            raise ScenarioError(f"sweep axis {self.name} has no values")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))


def parse_axis(text: str) -> Axis:
    """``name=start:stop:count`` (inclusive linspace) or ``name=v1,v2,...``."""
    name, sep, body = text.partition("=")
    if not sep:
        raise ScenarioError(f"sweep axis must look like name=values, got {text!r}")
    name = name.strip()
    try:
        if ":" in body:
            start, stop, count = body.split(":")
            n = int(count)
            if n < 1:
                raise ValueError
            values = np.linspace(float(start), float(stop), n)
            # round away linspace noise so grid values print cleanly
            values = tuple(float(f"{v:.12g}") for v in values)
        else:
            values = tuple(float(v) for v in body.split(","))
    except ValueError:
        raise ScenarioError(f"cannot parse sweep axis values {body!r}") from None
    return Axis(name, values)


@dataclass(frozen=True)
class SweepSpec:
    axis1: Axis
    axis2: Optional[Axis] = None
    policies: tuple = tuple(PolicyKind)
    mode: str = "analytic"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ScenarioError(f"sweep mode must be one of {MODES}, got {self.mode!r}")
        if self.axis2 is not None and self.axis2.name == self.axis1.name:
            raise ScenarioError("sweep axes must differ")
        object.__setattr__(self, "policies", tuple(PolicyKind.parse(p) for p in self.policies))
        if not self.policies:
            raise ScenarioError("sweep needs at least one policy")
        if self.n_points > MAX_POINTS:
            raise ScenarioError(f"sweep grid has {self.n_points} points, limit is {MAX_POINTS}")

    @property
    def axes(self) -> list[Axis]:
        return [self.axis1] if self.axis2 is None else [self.axis1, self.axis2]

    @property
    def n_points(self) -> int:
        return len(self.axis1.values) * (1 if self.axis2 is None else len(self.axis2.values))

    def points(self) -> list[dict]:
        """Grid points in emission order: axis2-major, then axis1."""
        outer = self.axis2.values if self.axis2 is not None else (None,)
        pts = []
        for v2 in outer:
            for v1 in self.axis1.values:
                p = {self.axis1.name: v1}
                if v2 is not None:
                    p[self.axis2.name] = v2
                pts.append(p)
        return pts


@dataclass
class ResultRow:
    index: int
    params: dict
    policy: PolicyKind
    aoi_analytic: object = None     # float, "unstable" or None
    aoi_sim: object = None
    aoi_sim_ci: Optional[float] = None
    mu_p_analytic: Optional[float] = None
    mu_p_sim: Optional[float] = None
    throughput_analytic: Optional[float] = None
    throughput_sim: Optional[float] = None
    stable: Optional[bool] = None
    status: str = "ok"


def point_scenario(base: Scenario, params: dict) -> Scenario:
    return base.with_overrides(**{AXES[k]: v for k, v in params.items()})


def point_seed(master_seed: int, index: int) -> int:
    return int(np.random.SeedSequence([master_seed, index]).generate_state(1)[0])


def check_grid(base: Scenario, grid: SweepSpec) -> None:
    """Reject the sweep up front if any axis value is outside its valid range."""
    for axis in grid.axes:
        for v in axis.values:
            try:
                point_scenario(base, {axis.name: v})
            except ScenarioError as exc:
                raise ScenarioError(f"sweep axis {axis.name}={v!r}: {exc}") from None


def evaluate_point(base: Scenario, grid: SweepSpec, index: int, params: dict,
                   slots: Optional[int], master_seed: int) -> list[ResultRow]:
    rows = [ResultRow(index, params, p) for p in grid.policies]
    try:
        sc = point_scenario(base, params)
        if grid.mode in ("analytic", "both"):
            rep = analyze(sc.network, sc.traffic, list(grid.policies))
            for row in rows:
                res = rep.aoi[row.policy]
                row.stable = res.stable
                row.aoi_analytic = res.mean_age if res.stable else "unstable"
                row.mu_p_analytic = rep.mu_p
                row.throughput_analytic = rep.throughput
        if grid.mode in ("simulate", "both"):
            seed = point_seed(master_seed, index)
            for row in rows:
                m = simulate_scenario(sc, row.policy, slots=slots, seed=seed)
                row.aoi_sim = "unstable" if m.diverged else m.mean_age
                row.aoi_sim_ci = None if m.diverged else m.ci_halfwidth("mean_age")
                row.mu_p_sim = m.emp_mu_p
                row.throughput_sim = m.emp_throughput
                if row.stable is None:
                    row.stable = not m.diverged
    except Exception as exc:  # noqa: BLE001 - recorded per point, the sweep goes on
        msg = f"error: {type(exc).__name__}: {exc}".replace("\n", " ")
        rows = [ResultRow(index, params, p, status=msg) for p in grid.policies]
    return rows


def _evaluate_star(args):
    return evaluate_point(*args)


def run_sweep(base: Scenario, grid: SweepSpec, *, jobs: int = 1, slots: Optional[int] = None,
              seed: Optional[int] = None) -> list[ResultRow]:
    check_grid(base, grid)
    master = base.sim.seed if seed is None else seed
    tasks = [(base, grid, i, p, slots, master) for i, p in enumerate(grid.points())]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_evaluate_star, tasks))
    else:
        chunks = [_evaluate_star(t) for t in tasks]
    order = {p: k for k, p in enumerate(grid.policies)}
    rows = [r for chunk in chunks for r in chunk]
    rows.sort(key=lambda r: (r.index, order[r.policy]))
    return rows


COLUMNS = ("policy", "aoi_analytic", "aoi_sim", "aoi_sim_ci95", "mu_p_analytic", "mu_p_sim",
           "throughput_analytic", "throughput_sim", "stable", "status")


def _cell(value) -> str:
    if isinstance(value, float) and math.isinf(value):
        return "unstable"
    return format_value(value)


def sweep_csv(base: Scenario, grid: SweepSpec, rows: list[ResultRow], *,
              slots: Optional[int] = None, seed: Optional[int] = None) -> str:
    buf = io.StringIO()
    sim = base.sim
    buf.write(f"# cogaoi sweep, tool_version={__version__}, schema_version={SCHEMA_VERSION}\n")
    buf.write(f"# seed={sim.seed if seed is None else seed}, mode={grid.mode}, "
              f"slots={sim.slots if slots is None else slots}, replications={sim.replications}\n")
    for axis in grid.axes:
        buf.write(f"# axis {axis.name} -> {AXES[axis.name]}: {len(axis.values)} values\n")
    base_net = dataclasses.asdict(base.network)
    buf.write("# base " + " ".join(f"{k}={format_value(v)}" for k, v in base_net.items())
              + f" arrival_rate={format_value(base.traffic.arrival_rate)}"
              + f" sampling_rate={format_value(base.traffic.sampling_rate)}\n")
    w = csv.writer(buf, lineterminator="\n")
    names = [a.name for a in grid.axes]
    w.writerow(names + list(COLUMNS))
    for r in rows:
        w.writerow([_cell(r.params[n]) for n in names] + [
            r.policy.value, _cell(r.aoi_analytic), _cell(r.aoi_sim), _cell(r.aoi_sim_ci),
            _cell(r.mu_p_analytic), _cell(r.mu_p_sim), _cell(r.throughput_analytic),
            _cell(r.throughput_sim), _cell(r.stable), r.status])
    return buf.getvalue()
