"""Monte Carlo sweeps, slope fitting and CSV output."""
from __future__ import annotations

import csv
import math
import os
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .network import ProtocolSettings, Topology, z_profile
from .noise import FIDELITY_FIELDS, HardwareProfile
from .protocol import run_episode

SWEEP_KINDS = ("single_param", "z", "num_links", "distance")
MIN_ERROR_EVENTS = 10
CSV_COLUMNS = ("sweep_var", "value", "mode", "runs", "mean_fidelity", "stderr_fidelity",
               "mean_latency_s", "failure_rate", "slope_eligible")


class SweepError(ValueError):
    pass


class SlopeFitError(ValueError):
    pass


def episode_seed(seed: int, point: int, run: int) -> int:
    """Seed of one episode; modes at the same point and run share it."""
    return int(np.random.SeedSequence([seed, point, run]).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class SweepSpec:
    """What to sweep and how.

    ``variable`` names a :class:`HardwareProfile` field for ``single_param``
    sweeps (grid values are parameter values, e.g. ``F_2q=0.999``). For the
    other kinds the grid holds z values, link counts or total distances (km).
    """

    kind: str
    grid: tuple[float, ...]
    variable: str = ""
    n_links: int = 2
    link_km: float = 20.0
    total_km: float = 100.0
    z: float | None = None
    runs: int = 1000
    seed: int = 0
    modes: tuple[str, ...] = ("cec",)
    base: HardwareProfile = field(default_factory=HardwareProfile)
    settings: ProtocolSettings = field(default_factory=ProtocolSettings)

    def __post_init__(self) -> None:
        if self.kind not in SWEEP_KINDS:
            raise SweepError(f"kind must be one of {SWEEP_KINDS}, got {self.kind!r}")
        grid = tuple(float(v) for v in self.grid)
        if not grid:
            raise SweepError("grid is empty")
        if list(grid) != sorted(grid):
            raise SweepError("grid must be sorted ascending")
        object.__setattr__(self, "grid", grid)
        if self.runs < 1:
            raise SweepError("runs must be at least 1")
        if not self.modes or any(m not in ("cec", "none") for m in self.modes):
            raise SweepError("modes must be a nonempty subset of ('cec', 'none')")
        if self.kind == "single_param":
            names = {f.name for f in fields(HardwareProfile)}
            if self.variable not in names:
                raise SweepError(f"unknown hardware parameter {self.variable!r}")
        # build every point once so infeasible configs fail before any run
        for v in grid:
            self.point(v)

    @property
    def sweep_var(self) -> str:
        return self.variable if self.kind == "single_param" else self.kind

    def point(self, value: float) -> tuple[Topology, HardwareProfile]:
        if self.kind == "single_param":
            profile = HardwareProfile.noiseless(
                **{k: getattr(self.base, k) for k in
                   ("eta_m", "eta_d", "alpha", "c_star", "D_fwd", "D_end", "t_prep")})
            if self.variable == "T2":
                profile = profile.with_(T1=self.base.T1, T2=value)
            else:
                profile = profile.with_(**{self.variable: value})
            return Topology.chain(self.n_links, self.link_km), profile
        if self.kind == "z":
            return Topology.chain(self.n_links, self.link_km), z_profile(value, self.base)
        profile = self.base if self.z is None else z_profile(self.z, self.base)
        if self.kind == "num_links":
            n = _as_count(value)
            return Topology.chain(n, self.total_km / n), profile
        n = _as_count(value / self.link_km)
        return Topology.chain(n, self.link_km), profile


def _as_count(v: float) -> int:
    n = int(round(v))
    if n < 1 or abs(n - v) > 1e-9:
        raise SweepError(f"{v} does not give a whole number of links")
    return n


@dataclass(frozen=True)
class PointResult:
    sweep_var: str
    value: float
    mode: str
    runs: int
    mean_fidelity: float
    stderr_fidelity: float
    mean_latency_s: float
    failure_rate: float
    slope_eligible: bool
    error_events: int = 0

    @property
    def logical_error(self) -> float:
        return 1.0 - self.mean_fidelity


def _run_chunk(args) -> list[tuple[float, float, bool]]:
    topology, profile, settings, seeds = args
    out = []
    for s in seeds:
        rec = run_episode(topology, profile, settings, s)
        out.append((rec.fidelity, rec.latency, rec.success))
    return out


def run_point(topology: Topology, profile: HardwareProfile, settings: ProtocolSettings,
              seeds: Sequence[int], jobs: int = 1, pool=None) -> list[tuple[float, float, bool]]:
    """Run one episode per seed; result order follows ``seeds`` regardless of ``jobs``."""
    if jobs <= 1 and pool is None:
        return _run_chunk((topology, profile, settings, list(seeds)))
    n_chunks = max(1, min(len(seeds), 4 * max(jobs, 1)))
    chunks = [list(c) for c in np.array_split(np.asarray(seeds, dtype=object), n_chunks) if len(c)]
    tasks = [(topology, profile, settings, c) for c in chunks]
    if pool is not None:
        parts = list(pool.map(_run_chunk, tasks))
    else:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(_run_chunk, tasks))
    return [r for part in parts for r in part]


def summarize(sweep_var: str, value: float, mode: str,
              results: Sequence[tuple[float, float, bool]]) -> PointResult:
    ok = [(f, t) for f, t, s in results if s]
    n = len(results)
    if ok:
        fid = np.array([f for f, _ in ok])
        mean = float(fid.mean())
        se = float(fid.std(ddof=1) / math.sqrt(len(fid))) if len(fid) > 1 else 0.0
        lat = float(np.mean([t for _, t in ok]))
        events = int(np.count_nonzero(fid < 1.0))
    else:
        mean = se = lat = float("nan")
        events = 0
    return PointResult(sweep_var, float(value), mode, n, mean, se, lat, 1.0 - len(ok) / n,
                       bool(events >= MIN_ERROR_EVENTS and mean < 1.0), events)


def run_sweep(spec: SweepSpec, jobs: int = 1, out: str | Path | None = None,
              progress=None) -> list[PointResult]:
    """Every (grid point, mode) pair; the same episode seeds are used for all modes."""
    rows = []
    pool = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        for i, v in enumerate(spec.grid):
            topology, profile = spec.point(v)
            seeds = [episode_seed(spec.seed, i, r) for r in range(spec.runs)]
            for mode in spec.modes:
                settings = replace(spec.settings, cec_mode=mode)
                res = run_point(topology, profile, settings, seeds, jobs, pool)
                row = summarize(spec.sweep_var, v, mode, res)
                rows.append(row)
                if progress is not None:
                    progress(row)
    finally:
        if pool is not None:
            pool.shutdown()
    if out is not None:
        emit_csv(rows, out)
    return rows


@dataclass(frozen=True)
class SlopeFit:
    points: tuple[tuple[float, float], ...]
    slope: float
    intercept: float
    r2: float


def fit_slope(points: Iterable[tuple[float, float]]) -> SlopeFit:
    """Least squares on ``(log10 x, log10 y)``.

    Needs at least 3 points with positive coordinates spanning a decade in x.
    """
    pts = tuple((float(x), float(y)) for x, y in points if x > 0 and y > 0)
    if len(pts) < 3:
        raise SlopeFitError(f"need at least 3 usable points, got {len(pts)}")
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    if xs.max() / xs.min() < 10.0 * (1 - 1e-9):
        raise SlopeFitError(f"x spans only {xs.max() / xs.min():.2f}x; need one decade")
    lx, ly = np.log10(xs), np.log10(ys)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return SlopeFit(pts, float(slope), float(intercept), r2)


def physical_error(variable: str, value: float) -> float:
    """x-axis of a threshold plot: infidelity for fidelity parameters."""
    if variable in FIDELITY_FIELDS:
        return 1.0 - value
    raise SweepError(f"no error-rate mapping for {variable!r}")


def slope_from_rows(rows: Sequence[PointResult], mode: str = "cec") -> SlopeFit:
    pts = [(physical_error(r.sweep_var, r.value), r.logical_error)
           for r in rows if r.mode == mode and r.slope_eligible]
    return fit_slope(pts)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit_csv(rows: Sequence[PointResult], path: str | Path) -> None:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_COLUMNS)
            for r in rows:
                w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def read_csv(path: str | Path) -> list[PointResult]:
    with Path(path).open(newline="") as fh:
        rd = csv.DictReader(fh)
        if tuple(rd.fieldnames or ()) != CSV_COLUMNS:
            raise SweepError(f"unexpected CSV header {rd.fieldnames}")
        return [PointResult(r["sweep_var"], float(r["value"]), r["mode"], int(r["runs"]),
                            float(r["mean_fidelity"]), float(r["stderr_fidelity"]),
                            float(r["mean_latency_s"]), float(r["failure_rate"]),
                            r["slope_eligible"] == "1") for r in rd]


# figure bundles at desk scale

def _from_infidelity(*eps: float) -> tuple[float, ...]:
    return tuple(sorted(round(1.0 - e, 12) for e in eps))


# each grid spans a decade of infidelity where 20k runs see >= 10 logical errors
THRESHOLD_GRIDS = {
    "F_2q": _from_infidelity(0.0015, 0.0025, 0.004, 0.0065, 0.01, 0.015),
    "F_m": _from_infidelity(0.003, 0.005, 0.008, 0.013, 0.02, 0.03),
    "F_phys": _from_infidelity(0.006, 0.01, 0.016, 0.025, 0.04, 0.06),
    "F_1q": _from_infidelity(0.003, 0.005, 0.008, 0.013, 0.02, 0.03),
    "F_init": _from_infidelity(0.003, 0.005, 0.008, 0.013, 0.02, 0.03),
}
Z_GRID = (0.0, 0.25, 0.5, 0.65, 0.8, 0.9, 0.95, 1.0)
NUM_LINKS_GRID = (1, 2, 5, 10, 20, 50, 100)
DISTANCE_GRID = (20, 100, 200, 400, 1000, 2000)


def threshold_specs(runs: int, seed: int, n_links: int = 2, link_km: float = 20.0,
                    variables: Sequence[str] | None = None) -> list[SweepSpec]:
    return [SweepSpec("single_param", THRESHOLD_GRIDS[v], variable=v, n_links=n_links,
                      link_km=link_km, runs=runs, seed=seed, modes=("cec",))
            for v in (variables or THRESHOLD_GRIDS)]


def zsweep_specs(runs: int, seed: int, links: Sequence[int] = (1, 2, 5),
                 link_km: float = 20.0) -> list[SweepSpec]:
    return [SweepSpec("z", Z_GRID, n_links=k, link_km=link_km, runs=runs, seed=seed)
            for k in links]


def scale_specs(runs: int, seed: int, z: float = 0.9) -> list[SweepSpec]:
    return [
        SweepSpec("num_links", NUM_LINKS_GRID, total_km=100.0, z=z, runs=runs, seed=seed,
                  modes=("cec", "none")),
        SweepSpec("distance", DISTANCE_GRID, link_km=20.0, z=z, runs=runs, seed=seed,
                  modes=("cec", "none")),
    ]


def default_jobs() -> int:
    return max(1, (os.cpu_count() or 1))
