"""Synthetic benchmark: datasets on disk, lambda sweeps, result rows and tables.

A dataset directory holds ``truth.tif``, ``measured.tif`` (float32 pages, one
per frame) and ``dataset.json`` with everything needed to regenerate both.
A result directory holds ``restored.tif``, ``trajectory.json`` and
``row.json``.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
import tifffile

from . import __version__
from .admm import AdmmConfig
from .drivers import ALGORITHMS, RestoreConfig, restore
from .simkit import DegradeSpec, PhantomSpec, degrade, make_phantom, make_psf, metrics

__all__ = [
    "DEFAULT_GRID",
    "Dataset",
    "Job",
    "JobManifest",
    "ResultRow",
    "SolverParams",
    "comparison_table",
    "data_scale",
    "format_table",
    "lambda_grid",
    "load_dataset",
    "read_rows",
    "read_volume",
    "run_job",
    "run_manifest",
    "simulate",
    "sweep",
    "write_dataset",
    "write_rows",
    "write_volume",
]

log = logging.getLogger(__name__)

DEFAULT_GRID = (1e-3, 1.0, 8)  # lo, hi, points; relative to the data scale
DEFAULT_PEAK = 100.0  # photons at the brightest ground-truth pixel


def lambda_grid(lo=DEFAULT_GRID[0], hi=DEFAULT_GRID[1], n=DEFAULT_GRID[2]):
    if not (lo > 0 and hi >= lo and n >= 1):
        raise ValueError(f"bad lambda grid ({lo}, {hi}, {n})")
    return tuple(float(x) for x in np.geomspace(lo, hi, int(n)))


def data_scale(m):
    """Scale that relative lambda values refer to: the mean measured value.

    A normalised blur preserves the mean, so every NA of one phantom sees the
    same absolute grid.
    """
    scale = abs(float(np.mean(m)))
    if not scale > 0:
        raise ValueError("measured volume has zero mean; pass absolute lambda values")
    return scale


# ---------------------------------------------------------------- file IO


def write_volume(path, volume):
    """One float32 page per frame."""
    vol = np.asarray(volume, dtype=np.float32)
    tifffile.imwrite(path, vol, photometric="minisblack", metadata={"axes": "TYX" if vol.ndim == 3 else "YX"})


def read_volume(path):
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such volume: {path}")
    vol = tifffile.imread(path).astype(np.float64)
    return vol[None] if vol.ndim == 2 else vol


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------- datasets


@dataclass(frozen=True)
class Dataset:
    phantom_id: str
    phantom: PhantomSpec
    degrade: DegradeSpec
    peak: float = DEFAULT_PEAK
    noise_seed: int = 0

    @property
    def name(self):
        return f"{self.phantom_id}_na{self.degrade.na:.2f}"

    def truth(self):
        return self.peak * make_phantom(self.phantom)

    def generate(self):
        g = self.truth()
        return g, degrade(g, self.degrade, self.noise_seed)

    def psf(self):
        return make_psf(self.degrade)

    def to_dict(self):
        return {
            "phantom_id": self.phantom_id,
            "phantom": self.phantom.to_dict(),
            "degrade": self.degrade.to_dict(),
            "peak": self.peak,
            "noise_seed": self.noise_seed,
            "version": __version__,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            phantom_id=str(d["phantom_id"]),
            phantom=PhantomSpec(**d["phantom"]),
            degrade=DegradeSpec(**d["degrade"]),
            peak=float(d.get("peak", DEFAULT_PEAK)),
            noise_seed=int(d.get("noise_seed", 0)),
        )


def write_dataset(ds, out_dir):
    """Generate and write one dataset; returns its directory."""
    d = Path(out_dir) / ds.name
    d.mkdir(parents=True, exist_ok=True)
    g, m = ds.generate()
    write_volume(d / "truth.tif", g)
    write_volume(d / "measured.tif", m)
    _write_json(d / "dataset.json", ds.to_dict())
    return d


def load_dataset(measured_path):
    """Read a measured volume and the sidecar next to it."""
    measured_path = Path(measured_path)
    m = read_volume(measured_path)
    sidecar = measured_path.parent / "dataset.json"
    if not sidecar.is_file():
        raise FileNotFoundError(f"sidecar {sidecar} not found next to {measured_path}")
    return m, Dataset.from_dict(json.loads(sidecar.read_text()))


# ---------------------------------------------------------------- jobs


@dataclass(frozen=True)
class SolverParams:
    """Per-run solver settings shared by every point of a lambda sweep."""

    tau: float = 10.0
    rho: float = 0.2
    n_outer: int = 4
    n_inner: int = 15
    alpha_fixed: float = 0.5

    def config(self, algorithm, lam):
        from .weights import ConstantTau

        return RestoreConfig(
            lam=lam,
            tau=ConstantTau(self.tau),
            admm=AdmmConfig(rho=self.rho, max_iter=self.n_inner),
            n_outer=self.n_outer,
            algorithm=algorithm,
            alpha_fixed=self.alpha_fixed,
        )


@dataclass(frozen=True)
class Job:
    dataset: Dataset
    algorithm: str
    grid: tuple  # relative lambda values
    solver: SolverParams = SolverParams()

    @property
    def name(self):
        return f"{self.dataset.name}_{self.algorithm}"


@dataclass(frozen=True)
class JobManifest:
    """Cartesian product of phantoms, NA values and algorithms.

    JSON layout::

        {"phantoms": [{"id": "disks", "scene": "moving-disks", "shape": [8, 64, 64],
                       "motion": 1.0, "seed": 0}],
         "na": [0.8, 1.0, 1.2],
         "algorithms": ["pstaic", "pictv"],
         "lambda_grid": {"lo": 0.001, "hi": 1.0, "n": 8},
         "degrade": {"wavelength_nm": 500, "pixel_nm": 100},
         "peak": 100, "noise_seed": 0,
         "solver": {"tau": 10, "rho": 0.2, "n_outer": 4, "n_inner": 15},
         "workers": 1}
    """

    jobs: tuple
    workers: int = 1

    def __post_init__(self):
        if not self.jobs:
            raise ValueError("manifest has no jobs")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        for job in self.jobs:
            if not job.grid or min(job.grid) <= 0:
                raise ValueError("lambda grid values must be positive")

    @property
    def datasets(self):
        seen = {}
        for job in self.jobs:
            seen.setdefault(job.dataset.name, job.dataset)
        return list(seen.values())

    @classmethod
    def from_dict(cls, d):
        try:
            phantoms = d["phantoms"]
            nas = [float(x) for x in d.get("na", [1.0])]
            algorithms = list(d.get("algorithms", ["pstaic", "pictv"]))
            grid_spec = d.get("lambda_grid", dict(zip(("lo", "hi", "n"), DEFAULT_GRID)))
            base = dict(d.get("degrade", {}))
            solver = SolverParams(**d.get("solver", {}))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"invalid manifest: {exc}") from exc
        for a in algorithms:
            if a not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {a!r} in manifest")
        # a {lo, hi, n} mapping is log-spaced; a list is taken as given
        if isinstance(grid_spec, dict):
            grid = lambda_grid(grid_spec["lo"], grid_spec["hi"], grid_spec["n"])
        else:
            grid = tuple(float(x) for x in grid_spec)
        jobs = []
        for p in phantoms:
            p = dict(p)
            pid = str(p.pop("id", p.get("scene", "phantom")))
            pspec = PhantomSpec(**p)
            for na in nas:
                ds = Dataset(
                    phantom_id=pid,
                    phantom=pspec,
                    degrade=DegradeSpec(**{**base, "na": na}),
                    peak=float(d.get("peak", DEFAULT_PEAK)),
                    noise_seed=int(d.get("noise_seed", 0)),
                )
                jobs.extend(Job(ds, a, grid, solver) for a in algorithms)
        return cls(tuple(jobs), int(d.get("workers", 1)))

    @classmethod
    def load(cls, path):
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"manifest not found: {path}")
        try:
            return cls.from_dict(json.loads(path.read_text()))
        except json.JSONDecodeError as exc:
            raise ValueError(f"manifest {path} is not valid JSON: {exc}") from exc


# ---------------------------------------------------------------- results


@dataclass(frozen=True)
class ResultRow:
    phantom: str
    na: float
    algorithm: str
    best_lambda: float
    snr_db: float
    ssim: float
    alpha_final: float
    runtime_s: float
    input_snr_db: float = math.nan

    @classmethod
    def from_dict(cls, d):
        kinds = {f.name: f.type for f in fields(cls)}
        return cls(**{k: (str(v) if kinds[k] == "str" else float(v)) for k, v in d.items() if k in kinds})


def write_rows(path, rows):
    names = [f.name for f in fields(ResultRow)]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=names)
        w.writeheader()
        for r in rows:
            # repr keeps every bit of a float through the text round trip
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in asdict(r).items()})


def read_rows(path):
    path = Path(path)
    if path.is_dir():
        rows = [ResultRow.from_dict(json.loads(p.read_text())) for p in sorted(path.rglob("row.json"))]
    else:
        with open(path, newline="") as fh:
            rows = [ResultRow.from_dict(r) for r in csv.DictReader(fh)]
    if not rows:
        raise ValueError(f"no result rows under {path}")
    return rows


@dataclass(eq=False)
class SweepResult:
    row: ResultRow
    restored: np.ndarray
    trajectories: list = field(default_factory=list)


def sweep(m, truth, h, algorithm, lams, solver=SolverParams(), phantom="", na=math.nan):
    """Restore at every absolute lambda in ``lams`` and keep the best SNR.

    Raises whatever the solver raises; callers map that to a failure.
    """
    best = None
    trajectories = []
    start = time.perf_counter()
    for lam in lams:
        rep = restore(m, h, solver.config(algorithm, float(lam)))
        q = metrics(truth, rep.g)
        trajectories.append(
            {
                "lambda": float(lam),
                "snr_db": q.snr_db,
                "ssim": q.ssim,
                "alphas": rep.alphas,
                "costs": rep.costs,
                "c1": rep.c1,
                "c2": rep.c2,
                "taus": rep.taus,
                "inner_iterations": [len(r) for r in rep.residuals],
                "wall_time": rep.wall_time,
            }
        )
        if best is None or q.snr_db > best[1].snr_db:
            best = (float(lam), q, rep)
    lam, q, rep = best
    row = ResultRow(
        phantom=phantom,
        na=float(na),
        algorithm=algorithm,
        best_lambda=lam,
        snr_db=q.snr_db,
        ssim=q.ssim,
        alpha_final=float(rep.alphas[-1]),
        runtime_s=time.perf_counter() - start,
        input_snr_db=metrics(truth, m).snr_db,
    )
    return SweepResult(row, rep.g, trajectories)


def write_result(out_dir, result):
    d = Path(out_dir)
    d.mkdir(parents=True, exist_ok=True)
    write_volume(d / "restored.tif", result.restored)
    _write_json(d / "trajectory.json", result.trajectories)
    _write_json(d / "row.json", asdict(result.row))
    return d


def run_job(job, data_dir, out_dir):
    """Restore one dataset that `simulate` already wrote; returns the row."""
    ds_dir = Path(data_dir) / job.dataset.name
    m = read_volume(ds_dir / "measured.tif")
    truth = read_volume(ds_dir / "truth.tif")
    lams = [r * data_scale(m) for r in job.grid]
    res = sweep(m, truth, job.dataset.psf(), job.algorithm, lams, job.solver, job.dataset.phantom_id, job.dataset.degrade.na)
    write_result(Path(out_dir) / job.name, res)
    log.info("%s: best lambda %.3g, SNR %.2f dB", job.name, res.row.best_lambda, res.row.snr_db)
    return res.row


def simulate(manifest, out_dir):
    return [write_dataset(ds, out_dir) for ds in manifest.datasets]


def run_manifest(manifest, out_dir):
    """Simulate every dataset, then run the jobs, each in its own subdirectory."""
    out_dir = Path(out_dir)
    data_dir = out_dir / "data"
    res_dir = out_dir / "results"
    simulate(manifest, data_dir)
    if manifest.workers > 1:
        with ProcessPoolExecutor(max_workers=min(manifest.workers, os.cpu_count() or 1)) as pool:
            rows = list(pool.map(run_job, manifest.jobs, [data_dir] * len(manifest.jobs), [res_dir] * len(manifest.jobs)))
    else:
        rows = [run_job(job, data_dir, res_dir) for job in manifest.jobs]
    write_rows(out_dir / "results.csv", rows)
    return rows


# ---------------------------------------------------------------- reports


def comparison_table(rows, ours="pstaic", baseline="pictv"):
    """One line per (phantom, NA) with both methods side by side.

    ``winner`` is the method with the higher SNR, or ``-`` when a side is
    missing.
    """
    cells = {}
    for r in rows:
        cells.setdefault((r.phantom, r.na), {})[r.algorithm] = r
    table = []
    for (phantom, na), algos in sorted(cells.items()):
        a, b = algos.get(ours), algos.get(baseline)
        line = {"phantom": phantom, "na": na}
        for tag, r in ((ours, a), (baseline, b)):
            line[f"{tag}_ssim"] = r.ssim if r else math.nan
            line[f"{tag}_snr_db"] = r.snr_db if r else math.nan
        if a and b:
            line["winner"] = ours if a.snr_db >= b.snr_db else baseline
        elif a or b:
            line["winner"] = "-"
        table.append(line)
    return table


def tally(table, ours="pstaic"):
    decided = [t for t in table if t["winner"] != "-"]
    wins = sum(t["winner"] == ours for t in decided)
    return wins, len(decided) - wins


def format_table(rows, fmt="csv"):
    algos = sorted({r.algorithm for r in rows})
    if {"pstaic", "pictv"} <= set(algos):
        table = comparison_table(rows)
        wins, losses = tally(table)
        footer = f"pstaic wins {wins}, pictv wins {losses}"
    else:
        table = [{k: v for k, v in asdict(r).items() if k != "input_snr_db"} for r in rows]
        footer = None
    if not table:
        raise ValueError("nothing to report")
    cols = list(table[0])

    def fmt_cell(v):
        return f"{v:.4f}" if isinstance(v, float) else str(v)

    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for t in table:
            w.writerow([fmt_cell(t[c]) for c in cols])
        return buf.getvalue()
    if fmt == "md":
        lines = ["| " + " | ".join(cols) + " |", "|" + "---|" * len(cols)]
        lines += ["| " + " | ".join(fmt_cell(t[c]) for c in cols) + " |" for t in table]
        if footer:
            lines += ["", footer]
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def plot_trajectories(result_dir, out_dir=None):
    """Alpha and cost per outer step for every job; needs matplotlib."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    result_dir = Path(result_dir)
    out_dir = Path(out_dir or result_dir)
    written = []
    for traj_path in sorted(result_dir.rglob("trajectory.json")):
        row = json.loads((traj_path.parent / "row.json").read_text())
        best = min(json.loads(traj_path.read_text()), key=lambda t: abs(t["lambda"] - row["best_lambda"]))
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3))
        ax1.plot(range(1, len(best["alphas"]) + 1), best["alphas"], "o-")
        ax1.set(xlabel="outer step", ylabel="alpha_s", ylim=(0, 1))
        ax2.semilogy(range(1, len(best["costs"]) + 1), best["costs"], "o-")
        ax2.set(xlabel="outer step", ylabel="cost")
        fig.suptitle(traj_path.parent.name)
        fig.tight_layout()
        path = out_dir / f"{traj_path.parent.name}.png"
        fig.savefig(path, dpi=80)
        plt.close(fig)
        written.append(path)
    return written
