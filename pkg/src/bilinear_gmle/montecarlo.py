"""Replicated simulate-and-estimate experiments.

Replication r of cell c always draws from the stream (master_seed, c, r), so
results do not depend on the number of workers or on scheduling order.
"""
from __future__ import annotations

import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Literal, Sequence

import numpy as np
from scipy import stats

from .errors import BilinearError, OmegaClippedWarning
from .estimation import confidence_intervals, fit_gmle
from .inference import test_b_zero
from .likelihood import PARAM_NAMES, ParamSpace
from .model import DEFAULT_BURN_IN, GAUSSIAN, ErrorLaw, ModelParams, simulate
from .rng import stream

Mode = Literal["estimation", "size_power", "coverage"]
MODES = ("estimation", "size_power", "coverage")
SUMMARY_PARAMS = PARAM_NAMES + ("b_hat", "2b_bhat")
MAX_FAILURE_RATE = 0.5


@dataclass(frozen=True)
class Cell:
    params: ModelParams
    n: int
    replications: int
    law: ErrorLaw = GAUSSIAN
    label: str | None = None

    def __post_init__(self):
        if self.replications < 2:
            raise ValueError("each cell needs at least 2 replications")

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        return f"(b={self.params.b:.6g}, phi={self.params.phi:.6g}, n={self.n})"

    def to_dict(self) -> dict:
        p = self.params
        out = {"mu": p.mu, "phi": p.phi, "sigma2": p.sigma2, "b": p.b, "n": self.n,
               "replications": self.replications, "law": self.law.describe()}
        if self.label:
            out["label"] = self.label
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "Cell":
        n = int(d["n"])
        if "b_star" in d:
            b = float(d["b_star"]) * n ** -0.25
        else:
            b = float(d["b"])
        law = d.get("law", {"kind": "gaussian"})
        if isinstance(law, str):
            law = {"kind": law}
        params = ModelParams(float(d.get("mu", 0.0)), float(d["phi"]), float(d.get("sigma2", 1.0)), b)
        return cls(params, n, int(d["replications"]), ErrorLaw(**law), d.get("label"))


@dataclass(frozen=True)
class ExperimentSpec:
    cells: tuple[Cell, ...]
    master_seed: int = 0
    mode: Mode = "estimation"
    space: ParamSpace | None = None
    levels: tuple[float, ...] = (0.1, 0.05)
    burn_in: int = DEFAULT_BURN_IN
    coverage_level: float = 0.95

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not self.cells:
            raise ValueError("experiment has no cells")

    def resolved_space(self) -> ParamSpace:
        if self.space is not None:
            return self.space
        return ParamSpace.boundary() if self.mode == "size_power" else ParamSpace()

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "master_seed": self.master_seed,
            "burn_in": self.burn_in,
            "levels": list(self.levels),
            "coverage_level": self.coverage_level,
            "space": asdict(self.resolved_space()),
            "cells": [c.to_dict() for c in self.cells],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        space = ParamSpace(**d["space"]) if d.get("space") else None
        return cls(
            cells=tuple(Cell.from_dict(c) for c in d["cells"]),
            master_seed=int(d.get("master_seed", 0)),
            mode=d.get("mode", "estimation"),
            space=space,
            levels=tuple(float(x) for x in d.get("levels", (0.1, 0.05))),
            burn_in=int(d.get("burn_in", DEFAULT_BURN_IN)),
            coverage_level=float(d.get("coverage_level", 0.95)),
        )

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentSpec":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class Replication:
    ok: bool
    error: str | None = None
    theta: np.ndarray | None = None
    se: np.ndarray | None = None
    b_hat: float = math.nan
    at_boundary: bool = False
    omega_clipped: bool = False
    sigma_pd: bool = True
    sandwich_psd: bool = True
    statistic: float = math.nan
    sigma44_null: float = math.nan
    covered: dict | None = None


def run_replication(spec: ExperimentSpec, cell_index: int, r: int) -> Replication:
    cell = spec.cells[cell_index]
    rng = stream(spec.master_seed, cell_index, r)
    try:
        data = simulate(cell.params, cell.law, cell.n, spec.burn_in, rng)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", OmegaClippedWarning)
            fit = fit_gmle(data, spec.resolved_space())
            out = Replication(
                ok=True,
                theta=fit.theta_hat.to_array(),
                se=fit.se_theta.copy(),
                b_hat=fit.b_hat,
                at_boundary=fit.at_boundary,
                omega_clipped=fit.omega_clipped,
                sigma_pd=_is_pd(fit.sigma_hat),
                sandwich_psd=_is_psd(fit.sandwich),
            )
            if spec.mode == "size_power":
                test = test_b_zero(data, spec.levels[0], fit=fit)
                out.statistic, out.sigma44_null = test.statistic, test.sigma44_hat_null
            elif spec.mode == "coverage" and not fit.at_boundary:
                truth = dict(zip(PARAM_NAMES, (cell.params.mu, cell.params.phi, cell.params.sigma2,
                                               cell.params.b_squared())))
                truth["b"] = cell.params.b
                out.covered = {
                    name: bool(lo <= truth[name] <= hi)
                    for name, lo, hi in confidence_intervals(fit, level=spec.coverage_level)
                }
        return out
    except (BilinearError, np.linalg.LinAlgError, FloatingPointError) as exc:
        return Replication(ok=False, error=f"{type(exc).__name__}: {exc}")


def _is_pd(m: np.ndarray) -> bool:
    d = np.sqrt(np.diag(m))
    return bool(np.all(d > 0) and np.linalg.eigvalsh(m / np.outer(d, d)).min() > 0)


def _is_psd(m: np.ndarray) -> bool:
    d = np.sqrt(np.clip(np.diag(m), 0.0, None))
    if not np.all(d > 0):
        return bool(np.all(np.linalg.eigvalsh(m) >= 0))
    return bool(np.linalg.eigvalsh(m / np.outer(d, d)).min() >= -1e-10)


def _run_task(args) -> Replication:
    return run_replication(*args)


@dataclass
class McSummary:
    cell: Cell
    replications: int
    failures: int
    aborted: bool
    stats: dict[str, dict[str, float]] = field(default_factory=dict)
    rejection: dict[float, float] = field(default_factory=dict)
    coverage: dict[str, float] = field(default_factory=dict)
    n_boundary: int = 0
    n_clipped: int = 0
    n_sigma_not_pd: int = 0
    n_sandwich_not_psd: int = 0
    theta: np.ndarray | None = None
    se: np.ndarray | None = None
    b_hat: np.ndarray | None = None
    errors: list[str] = field(default_factory=list)

    @property
    def n_success(self) -> int:
        return self.replications - self.failures

    def mc_se(self, param: str) -> float:
        """Monte Carlo standard error of the sample mean of a parameter."""
        return self.stats[param]["SD"] / math.sqrt(self.n_success)


def _mean_sd(x: np.ndarray) -> tuple[float, float]:
    return float(np.mean(x)), float(np.std(x, ddof=1)) if x.size > 1 else math.nan


def summarize(cell: Cell, reps: Sequence[Replication], mode: Mode, levels: Sequence[float]) -> McSummary:
    good = [r for r in reps if r.ok]
    failures = len(reps) - len(good)
    summary = McSummary(cell, len(reps), failures, aborted=failures > MAX_FAILURE_RATE * len(reps),
                        errors=[r.error for r in reps if not r.ok])
    if summary.aborted or len(good) < 2:
        summary.aborted = True
        return summary

    theta = np.array([r.theta for r in good])
    se = np.array([r.se for r in good])
    b_hat = np.array([r.b_hat for r in good])
    summary.theta, summary.se, summary.b_hat = theta, se, b_hat
    summary.n_boundary = sum(r.at_boundary for r in good)
    summary.n_clipped = sum(r.omega_clipped for r in good)
    summary.n_sigma_not_pd = sum(not r.sigma_pd for r in good)
    summary.n_sandwich_not_psd = sum(not r.sandwich_psd for r in good)

    for k, name in enumerate(PARAM_NAMES):
        e, sd = _mean_sd(theta[:, k])
        summary.stats[name] = {"E": e, "SD": sd, "SDhat": float(np.mean(se[:, k]))}
    with np.errstate(divide="ignore"):
        se_b = se[:, 3] / (2.0 * np.abs(b_hat))
    e, sd = _mean_sd(b_hat)
    summary.stats["b_hat"] = {"E": e, "SD": sd, "SDhat": float(np.mean(se_b))}
    b = cell.params.b
    e, sd = _mean_sd(2.0 * b * b_hat)
    with np.errstate(divide="ignore", invalid="ignore"):
        trueb = float(np.mean(abs(b) * se[:, 3] / np.abs(b_hat)))
    summary.stats["2b_bhat"] = {"E": e, "SD": sd, "SDhat": float(np.mean(se[:, 3])), "SDhat_trueb": trueb}

    if mode == "size_power":
        stat = np.array([r.statistic for r in good])
        s44 = np.array([r.sigma44_null for r in good])
        for level in levels:
            crit = np.sqrt(s44) * stats.norm.isf(level) / math.sqrt(cell.n)
            summary.rejection[float(level)] = float(np.mean(stat > crit))
    elif mode == "coverage":
        cov = [r.covered for r in good if r.covered is not None]
        if cov:
            for name in cov[0]:
                summary.coverage[name] = float(np.mean([c[name] for c in cov]))
    return summary


def run_experiment(spec: ExperimentSpec, workers: int = 1) -> list[McSummary]:
    """Run every cell of ``spec``; output is independent of ``workers``."""
    tasks = [(spec, c, r) for c, cell in enumerate(spec.cells) for r in range(cell.replications)]
    if workers <= 1:
        results = [_run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    out, start = [], 0
    for cell in spec.cells:
        out.append(summarize(cell, results[start : start + cell.replications], spec.mode, spec.levels))
        start += cell.replications
    return out


def size_power_table(spec: ExperimentSpec, levels: Sequence[float] | None = None, workers: int = 1) -> list[McSummary]:
    """Empirical rejection rates of the b = 0 test per cell and level."""
    if levels is not None:
        spec = ExperimentSpec(spec.cells, spec.master_seed, "size_power", spec.space, tuple(levels), spec.burn_in)
    elif spec.mode != "size_power":
        spec = ExperimentSpec(spec.cells, spec.master_seed, "size_power", spec.space, spec.levels, spec.burn_in)
    return run_experiment(spec, workers)


# ---------------------------------------------------------------------------
# Presets mirroring the published simulation designs


def estimation_design(n: int, replications: int, master_seed: int = 2014,
                      cells: Sequence[tuple[float, float]] | None = None) -> ExperimentSpec:
    if cells is None:
        cells = [(b, phi) for b in (0.1, -0.1, 1.0, -1.0) for phi in (0.0, 0.9)]
    return ExperimentSpec(
        tuple(Cell(ModelParams(0.0, phi, 1.0, b), n, replications) for b, phi in cells),
        master_seed=master_seed,
        mode="estimation",
    )


def table1_spec(replications: int = 300, master_seed: int = 2014, cells=None) -> ExperimentSpec:
    return estimation_design(200, replications, master_seed, cells)


def table2_spec(replications: int = 300, master_seed: int = 2015, cells=None) -> ExperimentSpec:
    return estimation_design(1000, replications, master_seed, cells)


def table3_spec(replications: int = 2000, master_seed: int = 2016, cells=None) -> ExperimentSpec:
    """cells: iterable of (n, phi, b_star) with b = b_star * n**-0.25."""
    if cells is None:
        cells = [(n, phi, bs) for n in (200, 1000) for phi in (0.1, 0.9) for bs in (0.0, 0.5, 1.0)]
    return ExperimentSpec(
        tuple(
            Cell(ModelParams(0.0, phi, 1.0, bs * n ** -0.25), n, replications,
                 label=f"(n={n}, phi={phi:g}, b={bs:g}n^-0.25)")
            for n, phi, bs in cells
        ),
        master_seed=master_seed,
        mode="size_power",
        levels=(0.1, 0.05),
    )


# ---------------------------------------------------------------------------
# CSV output


def _fmt(x: float) -> str:
    return "nan" if x is None or (isinstance(x, float) and math.isnan(x)) else f"{x:.17g}"


def write_estimation_csv(path: str | Path, summaries: Sequence[McSummary]) -> None:
    """Rows are (parameter, statistic); columns are cells."""
    lines = ["parameter,statistic," + ",".join(f'"{s.cell.name}"' for s in summaries)]
    for name in SUMMARY_PARAMS:
        stat_names = ("E", "SD", "SDhat") + (("SDhat_trueb",) if name == "2b_bhat" else ())
        for stat in stat_names:
            row = [_fmt(s.stats.get(name, {}).get(stat, math.nan)) for s in summaries]
            lines.append(f"{name},{stat}," + ",".join(row))
    for key in ("replications", "failures", "n_boundary", "n_clipped"):
        lines.append(f"meta,{key}," + ",".join(str(getattr(s, key)) for s in summaries))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_size_power_csv(path: str | Path, summaries: Sequence[McSummary], levels: Sequence[float]) -> None:
    head = ["cell", "n", "phi", "b"] + [f"level_{lv:g}" for lv in levels] + ["replications", "failures"]
    lines = [",".join(head)]
    for s in summaries:
        p = s.cell.params
        row = [f'"{s.cell.name}"', str(s.cell.n), _fmt(p.phi), _fmt(p.b)]
        row += [_fmt(s.rejection.get(float(lv), math.nan)) for lv in levels]
        row += [str(s.replications), str(s.failures)]
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_coverage_csv(path: str | Path, summaries: Sequence[McSummary]) -> None:
    names = PARAM_NAMES + ("b",)
    lines = [",".join(["cell", *names, "n_boundary", "replications", "failures"])]
    for s in summaries:
        row = [f'"{s.cell.name}"'] + [_fmt(s.coverage.get(k, math.nan)) for k in names]
        row += [str(s.n_boundary), str(s.replications), str(s.failures)]
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_summaries(path: str | Path, spec: ExperimentSpec, summaries: Sequence[McSummary]) -> None:
    if spec.mode == "size_power":
        write_size_power_csv(path, summaries, spec.levels)
    elif spec.mode == "coverage":
        write_coverage_csv(path, summaries)
    else:
        write_estimation_csv(path, summaries)
