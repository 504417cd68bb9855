"""Config-driven orchestration: seeded runs on either backend, series and
snapshot recording, CSV + manifest persistence, sweeps and post-processing.

A run iterates the map from the delta state at n = 0, recording
(t, <n^2>, IPR, norm error) every `record_every` kicks and dumping the full
momentum distribution at the requested snapshot times.  Realization r of a
run derives its stream from seed XOR r.  Identical config and seed reproduce
every output file byte for byte.
"""

from __future__ import annotations

import hashlib
import json
import time
import warnings
from dataclasses import dataclass, replace
from enum import Enum
from itertools import product
from pathlib import Path

import numpy as np

from . import __version__
from .observables import (
    ObservableSeries,
    ProbabilityDistribution,
    detect_peaks,
    detect_tp,
    detected_power_of_two_levels,
    fit_diffusion,
    plateau_level,
    predict_timescales,
    probabilities,
)
from .qft import GatePlan, NoiseModel, build_qft_plan, step_gates
from .rotor import RotatorParams, init_delta_state, signed_levels, step_exact

NORM_ABORT = 1e-6  # far above honest numerical drift; fires only on real bugs


class NormDriftError(RuntimeError):
    """Wavefunction norm drifted past the abort threshold mid-run."""


class Backend(Enum):
    EXACT = "exact"
    GATES = "gates"


@dataclass(frozen=True)
class ExperimentConfig:
    backend: Backend
    n_q: int
    k: float
    K: float
    steps: int
    epsilon: float = 0.0
    record_every: int = 1
    snapshot_times: tuple[int, ...] = ()
    seed: int = 0
    realizations: int = 1
    output_dir: Path | None = None
    checkpoint_states: bool = False  # also dump complex amplitudes per snapshot

    def __post_init__(self):
        object.__setattr__(self, "backend", Backend(self.backend))
        object.__setattr__(self, "snapshot_times",
                           tuple(int(t) for t in self.snapshot_times))
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.realizations < 1:
            raise ValueError("realizations must be >= 1")
        if any(t < 0 or t > self.steps for t in self.snapshot_times):
            raise ValueError("snapshot times must lie in [0, steps]")
        if self.backend is Backend.EXACT and self.epsilon != 0.0:
            raise ValueError("exact backend forces epsilon = 0")
        if self.output_dir is not None:
            object.__setattr__(self, "output_dir", Path(self.output_dir))
        params = self.params()
        if not params.in_quantum_chaos_regime():
            warnings.warn(
                f"parameters k={self.k}, K={self.K} are outside the quantum "
                f"chaos regime k > K > 1 the presets assume",
                stacklevel=2,
            )

    def params(self) -> RotatorParams:
        return RotatorParams.from_chaos_parameter(self.k, self.K, self.n_q)

    def to_jsonable(self) -> dict:
        return {
            "backend": self.backend.value,
            "n_q": self.n_q,
            "k": self.k,
            "K": self.K,
            "epsilon": self.epsilon,
            "steps": self.steps,
            "record_every": self.record_every,
            "snapshot_times": list(self.snapshot_times),
            "seed": self.seed,
            "realizations": self.realizations,
            "output_dir": str(self.output_dir) if self.output_dir else None,
            "checkpoint_states": self.checkpoint_states,
        }

    @classmethod
    def from_jsonable(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        d["backend"] = Backend(d["backend"])
        d["snapshot_times"] = tuple(d.get("snapshot_times") or ())
        d.setdefault("checkpoint_states", False)
        if d.get("output_dir"):
            d["output_dir"] = Path(d["output_dir"])
        else:
            d["output_dir"] = None
        return cls(**d)


@dataclass
class RunResult:
    config: ExperimentConfig
    series: list[ObservableSeries]
    snapshots: dict[tuple[int, int], ProbabilityDistribution]
    manifest: dict


def _run_single(config: ExperimentConfig, seed: int,
                plan: GatePlan | None) -> tuple[ObservableSeries, dict, int]:
    params = config.params()
    state = init_delta_state(params, 0)
    noise = NoiseModel(config.epsilon, seed) if config.backend is Backend.GATES else None
    lev = signed_levels(config.n_q).astype(np.float64)
    lev2 = lev * lev

    snapshot_at = set(config.snapshot_times)
    snapshots: dict[int, ProbabilityDistribution] = {}
    checkpoints: dict[int, np.ndarray] = {}
    ts, n2s, iprs, errs = [], [], [], []

    def record(t: int):
        a = state.amplitudes
        W = a.real * a.real + a.imag * a.imag
        total = float(W.sum())
        err = abs(total - 1.0)
        if err > NORM_ABORT:
            raise NormDriftError(
                f"norm error {err:.3e} exceeds {NORM_ABORT:.0e} at t={t}")
        ts.append(t)
        n2s.append(float(W @ lev2))
        iprs.append(1.0 / float(W @ W))
        errs.append(err)

    def snapshot(t: int):
        snapshots[t] = probabilities(state)
        if config.checkpoint_states:
            checkpoints[t] = state.amplitudes.copy()

    record(0)
    if 0 in snapshot_at:
        snapshot(0)
    for t in range(1, config.steps + 1):
        if config.backend is Backend.GATES:
            step_gates(state, params, plan, noise)
        else:
            step_exact(state, params)
        if t % config.record_every == 0:
            record(t)
        if t in snapshot_at:
            snapshot(t)
    series = ObservableSeries(
        t=np.array(ts), n2=np.array(n2s), ipr=np.array(iprs),
        norm_err=np.array(errs),
        params={"k": config.k, "K": config.K, "n_q": config.n_q,
                "epsilon": config.epsilon, "seed": seed,
                "backend": config.backend.value},
    )
    draws = noise.draw_counter if noise is not None else 0
    return series, snapshots, checkpoints, draws


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_series_csv(path: Path, series: ObservableSeries) -> None:
    lines = ["t,n2,ipr,norm_err"]
    for i in range(len(series)):
        lines.append(f"{int(series.t[i])},{_fmt(series.n2[i])},"
                     f"{_fmt(series.ipr[i])},{_fmt(series.norm_err[i])}")
    path.write_text("\n".join(lines) + "\n")


def read_series_csv(path: Path) -> ObservableSeries:
    rows = [ln.split(",") for ln in path.read_text().strip().splitlines()[1:]]
    cols = list(zip(*rows))
    return ObservableSeries(
        t=np.array([int(v) for v in cols[0]]),
        n2=np.array([float(v) for v in cols[1]]),
        ipr=np.array([float(v) for v in cols[2]]),
        norm_err=np.array([float(v) for v in cols[3]]),
    )


def write_snapshot_csv(path: Path, dist: ProbabilityDistribution) -> None:
    lines = ["n,W"]
    for n, w in zip(dist.levels, dist.weights):
        lines.append(f"{int(n)},{_fmt(w)}")
    path.write_text("\n".join(lines) + "\n")


def read_snapshot_csv(path: Path) -> ProbabilityDistribution:
    rows = [ln.split(",") for ln in path.read_text().strip().splitlines()[1:]]
    levels = np.array([int(r[0]) for r in rows])
    weights = np.array([float(r[1]) for r in rows])
    return ProbabilityDistribution(levels=levels, weights=weights)


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def run_experiment(config: ExperimentConfig) -> RunResult:
    """Execute all realizations of one config; write CSVs and a manifest
    when the config names an output directory."""
    t_start = time.perf_counter()
    plan = build_qft_plan(config.n_q) if config.backend is Backend.GATES else None
    all_series: list[ObservableSeries] = []
    all_snapshots: dict[tuple[int, int], ProbabilityDistribution] = {}
    all_checkpoints: dict[tuple[int, int], np.ndarray] = {}
    seeds, draw_totals = [], []
    for r in range(config.realizations):
        seed_r = config.seed ^ r
        seeds.append(seed_r)
        series, snaps, checkpoints, draws = _run_single(config, seed_r, plan)
        all_series.append(series)
        draw_totals.append(draws)
        for t, dist in snaps.items():
            all_snapshots[(r, t)] = dist
        for t, amps in checkpoints.items():
            all_checkpoints[(r, t)] = amps

    manifest = {
        "config": config.to_jsonable(),
        "realization_seeds": seeds,
        "version": __version__,
        "draw_counter_totals": draw_totals,
        "wall_clock_seconds": time.perf_counter() - t_start,
        "files": [],
    }
    if config.output_dir is not None:
        out = config.output_dir
        out.mkdir(parents=True, exist_ok=True)
        inventory = []
        for r, series in enumerate(all_series):
            rdir = out / f"r{r:03d}"
            rdir.mkdir(exist_ok=True)
            spath = rdir / "series.csv"
            write_series_csv(spath, series)
            inventory.append(spath)
            for (rr, t), dist in all_snapshots.items():
                if rr == r:
                    snpath = rdir / f"snapshot_t{t}.csv"
                    write_snapshot_csv(snpath, dist)
                    inventory.append(snpath)
            for (rr, t), amps in all_checkpoints.items():
                if rr == r:
                    cpath = rdir / f"state_t{t}.npy"
                    np.save(cpath, amps)
                    inventory.append(cpath)
        manifest["files"] = [
            {"path": str(p.relative_to(out)), "sha256": _sha256(p),
             "bytes": p.stat().st_size}
            for p in sorted(inventory)
        ]
        (out / "manifest.json").write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return RunResult(config=config, series=all_series,
                     snapshots=all_snapshots, manifest=manifest)


def true_saturation_time(config: ExperimentConfig) -> float:
    """Kick count where the diffusive growth actually bends: the spreading
    saturates near the uniform value N^2/12, a factor 12 before the loose
    N^2-based scale t_eps, so fits past this point leave the diffusive
    regime."""
    pred = predict_timescales(config.params(), config.epsilon)
    if pred.D_eps_pred <= 0:
        return np.inf
    return (float(config.params().N) ** 2 / 12.0) / pred.D_eps_pred


def default_fit_window(config: ExperimentConfig) -> tuple[float, float]:
    """Diffusive-fit window [5 t_q, min(t_eps/5, true saturation)] clipped
    to the recorded range; degenerates to the full range when empty."""
    pred = predict_timescales(config.params(), config.epsilon)
    t_lo = 5.0 * pred.t_q
    t_hi = min(pred.t_eps / 5.0, true_saturation_time(config),
               float(config.steps))
    if not np.isfinite(t_lo) or t_lo >= t_hi:
        t_lo = 0.0
    if t_hi <= t_lo:
        t_hi = float(config.steps)
    return t_lo, t_hi


def run_sweep(configs: list[ExperimentConfig], output_dir: Path | None = None,
              bin_width: int = 1000) -> dict:
    """Run every config (continuing past per-config failures), then emit the
    collapsed (eps^2 t, <n^2>/N^2) table and a fitted slope per config."""
    if not configs:
        raise ValueError("sweep grid is empty")
    output_dir = Path(output_dir) if output_dir is not None else None
    if output_dir is not None:
        output_dir.mkdir(parents=True, exist_ok=True)

    entries = []
    collapse_rows = []  # (eps, n_q, eps^2 t, n2/N^2)
    for i, cfg in enumerate(configs):
        if output_dir is not None and cfg.output_dir is None:
            cfg = replace(cfg, output_dir=output_dir / f"cfg{i:03d}")
        entry = {"index": i, "config": cfg.to_jsonable()}
        try:
            result = run_experiment(cfg)
            N2 = float(cfg.params().N) ** 2
            t_lo, t_hi = default_fit_window(cfg)
            fits = []
            for series in result.series:
                try:
                    fits.append(fit_diffusion(series, t_lo, t_hi, bin_width))
                except ValueError:
                    pass
            if fits:
                D_fit = float(np.mean(fits))
                entry["D_fit"] = D_fit
                ref = predict_timescales(cfg.params(), cfg.epsilon).D_eps_pred
                entry["D_fit_over_reference"] = D_fit / ref if ref > 0 else None
            pred = predict_timescales(cfg.params(), cfg.epsilon)
            t_diff_end = min(pred.t_eps, true_saturation_time(cfg))
            for series in result.series:
                sel = (series.t > pred.t_q) & (series.t < t_diff_end) & (series.t > 0)
                t = series.t[sel].astype(np.float64)
                if t.size == 0:
                    continue
                bins = (t // bin_width).astype(np.int64)
                n_bins = int(bins.max()) + 1
                counts = np.bincount(bins, minlength=n_bins)
                used = counts > 0
                bt = np.bincount(bins, weights=t, minlength=n_bins)[used] / counts[used]
                bn = np.bincount(bins, weights=series.n2[sel],
                                 minlength=n_bins)[used] / counts[used]
                for x, y in zip(bt, bn):
                    collapse_rows.append((cfg.epsilon, cfg.n_q,
                                          cfg.epsilon ** 2 * x, y / N2))
            entry["status"] = "ok"
        except Exception as exc:  # record and continue with the rest
            entry["status"] = "failed"
            entry["error"] = f"{type(exc).__name__}: {exc}"
        entries.append(entry)

    summary: dict = {"runs": entries}
    if collapse_rows:
        x = np.array([r[2] for r in collapse_rows])
        y = np.array([r[3] for r in collapse_rows])
        pos = (x > 0) & (y > 0)
        if pos.sum() >= 3:
            lx, ly = np.log10(x[pos]), np.log10(y[pos])
            slope, intercept = np.polyfit(lx, ly, 1)
            resid = ly - (slope * lx + intercept)
            ss_tot = np.sum((ly - ly.mean()) ** 2)
            r2 = 1.0 - np.sum(resid ** 2) / ss_tot if ss_tot > 0 else 1.0
            # prefactor of the unit-slope collapse line y = a * x
            prefactor = 10.0 ** float(np.mean(ly - lx))
            summary["collapse"] = {
                "points": len(collapse_rows),
                "loglog_slope": float(slope),
                "r_squared": float(r2),
                "line_prefactor": prefactor,
            }
    if output_dir is not None:
        lines = ["epsilon,n_q,eps2_t,n2_over_N2"]
        for eps, n_q, xx, yy in collapse_rows:
            lines.append(f"{_fmt(eps)},{n_q},{_fmt(xx)},{_fmt(yy)}")
        (output_dir / "collapse.csv").write_text("\n".join(lines) + "\n")
        (output_dir / "sweep_summary.json").write_text(
            json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


def _load_run(input_dir: Path) -> tuple[ExperimentConfig, list[ObservableSeries],
                                        dict[tuple[int, int], ProbabilityDistribution]]:
    input_dir = Path(input_dir)
    manifest_path = input_dir / "manifest.json"
    if not manifest_path.exists():
        raise OSError(f"missing manifest: {manifest_path}")
    manifest = json.loads(manifest_path.read_text())
    config = ExperimentConfig.from_jsonable(manifest["config"])
    series = []
    snapshots: dict[tuple[int, int], ProbabilityDistribution] = {}
    for r in range(config.realizations):
        rdir = input_dir / f"r{r:03d}"
        spath = rdir / "series.csv"
        if not spath.exists():
            raise OSError(f"missing series file: {spath}")
        series.append(read_series_csv(spath))
        for t in config.snapshot_times:
            snpath = rdir / f"snapshot_t{t}.csv"
            if not snpath.exists():
                raise OSError(f"missing snapshot file: {snpath}")
            snapshots[(r, t)] = read_snapshot_csv(snpath)
    return config, series, snapshots


ANALYZE_TASKS = ("diffusion-fit", "tp-detect", "plateau-trace", "peak-report",
                 "predict")


def analyze(input_dir: Path, task: str, clean_dir: Path | None = None,
            output_path: Path | None = None, bin_width: int = 1000) -> dict:
    """Post-process a result directory; writes a JSON report that carries
    the measured quantity next to the closed-form prediction."""
    if task not in ANALYZE_TASKS:
        raise ValueError(f"unknown analyze task {task!r}; expected one of "
                         f"{ANALYZE_TASKS}")
    input_dir = Path(input_dir)
    config, series, snapshots = _load_run(input_dir)
    pred = predict_timescales(config.params(), config.epsilon)
    report: dict = {
        "task": task,
        "input_dir": str(input_dir),
        "config": config.to_jsonable(),
        "prediction": {
            "t_q": pred.t_q, "t_eps": pred.t_eps, "t_p_pred": pred.t_p_pred,
            "D_pred": pred.D_pred, "D_eps_pred": pred.D_eps_pred,
            "D_eps_alt": pred.D_eps_alt,
        },
    }

    if task == "predict":
        pass  # prediction block above is the payload
    elif task == "diffusion-fit":
        t_lo, t_hi = default_fit_window(config)
        fits = []
        for s in series:
            try:
                fits.append(fit_diffusion(s, t_lo, t_hi, bin_width))
            except ValueError:
                fits.append(None)
        valid = [f for f in fits if f is not None]
        report["result"] = {
            "window": [t_lo, t_hi],
            "bin_width": bin_width,
            "D_fit_per_realization": fits,
            "D_fit_mean": float(np.mean(valid)) if valid else None,
            "ratio_to_D_eps_pred": (float(np.mean(valid)) / pred.D_eps_pred
                                    if valid and pred.D_eps_pred > 0 else None),
        }
    elif task == "tp-detect":
        if clean_dir is None:
            raise ValueError("tp-detect needs a clean (epsilon = 0) reference "
                             "run directory")
        _, clean_series, _ = _load_run(Path(clean_dir))
        tps = []
        for s in series:
            tps.append(detect_tp(s, clean_series[0]))
        valid = [t for t in tps if t is not None]
        report["result"] = {
            "t_p_per_realization": tps,
            "t_p_mean": float(np.mean(valid)) if valid else None,
            "ratio_to_t_p_pred": (float(np.mean(valid)) / pred.t_p_pred
                                  if valid and np.isfinite(pred.t_p_pred) else None),
        }
    elif task == "plateau-trace":
        trace = []
        for (r, t), dist in sorted(snapshots.items()):
            if t > 0:
                trace.append({"realization": r, "t": t,
                              "plateau": plateau_level(dist)})
        slope = None
        ts = np.array([row["t"] for row in trace], dtype=float)
        ws = np.array([row["plateau"] for row in trace], dtype=float)
        good = (ts > 0) & (ws > 0)
        if good.sum() >= 2:
            slope = float(np.polyfit(np.log10(ts[good]), np.log10(ws[good]), 1)[0])
        report["result"] = {"trace": trace, "loglog_slope_vs_t": slope}
    elif task == "peak-report":
        rows = []
        for (r, t), dist in sorted(snapshots.items()):
            peaks = detect_peaks(dist)
            rows.append({
                "realization": r, "t": t, "peaks": peaks,
                "power_of_two_levels": detected_power_of_two_levels(dist, peaks),
            })
        report["result"] = {"snapshots": rows}

    if output_path is None:
        output_path = input_dir / f"analysis_{task}.json"
    Path(output_path).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return report


def expand_grid(grid_spec: dict) -> list[ExperimentConfig]:
    """Cartesian-product expansion of a config file: `base` holds shared
    keys, `grid` maps field names to value lists."""
    base = dict(grid_spec.get("base", {}))
    grid = dict(grid_spec.get("grid", {}))
    if not grid:
        return [ExperimentConfig.from_jsonable(base)] if base else []
    keys = sorted(grid)
    configs = []
    for combo in product(*(grid[key] for key in keys)):
        d = dict(base)
        d.update(dict(zip(keys, combo)))
        configs.append(ExperimentConfig.from_jsonable(d))
    return configs


PRESET_NAMES = ("growth", "diffusion", "snapshots", "departure")


def preset(name: str, include_large: bool = False) -> list[ExperimentConfig]:
    """Desk-scale parameter grids for the four standard experiments.

    growth: second-moment growth, n_q = 11..13 at eps = 1e-4 plus the
    noiseless reference.  diffusion: the (eps, n_q) grid whose binned
    points collapse onto the 5 eps^2 N^2 t line.  snapshots: distribution
    snapshots with and without imperfections.  departure: the IPR-departure
    grid with its noiseless references.  n_q >= 14 rows of the departure
    grid are compute-heavy and only emitted with include_large.
    """
    k, K = 10.0, 5.0
    if name == "growth":
        cfgs = [ExperimentConfig(backend=Backend.GATES, n_q=nq, k=k, K=K,
                                 steps=10_000, epsilon=1e-4, record_every=10,
                                 seed=1001, realizations=1)
                for nq in (11, 12, 13)]
        cfgs.append(ExperimentConfig(backend=Backend.EXACT, n_q=12, k=k, K=K,
                                     steps=10_000, record_every=10, seed=1001))
        return cfgs
    if name == "diffusion":
        eps_grid = (1e-4, 2e-4, 5e-4, 1e-3, 2e-3)
        nq_grid = (10, 11, 12) + ((13,) if include_large else ())
        return [ExperimentConfig(backend=Backend.GATES, n_q=nq, k=k, K=K,
                                 steps=10_000, epsilon=eps, record_every=10,
                                 seed=2000 + i, realizations=4)
                for i, (nq, eps) in enumerate(product(nq_grid, eps_grid))]
    if name == "snapshots":
        snaps = (100, 100_000)
        return [
            ExperimentConfig(backend=Backend.GATES, n_q=12, k=k, K=K,
                             steps=100_000, epsilon=1e-4, record_every=100,
                             snapshot_times=snaps, seed=3000),
            ExperimentConfig(backend=Backend.EXACT, n_q=12, k=k, K=K,
                             steps=100_000, record_every=100,
                             snapshot_times=snaps, seed=3000),
        ]
    if name == "departure":
        eps_grid = (2e-4, 5e-4, 1e-3, 2e-3)
        nq_grid = (10, 11, 12) + ((13, 14, 15, 16, 17) if include_large else ())
        cfgs = []
        for i, (nq, eps) in enumerate(product(nq_grid, eps_grid)):
            t_max = int(2.5 * 0.33 / (eps * nq) ** 2) + 200
            cfgs.append(ExperimentConfig(backend=Backend.GATES, n_q=nq, k=k,
                                         K=K, steps=t_max, epsilon=eps,
                                         record_every=10, seed=4000 + i,
                                         realizations=4))
        for nq in nq_grid:
            t_max = int(2.5 * 0.33 / (2e-4 * nq) ** 2) + 200
            cfgs.append(ExperimentConfig(backend=Backend.EXACT, n_q=nq, k=k,
                                         K=K, steps=t_max, record_every=10,
                                         seed=4999))
        return cfgs
    raise ValueError(f"unknown preset {name!r}; expected one of {PRESET_NAMES}")
