"""Monte-Carlo experiment runner, presets and CSV emission."""

import csv
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from .glasso import GlassoOptions, draw_trial, path_mse, pilot_lambda_grid, solve_mse
from .model import ModelParams, sample_block_sparse, to_db
from .oas import METRICS, run_basic_oas, run_blockwise_oas
from .sensing import PRINCIPLE_KINDS

log = logging.getLogger(__name__)

SCHEMES = ("blockwise-oas", "basic-oas", "glasso")
SWEEPS = ("rc", "L", "K")
CSV_HEADER = ["scheme", "sweep_name", "sweep_value", "B", "L", "K", "M", "xi",
              "trials", "mse", "mse_db", "ci_db", "wall_s"]
Z95 = 1.959963984540054


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class SweepPoint:
    index: int
    value: float
    params: ModelParams
    K: int


@dataclass(frozen=True)
class ExperimentSpec:
    """Declarative description of one scheme swept over one parameter.

    ``sweep_name`` is ``"rc"`` (compression rate N/K at fixed B, L), ``"L"``
    (block length at fixed N = model.N and fixed ``K``) or ``"K"``.
    """

    scheme: str
    model: ModelParams
    sweep_name: str
    sweep_values: tuple
    trials: int = 2000
    seed: int = 0
    K: Optional[int] = None
    metric: str = "exact"
    principle_kind: str = "identity"
    glasso: GlassoOptions = field(default_factory=GlassoOptions)
    tune_trials: int = 100

    def __post_init__(self):
        object.__setattr__(self, "sweep_values", tuple(self.sweep_values))
        if self.scheme not in SCHEMES:
            raise SpecError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if self.sweep_name not in SWEEPS:
            raise SpecError(f"unknown sweep {self.sweep_name!r}; expected one of {SWEEPS}")
        if not self.sweep_values:
            raise SpecError("empty sweep")
        if self.trials < 1:
            raise SpecError(f"trials must be >= 1, got {self.trials}")
        if self.metric not in METRICS:
            raise SpecError(f"unknown metric {self.metric!r}")
        if self.principle_kind not in PRINCIPLE_KINDS:
            raise SpecError(f"unknown principle kind {self.principle_kind!r}")
        if self.sweep_name == "L" and self.K is None:
            raise SpecError("a block-length sweep needs a fixed K")
        self.points()

    def points(self) -> List[SweepPoint]:
        out = []
        for i, value in enumerate(self.sweep_values):
            try:
                if self.sweep_name == "rc":
                    params = self.model
                    if not value > 0:
                        raise ValueError("compression rate must be positive")
                    K = int(math.floor(params.N / value + 0.5))
                elif self.sweep_name == "L":
                    if int(value) != value:
                        raise ValueError("block length must be an integer")
                    params = ModelParams.from_length(
                        self.model.N, int(value), xi=self.model.xi, sigma0_sq=self.model.sigma0_sq,
                        T=self.model.T, M=self.model.M)
                    K = int(self.K)
                else:
                    params = self.model
                    K = int(value)
                L_eff = 1 if self.scheme == "basic-oas" else params.L
                if K < 1 or K // L_eff < 1:
                    raise ValueError(f"K={K} leaves no full row block for L={L_eff}")
            except ValueError as exc:
                raise SpecError(f"{self.sweep_name}={value}: {exc}") from None
            out.append(SweepPoint(i, value, params, K))
        return out


@dataclass(frozen=True)
class ResultRow:
    scheme: str
    sweep_name: str
    sweep_value: float
    B: int
    L: int
    K: int
    M: int
    xi: float
    trials: int
    mse: float
    mse_db: float
    ci_db: float
    wall_s: Optional[float] = None


@dataclass
class ResultTable:
    rows: List[ResultRow] = field(default_factory=list)

    def sorted(self) -> "ResultTable":
        return ResultTable(sorted(self.rows, key=lambda r: (r.scheme, r.sweep_value)))

    def select(self, scheme) -> List[ResultRow]:
        return sorted((r for r in self.rows if r.scheme == scheme), key=lambda r: r.sweep_value)

    def __add__(self, other):
        return ResultTable(self.rows + other.rows)


def trial_streams(seed: int, sweep_index: int, trial_index: int):
    """Independent (signal, sensing) generators for one trial.

    Streams depend only on the master seed and the (sweep, trial) counters,
    so every scheme sees the same signals and results do not depend on how
    trials are distributed over workers.
    """
    ss = np.random.SeedSequence(seed, spawn_key=(sweep_index, trial_index))
    return [np.random.default_rng(s) for s in ss.spawn(2)]


def _oas_chunk(spec: ExperimentSpec, point: SweepPoint, trial_ids) -> np.ndarray:
    run = run_blockwise_oas if spec.scheme == "blockwise-oas" else run_basic_oas
    out = np.empty(len(trial_ids))
    for j, t in enumerate(trial_ids):
        sig_rng, sense_rng = trial_streams(spec.seed, point.index, t)
        signal = sample_block_sparse(point.params, sig_rng)
        out[j] = run(point.params, point.K, signal, sense_rng, spec.metric,
                     spec.principle_kind).trace[-1]
    return out


def _glasso_trial(spec, point, t):
    sig_rng, sense_rng = trial_streams(spec.seed, point.index, t)
    return draw_trial(point.params, point.K, sig_rng, sense_rng)


def _glasso_path_chunk(spec, point, trial_ids, lambdas) -> np.ndarray:
    return np.array([path_mse(_glasso_trial(spec, point, t), lambdas, point.params.L, spec.glasso)
                     for t in trial_ids]).reshape(len(trial_ids), len(lambdas))


def _glasso_fixed_chunk(spec, point, trial_ids, lam) -> np.ndarray:
    return np.array([solve_mse(_glasso_trial(spec, point, t), lam, point.params.L, spec.glasso)
                     for t in trial_ids])


def _call(args):
    fn, rest = args[0], args[1:]
    return fn(*rest)


def _chunks(ids, n):
    ids = list(ids)
    if not ids:
        return []
    size = max(1, math.ceil(len(ids) / n))
    return [ids[i:i + size] for i in range(0, len(ids), size)]


def default_workers() -> int:
    env = os.environ.get("OASLAB_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise SpecError(f"OASLAB_THREADS must be an integer, got {env!r}") from None
        if n < 1:
            raise SpecError(f"OASLAB_THREADS must be >= 1, got {n}")
        return n
    return 1


def _map(pool, fn, spec, point, ids, extra, workers):
    tasks = [(fn, spec, point, chunk, *extra) for chunk in _chunks(ids, 4 * workers)]
    if pool is None:
        parts = [_call(t) for t in tasks]
    else:
        parts = list(pool.map(_call, tasks))
    return np.concatenate(parts) if parts else np.empty(0)


def _glasso_point(pool, spec, point, workers):
    n_tune = min(spec.tune_trials, spec.trials)
    pilot = _glasso_trial(spec, point, 0)
    lambdas = pilot_lambda_grid(pilot.A, pilot.y, point.params.L, spec.glasso)
    paths = _map(pool, _glasso_path_chunk, spec, point, range(n_tune), (lambdas,), workers)
    paths = paths.reshape(n_tune, len(lambdas))
    best = int(np.argmin(paths.mean(axis=0)))
    lam = float(lambdas[best])
    rest = _map(pool, _glasso_fixed_chunk, spec, point, range(n_tune, spec.trials), (lam,), workers)
    log.info("glasso %s=%s: lambda*=%.6g (grid %.3g..%.3g, tuned on %d trials)",
             spec.sweep_name, point.value, lam, lambdas.min(), lambdas.max(), n_tune)
    return np.concatenate([paths[:, best], rest])


def aggregate(per_trial) -> tuple:
    """(mean MSE, dB of the mean, 95% half-width in dB by the delta method)."""
    per_trial = np.asarray(per_trial, dtype=float)
    mean = float(per_trial.mean())
    if per_trial.size > 1:
        se = float(per_trial.std(ddof=1)) / math.sqrt(per_trial.size)
        ci = Z95 * 10.0 / math.log(10.0) * se / mean
    else:
        ci = float("nan")
    return mean, to_db(mean), ci


def run_trials(spec: ExperimentSpec, point: SweepPoint, workers=1, pool=None) -> np.ndarray:
    """Per-trial MSE values for one sweep point, in trial order."""
    if spec.scheme == "glasso":
        return _glasso_point(pool, spec, point, workers)
    return _map(pool, _oas_chunk, spec, point, range(spec.trials), (), workers)


def run_experiment(spec: ExperimentSpec, workers: Optional[int] = None) -> ResultTable:
    workers = default_workers() if workers is None else int(workers)
    if workers < 1:
        raise SpecError(f"workers must be >= 1, got {workers}")
    rows = []
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        for point in spec.points():
            start = time.perf_counter()
            per_trial = run_trials(spec, point, workers, pool)
            mean, db, ci = aggregate(per_trial)
            p = point.params
            rows.append(ResultRow(
                scheme=spec.scheme, sweep_name=spec.sweep_name, sweep_value=float(point.value),
                B=p.B, L=p.L, K=point.K, M=1 if spec.scheme == "glasso" else p.M, xi=p.xi,
                trials=spec.trials, mse=mean, mse_db=db, ci_db=ci,
                wall_s=time.perf_counter() - start,
            ))
            log.info("%s %s=%s: %.3f dB +- %.3f", spec.scheme, spec.sweep_name, point.value, db, ci)
    finally:
        if pool is not None:
            pool.shutdown()
    return ResultTable(rows)


def run_all(specs: Sequence[ExperimentSpec], workers: Optional[int] = None) -> ResultTable:
    table = ResultTable()
    for spec in specs:
        table = table + run_experiment(spec, workers)
    return table


FIG1_RC = (1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0)
FIG2_L = (1, 2, 4, 8, 16)


def preset_fig1(trials=2000, seed=0, metric="exact", **overrides) -> List[ExperimentSpec]:
    """MSE against compression rate, B=100 blocks of length 4."""
    model = ModelParams(B=100, L=4, xi=0.1, sigma0_sq=0.01, T=1.0, M=8)
    return [ExperimentSpec(scheme=s, model=model, sweep_name="rc", sweep_values=FIG1_RC,
                           trials=trials, seed=seed, metric=metric, **overrides)
            for s in SCHEMES]


def preset_fig2(trials=1000, seed=0, metric="exact", **overrides) -> List[ExperimentSpec]:
    """MSE against block length at N=1600 samples and K=400 sensors."""
    model = ModelParams(B=1600, L=1, xi=0.1, sigma0_sq=0.01, T=1.0, M=8)
    return [ExperimentSpec(scheme=s, model=model, sweep_name="L", sweep_values=FIG2_L, K=400,
                           trials=trials, seed=seed, metric=metric, **overrides)
            for s in ("blockwise-oas", "basic-oas")]


PRESETS = {"fig1": preset_fig1, "fig2": preset_fig2}


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return format(float(value), ".12g")


def format_csv(table: ResultTable, wall_time: bool = False) -> str:
    """CSV text; wall times are left blank unless requested, keeping output reproducible."""
    lines = [",".join(CSV_HEADER)]
    for r in table.sorted().rows:
        fields = [r.scheme, r.sweep_name] + [
            _fmt(getattr(r, name)) for name in CSV_HEADER[2:-1]
        ] + [_fmt(r.wall_s) if wall_time else ""]
        lines.append(",".join(fields))
    return "\n".join(lines) + "\n"


def emit_csv(table: ResultTable, path, wall_time: bool = False) -> Path:
    path = Path(path)
    try:
        path.write_text(format_csv(table, wall_time), encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc.strerror or exc}") from exc
    return path


_INT_COLUMNS = {"B", "L", "K", "M", "trials"}


def read_csv(path) -> ResultTable:
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != CSV_HEADER:
                raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
            rows = []
            for rec in reader:
                kw = {}
                for name in CSV_HEADER:
                    raw = rec[name]
                    if name in ("scheme", "sweep_name"):
                        kw[name] = raw
                    elif name in _INT_COLUMNS:
                        kw[name] = int(raw)
                    elif raw == "":
                        kw[name] = None
                    else:
                        kw[name] = float(raw)
                rows.append(ResultRow(**kw))
    except OSError as exc:
        raise OSError(f"cannot read CSV {path}: {exc.strerror or exc}") from exc
    return ResultTable(rows)


def with_overrides(specs, **changes):
    changes = {k: v for k, v in changes.items() if v is not None}
    return [replace(s, **changes) for s in specs]
