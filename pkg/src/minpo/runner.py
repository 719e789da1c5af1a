"""Build, train and evaluate one (experiment, method, seed) run; write artifacts.

Outputs in ``cfg.out``: run.csv (per-log-step losses and errors),
summary.csv (final errors and wall time), fields.csv (evaluation-grid values
for plotting), checkpoint.json and config.txt.
"""

from __future__ import annotations

import csv
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import jax
import jax.numpy as jnp
import numpy as np

from .baselines import AuxiliaryModel, DiscretizedResidualModel, aux_output_count, relative_error
from .config import RunConfig, dump_config
from .core import LossWeights, Minpo
from .encoders import CkanConfig, Encoder, HardConstraint, InputScaler, MlpConfig, save_checkpoint
from .fd import Grid3, picard_jacobi_solve
from .problems import ProblemSpec, make_problem
from .sampling import sample_points
from .training import Diverged, Objective, Schedule, train

log = logging.getLogger(__name__)

RUN_COLUMNS = ("iteration", "L_IDE", "L_data", "L_M", "total", "e_u", "e_M", "e_kappa", "method")
SUMMARY_COLUMNS = ("experiment", "method", "seed", "e_u", "e_M", "e_kappa", "wall_seconds")
ORACLE_TOL = 1e-9
EVAL_CHUNK = 8192


class OracleError(AssertionError):
    pass


class ExactOracle:
    """Closed-form u*, M*[u*] (the Caputo derivative for exp3) of one problem."""

    def __init__(self, problem: ProblemSpec):
        self.problem = problem

    def u(self, points) -> np.ndarray:
        return np.asarray(jax.vmap(self.problem.exact_u)(jnp.asarray(points)))

    def memory(self, points) -> np.ndarray:
        return np.asarray(jax.vmap(self.problem.exact_memory)(jnp.asarray(points)))

    def self_check(self, n: int = 1000, tol: float = ORACLE_TOL) -> float:
        err = self.problem.self_check(n)
        if not err <= tol:
            raise OracleError(f"{self.problem.name}: closed forms leave residual {err:.3e} > {tol:g}")
        return err


def evaluation_points(experiment: str, length: float = 1.0) -> np.ndarray:
    """Fixed error-evaluation grids: 1000 points, 41^3, or 101 x 101."""
    if experiment.startswith("exp1"):
        return np.linspace(0.0, length, 1000)[:, None]
    if experiment == "exp2":
        a = np.linspace(0.0, 1.0, 41)
        return np.stack(np.meshgrid(a, a, a, indexing="ij"), axis=-1).reshape(-1, 3)
    a = np.linspace(0.0, 1.0, 101)
    return np.stack(np.meshgrid(a, a, indexing="ij"), axis=-1).reshape(-1, 2)


def memory_error_mask(experiment: str, points: np.ndarray) -> np.ndarray:
    """exp3 scores the Caputo field for t > 0 only; elsewhere all points count."""
    if experiment == "exp3":
        return points[:, -1] > 0.0
    return np.ones(len(points), dtype=bool)


def build_encoder(cfg: RunConfig, problem: ProblemSpec, n_out: int = 1, constraint=None, name="field"):
    widths = (problem.dim,) + (cfg.width,) * cfg.depth + (n_out,)
    conf = CkanConfig(widths, cfg.degree) if cfg.family == "kan" else MlpConfig(widths)
    return Encoder(conf, InputScaler(problem.lower, problem.upper), constraint, name)


def build_model(cfg: RunConfig, problem: ProblemSpec):
    cfg = cfg.resolved()
    weights = LossWeights(cfg.lambda_ide, cfg.lambda_data, cfg.lambda_mem)
    learn = cfg.experiment == "exp1-inverse"
    if cfg.method.startswith("minpo"):
        hc = HardConstraint((0, 1, 2)) if cfg.experiment == "exp2" else None
        memory = build_encoder(cfg, problem, constraint=hc, name="memory")
        inverse = build_encoder(cfg, problem, name="inverse") if problem.fractional else None
        return Minpo(problem, memory, inverse, weights, learn, cfg.kappa_init)
    if cfg.method in ("apinn", "apikan"):
        enc = build_encoder(cfg, problem, n_out=aux_output_count(problem), name="aux")
        return AuxiliaryModel(problem, enc, weights, learn, cfg.kappa_init)
    if cfg.method in ("fpinn", "fpikan"):
        return DiscretizedResidualModel(problem, build_encoder(cfg, problem, name="u"), cfg.n_t, weights)
    raise ValueError(f"{cfg.method} is not a trainable method")


@dataclass
class RunRecord:
    config: RunConfig
    summary: dict
    history: list = field(default_factory=list)
    points: np.ndarray | None = None
    fields: dict = field(default_factory=dict)
    params: object = None
    extra: dict = field(default_factory=dict)


class TrainingDiverged(RuntimeError):
    def __init__(self, record: RunRecord, cause: Diverged):
        self.record = record
        super().__init__(str(cause))


def _chunked(fn, params, pts):
    outs = [fn(params, jnp.asarray(pts[i : i + EVAL_CHUNK])) for i in range(0, len(pts), EVAL_CHUNK)]
    return tuple(np.concatenate([np.asarray(o[k]) for o in outs]) for k in range(len(outs[0])))


class Evaluator:
    def __init__(self, cfg: RunConfig, problem: ProblemSpec, model):
        self.cfg, self.model = cfg, model
        oracle = ExactOracle(problem)
        self.points = evaluation_points(cfg.experiment, cfg.length)
        self.u_ref = oracle.u(self.points)
        self.m_ref = oracle.memory(self.points)
        self.mask = memory_error_mask(cfg.experiment, self.points)
        self._predict = jax.jit(lambda p, pts: model.predict(p, pts))

    def predict(self, params):
        return _chunked(self._predict, params, self.points)

    def errors(self, params) -> dict:
        u, m = self.predict(params)
        out = {
            "e_u": relative_error(u, self.u_ref),
            "e_M": relative_error(m[self.mask], self.m_ref[self.mask]),
            "e_kappa": math.nan,
        }
        if getattr(self.model, "learn_kappa", False):
            out["e_kappa"] = relative_error(float(self.model.kappa(params)), self.cfg.kappa)
        return out


def _fd_run(cfg: RunConfig, problem: ProblemSpec) -> RunRecord:
    grid = Grid3(cfg.nx)
    scheme = cfg.method.split("-", 1)[1]
    oracle = ExactOracle(problem)
    exact_u = lambda p: oracle.u(p.reshape(-1, 3)).reshape(p.shape[:-1])
    source = lambda p: np.asarray(jax.vmap(problem.source)(jnp.asarray(p.reshape(-1, 3)))).reshape(p.shape[:-1])
    t0 = time.perf_counter()
    sol = picard_jacobi_solve(grid, scheme, cfg.n_i, source, exact_u, kappa=problem.kappa)
    wall = time.perf_counter() - t0
    pts = grid.nodes().reshape(-1, 3)
    u_ref, m_ref = oracle.u(pts), oracle.memory(pts)
    u, m = sol.u.ravel(), sol.memory.ravel()
    summary = {
        "experiment": cfg.experiment,
        "method": cfg.method,
        "seed": cfg.seed,
        "e_u": relative_error(u, u_ref),
        "e_M": relative_error(m, m_ref),
        "e_kappa": math.nan,
        "wall_seconds": wall,
    }
    history = [
        {"iteration": k + 1, "L_IDE": d, "L_data": 0.0, "L_M": 0.0, "total": d, "e_u": math.nan,
         "e_M": math.nan, "e_kappa": math.nan, "method": cfg.method}
        for k, d in enumerate(sol.updates)
    ]
    fields = {"u_pred": u, "u_exact": u_ref, "M_pred": m, "M_exact": m_ref}
    extra = {"scheme": scheme, "nx": cfg.nx, "iterations": sol.iterations}
    return RunRecord(cfg, summary, history, pts, fields, None, extra)


def run_experiment(cfg: RunConfig) -> RunRecord:
    """Oracle self-check, sampling, Adam then L-BFGS, evaluation; writes artifacts if cfg.out."""
    cfg = cfg.resolved()
    problem = make_problem(cfg.experiment, kappa=cfg.kappa, alpha=cfg.alpha or 0.5, length=cfg.length)
    ExactOracle(problem).self_check()
    if cfg.family == "fd":
        record = _fd_run(cfg, problem)
        if cfg.out:
            emit_metrics(record, cfg.out)
        return record

    model = build_model(cfg, problem)
    data = sample_points(cfg, problem)
    params0 = model.init(np.random.default_rng(cfg.seed))
    obj = Objective(lambda q: model.losses(q, data), params0)
    evaluator = Evaluator(cfg, problem, model)
    history = []

    def on_log(it, x, comps):
        errs = evaluator.errors(obj.params(x))
        row = {"iteration": it, "L_IDE": comps["ide"], "L_data": comps["data"], "L_M": comps["memory"],
               "total": comps["total"], **errs, "method": cfg.method}
        history.append(row)
        log.info("%s %s it=%d total=%.3e e_u=%.3e e_M=%.3e", cfg.experiment, cfg.method, it,
                 comps["total"], errs["e_u"], errs["e_M"])

    schedule = Schedule(cfg.adam_iters, cfg.lbfgs_iters, cfg.lr, log_every=cfg.log_every)
    t0 = time.perf_counter()
    try:
        result = train(obj, schedule, on_log)
    except Diverged as err:
        params = obj.params(err.x)
        summary = {"experiment": cfg.experiment, "method": cfg.method, "seed": cfg.seed, "e_u": math.nan,
                   "e_M": math.nan, "e_kappa": math.nan, "wall_seconds": time.perf_counter() - t0}
        record = RunRecord(cfg, summary, history, params=params, extra={"model": model, "diverged": str(err)})
        if cfg.out:
            _write_checkpoint(record, Path(cfg.out))
        raise TrainingDiverged(record, err) from err
    wall = time.perf_counter() - t0
    params = obj.params(result.x)
    errs = evaluator.errors(params)
    u, m = evaluator.predict(params)
    summary = {"experiment": cfg.experiment, "method": cfg.method, "seed": cfg.seed, **errs, "wall_seconds": wall}
    fields = {"u_pred": u, "u_exact": evaluator.u_ref, "M_pred": m, "M_exact": evaluator.m_ref}
    extra = {"model": model, "lbfgs_flag": result.lbfgs_flag, "lbfgs_steps": result.lbfgs_steps,
             "kappa": float(model.kappa(params)) if getattr(model, "learn_kappa", False) else None}
    record = RunRecord(cfg, summary, history, evaluator.points, fields, params, extra)
    if cfg.out:
        emit_metrics(record, cfg.out)
    return record


def _fmt(v):
    if isinstance(v, float):
        return "" if math.isnan(v) else f"{v:.17g}"
    return v


def _write_checkpoint(record: RunRecord, out: Path) -> None:
    model = record.extra.get("model")
    if model is None or record.params is None:
        return
    extra = {"summary": {k: _fmt(v) for k, v in record.summary.items()}}
    save_checkpoint(out / "checkpoint.json", record.config.method, model.encoders, record.params, extra)


def emit_metrics(record: RunRecord, out) -> Path:
    """Write run.csv, summary.csv, fields.csv, config.txt and checkpoint.json."""
    out = Path(out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as err:
        raise OSError(f"cannot create output directory {out}: {err}") from err
    with open(out / "run.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RUN_COLUMNS)
        for row in record.history:
            w.writerow([_fmt(row[c]) for c in RUN_COLUMNS])
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        cols = SUMMARY_COLUMNS + tuple(k for k in ("scheme", "nx") if k in record.extra)
        w.writerow(cols)
        vals = {**record.summary, **record.extra}
        w.writerow([_fmt(vals[c]) for c in cols])
    if record.points is not None:
        dim = record.points.shape[1]
        coords = {1: ("t",), 2: ("x", "t"), 3: ("x1", "x2", "t")}[dim]
        names = ("u_pred", "u_exact", "M_pred", "M_exact")
        with open(out / "fields.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(coords + names)
            cols = [record.fields[n] for n in names]
            for i, p in enumerate(record.points):
                w.writerow([f"{c:.17g}" for c in p] + [f"{col[i]:.17g}" for col in cols])
    (out / "config.txt").write_text(dump_config(record.config))
    _write_checkpoint(record, out)
    return out
