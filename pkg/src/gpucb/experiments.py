"""Batch verification suites.

Each suite reads an :class:`ExperimentConfig`, runs its trajectories with
child seeds derived from ``(master, i)``, writes CSV artifacts and a
``report.json`` into the output directory, and returns a :class:`SuiteReport`.
Pass/fail thresholds come from the config (``thresholds``), with per-suite
defaults in :data:`DEFAULT_THRESHOLDS`.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import os
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from . import __version__
from .bandit import REGRET_HEADER, make_environment, rho_schedule, run_episode
from .confidence import (
    CHOWDHURY_JITTER,
    RadiusSpec,
    abbasi_radius,
    chowdhury_radius,
    mixture_batch,
    mixture_trajectory,
    noise_radius,
    selfnorm_stat_chowdhury,
    selfnorm_stat_features,
    selfnorm_stat_gram,
    trajectory_seeds,
    truncated_mixture,
)
from .errors import ConfigurationError
from .infogain import greedy_infogain, loglog_slope, schedule_consistency_check
from .kernels import KernelSpec, gram, matern, mercer_synthetic, squared_exponential

log = logging.getLogger(__name__)

__all__ = [
    "DEFAULT_PARAMS",
    "DEFAULT_THRESHOLDS",
    "ExperimentConfig",
    "SuiteReport",
    "load_config",
    "radius_compare",
    "run_suite",
]

KINDS = (
    "ville_coverage",
    "supermartingale_decay",
    "gram_identity",
    "truncation_convergence",
    "ellipsoid_coverage",
    "regret_scaling",
    "radius_compare",
    "infogain_sandwich",
    "potential_audit",
)

DEFAULT_THRESHOLDS = {
    "ville_coverage": {"slack_se": 3.0},
    "supermartingale_decay": {"max_mean": 1.05, "slack_se": 3.0},
    "gram_identity": {"stat_rel_err": 1e-7, "logdet_abs_err": 1e-8, "runtime_s": 5.0},
    "truncation_convergence": {"monotone_slack": 1e-9, "full_rank_tol": 1e-9},
    "ellipsoid_coverage": {"slack_se": 3.0},
    "regret_scaling": {"max_slope": 1.0},
    "radius_compare": {"coincidence_tol": 1e-6},
    "infogain_sandwich": {"sandwich_slack": 0.0, "spot_tol": 1e-3, "slope_tol": 0.1,
                          "power_rel_err": 1e-9, "balance_rel_err": 1e-12},
    "potential_audit": {"identity_tol": 1e-6, "round_slack": 1e-9, "aggregate_slack": 1e-6},
}

DEFAULT_PARAMS = {
    "ville_coverage": {"deltas": [0.01, 0.05, 0.1]},
    "supermartingale_decay": {"cap": 1000.0},
    "gram_identity": {"instances": 500, "rank_max": 8, "t_max": 30, "rhos": [0.5, 1.0, 4.0]},
    "truncation_convergence": {},
    "ellipsoid_coverage": {},
    "regret_scaling": {"bootstrap": 1000},
    "radius_compare": {"rhos": [1.0, 2.0, 4.0, 8.0], "etas": [1e-10, 0.5, 1.0]},
    "infogain_sandwich": {"betas": [1.5, 2.0, 3.0], "rhos": [1.0, "schedule"],
                          "schedule_betas": [2.0, 3.0], "schedule_T": [1e3, 1e6],
                          "spot": [100, 1.0, 1.0, 1.0, 1.0, 2.0], "spot_value": 26.098},
    "potential_audit": {},
}


# -- configuration ----------------------------------------------------------

class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class KernelConfig(_Strict):
    family: Literal["mercer", "matern", "squared_exponential"] = "mercer"
    rank: int = Field(6, ge=1)
    C: float = Field(1.0, gt=0)
    beta: float = Field(2.0, gt=1)
    dim: int = Field(1, ge=1)
    nu: float = Field(1.5, ge=0.5)
    bandwidth: float = Field(0.2, gt=0)
    bessel: bool = False
    B: Optional[float] = Field(None, gt=0)

    def build(self, beta: Optional[float] = None) -> KernelSpec:
        try:
            if self.family == "mercer":
                return mercer_synthetic(self.rank, self.C, self.beta if beta is None else beta, self.dim)[0]
            if self.family == "matern":
                return matern(self.nu, self.bandwidth, C=self.C, dim=self.dim, bessel=self.bessel, B=self.B)
            return squared_exponential(self.bandwidth)
        except ConfigurationError:
            raise
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from exc


class GridConfig(_Strict):
    size: int = Field(101, ge=1)
    dim: int = Field(1, ge=1)
    low: float = 0.0
    high: float = 1.0

    def build(self) -> np.ndarray:
        axis = np.linspace(self.low, self.high, self.size)
        mesh = np.meshgrid(*([axis] * self.dim), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


class RhoConfig(_Strict):
    policy: Literal["fixed", "schedule", "max_one_L"] = "fixed"
    value: float = Field(1.0, gt=0)
    beta: Optional[float] = Field(None, gt=1)
    c: float = Field(1.0, gt=0)

    def resolve(self, kernel: KernelSpec, T: int) -> float:
        if self.policy == "fixed":
            return self.value
        if self.policy == "max_one_L":
            return max(1.0, kernel.L)
        beta = self.beta
        if beta is None:
            if kernel.eigendecay is None:
                raise ConfigurationError("rho.beta is required for kernels without known eigendecay")
            beta = kernel.eigendecay[1]
        return rho_schedule(T, beta, self.c)


class SeedConfig(_Strict):
    count: int = Field(1, ge=1)
    master: int = Field(0, ge=0)


class EnvConfig(_Strict):
    n_centers: int = Field(5, ge=1)
    norm_fraction: float = Field(1.0, gt=0, le=1)


class ExperimentConfig(_Strict):
    """Declarative description of one suite run. Unknown keys are rejected."""

    kind: Literal[KINDS]  # type: ignore[valid-type]
    kernel: KernelConfig = KernelConfig()
    grid: GridConfig = GridConfig()
    T: Union[int, list[int]] = 100
    rho: RhoConfig = RhoConfig()
    sigma: float = Field(1.0, ge=0)
    delta: float = Field(0.05, gt=0, lt=1)
    D: float = Field(1.0, gt=0)
    noise: list[Literal["gaussian", "rademacher"]] = ["gaussian"]
    design: Literal["fixed", "random", "width_greedy"] = "width_greedy"
    seeds: SeedConfig = SeedConfig()
    env: EnvConfig = EnvConfig()
    params: dict[str, Any] = {}
    thresholds: dict[str, float] = {}
    output_dir: str = "out"
    workers: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _check_kind_keys(self):
        for name, table in (("params", DEFAULT_PARAMS), ("thresholds", DEFAULT_THRESHOLDS)):
            unknown = sorted(set(getattr(self, name)) - set(table[self.kind]))
            if unknown:
                raise ValueError(f"unknown {name} keys for {self.kind}: {', '.join(unknown)}")
        Ts = self.T if isinstance(self.T, list) else [self.T]
        if not Ts or min(Ts) < 0:
            raise ValueError("T must be a nonnegative integer or a nonempty list of them")
        if self.kind in ("truncation_convergence", "ellipsoid_coverage", "gram_identity") \
                and self.kernel.family != "mercer":
            raise ValueError(f"{self.kind} needs a finite-rank (mercer) kernel")
        return self

    @property
    def horizons(self) -> list[int]:
        return self.T if isinstance(self.T, list) else [self.T]

    def param(self, key):
        return self.params.get(key, DEFAULT_PARAMS[self.kind][key])

    def threshold(self, key) -> float:
        return float(self.thresholds.get(key, DEFAULT_THRESHOLDS[self.kind][key]))

    def digest(self) -> str:
        blob = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


class ConfigValidationError(ConfigurationError):
    """Config failed validation; ``fields`` lists the offending locations."""

    def __init__(self, message, fields=()):
        super().__init__(message)
        self.fields = list(fields)


def _parse_override(value: str):
    try:
        return json.loads(value)
    except json.JSONDecodeError:
        return value


def apply_overrides(data: dict, overrides) -> dict:
    """Apply ``dotted.key=value`` overrides; values are parsed as JSON when possible."""
    data = json.loads(json.dumps(data))
    for item in overrides or ():
        if "=" not in item:
            raise ConfigValidationError(f"override {item!r} is not of the form key=value", [item])
        key, value = item.split("=", 1)
        node = data
        parts = key.strip().split(".")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise ConfigValidationError(f"override {key!r} descends into a non-object", [key])
        node[parts[-1]] = _parse_override(value)
    return data


def load_config(source, overrides=(), seed: Optional[int] = None) -> ExperimentConfig:
    """Read and validate a JSON config from a path or a dict."""
    if isinstance(source, (str, os.PathLike)):
        path = Path(source)
        if not path.is_file():
            raise ConfigValidationError(f"config file not found: {path}", [str(path)])
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigValidationError(f"{path}: invalid JSON ({exc})", [str(path)]) from exc
    else:
        data = dict(source)
    data = apply_overrides(data, overrides)
    if seed is not None:
        data.setdefault("seeds", {})["master"] = seed
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        fields = [".".join(str(p) for p in e["loc"]) or "<root>" for e in exc.errors()]
        lines = [f"  {f}: {e['msg']}" for f, e in zip(fields, exc.errors())]
        raise ConfigValidationError("invalid config:\n" + "\n".join(lines), fields) from exc


# -- reporting --------------------------------------------------------------

@dataclass
class Criterion:
    name: str
    value: float
    threshold: float
    comparison: str  # "<=" or ">=" or "=="
    passed: bool


@dataclass
class SuiteReport:
    kind: str
    criteria: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    artifacts: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.criteria)

    @property
    def failures(self) -> list:
        return [c.name for c in self.criteria if not c.passed]

    def check(self, name, value, threshold, comparison="<="):
        value = float(value)
        ok = {"<=": value <= threshold, ">=": value >= threshold, "<": value < threshold,
              "==": value == threshold}[comparison]
        self.criteria.append(Criterion(name, value, float(threshold), comparison, bool(ok)))
        return ok

    def to_dict(self) -> dict:
        return _jsonable({
            "kind": self.kind,
            "passed": self.passed,
            "criteria": [c.__dict__ for c in self.criteria],
            "stats": self.stats,
            "artifacts": self.artifacts,
            "provenance": self.provenance,
        })

    def summary_line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        tail = "" if self.passed else " failing: " + ", ".join(self.failures)
        return f"{self.kind}: {status} ({len(self.criteria)} criteria){tail}"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def write_csv(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


MIXTURE_HEADER = ("t", "logdet", "stat", "logM", "radius_abbasi", "radius_chowdhury")
INFOGAIN_HEADER = ("t", "gamma_hat", "gamma_bound")


def _map(fn, items, workers):
    items = list(items)
    if workers <= 1 or len(items) < 2:
        return [fn(i) for i in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def _binomial_limit(delta, n, slack_se):
    return delta + slack_se * math.sqrt(delta * (1.0 - delta) / n)


# -- suites -----------------------------------------------------------------

def _suite_ville(cfg: ExperimentConfig, out: Path, rep: SuiteReport):
    kernel, grid = cfg.kernel.build(), cfg.grid.build()
    T = cfg.horizons[0]
    rho = cfg.rho.resolve(kernel, T)
    n = cfg.seeds.count
    rows = []
    for noise in cfg.noise:
        logM = mixture_batch(kernel, rho, cfg.sigma, grid, T, n, cfg.seeds.master, cfg.design, noise)
        peak = logM.max(axis=1)
        for delta in cfg.param("deltas"):
            rate = float(np.mean(peak >= math.log(1.0 / delta)))
            limit = _binomial_limit(delta, n, cfg.threshold("slack_se"))
            ok = rep.check(f"crossing_rate[{noise},delta={delta}]", rate, limit)
            rows.append((noise, float(delta), rate, limit, int(ok)))
        traj = mixture_trajectory(kernel, rho, cfg.sigma, grid, T, (cfg.seeds.master, 0), cfg.design, noise)
        name = f"trajectory_{noise}.csv"
        write_csv(out / name, MIXTURE_HEADER, traj.rows(cfg.delta, kernel=kernel))
        rep.artifacts.append(name)
    write_csv(out / "coverage.csv", ("noise", "delta", "crossing_rate", "threshold", "passed"), rows)
    rep.artifacts.append("coverage.csv")
    rep.stats.update(rho=rho, T=T, trajectories=n)


def _suite_decay(cfg: ExperimentConfig, out: Path, rep: SuiteReport):
    kernel, grid = cfg.kernel.build(), cfg.grid.build()
    T = cfg.horizons[0]
    rho = cfg.rho.resolve(kernel, T)
    n = cfg.seeds.count
    cap = float(cfg.param("cap"))
    for noise in cfg.noise:
        logM = mixture_batch(kernel, rho, cfg.sigma, grid, T, n, cfg.seeds.master, cfg.design, noise)
        W = np.minimum(np.exp(np.minimum(logM, math.log(cap))), cap)
        mean = W.mean(axis=0)
        se = W.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.zeros(T + 1)
        rep.check(f"max_winsorized_mean[{noise}]", mean.max(), cfg.threshold("max_mean"))
        band = int(np.sum(mean > 1.0 + cfg.threshold("slack_se") * se + 1e-12))
        rep.check(f"band_violations[{noise}]", band, 0)
        name = f"decay_{noise}.csv"
        write_csv(out / name, ("t", "mean_winsorized", "se", "mean_logM"),
                  [(t, float(mean[t]), float(se[t]), float(logM[:, t].mean())) for t in range(T + 1)])
        rep.artifacts.append(name)
        rep.stats[f"final_mean[{noise}]"] = float(mean[-1])
    rep.stats.update(rho=rho, T=T, trajectories=n, cap=cap)


def gram_identity_instance(master: int, i: int, rank_max: int, t_max: int, rhos) -> tuple:
    """One random finite-rank instance: Gram-form vs feature-form statistic and log-det."""
    rng = np.random.default_rng(trajectory_seeds(master, i)[1])
    rank = int(rng.integers(1, rank_max + 1))
    beta = float(rng.uniform(1.1, 4.0))
    C = float(rng.uniform(0.5, 2.0))
    t = int(rng.integers(1, t_max + 1))
    rho = float(rhos[int(rng.integers(0, len(rhos)))])
    kernel, fmap = mercer_synthetic(rank, C, beta)
    X = rng.uniform(0.0, 1.0, size=(t, 1))
    eps = rng.standard_normal(t)
    K = gram(kernel, X)
    E = fmap.embed(X)
    s_gram = selfnorm_stat_gram(K, eps, rho)
    s_feat = selfnorm_stat_features(E, eps, rho)
    ld_gram = float(np.linalg.slogdet(np.eye(t) + K / rho)[1])
    ld_feat = float(np.linalg.slogdet(np.eye(rank) + E.T @ E / rho)[1])
    rel = abs(s_gram - s_feat) / max(abs(s_feat), 1e-300)
    return i, rank, t, rho, s_gram, s_feat, rel, ld_gram, ld_feat, abs(ld_gram - ld_feat)


def _suite_gram(cfg: ExperimentConfig, out: Path, rep: SuiteReport):
    import time

    start = time.perf_counter()
    args = (cfg.param("rank_max"), cfg.param("t_max"), cfg.param("rhos"))
    rows = [gram_identity_instance(cfg.seeds.master, i, *args) for i in range(cfg.param("instances"))]
    elapsed = time.perf_counter() - start
    rel = max(r[6] for r in rows)
    ld = max(r[9] for r in rows)
    rep.check("max_stat_rel_err", rel, cfg.threshold("stat_rel_err"))
    rep.check("max_logdet_abs_err", ld, cfg.threshold("logdet_abs_err"))
    rep.check("runtime_s", round(elapsed, 1), cfg.threshold("runtime_s"))
    write_csv(out / "identity.csv", ("instance", "rank", "t", "rho", "stat_gram", "stat_feature",
                                     "stat_rel_err", "logdet_gram", "logdet_feature", "logdet_abs_err"), rows)
    rep.artifacts.append("identity.csv")
    rep.stats.update(instances=len(rows))


def _suite_truncation(cfg: ExperimentConfig, out: Path, rep: SuiteReport):
    kernel, grid = cfg.kernel.build(), cfg.grid.build()
    T = cfg.horizons[0]
    rho = cfg.rho.resolve(kernel, T)
    r = kernel.rank
    slack = cfg.threshold("monotone_slack")
    rows = []
    worst_increase = worst_full = worst_stat = worst_logdet = 0.0
    nonmono_seeds = 0
    for s in range(cfg.seeds.count):
        traj = mixture_trajectory(kernel, rho, cfg.sigma, grid, T, (cfg.seeds.master, s), cfg.design,
                                  cfg.noise[0])
        gaps, sgaps, lgaps = [], [], []
        for N in range(1, r + 1):
            tr = truncated_mixture(traj, kernel, N)
            gaps.append(abs(tr.log_M[-1] - traj.log_M[-1]))
            sgaps.append(abs(tr.stat[-1] - traj.stat[-1]))
            lgaps.append(abs(tr.logdet[-1] - traj.logdet[-1]))
            rows.append((s, N, float(tr.log_M[-1]), float(traj.log_M[-1]), gaps[-1], sgaps[-1], lgaps[-1]))
        inc = float(np.max(np.diff(gaps))) if r > 1 else 0.0
        worst_increase = max(worst_increase, inc)
        nonmono_seeds += inc > slack
        worst_full = max(worst_full, gaps[-1])
        if r > 1:
            worst_stat = max(worst_stat, float(np.max(np.diff(sgaps))))
            worst_logdet = max(worst_logdet, float(np.max(np.diff(lgaps))))
    rep.check("logM_gap_max_increase", worst_increase, slack)
    rep.check("logM_gap_at_full_rank", worst_full, cfg.threshold("full_rank_tol"))
    rep.check("stat_gap_max_increase", worst_stat, slack)
    rep.check("logdet_gap_max_increase", worst_logdet, slack)
    rep.stats.update(rho=rho, T=T, rank=r, seeds=cfg.seeds.count, nonmonotone_seeds=int(nonmono_seeds))
    write_csv(out / "truncation.csv", ("seed", "N", "logM_N", "logM", "logM_gap", "stat_gap", "logdet_gap"), rows)
    rep.artifacts.append("truncation.csv")


def _episode_env(cfg: ExperimentConfig, kernel, grid, s, noise=None):
    return make_environment(kernel, grid, cfg.sigma, D=cfg.D, n_centers=cfg.env.n_centers,
                            norm_fraction=cfg.env.norm_fraction, noise=noise or cfg.noise[0],
                            seed=np.random.SeedSequence(cfg.seeds.master, spawn_key=(s,)))


def _suite_ellipsoid(cfg: ExperimentConfig, out: Path, rep: SuiteReport):
    kernel, grid = cfg.kernel.build(), cfg.grid.build()
    T = cfg.horizons[0]
    rho = cfg.rho.resolve(kernel, T)
    rows = []
    fails = 0
    for s in range(cfg.seeds.count):
        res = run_episode(_episode_env(cfg, kernel, grid, s), rho, T, cfg.delta)
        ratio = float(np.max(res.distances / res.radii))
        fails += not res.always_covered
        rows.append((s, int(res.always_covered), ratio, res.final_regret))
    n = cfg.seeds.count
    rate = fails / n
    rep.check("failure_rate", rate, _binomial_limit(cfg.delta, n, cfg.threshold("slack_se")))
    rep.stats.update(rho=rho, T=T, seeds=n, max_ratio=max(r[2] for r in rows))
    write_csv(out / "coverage_runs.csv", ("seed", "covered", "max_ratio", "final_R"), rows)
    rep.artifacts.append("coverage_runs.csv")


def _chain_checks(res, T):
    """Per-round optimism and aggregate regret checks on one covered episode."""
    rec = res.record
    r = np.asarray(rec.r)
    U = np.asarray(rec.U)
    w = np.asarray(rec.width)
    round_excess = float(np.max(r - 2.0 * U * w)) if T else -math.inf
    logdet = res.state.logdet
    U_T = abbasi_radius(logdet, res.spec)
    aggregate_excess = res.final_regret - U_T * math.sqrt(2.0 * T * logdet)
    return round_excess, aggregate_excess


def _suite_potential(cfg: ExperimentConfig, out: Path, rep: SuiteReport):
    kernel, grid = cfg.kernel.build(), cfg.grid.build()
    T = cfg.horizons[0]
    rho = cfg.rho.resolve(kernel, T)
    lemma_regime = rho >= max(1.0, kernel.L)
    rows = []
    worst_res = 0.0
    worst_sum = -math.inf
    worst_round = worst_agg = -math.inf
    covered_runs = 0
    for s in range(cfg.seeds.count):
        res = run_episode(_episode_env(cfg, kernel, grid, s), rho, T, cfg.delta)
        a = res.audit
        worst_res = max(worst_res, a.residual)
        worst_sum = max(worst_sum, a.sum_sq - 2.0 * a.logdet)
        covered = res.always_covered
        round_excess = agg_excess = float("nan")
        if covered:
            covered_runs += 1
            round_excess, agg_excess = _chain_checks(res, T)
            worst_round = max(worst_round, round_excess)
            worst_agg = max(worst_agg, agg_excess)
        rows.append((s, a.log_product, a.logdet, a.sum_sq, a.residual,
                     "" if covered is None else int(covered), round_excess, agg_excess))
    rep.check("potential_identity_abs_err", worst_res, cfg.threshold("identity_tol"))
    if lemma_regime:
        rep.check("sum_sq_minus_2logdet", worst_sum, 0.0)
    if covered_runs:
        rep.check("round_regret_excess", worst_round, cfg.threshold("round_slack"))
        if lemma_regime:
            rep.check("aggregate_regret_excess", worst_agg, cfg.threshold("aggregate_slack"))
    rep.stats.update(rho=rho, T=T, seeds=cfg.seeds.count, lemma_regime=lemma_regime,
                     covered_runs=covered_runs, L=kernel.L)
    write_csv(out / "audit.csv", ("seed", "log_product", "logdet", "sum_sq", "residual", "covered",
                                  "round_excess", "aggregate_excess"), rows)
    rep.artifacts.append("audit.csv")


def _scaling_task(args):
    cfg, T, s = args
    kernel, grid = cfg.kernel.build(), cfg.grid.build()
    rho = cfg.rho.resolve(kernel, T)
    res = run_episode(_episode_env(cfg, kernel, grid, s), rho, T, cfg.delta, track_coverage=False)
    return T, s, rho, res


def _suite_regret(cfg: ExperimentConfig, out: Path, rep: SuiteReport):
    Ts = sorted(cfg.horizons)
    n = cfg.seeds.count
    tasks = [(cfg, T, s) for T in Ts for s in range(n)]
    results = _map(_scaling_task, tasks, cfg.workers)
    finals = {T: np.zeros(n) for T in Ts}
    rhos = {}
    run_rows = []
    for T, s, rho, res in results:
        finals[T][s] = res.final_regret
        rhos[T] = rho
        run_rows.append((T, s, rho, res.final_regret))
        if T == Ts[-1] and s == 0:
            write_csv(out / "regret.csv", REGRET_HEADER, res.record.rows())
            summary = _jsonable(res.summary())
            (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
            rep.stats["episode"] = summary
    med = np.array([np.median(finals[T]) for T in Ts])
    rows = [(T, rhos[T], float(m), float(finals[T].mean()), float(m / T)) for T, m in zip(Ts, med)]
    write_csv(out / "scaling.csv", ("T", "rho", "median_R", "mean_R", "R_over_T"), rows)
    write_csv(out / "runs.csv", ("T", "seed", "rho", "R_T"), run_rows)
    rep.artifacts += ["regret.csv", "summary.json", "scaling.csv", "runs.csv"]
    rep.stats.update(T=Ts, median_R=med, seeds=n)
    if len(Ts) >= 2:
        slope = loglog_slope(Ts, np.maximum(med, 1e-300))
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seeds.master, spawn_key=(2**31,)))
        boots = []
        for _ in range(int(cfg.param("bootstrap"))):
            m = [np.median(finals[T][rng.integers(0, n, n)]) for T in Ts]
            if min(m) > 0:
                boots.append(loglog_slope(Ts, m))
        ci = [float(np.percentile(boots, 2.5)), float(np.percentile(boots, 97.5))] if boots else None
        rep.stats.update(slope=slope, slope_ci95=ci)
        rep.check("loglog_slope", slope, cfg.threshold("max_slope"), "<")
        ratio = med / np.asarray(Ts, dtype=float)
        rep.check("R_over_T_increases", int(np.sum(np.diff(ratio) >= 0)), 0)


def radius_compare(cfg: ExperimentConfig, out: Optional[Path] = None, rep: Optional[SuiteReport] = None):
    """Statistics and noise radii across a rho-grid and an eta-grid on one shared trajectory.

    Returns the table rows ``(t, rule, param, stat, radius)`` and the report.
    """
    rep = rep or SuiteReport("radius_compare")
    kernel, grid = cfg.kernel.build(), cfg.grid.build()
    T = cfg.horizons[0]
    rhos = [float(r) for r in cfg.param("rhos")]
    etas = [float(e) for e in cfg.param("etas")]
    traj = mixture_trajectory(kernel, 1.0, cfg.sigma or 1.0, grid, T, (cfg.seeds.master, 0),
                              cfg.design, cfg.noise[0])
    X, eps = traj.points, traj.eps
    K_full = gram(kernel, X)
    rows = []
    bad = {"abbasi_stat": 0, "abbasi_radius": 0, "chowdhury_stat": 0, "chowdhury_radius": 0}
    worst_coincide = 0.0
    sigma = cfg.sigma or 1.0
    for t in range(1, T + 1):
        K, e = K_full[:t, :t], eps[:t]
        a_stat = [selfnorm_stat_gram(K, e, r) for r in rhos]
        a_rad = [noise_radius(float(np.linalg.slogdet(np.eye(t) + K / r)[1]), sigma, cfg.delta) for r in rhos]
        c_stat = [selfnorm_stat_chowdhury(K, e, h) for h in etas]
        c_rad = [chowdhury_radius(K, RadiusSpec("chowdhury", sigma=sigma, delta=cfg.delta, eta=h)) for h in etas]
        bad["abbasi_stat"] += any(b > a for a, b in zip(a_stat, a_stat[1:]))
        bad["abbasi_radius"] += any(b >= a for a, b in zip(a_rad, a_rad[1:]))
        bad["chowdhury_stat"] += any(b < a for a, b in zip(c_stat, c_stat[1:]))
        bad["chowdhury_radius"] += any(b <= a for a, b in zip(c_rad, c_rad[1:]))
        if 1.0 in rhos:
            ref = a_stat[rhos.index(1.0)]
            worst_coincide = max(worst_coincide, abs(ref - c_stat[0]) / max(ref, 1e-300))
        rows += [(t, "abbasi", r, s, u) for r, s, u in zip(rhos, a_stat, a_rad)]
        rows += [(t, "chowdhury", h, s, u) for h, s, u in zip(etas, c_stat, c_rad)]
    rep.check("abbasi_stat_increases_in_rho", bad["abbasi_stat"], 0)
    rep.check("abbasi_radius_not_strictly_decreasing", bad["abbasi_radius"], 0)
    rep.check("chowdhury_stat_decreases_in_eta", bad["chowdhury_stat"], 0)
    rep.check("chowdhury_radius_not_strictly_increasing", bad["chowdhury_radius"], 0)
    if 1.0 in rhos:
        rep.check("rho1_eta0_stat_rel_gap", worst_coincide, cfg.threshold("coincidence_tol"))
    rep.stats.update(T=T, rhos=rhos, etas=etas, min_eigenvalue=float(np.linalg.eigvalsh(K_full).min()) if T else None)
    if out is not None:
        write_csv(out / "radius_compare.csv", ("t", "rule", "param", "stat", "radius"), rows)
        write_csv(out / "trajectory.csv", MIXTURE_HEADER, traj.rows(cfg.delta, kernel=kernel))
        rep.artifacts += ["radius_compare.csv", "trajectory.csv"]
    return rows, rep


def _suite_radius(cfg: ExperimentConfig, out: Path, rep: SuiteReport):
    radius_compare(cfg, out, rep)


def _suite_infogain(cfg: ExperimentConfig, out: Path, rep: SuiteReport):
    from .infogain import vakili_bound

    grid = cfg.grid.build()
    T = cfg.horizons[0]
    slack = cfg.threshold("sandwich_slack")
    mercer = cfg.kernel.family == "mercer"
    betas = cfg.param("betas") if mercer else [None]
    for beta in betas:
        kernel = cfg.kernel.build(beta)
        for rho_spec in cfg.param("rhos"):
            if rho_spec == "schedule":
                rho = rho_schedule(T, kernel.eigendecay[1], cfg.rho.c)
            else:
                rho = float(rho_spec)
            curve = greedy_infogain(kernel, grid, rho, T)
            tag = f"beta={kernel.eigendecay[1] if kernel.eigendecay else 'na'},rho={rho:.6g}"
            name = f"infogain_{tag.replace('=', '').replace(',', '_')}.csv"
            write_csv(out / name, INFOGAIN_HEADER, curve.rows())
            rep.artifacts.append(name)
            rep.check(f"gamma_hat_decreases[{tag}]", int(np.sum(np.diff(curve.gamma_hat) < 0)), 0)
            rep.check(f"greedy_gain_increases[{tag}]",
                      float(np.max(np.diff(curve.increments))) if T > 1 else 0.0, 1e-9)
            if curve.gamma_bound is not None and curve.certified:
                excess = float(np.max(curve.gamma_hat[1:] - curve.gamma_bound[1:])) if T else -math.inf
                rep.check(f"sandwich_excess[{tag}]", excess, slack)
            elif curve.gamma_bound is not None:
                rep.stats[f"uncertified_excess[{tag}]"] = float(np.max(curve.gamma_hat[1:] - curve.gamma_bound[1:]))
    spot = cfg.param("spot")
    value = vakili_bound(*spot)
    rep.check("spot_value_error", abs(value - cfg.param("spot_value")), cfg.threshold("spot_tol"))
    lo, hi = cfg.param("schedule_T")
    Tgrid = np.logspace(math.log10(lo), math.log10(hi), 13)
    for beta in cfg.param("schedule_betas"):
        s = schedule_consistency_check(beta, Tgrid, tolerance=cfg.threshold("slope_tol"))
        rep.check(f"schedule_power_rel_err[beta={beta}]", s.power_error, cfg.threshold("power_rel_err"))
        rep.check(f"schedule_balance_rel_err[beta={beta}]", s.balance_error, cfg.threshold("balance_rel_err"))
        rep.check(f"slope_gap_sqrt_rho_gamma_T[beta={beta}]",
                  abs(s.slope_sqrt_rho_gamma_T - s.target_exponent), cfg.threshold("slope_tol"))
        rep.check(f"slope_gap_gamma_sqrtT[beta={beta}]",
                  abs(s.slope_gamma_sqrtT - s.target_exponent), cfg.threshold("slope_tol"))
        rep.stats[f"schedule[beta={beta}]"] = {
            "target": s.target_exponent, "slope_sqrt_rho_gamma_T": s.slope_sqrt_rho_gamma_T,
            "slope_gamma_sqrtT": s.slope_gamma_sqrtT}
    rep.stats.update(T=T)


SUITES = {
    "ville_coverage": _suite_ville,
    "supermartingale_decay": _suite_decay,
    "gram_identity": _suite_gram,
    "truncation_convergence": _suite_truncation,
    "ellipsoid_coverage": _suite_ellipsoid,
    "regret_scaling": _suite_regret,
    "radius_compare": _suite_radius,
    "infogain_sandwich": _suite_infogain,
    "potential_audit": _suite_potential,
}


def provenance(cfg: ExperimentConfig) -> dict:
    return {
        "config_sha256": cfg.digest(),
        "package_version": __version__,
        "numpy_version": np.__version__,
        "python_version": platform.python_version(),
    }


def run_suite(cfg: ExperimentConfig, output_dir=None) -> SuiteReport:
    """Run the suite named by ``cfg.kind``; writes artifacts and ``report.json``."""
    out = Path(output_dir if output_dir is not None else os.environ.get("GPUCB_OUTPUT_DIR", cfg.output_dir))
    out.mkdir(parents=True, exist_ok=True)
    rep = SuiteReport(cfg.kind)
    log.info("running %s into %s", cfg.kind, out)
    SUITES[cfg.kind](cfg, out, rep)
    rep.provenance = provenance(cfg)
    rep.artifacts.append("report.json")
    (out / "report.json").write_text(json.dumps(rep.to_dict(), indent=2, sort_keys=True) + "\n")
    return rep
