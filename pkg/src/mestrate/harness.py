"""Experiment orchestration: rate studies, bound evaluation, condition checks.

A rate study freezes a design (covariates or observation points) per sample
size, computes the sandwich matrices at the true parameter once, runs R
independent replications of sample -> minimize -> standardize, measures the
Wasserstein distance of the replicated statistic to the standard Gaussian,
subtracts the finite-sample floor, and fits a log-log slope across sample
sizes.  Every replication owns a counter-based random stream keyed by
(seed, n, replication), so results are independent of scheduling and of the
worker count.
"""

import concurrent.futures
import dataclasses
import json
import multiprocessing
from dataclasses import dataclass, field

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__
from .errors import (
    BadStart,
    ConditionsViolated,
    ConfigError,
    StalledStart,
    UnstableExperiment,
)
from .gpcv import (
    KernelFamily,
    build_corr,
    build_points,
    cv_sandwich_at_truth,
    cv_value_and_grad,
    grad_matrices,
    quadform_w1_bound,
)
from .logistic import sample_outcomes, sandwich_at_truth, value_and_grad
from .mestim import (
    MinimizeConfig,
    ParamBox,
    bonis_bound,
    minimize,
    normalize_statistic,
)
from .rng import TAG_DESIGN, TAG_FIELD, TAG_MC, TAG_STARTS, TAG_SYNTHETIC, stream
from .wasserstein import EmpiricalSample, debias, w1_1d_vs_gaussian, w1_sliced_vs_gaussian

RATE_CSV_HEADER = (
    "n,R,failures,w1_coordmax_raw,w1_coordmax_floor,w1_coordmax_debiased,"
    "w1_sliced_raw,w1_sliced_floor,w1_sliced_debiased"
)


# ---------------------------------------------------------------------------
# Configuration


def _take(d, key, default):
    return d[key] if key in d else default


def _check_unknown(d, allowed, where):
    unknown = set(d) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {where}")


@dataclass(frozen=True)
class LogisticBlock:
    p: int = 2
    theta0: tuple = (0.5, -0.5)
    design_low: float = -1.0
    design_high: float = 1.0
    lambda_min_design: float = 0.05
    box_halfwidth: float = 3.0
    interior_margin: float = 0.5

    @classmethod
    def from_dict(cls, d):
        _check_unknown(d, [f.name for f in dataclasses.fields(cls)], "logistic block")
        kwargs = dict(d)
        if "theta0" in kwargs:
            kwargs["theta0"] = tuple(float(v) for v in kwargs["theta0"])
        return cls(**kwargs)


@dataclass(frozen=True)
class GpcvBlock:
    family: str = "exponential"
    theta0: tuple = (1.0,)
    d: int = 1
    spacing: float = 1.0
    jitter: float = 0.2
    rate_bounds: tuple = (0.2, 5.0)
    power_bounds: tuple = (0.5, 1.5)
    interior_margin: float = 0.1
    min_distance: float | None = None
    lambda_min_corr: float = 1e-4

    @classmethod
    def from_dict(cls, d):
        _check_unknown(d, [f.name for f in dataclasses.fields(cls)], "gp-cv block")
        kwargs = dict(d)
        for key in ("theta0", "rate_bounds", "power_bounds"):
            if key in kwargs:
                kwargs[key] = tuple(float(v) for v in kwargs[key])
        return cls(**kwargs)

    def min_distance_threshold(self):
        if self.min_distance is not None:
            return self.min_distance
        # Guaranteed separation of the jittered grid, with roundoff slack.
        return self.spacing * (1.0 - 2.0 * self.jitter) * (1.0 - 1e-9)


@dataclass(frozen=True)
class SyntheticBlock:
    """Injected statistic bypassing estimation: exact N(0, I_p) draws,
    optionally mean-shifted by n^{-1/2} in every coordinate (a planted
    1/sqrt(n) rate for calibrating the slope fit)."""

    p: int = 2
    shift: str = "none"  # "none" | "inv-sqrt-n"

    @classmethod
    def from_dict(cls, d):
        _check_unknown(d, [f.name for f in dataclasses.fields(cls)], "synthetic block")
        blk = cls(**d)
        if blk.shift not in ("none", "inv-sqrt-n"):
            raise ConfigError(f"synthetic shift must be 'none' or 'inv-sqrt-n', got {blk.shift!r}")
        return blk


@dataclass(frozen=True)
class MinimizerBlock:
    n_starts: int = 1
    grad_tol: float = 1e-9
    max_iter: int = 500
    armijo_c: float = 1e-4
    backtrack_factor: float = 0.5
    max_backtracks: int = 50

    @classmethod
    def from_dict(cls, d):
        _check_unknown(d, [f.name for f in dataclasses.fields(cls)], "minimizer block")
        return cls(**d)

    def to_minimize_config(self):
        return MinimizeConfig(
            grad_tol=self.grad_tol,
            max_iter=self.max_iter,
            armijo_c=self.armijo_c,
            backtrack_factor=self.backtrack_factor,
            max_backtracks=self.max_backtracks,
        )


@dataclass(frozen=True)
class W1Block:
    n_slices: int = 32

    @classmethod
    def from_dict(cls, d):
        _check_unknown(d, [f.name for f in dataclasses.fields(cls)], "w1 block")
        return cls(**d)


@dataclass(frozen=True)
class BoundBlock:
    mc_samples: int = 10000
    assignment_batch: int = 2500
    beta: float = 1.0
    c0: float = 1.0

    @classmethod
    def from_dict(cls, d):
        _check_unknown(d, [f.name for f in dataclasses.fields(cls)], "bound block")
        blk = cls(**d)
        if blk.assignment_batch > 4096:
            raise ConfigError("assignment_batch cannot exceed the exact-assignment cap of 4096")
        return blk


@dataclass(frozen=True)
class ConditionsBlock:
    lambda_min_hessian: float = 1e-6
    lambda_min_score: float = 1e-10
    theta_grid_points: int = 21
    decay_c: float = 1.0
    decay_coeff: float = 1e4

    @classmethod
    def from_dict(cls, d):
        _check_unknown(d, [f.name for f in dataclasses.fields(cls)], "conditions block")
        return cls(**d)


@dataclass(frozen=True)
class ExperimentConfig:
    model: str
    n_grid: tuple
    replications: int
    seed: int
    workers: int = 1
    logistic: LogisticBlock = field(default_factory=LogisticBlock)
    gpcv: GpcvBlock = field(default_factory=GpcvBlock)
    synthetic: SyntheticBlock = field(default_factory=SyntheticBlock)
    minimizer: MinimizerBlock = field(default_factory=MinimizerBlock)
    w1: W1Block = field(default_factory=W1Block)
    bound: BoundBlock = field(default_factory=BoundBlock)
    conditions: ConditionsBlock = field(default_factory=ConditionsBlock)

    TOP_KEYS = (
        "model", "n_grid", "replications", "seed", "workers",
        "logistic", "gpcv", "synthetic", "minimizer", "w1", "bound", "conditions",
    )

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        _check_unknown(d, cls.TOP_KEYS, "config")
        for key in ("model", "n_grid", "replications", "seed"):
            if key not in d:
                raise ConfigError(f"config is missing required key {key!r}")
        model = d["model"]
        if model not in ("logistic", "gp-cv", "synthetic"):
            raise ConfigError(f"model must be 'logistic', 'gp-cv' or 'synthetic', got {model!r}")
        n_grid = tuple(int(n) for n in d["n_grid"])
        if len(n_grid) < 2 or any(b <= a for a, b in zip(n_grid, n_grid[1:])):
            raise ConfigError("n_grid must be strictly increasing with at least 2 entries")
        replications = int(d["replications"])
        if replications < 100:
            raise ConfigError("replications must be at least 100")
        try:
            cfg = cls(
                model=model,
                n_grid=n_grid,
                replications=replications,
                seed=int(d["seed"]),
                workers=int(_take(d, "workers", 1)),
                logistic=LogisticBlock.from_dict(_take(d, "logistic", {})),
                gpcv=GpcvBlock.from_dict(_take(d, "gpcv", {})),
                synthetic=SyntheticBlock.from_dict(_take(d, "synthetic", {})),
                minimizer=MinimizerBlock.from_dict(_take(d, "minimizer", {})),
                w1=W1Block.from_dict(_take(d, "w1", {})),
                bound=BoundBlock.from_dict(_take(d, "bound", {})),
                conditions=ConditionsBlock.from_dict(_take(d, "conditions", {})),
            )
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        if cfg.workers < 1:
            raise ConfigError("workers must be >= 1")
        return cfg

    @classmethod
    def from_json(cls, path):
        try:
            with open(path) as fh:
                return cls.from_dict(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc

    def echo(self):
        return dataclasses.asdict(self)


# ---------------------------------------------------------------------------
# Frozen per-n model state


@dataclass(frozen=True)
class _FrozenLogistic:
    design: object
    sandwich: object
    box: ParamBox
    starts: tuple
    mincfg: MinimizeConfig


@dataclass(frozen=True)
class _FrozenGpcv:
    family: KernelFamily
    theta0: np.ndarray
    points: object
    chol0: np.ndarray
    sandwich: object
    box: ParamBox
    starts: tuple
    mincfg: MinimizeConfig


def _gen_starts(box, n_starts, seed, n):
    """Box center plus seeded uniform interior points, frozen per n."""
    starts = [0.5 * (box.lower + box.upper)]
    if n_starts > 1:
        g = stream(seed, TAG_STARTS, n)
        for _ in range(n_starts - 1):
            starts.append(g.uniform(box.lower, box.upper))
    return tuple(starts)


def _master_logistic_rows(config, max_redraws=20):
    """One covariate sequence per experiment; each n uses its first n rows.

    The whole sequence is redrawn if any prefix on the n grid fails the
    second-moment eigenvalue diagnostic.
    """
    blk = config.logistic
    max_n = max(config.n_grid)
    for attempt in range(max_redraws):
        rows = stream(config.seed, TAG_DESIGN, attempt).uniform(
            blk.design_low, blk.design_high, size=(max_n, blk.p)
        )
        ok = all(
            float(np.linalg.eigvalsh(rows[:n].T @ rows[:n] / n)[0]) >= blk.lambda_min_design
            for n in config.n_grid
        )
        if ok:
            return rows
    raise ConditionsViolated(
        f"could not draw a design sequence with lambda_min >= {blk.lambda_min_design} "
        f"on every prefix in {max_redraws} attempts"
    )


def _freeze_logistic(config, n, master_rows=None):
    from .logistic import LogisticDesign

    blk = config.logistic
    theta0 = np.asarray(blk.theta0, dtype=float)
    if theta0.size != blk.p:
        raise ConfigError("logistic theta0 length must equal p")
    if master_rows is None:
        master_rows = _master_logistic_rows(config)
    design = LogisticDesign(x=master_rows[:n], theta0=theta0)
    sandwich = sandwich_at_truth(design)
    box = ParamBox(theta0 - blk.box_halfwidth, theta0 + blk.box_halfwidth,
                   blk.interior_margin)
    checks = {
        "margin_ball_inside": box.margin_ball_inside(theta0),
        "lambda_min_design": design.second_moment_lambda_min() >= blk.lambda_min_design,
        "lambda_min_score": sandwich.lambda_min_c > config.conditions.lambda_min_score,
        "lambda_min_hessian": sandwich.lambda_min_h >= config.conditions.lambda_min_hessian,
    }
    failed = [name for name, ok in checks.items() if not ok]
    if failed:
        raise ConditionsViolated(f"logistic n={n}: {failed}")
    starts = _gen_starts(box, config.minimizer.n_starts, config.seed, n)
    return _FrozenLogistic(design=design, sandwich=sandwich, box=box, starts=starts,
                           mincfg=config.minimizer.to_minimize_config())


def _freeze_gpcv(config, n):
    blk = config.gpcv
    family = KernelFamily(name=blk.family, d=blk.d)
    theta0 = np.asarray(blk.theta0, dtype=float)
    family.validate(theta0)
    # Keyed by the experiment seed alone: in d = 1 the first n nodes of the
    # jittered grid nest across the n grid, mirroring the single sequence
    # of observation points the increasing-domain setting assumes.
    points = build_points(n, blk.d, blk.spacing, blk.jitter, (config.seed,))
    corr0 = build_corr(family, theta0, points)
    sandwich = cv_sandwich_at_truth(family, theta0, points)
    box = family.default_box(blk.rate_bounds, blk.power_bounds, blk.interior_margin)
    checks = {
        "margin_ball_inside": box.margin_ball_inside(theta0),
        "min_pairwise_distance": (
            n == 1 or points.min_pairwise_distance >= blk.min_distance_threshold()
        ),
        "lambda_min_corr": corr0.lambda_min >= blk.lambda_min_corr,
        "lambda_min_score": sandwich.lambda_min_c > config.conditions.lambda_min_score,
        "lambda_min_hessian": sandwich.lambda_min_h >= config.conditions.lambda_min_hessian,
    }
    failed = [name for name, ok in checks.items() if not ok]
    if failed:
        raise ConditionsViolated(f"gp-cv n={n}: {failed}")
    starts = _gen_starts(box, config.minimizer.n_starts, config.seed, n)
    return _FrozenGpcv(family=family, theta0=theta0, points=points,
                       chol0=corr0.chol_lower, sandwich=sandwich, box=box,
                       starts=starts, mincfg=config.minimizer.to_minimize_config())


def _logistic_rep(frozen, seed, n, rep):
    data = sample_outcomes(frozen.design, (seed, n, rep))
    try:
        run = minimize(value_and_grad(data), frozen.box, frozen.starts, frozen.mincfg)
    except (StalledStart, BadStart):
        return None
    if not run.converged:
        return None
    return normalize_statistic(run.theta_hat, frozen.design.theta0, n, frozen.sandwich)


def _gpcv_rep(frozen, seed, n, rep):
    # Same draw as sample_field(corr0, (seed, n, rep)) without rebuilding
    # the correlation bundle in every replication.
    z = stream(seed, n, rep, TAG_FIELD).standard_normal(frozen.points.n)
    y = frozen.chol0 @ z
    fg = cv_value_and_grad(frozen.family, frozen.points, y)
    try:
        run = minimize(fg, frozen.box, frozen.starts, frozen.mincfg,
                       value_objective=fg.value)
    except (StalledStart, BadStart):
        return None
    if not run.converged:
        return None
    return normalize_statistic(run.theta_hat, frozen.theta0, n, frozen.sandwich)


_REP_FUNCS = {"logistic": _logistic_rep, "gp-cv": _gpcv_rep}

# BLAS pools are pinned to one thread throughout: the workloads are many
# small factorizations where pool synchronization costs more than it saves,
# and single-threaded kernels make results independent of the host's core
# count.  Parallelism comes from worker processes over replications.
_worker_blas_limit = None


def _limit_blas():
    global _worker_blas_limit
    _worker_blas_limit = threadpool_limits(limits=1)


def _run_chunk(model, frozen, seed, n, reps):
    func = _REP_FUNCS[model]
    return [(r, func(frozen, seed, n, r)) for r in reps]


def _replicate(config, n, frozen, workers):
    """All replications for one sample size.  Returns (stats array, failures)."""
    reps = config.replications
    results = [None] * reps
    if workers <= 1:
        for r in range(reps):
            results[r] = _REP_FUNCS[config.model](frozen, config.seed, n, r)
    else:
        chunks = np.array_split(np.arange(reps), workers * 4)
        ctx = multiprocessing.get_context("fork")
        with concurrent.futures.ProcessPoolExecutor(
            max_workers=workers, mp_context=ctx, initializer=_limit_blas
        ) as ex:
            futures = [
                ex.submit(_run_chunk, config.model, frozen, config.seed, n, chunk.tolist())
                for chunk in chunks if chunk.size
            ]
            for fut in concurrent.futures.as_completed(futures):
                for r, stat in fut.result():
                    results[r] = stat
    stats = [s for s in results if s is not None]
    failures = reps - len(stats)
    return np.asarray(stats, dtype=float), failures


def _synthetic_stats(config, n):
    blk = config.synthetic
    g = stream(config.seed, TAG_SYNTHETIC, n)
    stats = g.standard_normal((config.replications, blk.p))
    if blk.shift == "inv-sqrt-n":
        stats += 1.0 / np.sqrt(n)
    return stats


# ---------------------------------------------------------------------------
# Rate study


@dataclass(frozen=True)
class RateRow:
    n: int
    replications: int
    failures: int
    w1_coordmax_raw: float
    w1_coordmax_floor: float
    w1_coordmax_debiased: float
    w1_sliced_raw: float
    w1_sliced_floor: float
    w1_sliced_debiased: float


def fit_loglog_slope(ns, values):
    """Least-squares slope and standard error of log(value) against log(n).

    Only strictly positive values participate; with fewer than 3 of them
    the slope is unavailable and (None, None) is returned.
    """
    ns = np.asarray(ns, dtype=float)
    values = np.asarray(values, dtype=float)
    keep = values > 0
    if int(np.sum(keep)) < 3:
        return None, None
    x = np.log(ns[keep])
    y = np.log(values[keep])
    xc = x - x.mean()
    sxx = float(xc @ xc)
    slope = float(xc @ (y - y.mean())) / sxx
    resid = y - (y.mean() + slope * xc)
    m = x.size
    if m > 2:
        se = float(np.sqrt((resid @ resid) / (m - 2) / sxx))
    else:
        se = 0.0
    return slope, se


@dataclass(frozen=True)
class RateReport:
    rows: tuple
    slope: float | None
    slope_se: float | None
    metadata: dict

    def to_csv(self):
        lines = [RATE_CSV_HEADER]
        for row in self.rows:
            lines.append(
                f"{row.n},{row.replications},{row.failures},"
                f"{row.w1_coordmax_raw!r},{row.w1_coordmax_floor!r},"
                f"{row.w1_coordmax_debiased!r},{row.w1_sliced_raw!r},"
                f"{row.w1_sliced_floor!r},{row.w1_sliced_debiased!r}"
            )
        return "\n".join(lines) + "\n"

    def to_json_rows(self):
        return [dataclasses.asdict(row) for row in self.rows]

    def meta(self):
        out = dict(self.metadata)
        out["slope"] = self.slope
        out["slope_se"] = self.slope_se
        out["version"] = __version__
        return out


def run_rate_study(config, workers=None):
    """Full rate study over the configured n grid.

    Deterministic given the config: designs, outcomes, starts, slice
    directions and reference floors all derive from counter-based streams
    keyed by the config seed.  Raises ConditionsViolated if a model
    diagnostic fails, UnstableExperiment if more than 1% of replications
    fail to minimize at some n.
    """
    with threadpool_limits(limits=1):
        return _run_rate_study_inner(config, workers)


def _run_rate_study_inner(config, workers):
    workers = config.workers if workers is None else workers
    master_rows = _master_logistic_rows(config) if config.model == "logistic" else None
    rows = []
    for n in config.n_grid:
        if config.model == "synthetic":
            stats, failures = _synthetic_stats(config, n), 0
        else:
            frozen = _freeze_logistic(config, n, master_rows) if config.model == "logistic" \
                else _freeze_gpcv(config, n)
            stats, failures = _replicate(config, n, frozen, workers)
            if failures > 0.01 * config.replications:
                raise UnstableExperiment(
                    f"{failures}/{config.replications} replications failed at n={n}"
                )
        sample = EmpiricalSample(stats, label=f"{config.model} n={n}")
        coord_ests = [w1_1d_vs_gaussian(stats[:, j]) for j in range(sample.dim)]
        coord_raw = max(e.value for e in coord_ests)
        coord_floor = coord_ests[0].floor
        sliced = w1_sliced_vs_gaussian(sample, config.w1.n_slices, (config.seed,))
        rows.append(RateRow(
            n=n,
            replications=config.replications,
            failures=failures,
            w1_coordmax_raw=coord_raw,
            w1_coordmax_floor=coord_floor,
            w1_coordmax_debiased=max(coord_raw - coord_floor, 0.0),
            w1_sliced_raw=sliced.value,
            w1_sliced_floor=sliced.floor,
            w1_sliced_debiased=debias(sliced),
        ))
    slope, slope_se = fit_loglog_slope(
        [r.n for r in rows], [r.w1_coordmax_debiased for r in rows]
    )
    slope_sl, slope_sl_se = fit_loglog_slope(
        [r.n for r in rows], [r.w1_sliced_debiased for r in rows]
    )
    metadata = {
        "model": config.model,
        "config": config.echo(),
        "slope_sliced": slope_sl,
        "slope_sliced_se": slope_sl_se,
    }
    return RateReport(rows=tuple(rows), slope=slope, slope_se=slope_se, metadata=metadata)


# ---------------------------------------------------------------------------
# Bound evaluation


@dataclass(frozen=True)
class BoundReport:
    kind: str  # "quadform" | "bonis"
    rows: tuple
    metadata: dict

    def header(self):
        if self.kind == "quadform":
            return "n,bound_paper,bound_chaos,w1_mc,trace_center_max"
        return "n,bonis_bound"

    def to_csv(self):
        lines = [self.header()]
        for row in self.rows:
            if self.kind == "quadform":
                lines.append(
                    f"{row['n']},{row['bound_paper']!r},{row['bound_chaos']!r},"
                    f"{row['w1_mc']!r},{row['trace_center_max']!r}"
                )
            else:
                lines.append(f"{row['n']},{row['bonis_bound']!r}")
        return "\n".join(lines) + "\n"

    def to_json_rows(self):
        return list(self.rows)

    def meta(self):
        out = dict(self.metadata)
        out["version"] = __version__
        return out


def _mc_w1_quadform(b_syms, chol0, c_chaos, n, seed, mc_samples, batch):
    """Paired-sample W1 estimate of the score vector against N(0, C).

    Exact-assignment distances on batches of at most ``batch`` paired
    samples, averaged; batching keeps the assignment solve within its cap.
    """
    from .wasserstein import w1_exact_pair

    p = len(b_syms)
    g = stream(seed, TAG_MC, n)
    z = g.standard_normal((mc_samples, chol0.shape[0]))
    y = z @ chol0.T
    x = np.column_stack([np.einsum("ri,ri->r", y @ b, y) for b in b_syms])
    x /= np.sqrt(n)
    chol_c = np.linalg.cholesky(c_chaos)
    ref = g.standard_normal((mc_samples, p)) @ chol_c.T
    n_batches = int(np.ceil(mc_samples / batch))
    sizes = np.array_split(np.arange(mc_samples), n_batches)
    vals = [
        w1_exact_pair(x[idx], ref[idx]).value
        for idx in sizes if idx.size >= 2
    ]
    return float(np.mean(vals))


def run_bound_eval(config):
    """Explicit bound tables.

    gp-cv: the quadratic-form Wasserstein bound under both covariance
    conventions for the standardized CV score at theta0, next to a
    paired-sample Monte Carlo W1 estimate against N(0, C) (chaos
    convention, the exact score covariance).
    Other models: plug-in table of the fourth-moment bound.
    """
    with threadpool_limits(limits=1):
        return _run_bound_eval_inner(config)


def _run_bound_eval_inner(config):
    rows = []
    if config.model == "gp-cv":
        blk = config.gpcv
        family = KernelFamily(name=blk.family, d=blk.d)
        theta0 = np.asarray(blk.theta0, dtype=float)
        for n in config.n_grid:
            points = build_points(n, blk.d, blk.spacing, blk.jitter, (config.seed,))
            corr0 = build_corr(family, theta0, points)
            mats = grad_matrices(corr0)
            a_list = [b / np.sqrt(n) for b in mats.b_sym]
            trace_center = max(
                abs(float(np.einsum("ij,ji->", corr0.r, a))) for a in a_list
            )
            bound_paper, _ = quadform_w1_bound(corr0.r, a_list, convention="paper")
            bound_chaos, c_chaos = quadform_w1_bound(corr0.r, a_list, convention="chaos")
            w1_mc = _mc_w1_quadform(
                mats.b_sym, corr0.chol_lower, c_chaos, n, config.seed,
                config.bound.mc_samples, config.bound.assignment_batch,
            )
            rows.append({
                "n": n,
                "bound_paper": bound_paper,
                "bound_chaos": bound_chaos,
                "w1_mc": w1_mc,
                "trace_center_max": trace_center,
            })
        kind = "quadform"
    else:
        p = config.logistic.p if config.model == "logistic" else config.synthetic.p
        for n in config.n_grid:
            rows.append({
                "n": n,
                "bonis_bound": bonis_bound(config.bound.beta, p, n, config.bound.c0),
            })
        kind = "bonis"
    metadata = {"model": config.model, "config": config.echo()}
    return BoundReport(kind=kind, rows=tuple(rows), metadata=metadata)


# ---------------------------------------------------------------------------
# Condition diagnostics


@dataclass(frozen=True)
class ConditionEntry:
    n: int
    name: str
    value: float | None
    threshold: float | None
    passed: bool | None  # None = not applicable


@dataclass(frozen=True)
class ConditionReport:
    entries: tuple
    metadata: dict

    @property
    def all_passed(self):
        return all(e.passed for e in self.entries if e.passed is not None)

    def to_csv(self):
        lines = ["n,diagnostic,value,threshold,passed"]
        for e in self.entries:
            value = "n/a" if e.value is None else repr(e.value)
            threshold = "n/a" if e.threshold is None else repr(e.threshold)
            passed = "n/a" if e.passed is None else str(e.passed).lower()
            lines.append(f"{e.n},{e.name},{value},{threshold},{passed}")
        return "\n".join(lines) + "\n"

    def to_json_rows(self):
        return [dataclasses.asdict(e) for e in self.entries]

    def meta(self):
        out = dict(self.metadata)
        out["all_passed"] = self.all_passed
        out["version"] = __version__
        return out


def _logistic_conditions(config, n, master_rows):
    from .logistic import LogisticDesign

    blk = config.logistic
    theta0 = np.asarray(blk.theta0, dtype=float)
    design = LogisticDesign(x=master_rows[:n], theta0=theta0)
    sandwich = sandwich_at_truth(design)
    x_bound = np.sqrt(blk.p) * max(abs(blk.design_low), abs(blk.design_high))
    lam_design = design.second_moment_lambda_min()
    return [
        ConditionEntry(n, "max_row_norm", design.c_x1, x_bound, design.c_x1 <= x_bound),
        ConditionEntry(n, "lambda_min_design", lam_design, blk.lambda_min_design,
                       lam_design >= blk.lambda_min_design),
        ConditionEntry(n, "lambda_min_hessian", sandwich.lambda_min_h,
                       config.conditions.lambda_min_hessian,
                       sandwich.lambda_min_h >= config.conditions.lambda_min_hessian),
        ConditionEntry(n, "lambda_min_score", sandwich.lambda_min_c,
                       config.conditions.lambda_min_score,
                       sandwich.lambda_min_c > config.conditions.lambda_min_score),
    ]


def _gpcv_theta_grid(family, blk, n_points):
    axes = [np.linspace(blk.rate_bounds[0], blk.rate_bounds[1], n_points)]
    if family.n_params == 2:
        axes.append(np.linspace(blk.power_bounds[0], blk.power_bounds[1], n_points))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


def _gpcv_conditions(config, n):
    blk = config.gpcv
    family = KernelFamily(name=blk.family, d=blk.d)
    theta0 = np.asarray(blk.theta0, dtype=float)
    points = build_points(n, blk.d, blk.spacing, blk.jitter, (config.seed,))
    entries = []
    if n == 1:
        entries.append(ConditionEntry(n, "min_pairwise_distance", None, None, None))
    else:
        entries.append(ConditionEntry(
            n, "min_pairwise_distance", points.min_pairwise_distance,
            blk.min_distance_threshold(),
            points.min_pairwise_distance >= blk.min_distance_threshold(),
        ))
    # Condition-11 surrogate: infimum of lambda_min(R_theta) over a theta grid.
    grid = _gpcv_theta_grid(family, blk, config.conditions.theta_grid_points)
    lam_grid = np.inf
    dists = points.distances
    for theta in grid:
        r_mat = family.corr(theta, dists)
        np.fill_diagonal(r_mat, 1.0)
        lam_grid = min(lam_grid, float(np.linalg.eigvalsh(r_mat)[0]))
    entries.append(ConditionEntry(
        n, "lambda_min_corr_grid", lam_grid, blk.lambda_min_corr,
        lam_grid >= blk.lambda_min_corr,
    ))
    # Correlation decay: implied constant of |k| (1 + r^(d + c)) on a radius grid.
    radii = np.linspace(blk.spacing * 0.5, blk.spacing * max(n, 10), 200)
    implied = 0.0
    for theta in grid:
        k_vals = np.abs(family.corr(theta, radii))
        implied = max(implied, float(np.max(
            k_vals * (1.0 + radii ** (blk.d + config.conditions.decay_c))
        )))
    entries.append(ConditionEntry(
        n, "decay_implied_coeff", implied, config.conditions.decay_coeff,
        implied <= config.conditions.decay_coeff,
    ))
    sandwich = cv_sandwich_at_truth(family, theta0, points)
    entries.append(ConditionEntry(
        n, "lambda_min_hessian", sandwich.lambda_min_h,
        config.conditions.lambda_min_hessian,
        sandwich.lambda_min_h >= config.conditions.lambda_min_hessian,
    ))
    entries.append(ConditionEntry(
        n, "lambda_min_score", sandwich.lambda_min_c,
        config.conditions.lambda_min_score,
        sandwich.lambda_min_c > config.conditions.lambda_min_score,
    ))
    return entries


def verify_conditions(config):
    """Numeric diagnostics for the model regularity conditions (report only)."""
    with threadpool_limits(limits=1):
        return _verify_conditions_inner(config)


def _verify_conditions_inner(config):
    entries = []
    master_rows = _master_logistic_rows(config) if config.model == "logistic" else None
    for n in config.n_grid:
        if config.model == "logistic":
            entries.extend(_logistic_conditions(config, n, master_rows))
        elif config.model == "gp-cv":
            entries.extend(_gpcv_conditions(config, n))
        # synthetic model has no conditions to check
    metadata = {"model": config.model, "config": config.echo()}
    return ConditionReport(entries=tuple(entries), metadata=metadata)
