"""Seeded Monte Carlo trials, efficiency statistics and alpha sweeps."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy import stats

from . import bounds
from .algorithms import ReprConfig, RunOutcome, run_c3, run_c4, run_representatives, verify_partition
from .errors import ConfigError, IntegrityError
from .problem import GroundTruth, ProblemConfig, generate_problem, representatives_of
from .teachers import NamingModel, TeacherPool, budget_for

ALGORITHMS = ("c3", "repr", "c4")
THREADS_ENV = "LABELFUSE_THREADS"


@dataclass(frozen=True)
class ExperimentConfig:
    """One simulated setting.

    The budget is ``round(alpha * c)`` when ``alpha`` is set, else ``budget``.
    ``p`` is the name-consistency probability; C4 defaults it to 0, the
    other algorithms use uncoordinated teachers unless it is given.
    ``problem.seed`` is ignored: every trial derives its own problem seed
    from ``master_seed`` and the trial index, so different algorithms with
    the same master seed see the same problems.
    """

    problem: ProblemConfig
    algorithm: str = "c3"
    repr_config: ReprConfig = field(default_factory=ReprConfig)
    alpha: float | None = None
    budget: int | None = None
    p: float | None = None
    trials: int = 1
    master_seed: int = 0

    def validate(self) -> None:
        self.problem.validate()
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; choose from {', '.join(ALGORITHMS)}")
        if self.trials < 1:
            raise ConfigError(f"trials must be at least 1, got {self.trials}")
        if self.p is not None and not 0.0 <= self.p <= 1.0:
            raise ConfigError(f"p must lie in [0, 1], got {self.p}")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("seed must fit in 64 unsigned bits")
        _ = self.l  # raises on a bad budget

    @property
    def l(self) -> int:
        if self.alpha is not None:
            if not self.alpha > 0:
                raise ConfigError(f"alpha must be positive, got {self.alpha}")
            return budget_for(self.alpha, self.problem.c)
        if self.budget is None:
            raise ConfigError("either alpha or budget must be set")
        if self.budget < 2:
            raise ConfigError(f"budget must be at least 2, got {self.budget}")
        return int(self.budget)

    @property
    def effective_alpha(self) -> float:
        return self.l / self.problem.c

    @property
    def naming(self) -> NamingModel:
        if self.algorithm == "c4":
            return NamingModel(0.0 if self.p is None else self.p)
        return NamingModel(self.p)


@dataclass(frozen=True)
class TrialResult:
    labels_used: int
    efficiency: float
    rounds: int
    teachers_used: int


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    l: int
    alpha: float
    beta: float | None
    mean_labels: float
    mean_efficiency: float
    ratio_efficiency: float  # n / mean_labels
    stderr: float
    ci95_low: float
    ci95_high: float
    mean_rounds: float
    per_trial: tuple[TrialResult, ...]
    bound: float
    upper: float
    traces: tuple[tuple[tuple[int, int, int], ...], ...] | None = field(default=None, repr=False, compare=False)


def thread_count(env: dict | None = None) -> int:
    """Worker threads from ``LABELFUSE_THREADS`` (unset or 0 means one per CPU)."""
    raw = (os.environ if env is None else env).get(THREADS_ENV, "").strip()
    try:
        n = int(raw) if raw else 0
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n < 0:
        raise ConfigError(f"{THREADS_ENV} must be non-negative, got {n}")
    return n or (os.cpu_count() or 1)


def trial_seeds(master_seed: int, trial: int) -> tuple[int, np.random.SeedSequence, np.random.SeedSequence]:
    """Problem seed and teacher/algorithm seed sequences for one trial."""
    problem_ss, teacher_ss, alg_ss = np.random.SeedSequence(master_seed, spawn_key=(trial,)).spawn(3)
    return int(problem_ss.generate_state(1, np.uint64)[0]), teacher_ss, alg_ss


def _run_trial(config: ExperimentConfig, beta: float | None, trial: int, trace: bool) -> RunOutcome:
    problem_seed, teacher_ss, alg_ss = trial_seeds(config.master_seed, trial)
    truth = generate_problem(config.problem.with_seed(problem_seed))
    pool = TeacherPool(truth, config.naming, config.l, np.random.default_rng(teacher_ss))
    rng = np.random.default_rng(alg_ss)
    if config.algorithm == "c3":
        outcome = run_c3(truth, pool, rng, trace=trace)
    elif config.algorithm == "c4":
        outcome = run_c4(truth, pool, rng, trace=trace)
    else:
        outcome = run_representatives(truth, pool, representatives_of(truth), ReprConfig(beta), rng, trace=trace)
    if not verify_partition(outcome, truth):
        raise IntegrityError(
            f"trial {trial} of {config.algorithm} returned a partition that does not match the ground truth"
        )
    return outcome


def _bound_for(config: ExperimentConfig, alpha: float, beta: float | None) -> float:
    if config.algorithm == "c3":
        return bounds.c3_bound(alpha)
    if config.algorithm == "c4":
        return bounds.c4_bound(alpha, config.naming.true_name_prob)
    return bounds.representatives_bound(alpha, beta)


def run_experiment(config: ExperimentConfig, *, threads: int | None = None, trace: bool = False) -> ExperimentResult:
    """Run all trials and summarize them; output does not depend on ``threads``."""
    config.validate()
    alpha = config.effective_alpha
    beta = config.repr_config.resolve(alpha, config.l) if config.algorithm == "repr" else None
    workers = min(thread_count() if threads is None else max(1, threads), config.trials)

    def one(trial: int) -> RunOutcome:
        return _run_trial(config, beta, trial, trace)

    if workers == 1:
        outcomes = [one(t) for t in range(config.trials)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            outcomes = list(ex.map(one, range(config.trials)))

    n = config.problem.n
    per_trial = tuple(
        TrialResult(o.labels_used, n / o.labels_used, o.rounds, o.teachers_used) for o in outcomes
    )
    effs = np.array([t.efficiency for t in per_trial])
    labels = np.array([t.labels_used for t in per_trial], dtype=float)
    mean_eff = float(effs.mean())
    if effs.size > 1:
        stderr = float(effs.std(ddof=1) / np.sqrt(effs.size))
        half = float(stats.t.ppf(0.975, effs.size - 1)) * stderr
    else:
        stderr = half = 0.0
    return ExperimentResult(
        config=config,
        l=config.l,
        alpha=alpha,
        beta=beta,
        mean_labels=float(labels.mean()),
        mean_efficiency=mean_eff,
        ratio_efficiency=n / float(labels.mean()),
        stderr=stderr,
        ci95_low=mean_eff - half,
        ci95_high=mean_eff + half,
        mean_rounds=float(np.mean([t.rounds for t in per_trial])),
        per_trial=per_trial,
        bound=_bound_for(config, alpha, beta),
        upper=bounds.upper_bound(alpha),
        traces=tuple(tuple(o.trace) for o in outcomes) if trace else None,
    )


@dataclass(frozen=True)
class SweepTable:
    rows: tuple[ExperimentResult, ...]
    curves: dict[str, bounds.BoundCurve]


def sweep(
    base: ExperimentConfig,
    alpha_grid: Sequence[float],
    p_grid: Sequence[float] | None = None,
    *,
    threads: int | None = None,
) -> SweepTable:
    """One experiment per (alpha, p) point, rows sorted by alpha then p."""
    alphas = sorted(set(float(a) for a in alpha_grid))
    if not alphas:
        raise ConfigError("alpha grid is empty")
    if p_grid is not None and len(p_grid) == 0:
        raise ConfigError("p grid is empty")
    ps = sorted(set(float(p) for p in p_grid)) if p_grid else [base.p]
    rows = []
    for a in alphas:
        for p in ps:
            rows.append(run_experiment(replace(base, alpha=a, budget=None, p=p), threads=threads))
    curves = {
        "c3": bounds.bound_curve("c3", alphas),
        "upper": bounds.bound_curve("upper", alphas),
        "repr_theorem": bounds.bound_curve("repr_theorem", alphas, beta=base.repr_config.beta),
    }
    if base.algorithm == "c4" or p_grid:
        for p in ps:
            prob = 0.0 if p is None else p
            curves[f"c4_p{prob:g}"] = bounds.bound_curve("c4", alphas, p=prob)
    return SweepTable(rows=tuple(rows), curves=curves)


def baseline_split(truth: GroundTruth, pool: TeacherPool) -> RunOutcome:
    """Label consecutive chunks of ``l`` instances and trust the names.

    Only sound when every teacher uses true names, so other pools are refused.
    """
    if pool.model.p != 1.0:
        raise ConfigError("the split baseline needs fully name-consistent teachers (p = 1)")
    partition = np.empty(truth.n, dtype=np.int64)
    for lo in range(0, truth.n, pool.budget):
        batch = np.arange(lo, min(lo + pool.budget, truth.n), dtype=np.int64)
        partition[batch] = pool.query(batch)
    _, dense = np.unique(partition, return_inverse=True)
    return RunOutcome(
        partition=dense.ravel().astype(np.int64),
        labels_used=pool.labels_used,
        teachers_used=pool.teachers_used,
        rounds=pool.teachers_used,
    )
