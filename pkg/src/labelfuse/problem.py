"""Ground-truth labeling instances.

A problem is ``n`` opaque instances, each carrying a hidden class id in
``[0, c)``. Labels are i.i.d. from a class distribution, conditioned on
every class appearing at least once so that a full representative set
always exists.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import ConfigError

_PROB_TOL = 1e-12
# Direct rejection is used while the expected number of absent classes
# stays below this; past it the acceptance rate collapses.
_MAX_EXPECTED_MISSING = 1.0


@dataclass(frozen=True)
class Distribution:
    """Class-probability model: ``uniform``, ``zipf`` (exponent ``s``) or ``explicit``."""

    kind: str = "uniform"
    s: float = 1.0
    probs: tuple[float, ...] = ()

    @classmethod
    def parse(cls, text: str) -> "Distribution":
        """Parse ``uniform``, ``zipf:<s>`` or ``explicit:<p1,p2,...>``."""
        text = text.strip()
        head, _, rest = text.partition(":")
        head = head.lower()
        try:
            if head == "uniform" and not rest:
                return cls()
            if head == "zipf" and rest:
                return cls(kind="zipf", s=float(rest))
            if head == "explicit" and rest:
                return cls(kind="explicit", probs=tuple(float(x) for x in rest.split(",")))
        except ValueError as exc:
            raise ConfigError(f"bad distribution {text!r}: {exc}") from None
        raise ConfigError(f"bad distribution {text!r}")

    def __str__(self) -> str:
        if self.kind == "zipf":
            return f"zipf:{self.s:g}"
        if self.kind == "explicit":
            return "explicit:" + ",".join(f"{p:g}" for p in self.probs)
        return "uniform"

    def probabilities(self, c: int) -> np.ndarray:
        if self.kind == "uniform":
            return np.full(c, 1.0 / c)
        if self.kind == "zipf":
            if not self.s > 0:
                raise ConfigError("zipf exponent must be positive")
            w = 1.0 / np.arange(1, c + 1, dtype=float) ** self.s
            return w / w.sum()
        if self.kind == "explicit":
            p = np.asarray(self.probs, dtype=float)
            if p.shape != (c,):
                raise ConfigError(f"explicit distribution has {p.size} entries, expected c={c}")
            if np.any(p <= 0) or abs(p.sum() - 1.0) > _PROB_TOL:
                raise ConfigError("explicit probabilities must be positive and sum to 1")
            return p
        raise ConfigError(f"unknown distribution kind {self.kind!r}")


@dataclass(frozen=True)
class ProblemConfig:
    n: int
    c: int
    distribution: Distribution = field(default_factory=Distribution)
    seed: int = 0

    def validate(self) -> None:
        if self.c < 1:
            raise ConfigError(f"c must be at least 1, got {self.c}")
        if self.n < self.c:
            raise ConfigError(f"n={self.n} is smaller than c={self.c}")
        self.distribution.probabilities(self.c)

    def with_seed(self, seed: int) -> "ProblemConfig":
        return replace(self, seed=int(seed))


@dataclass(frozen=True, eq=False)
class GroundTruth:
    config: ProblemConfig
    labels: np.ndarray
    class_probs: np.ndarray

    @property
    def n(self) -> int:
        return int(self.labels.size)

    @property
    def c(self) -> int:
        return int(self.class_probs.size)


@dataclass(frozen=True, eq=False)
class RepresentativeSet:
    reps: np.ndarray
    probs: np.ndarray

    def __len__(self) -> int:
        return int(self.reps.size)


def _ztp_counts(rng: np.random.Generator, probs: np.ndarray, n: int) -> np.ndarray:
    """Multinomial(n, probs) counts conditioned on every count being >= 1.

    Independent zero-truncated Poisson(lam * p_k) counts conditioned on their
    sum equal that law exactly; ``lam`` is tuned so the sum is centred on n.
    """
    c = probs.size
    if n == c:
        return np.ones(c, dtype=np.int64)

    def excess(log_lam: float) -> float:
        mu = np.exp(log_lam) * probs
        return float(np.sum(mu / -np.expm1(-mu)) - n)

    lam = float(np.exp(brentq(excess, -50.0, np.log(n) + 5.0)))
    mu = lam * probs
    while True:
        # First arrival of a rate-mu process on [0, 1] given one arrival, plus the rest.
        u = rng.random(c)
        t = -np.log1p(u * np.expm1(-mu)) / mu
        counts = 1 + rng.poisson(mu * (1.0 - t))
        if counts.sum() == n:
            return counts


def generate_problem(config: ProblemConfig) -> GroundTruth:
    """Draw a ground-truth labeling; identical output for identical config."""
    config.validate()
    n, c = config.n, config.c
    probs = config.distribution.probabilities(c)
    rng = np.random.default_rng(config.seed)
    expected_missing = float(np.sum(np.exp(n * np.log1p(-np.minimum(probs, 1 - 1e-16)))))
    if c == 1:
        labels = np.zeros(n, dtype=np.int64)
    elif expected_missing <= _MAX_EXPECTED_MISSING:
        uniform = config.distribution.kind == "uniform"
        while True:
            labels = rng.integers(0, c, size=n) if uniform else rng.choice(c, size=n, p=probs)
            if np.bincount(labels, minlength=c).min() > 0:
                break
        labels = labels.astype(np.int64)
    else:
        counts = _ztp_counts(rng, probs, n)
        labels = np.repeat(np.arange(c, dtype=np.int64), counts)
        rng.shuffle(labels)
    labels.setflags(write=False)
    probs.setflags(write=False)
    return GroundTruth(config=config, labels=labels, class_probs=probs)


def ground_truth_from_labels(labels: Sequence[int], probs: Sequence[float] | None = None) -> GroundTruth:
    """Wrap a fixed label vector (classes ``0..c-1`` all present) as a GroundTruth."""
    y = np.asarray(labels, dtype=np.int64)
    if y.ndim != 1 or y.size == 0 or y.min() < 0:
        raise ConfigError("labels must be a non-empty vector of non-negative ints")
    c = int(y.max()) + 1
    if np.bincount(y, minlength=c).min() == 0:
        raise ConfigError("every class id in [0, c) must appear")
    if probs is None:
        p = np.bincount(y, minlength=c) / y.size
        dist = Distribution()
    else:
        p = np.asarray(probs, dtype=float)
        dist = Distribution(kind="explicit", probs=tuple(p))
    y = y.copy()
    y.setflags(write=False)
    return GroundTruth(config=ProblemConfig(n=y.size, c=c, distribution=dist), labels=y, class_probs=p)


def representatives_of(gt: GroundTruth) -> RepresentativeSet:
    """Lowest-index instance of each class, ordered by class id."""
    _, first = np.unique(gt.labels, return_index=True)
    return RepresentativeSet(reps=first.astype(np.int64), probs=np.array(gt.class_probs, dtype=float))
