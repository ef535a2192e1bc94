"""The three label-fusion algorithms and the partition check.

Every algorithm drives a :class:`~labelfuse.graph.ContractionGraph` with
answers from a :class:`~labelfuse.teachers.TeacherPool`, one teacher per
query, and finishes with a dense partition of the instances. A "round" is
one query.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bounds import optimize_beta
from .errors import ConfigError, IntegrityError
from .graph import ContractionGraph
from .problem import GroundTruth, RepresentativeSet
from .teachers import TeacherPool


@dataclass(frozen=True, eq=False)
class RunOutcome:
    partition: np.ndarray
    labels_used: int
    teachers_used: int
    rounds: int
    trace: list[tuple[int, int, int]] | None = field(default=None, repr=False)

    @property
    def efficiency(self) -> float:
        return self.partition.size / self.labels_used if self.labels_used else float("inf")


@dataclass(frozen=True)
class ReprConfig:
    """Fraction of every batch spent on representatives; ``beta=None`` optimizes it."""

    beta: float | None = None

    def __post_init__(self):
        if self.beta is not None and not (0.0 < self.beta < 1.0):
            raise ConfigError(f"beta must lie in (0, 1), got {self.beta}")

    @property
    def auto(self) -> bool:
        return self.beta is None

    def resolve(self, alpha: float, l: int | None = None) -> float:
        """The fixed beta, or the optimizer's choice for ``alpha``.

        Given the budget ``l``, an optimized beta is clamped to
        ``[1/l, 1 - 1/l]`` so each batch keeps at least one representative
        and one regular point.
        """
        if self.beta is not None:
            return float(self.beta)
        beta = optimize_beta(alpha, "theorem")[0]
        if l is not None and l >= 2:
            beta = min(max(beta, 1.0 / l), 1.0 - 1.0 / l)
        return beta


def _split(beta: float, l: int) -> tuple[int, int]:
    # The epsilon keeps e.g. (1/49) * 49 from flooring to zero.
    return math.floor(beta * l + 1e-9), math.floor((1.0 - beta) * l + 1e-9)


def verify_partition(partition, truth: GroundTruth | np.ndarray) -> bool:
    """True iff ``partition`` equals the true partition up to renaming."""
    if isinstance(partition, RunOutcome):
        partition = partition.partition
    labels = truth.labels if isinstance(truth, GroundTruth) else np.asarray(truth)
    pred = np.asarray(partition)
    if pred.shape != labels.shape or (pred.size and pred.min() < 0):
        return False
    joint = np.unique(np.stack([pred, labels]), axis=1).shape[1]
    return joint == np.unique(pred).size == np.unique(labels).size


class _Runner:
    """Shared query/apply/trace bookkeeping for one run."""

    def __init__(self, truth: GroundTruth, pool: TeacherPool, rng: np.random.Generator, trace: bool):
        if pool.budget < 2:
            raise ConfigError(f"per-teacher budget must be at least 2, got l={pool.budget}")
        self.truth = truth
        self.pool = pool
        self.rng = rng
        self.graph = ContractionGraph(truth.n, max_classes=truth.c)
        self.rounds = 0
        self.trace = [] if trace else None
        # Simulated answers cannot contradict the graph, so skip that check.
        self.trusted = isinstance(pool, TeacherPool)

    def ask(self, batch: np.ndarray) -> np.ndarray:
        names = self.pool.query(batch)
        self.graph.apply_batch(batch, names, trusted=self.trusted)
        self.rounds += 1
        if self.trace is not None:
            self.trace.append((self.rounds, self.graph.node_count, self.pool.labels_used))
        return names

    def guard(self, roots: np.ndarray) -> np.ndarray:
        """Swap an unseparated pair into a batch that would teach nothing."""
        g = self.graph
        if not g.batch_is_clique(roots):
            return roots
        pair = g.find_unseparated_pair(self.rng)
        if pair is None:
            return roots
        a, b = pair
        keep = roots[(roots != a) & (roots != b)]
        return np.concatenate((np.array(pair, dtype=np.int64), keep[: roots.size - 2]))

    def outcome(self, partition: np.ndarray) -> RunOutcome:
        return RunOutcome(
            partition=partition,
            labels_used=self.pool.labels_used,
            teachers_used=self.pool.teachers_used,
            rounds=self.rounds,
            trace=self.trace,
        )


def run_c3(truth: GroundTruth, pool: TeacherPool, rng: np.random.Generator, *, trace: bool = False) -> RunOutcome:
    """Query random super-nodes until every pair is known to differ."""
    run = _Runner(truth, pool, rng, trace)
    g = run.graph
    l = pool.budget
    while not g.is_clique():
        nodes = g.node_count
        roots = g.roots(rng.choice(nodes, size=min(l, nodes), replace=False))
        run.ask(run.guard(roots))
    return run.outcome(g.dense_labels())


def run_representatives(
    truth: GroundTruth,
    pool: TeacherPool,
    reps: RepresentativeSet,
    config: ReprConfig,
    rng: np.random.Generator,
    *,
    trace: bool = False,
) -> RunOutcome:
    """Compare all points against successive sets of known class representatives."""
    c = truth.c
    l = pool.budget
    beta = config.resolve(l / c, l)
    per_set, per_batch = _split(beta, l)
    if per_set < 1 or per_batch < 1:
        raise ConfigError(f"beta={beta:g} with l={l} leaves {per_set} representatives and {per_batch} points per batch")
    if len(reps) != c:
        raise ConfigError(f"need one representative per class, got {len(reps)} for c={c}")

    run = _Runner(truth, pool, rng, trace)
    g = run.graph
    ordered = reps.reps[np.argsort(-np.asarray(reps.probs), kind="stable")].astype(np.int64)
    root_label = np.full(truth.n, -1, dtype=np.int64)
    next_label = 0
    for start in range(0, c, per_set):
        rep_set = ordered[start : start + per_set]
        rep_roots = np.array([g.find(x) for x in rep_set], dtype=np.int64)
        others = g.roots()
        others = others[~np.isin(others, rep_roots)]
        rng.shuffle(others)
        for lo in range(0, others.size, per_batch):
            run.ask(np.concatenate((others[lo : lo + per_batch], rep_set)))
        for x in rep_set:
            r = g.find(x)
            root_label[r] = next_label
            next_label += 1
            g.remove(r)
    if g.node_count != 0:
        raise IntegrityError(f"{g.node_count} super-nodes left after the last representative set")
    return run.outcome(root_label[g.root_array()])


class _TagBuckets:
    """Live super-nodes grouped by their latest name tag.

    Bucket ``1 + k`` holds nodes last named with true class id ``k``.
    Bucket 0 holds nodes with no shared name: never queried, or last given
    a private alias. An alias is never reused by another teacher, so it
    carries no more grouping information than no name at all.
    """

    def __init__(self, n: int, c: int):
        self.members: list[list[int]] = [[] for _ in range(c + 1)]
        self.members[0] = list(range(n))
        self.size = np.zeros(c + 1, dtype=np.int64)
        self.size[0] = n
        self.where = np.zeros(n, dtype=np.int64)
        self.pos = np.arange(n, dtype=np.int64)

    def discard(self, r: int) -> None:
        b = self.where[r]
        lst = self.members[b]
        p = self.pos[r]
        last = lst.pop()
        if last != r:
            lst[p] = last
            self.pos[last] = p
        self.size[b] -= 1
        self.where[r] = -1

    def add(self, r: int, name: int) -> None:
        b = 1 + name if name >= 0 else 0
        self.where[r] = b
        self.pos[r] = len(self.members[b])
        self.members[b].append(r)
        self.size[b] += 1

    def pick(self, want: int, rng: np.random.Generator) -> np.ndarray:
        """Up to ``want`` nodes, largest groups first, the last one sampled.

        Equal-sized groups are ordered at random; a fixed order would keep
        re-picking the same already-separated singletons late in a run.
        """
        groups = rng.permutation(np.flatnonzero(self.size))
        groups = groups[np.argsort(-self.size[groups], kind="stable")]
        chosen: list[int] = []
        for b in groups.tolist():
            left = want - len(chosen)
            if left == 0:
                break
            lst = self.members[b]
            if len(lst) <= left:
                chosen.extend(lst)
            else:
                chosen.extend(lst[i] for i in rng.choice(len(lst), size=left, replace=False).tolist())
        return np.array(chosen, dtype=np.int64)


def run_c4(truth: GroundTruth, pool: TeacherPool, rng: np.random.Generator, *, trace: bool = False) -> RunOutcome:
    """Batch super-nodes that share a name tag, so likely-equal nodes meet early.

    Equivalence still comes only from a single teacher's answers; tags only
    steer which nodes are asked together.
    """
    run = _Runner(truth, pool, rng, trace)
    g = run.graph
    l = pool.budget
    tags = _TagBuckets(truth.n, truth.c)
    while not g.is_clique():
        roots = run.guard(tags.pick(min(l, g.node_count), rng))
        for r in roots.tolist():
            tags.discard(r)
        names = run.ask(roots)
        survivors, first = np.unique(g.find_many(roots), return_index=True)
        for root, name in zip(survivors.tolist(), names[first].tolist()):
            tags.add(root, name)
    return run.outcome(g.dense_labels())
