"""Simulated and replayed teachers.

A teacher sees one batch, labels it consistently (equal names exactly for
equal classes) and is then discarded. Names are int64: a true class id
``k >= 0`` when the teacher happens to use the global name, otherwise a
negative alias drawn from a pool-wide counter, so aliases can never collide
with each other or with true ids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

from .errors import BudgetError, ConfigError, ConsistencyViolation
from .graph import ContractionGraph
from .problem import GroundTruth


@dataclass(frozen=True)
class NamingModel:
    """``p=None`` is the uncoordinated model; otherwise each class gets its
    true name with probability ``p``, independently per teacher and class."""

    p: float | None = None

    def __post_init__(self):
        if self.p is not None and not (0.0 <= float(self.p) <= 1.0):
            raise ConfigError(f"name-consistency probability must lie in [0, 1], got {self.p}")

    @classmethod
    def uncoordinated(cls) -> "NamingModel":
        return cls(None)

    @classmethod
    def partially_consistent(cls, p: float) -> "NamingModel":
        return cls(float(p))

    @property
    def true_name_prob(self) -> float:
        return 0.0 if self.p is None else float(self.p)

    def __str__(self) -> str:
        return "uncoordinated" if self.p is None else f"partially-consistent(p={self.p:g})"


class TeacherPool:
    """Hands out one fresh teacher per :meth:`query` and counts labels.

    With ``strict=True`` every response is checked against the ground truth.
    """

    def __init__(
        self,
        truth: GroundTruth,
        model: NamingModel,
        budget: int,
        rng: np.random.Generator,
        *,
        strict: bool = False,
    ):
        if budget < 1:
            raise ConfigError(f"teacher budget must be positive, got {budget}")
        self.truth = truth
        self.model = model
        self.budget = int(budget)
        self.rng = rng
        self.strict = strict
        self._labels = 0
        self._teachers = 0
        self._next_alias = -1

    @property
    def labels_used(self) -> int:
        return self._labels

    @property
    def teachers_used(self) -> int:
        return self._teachers

    def query(self, batch) -> np.ndarray:
        """Names for ``batch`` (instance ids) from a brand-new teacher."""
        batch = np.asarray(batch, dtype=np.int64)
        k = batch.size
        if k == 0:
            raise ValueError("a teacher must be asked about at least one instance")
        if k > self.budget:
            raise BudgetError(f"batch of {k} exceeds the per-teacher budget l={self.budget}")
        if batch.min() < 0 or batch.max() >= self.truth.n:
            raise IndexError("instance id out of range")
        classes = self.truth.labels[batch]
        uniq, first, inv = np.unique(classes, return_index=True, return_inverse=True)
        d = uniq.size
        # Names are handed out in order of first appearance in the batch.
        appear = np.argsort(first, kind="stable")
        alias = self._next_alias - np.arange(d, dtype=np.int64)
        self._next_alias -= d
        if self.model.p is None:
            chosen = alias
        else:
            use_true = self.rng.random(d) < self.model.p
            chosen = np.where(use_true, uniq[appear], alias)
        per_class = np.empty(d, dtype=np.int64)
        per_class[appear] = chosen
        names = per_class[inv.ravel()]
        self._labels += k
        self._teachers += 1
        if self.strict:
            check_response(classes, names)
        return names


def check_response(classes: np.ndarray, names: np.ndarray) -> None:
    """Assert that equal names occur exactly for equal classes."""
    pairs = np.unique(np.stack([classes, names]), axis=1).shape[1]
    if not (pairs == np.unique(classes).size == np.unique(names).size):
        raise AssertionError("teacher response is not class-consistent")


# ---------------------------------------------------------------- replay


@dataclass(frozen=True, eq=False)
class ReplayBatch:
    teacher: str
    instances: np.ndarray
    names: np.ndarray  # small ints, equal iff the logged names are equal
    lines: np.ndarray  # 1-based source line of every entry


@dataclass(frozen=True, eq=False)
class ReplayLog:
    budget: int
    n: int
    batches: list[ReplayBatch] = field(default_factory=list)

    @property
    def label_count(self) -> int:
        return sum(b.instances.size for b in self.batches)


def parse_replay_log(source: str | Path | list[str]) -> ReplayLog:
    """Parse ``teacher<TAB>instance<TAB>name`` lines.

    A ``#l=<int>`` header is required; ``#n=<int>`` optionally fixes the
    instance count (otherwise it is one past the largest id). Other ``#``
    lines and blank lines are ignored. Each teacher's lines form one batch;
    batches keep the order in which teachers first appear.
    """
    if isinstance(source, list):
        lines = source
    else:
        lines = Path(source).read_text().splitlines()
    budget = None
    n_decl = None
    per_teacher: dict[str, list[tuple[int, str, int]]] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        if line.startswith("#"):
            key, eq, val = line[1:].partition("=")
            key = key.strip()
            if eq and key in ("l", "n"):
                try:
                    num = int(val.strip())
                except ValueError:
                    raise ConfigError(f"line {lineno}: bad header value {val.strip()!r}") from None
                if key == "l":
                    budget = num
                else:
                    n_decl = num
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ConfigError(f"line {lineno}: expected 3 tab-separated fields, got {len(parts)}")
        teacher, inst, name = parts
        try:
            inst_id = int(inst)
        except ValueError:
            raise ConfigError(f"line {lineno}: instance id {inst!r} is not an integer") from None
        if inst_id < 0:
            raise ConfigError(f"line {lineno}: negative instance id {inst_id}")
        per_teacher.setdefault(teacher, []).append((inst_id, name, lineno))
    if budget is None:
        raise ConfigError("replay log lacks the '#l=<int>' budget header")
    if budget < 1:
        raise ConfigError(f"budget header must be positive, got l={budget}")
    max_id = max((e[0] for es in per_teacher.values() for e in es), default=-1)
    n = max_id + 1 if n_decl is None else n_decl
    if max_id >= n:
        raise ConfigError(f"instance id {max_id} not below declared n={n}")
    batches = []
    for teacher, entries in per_teacher.items():
        if len(entries) > budget:
            raise BudgetError(
                f"teacher {teacher!r} labels {len(entries)} instances, over budget l={budget} "
                f"(line {entries[budget][2]})"
            )
        insts = np.array([e[0] for e in entries], dtype=np.int64)
        _, codes = np.unique(np.array([e[1] for e in entries], dtype=object), return_inverse=True)
        batches.append(
            ReplayBatch(
                teacher=teacher,
                instances=insts,
                names=codes.astype(np.int64).ravel(),
                lines=np.array([e[2] for e in entries], dtype=np.int64),
            )
        )
    return ReplayLog(budget=budget, n=n, batches=batches)


@dataclass(frozen=True)
class ReplayViolation:
    teacher: str
    pair: tuple[int, int]
    lines: tuple[int, int]
    kind: str
    message: str

    def __str__(self) -> str:
        return f"lines {self.lines[0]} and {self.lines[1]} (teacher {self.teacher}): {self.message}"


class ReplayPool:
    """Feeds logged batches into a graph with the same counting as :class:`TeacherPool`."""

    def __init__(self, log: ReplayLog):
        self.log = log
        self.budget = log.budget
        self._labels = 0
        self._teachers = 0

    @property
    def labels_used(self) -> int:
        return self._labels

    @property
    def teachers_used(self) -> int:
        return self._teachers

    def __iter__(self) -> Iterator[ReplayBatch]:
        for batch in self.log.batches:
            self._labels += batch.instances.size
            self._teachers += 1
            yield batch

    def apply_to(self, graph: ContractionGraph) -> ReplayViolation | None:
        """Apply every batch; stop at the first contradiction and describe it."""
        for batch in self:
            try:
                graph.apply_batch(batch.instances, batch.names)
            except ConsistencyViolation as exc:
                u, v = exc.pair
                return ReplayViolation(
                    teacher=batch.teacher,
                    pair=(u, v),
                    lines=(_line_of(batch, u), _line_of(batch, v, skip_first=(u == v))),
                    kind=exc.kind,
                    message=str(exc),
                )
        return None


def _line_of(batch: ReplayBatch, inst: int, skip_first: bool = False) -> int:
    hits = batch.lines[batch.instances == inst]
    if hits.size == 0:
        return -1
    return int(hits[1] if skip_first and hits.size > 1 else hits[0])


def budget_for(alpha: float, c: int) -> int:
    """Per-teacher budget ``l = round(alpha * c)``."""
    l = int(math.floor(alpha * c + 0.5))
    if l < 2:
        raise ConfigError(f"alpha={alpha:g} with c={c} gives l={l}; need l >= 2")
    return l
