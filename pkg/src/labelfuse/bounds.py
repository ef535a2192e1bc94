"""Closed-form label-efficiency bounds and the representatives β optimizer.

All functions take the budget-to-classes ratio ``alpha = l / c``. Scalar
functions use :mod:`math`; the exact representatives expression is
vectorised with numpy because its sum can run to millions of terms at
small ``alpha * beta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .errors import DomainError

Objective = Literal["theorem", "exact"]

# Below this the Taylor branch of Q is used; the dropped term is alpha**3 / 24.
_Q_SERIES_CUTOFF = 1e-4
# Below this 1 - Q(x) is summed as a series to avoid cancellation.
_OMQ_SERIES_CUTOFF = 0.1
_OMQ_TERMS = 16

BETA_GRID_STEP = 1e-3
BETA_TOL = 1e-6
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (alpha > 0.0) or not math.isfinite(alpha):
        raise DomainError(f"alpha must be a positive finite number, got {alpha!r}")
    return alpha


def _check_beta(beta: float) -> float:
    beta = float(beta)
    if not (0.0 < beta < 1.0):
        raise DomainError(f"beta must lie in (0, 1), got {beta!r}")
    return beta


def q_function(alpha: float) -> float:
    """Asymptotic fraction of a fresh batch left after contraction.

    ``Q(alpha) = (1 - exp(-alpha)) / alpha``; tends to 1 as alpha -> 0.
    """
    alpha = _check_alpha(alpha)
    if alpha < _Q_SERIES_CUTOFF:
        return 1.0 - alpha / 2.0 + alpha * alpha / 6.0
    return -math.expm1(-alpha) / alpha


def _one_minus_q(x: float) -> float:
    if x < _OMQ_SERIES_CUTOFF:
        # 1 - Q(x) = sum_{k>=1} (-1)^(k+1) x^k / (k+1)!
        total = 0.0
        term = x / 2.0
        for k in range(1, _OMQ_TERMS + 1):
            total += term
            term *= -x / (k + 2)
        return total
    return 1.0 - (-math.expm1(-x) / x)


def _one_minus_q_array(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x < _OMQ_SERIES_CUTOFF
    xs = x[small]
    total = np.zeros_like(xs)
    term = xs / 2.0
    for k in range(1, _OMQ_TERMS + 1):
        total += term
        term = term * (-xs / (k + 2))
    out[small] = total
    xl = x[~small]
    out[~small] = 1.0 + np.expm1(-xl) / xl
    return out


def expected_unique_exact(c: int, l: int, probs: Sequence[float] | np.ndarray | None = None) -> float:
    """Expected number of distinct classes among ``l`` i.i.d. draws.

    ``c - sum_i (1 - p_i)**l``; ``probs=None`` means uniform over ``c``.
    """
    if c < 1 or l < 0:
        raise DomainError(f"need c >= 1 and l >= 0, got c={c}, l={l}")
    if probs is None:
        p = np.full(c, 1.0 / c)
    else:
        p = np.asarray(probs, dtype=float)
        if p.shape != (c,) or np.any(p <= 0.0) or abs(p.sum() - 1.0) > 1e-9:
            raise DomainError("probs must be c positive numbers summing to 1")
    # (1-p)^l through log1p keeps precision when p is tiny.
    missing = np.ones_like(p) if l == 0 else np.zeros_like(p)
    part = p < 1.0
    missing[part] = np.exp(l * np.log1p(-p[part]))
    return float(c - missing.sum())


def c3_bound(alpha: float) -> float:
    """Lower bound on C3 label efficiency, ``1 - Q(alpha)``."""
    return _one_minus_q(_check_alpha(alpha))


def representatives_bound(alpha: float, beta: float) -> float:
    """Closed-form lower bound for the representatives algorithm.

    Uses the real-valued number of representative sets ``r = 1/(alpha*beta)``
    and ``q = Q(alpha*(1-beta))``.
    """
    alpha = _check_alpha(alpha)
    beta = _check_beta(beta)
    omq = _one_minus_q(alpha * (1.0 - beta))
    q = 1.0 - omq
    r = 1.0 / (alpha * beta)
    one_minus_qr = -math.expm1(r * math.log1p(-omq))
    denom = omq - (q / r) * one_minus_qr
    return (1.0 - beta) * omq * omq / denom


def representatives_bound_exact(alpha: float, beta: float) -> float:
    """Representatives efficiency from the un-weakened label-count sum.

    ``(1-beta) / sum_{i<r} (1 - i/r) prod_{k<i} Q(alpha(1-beta)/(1 - k alpha beta))``
    with integer ``r = ceil(1/(alpha*beta))``.
    """
    alpha = _check_alpha(alpha)
    beta = _check_beta(beta)
    ab = alpha * beta
    # Shave float noise so e.g. 1/(1e-3 * 1/3) does not ceil to 3001.
    r = max(1, math.ceil((1.0 / ab) * (1.0 - 1e-12)))
    if r == 1:
        return 1.0 - beta
    k = np.arange(r - 1, dtype=float)
    shrink = 1.0 - k * ab
    if np.any(shrink <= 0.0):
        raise DomainError("1 - k*alpha*beta must stay positive")
    z = alpha * (1.0 - beta) / shrink
    log_q = np.log1p(-_one_minus_q_array(z))
    log_prod = np.concatenate(([0.0], np.cumsum(log_q)))
    i = np.arange(r, dtype=float)
    total = float(np.sum((1.0 - i / r) * np.exp(log_prod)))
    return (1.0 - beta) / total


def upper_bound(alpha: float) -> float:
    """Ceiling on the efficiency of any algorithm with uncoordinated teachers."""
    alpha = _check_alpha(alpha)
    return min(1.0, 2.0 * alpha / (1.0 + alpha))


def c4_bound(alpha: float, p: float) -> float:
    """Lower bound on C4 efficiency when teachers use true names w.p. ``p``."""
    alpha = _check_alpha(alpha)
    p = float(p)
    if not (0.0 <= p <= 1.0):
        raise DomainError(f"p must lie in [0, 1], got {p!r}")
    # 1 - A/D rewritten as (D - A)/D so p=0 collapses onto c3_bound exactly.
    extra = math.exp(-alpha) * math.expm1(alpha * p)
    return (alpha * c3_bound(alpha) + extra) / (alpha + extra)


def _objective(objective: Objective):
    if objective == "theorem":
        return representatives_bound
    if objective == "exact":
        return representatives_bound_exact
    raise DomainError(f"unknown objective {objective!r}")


def golden_section_max(f, lo: float, hi: float, tol: float = BETA_TOL) -> tuple[float, float]:
    """Maximise a unimodal ``f`` on ``[lo, hi]``; returns ``(argmax, max)``."""
    a, b = lo, hi
    x1 = b - _INV_PHI * (b - a)
    x2 = a + _INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_PHI * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_PHI * (b - a)
            f1 = f(x1)
    x = 0.5 * (a + b)
    return x, f(x)


def optimize_beta(alpha: float, objective: Objective = "theorem") -> tuple[float, float]:
    """Best representative fraction for ``alpha``.

    Grid search over ``[1e-3, 1 - 1e-3]`` in steps of ``1e-3``, then a
    golden-section refinement inside the neighbouring grid cells. The
    refined point only replaces the grid winner if it is at least as good,
    so the exact objective's ceiling steps cannot make things worse.
    """
    alpha = _check_alpha(alpha)
    f = _objective(objective)
    steps = int(round(1.0 / BETA_GRID_STEP))
    grid = np.arange(1, steps) * BETA_GRID_STEP
    values = np.array([f(alpha, b) for b in grid])
    best = int(np.argmax(values))
    beta_star, value = float(grid[best]), float(values[best])
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, len(grid) - 1)]
    b_ref, v_ref = golden_section_max(lambda b: f(alpha, b), lo, hi)
    if v_ref >= value:
        beta_star, value = b_ref, v_ref
    return beta_star, value


CurveKind = Literal["c3", "repr_theorem", "repr_exact", "upper", "c4"]


@dataclass(frozen=True)
class BoundCurve:
    kind: str
    alpha_grid: tuple[float, ...]
    values: tuple[float, ...]
    p: float | None = None
    beta: float | None = None


def bound_curve(
    kind: CurveKind,
    alpha_grid: Sequence[float],
    *,
    p: float | None = None,
    beta: float | None = None,
) -> BoundCurve:
    """Evaluate one bound over a strictly increasing alpha grid.

    For the representatives kinds ``beta=None`` means β is re-optimised at
    every grid point with the matching objective.
    """
    alphas = tuple(float(a) for a in alpha_grid)
    if any(b <= a for a, b in zip(alphas, alphas[1:])):
        raise DomainError("alpha grid must be strictly increasing")
    if kind == "c3":
        vals = [c3_bound(a) for a in alphas]
    elif kind == "upper":
        vals = [upper_bound(a) for a in alphas]
    elif kind == "c4":
        if p is None:
            raise DomainError("c4 curve needs p")
        vals = [c4_bound(a, p) for a in alphas]
    elif kind in ("repr_theorem", "repr_exact"):
        objective: Objective = "theorem" if kind == "repr_theorem" else "exact"
        f = _objective(objective)
        if beta is None:
            vals = [optimize_beta(a, objective)[1] for a in alphas]
        else:
            vals = [f(a, beta) for a in alphas]
    else:
        raise DomainError(f"unknown curve kind {kind!r}")
    return BoundCurve(kind=kind, alpha_grid=alphas, values=tuple(vals), p=p, beta=beta)
