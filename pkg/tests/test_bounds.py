import itertools
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from labelfuse import bounds
from labelfuse.errors import DomainError

mp.mp.dps = 40


# --- high-precision oracles, written straight from the closed forms


def q_ref(a):
    a = mp.mpf(a)
    return -mp.expm1(-a) / a


def repr_theorem_ref(a, b):
    a, b = mp.mpf(a), mp.mpf(b)
    q = q_ref(a * (1 - b))
    r = 1 / (a * b)
    return (1 - b) * (1 - q) ** 2 / (1 - q - (q / r) * (1 - q**r))


def repr_exact_ref(a, b):
    a, b = mp.mpf(a), mp.mpf(b)
    # products that are integers up to float rounding count as integers
    r = int(mp.ceil(1 / (a * b) * (1 - mp.mpf(10) ** -12)))
    total, prod = mp.mpf(0), mp.mpf(1)
    for i in range(r):
        total += (1 - mp.mpf(i) / r) * prod
        prod *= q_ref(a * (1 - b) / (1 - i * a * b))
    return (1 - b) / total


def c4_ref(a, p):
    a, p = mp.mpf(a), mp.mpf(p)
    return 1 - (1 - mp.e ** (-a)) / (a - mp.e ** (-a) + mp.e ** (-a * (1 - p)))


def rel(x, ref):
    return abs(x - float(ref)) / abs(float(ref))


alphas = st.floats(min_value=1e-6, max_value=50.0)


@given(alphas)
def test_q_matches_high_precision(a):
    assert rel(bounds.q_function(a), q_ref(a)) < 1e-13


@given(alphas)
def test_c3_bound_matches_high_precision(a):
    assert rel(bounds.c3_bound(a), 1 - q_ref(a)) < 1e-12


def test_q_is_continuous_across_series_cutoffs():
    for cut in (1e-4, 0.1):
        lo, hi = cut * (1 - 1e-9), cut * (1 + 1e-9)
        assert bounds.q_function(lo) == pytest.approx(bounds.q_function(hi), rel=1e-8)
        assert bounds.c3_bound(lo) == pytest.approx(bounds.c3_bound(hi), rel=1e-8)


def test_known_values():
    assert bounds.c3_bound(1.0) == pytest.approx(math.exp(-1), rel=1e-15)
    assert bounds.q_function(2.0) == pytest.approx((1 - math.exp(-2)) / 2, rel=1e-15)
    assert bounds.upper_bound(0.25) == 0.4
    assert bounds.upper_bound(1.0) == 1.0
    assert bounds.upper_bound(7.0) == 1.0


@given(alphas, st.floats(min_value=0.0, max_value=1.0))
def test_c4_bound_matches_high_precision(a, p):
    assert abs(bounds.c4_bound(a, p) - float(c4_ref(a, p))) < 1e-12


@given(alphas)
def test_c4_at_p_zero_is_c3(a):
    assert abs(bounds.c4_bound(a, 0.0) - bounds.c3_bound(a)) < 1e-12


def test_c4_small_alpha_limits():
    # p=1 tends to one half, p=0 to alpha/2
    assert bounds.c4_bound(1e-4, 1.0) == pytest.approx(0.5, abs=1e-4)
    assert bounds.c4_bound(1e-4, 0.0) == pytest.approx(0.5e-4, rel=1e-3)


@given(
    st.floats(min_value=1e-3, max_value=10.0),
    st.floats(min_value=0.01, max_value=0.99),
)
def test_repr_theorem_matches_high_precision(a, b):
    assert rel(bounds.representatives_bound(a, b), repr_theorem_ref(a, b)) < 1e-9


@pytest.mark.parametrize(
    "a,b", [(1.0, 0.5), (0.2, 0.3), (0.05, 0.4), (2.0, 0.1), (0.01, 1 / 3), (3.0, 0.9)]
)
def test_repr_exact_matches_direct_sum(a, b):
    assert rel(bounds.representatives_bound_exact(a, b), repr_exact_ref(a, b)) < 1e-10


def test_repr_exact_single_set_is_one_minus_beta():
    assert bounds.representatives_bound_exact(4.0, 0.5) == 0.5


INTEGER_R = [
    (float(a), r)
    for a in np.geomspace(0.02, 5, 20)
    for r in (1, 2, 3, 5, 8, 13, 21, 40, 100, 400)
    if 0 < 1.0 / (a * r) < 1
]


@pytest.mark.parametrize("a,r", INTEGER_R)
def test_exact_dominates_theorem_at_integer_r(a, r):
    b = 1.0 / (a * r)
    assert bounds.representatives_bound_exact(a, b) >= bounds.representatives_bound(a, b) - 1e-12


def test_small_alpha_behaviour():
    # The un-weakened sum approaches (2/3) alpha at beta=1/3.
    v = bounds.representatives_bound_exact(1e-3, 1 / 3)
    assert 0.6e-3 <= v <= 0.7e-3
    assert v == pytest.approx(2e-3 / 3, rel=0.05)
    # The closed form behaves like (2e/9) alpha there.
    assert bounds.representatives_bound(0.01, 1 / 3) == pytest.approx(0.00601, rel=1e-3)
    assert bounds.representatives_bound(1e-5, 1 / 3) / 1e-5 == pytest.approx(2 * math.e / 9, rel=1e-3)


def test_repr_approaches_c3_as_beta_vanishes():
    assert bounds.representatives_bound(1.0, 1e-6) == pytest.approx(bounds.c3_bound(1.0), abs=1e-9)


@pytest.mark.parametrize("c,l", [(1, 1), (2, 2), (3, 2), (3, 4), (4, 3)])
def test_expected_unique_exact_by_enumeration(c, l):
    counts = [len(set(t)) for t in itertools.product(range(c), repeat=l)]
    assert bounds.expected_unique_exact(c, l) == pytest.approx(sum(counts) / c**l, rel=1e-12)


def test_expected_unique_weighted_by_enumeration():
    probs = [0.5, 0.3, 0.2]
    total = 0.0
    for t in itertools.product(range(3), repeat=4):
        total += math.prod(probs[i] for i in t) * len(set(t))
    assert bounds.expected_unique_exact(3, 4, probs) == pytest.approx(total, rel=1e-12)


def test_expected_unique_reference_value():
    assert bounds.expected_unique_exact(1000, 1000) == pytest.approx(1000 * (1 - 0.999**1000), rel=1e-12)
    assert bounds.expected_unique_exact(50, 50) == pytest.approx(31.79, abs=0.01)


def test_expected_unique_tends_to_q():
    c = 10**6
    assert bounds.expected_unique_exact(c, c) / c == pytest.approx(bounds.q_function(1.0), abs=1e-6)


def test_golden_section_on_parabola():
    x, fx = bounds.golden_section_max(lambda x: -((x - 0.3) ** 2) + 2, 0.0, 1.0, tol=1e-9)
    assert x == pytest.approx(0.3, abs=1e-6)
    assert fx == pytest.approx(2.0)


@pytest.mark.parametrize("a", [0.05, 0.2, 1.0, 3.0])
@pytest.mark.parametrize("objective", ["theorem", "exact"])
def test_optimize_beta_beats_every_grid_point(a, objective):
    f = bounds.representatives_bound if objective == "theorem" else bounds.representatives_bound_exact
    beta, value = bounds.optimize_beta(a, objective)
    assert 0 < beta < 1
    assert value == pytest.approx(f(a, beta), rel=1e-12)
    grid = np.arange(1, 1000) * 1e-3
    assert value >= max(f(a, b) for b in grid) - 1e-15


@pytest.mark.parametrize("a", np.linspace(0.01, 5, 30))
def test_optimized_repr_between_c3_and_ceiling(a):
    _, value = bounds.optimize_beta(a)
    assert value >= bounds.c3_bound(a) - 1e-12
    if a <= 1:
        assert value <= bounds.upper_bound(a)


def test_optimize_beta_small_alpha_near_one_third():
    beta, _ = bounds.optimize_beta(1e-3, "exact")
    assert beta == pytest.approx(1 / 3, abs=0.02)


def test_bound_curve_kinds():
    grid = [0.5, 1.0, 2.0]
    assert bounds.bound_curve("c3", grid).values == tuple(bounds.c3_bound(a) for a in grid)
    assert bounds.bound_curve("c4", grid, p=0.0).values == pytest.approx(bounds.bound_curve("c3", grid).values)
    fixed = bounds.bound_curve("repr_exact", grid, beta=0.25)
    assert fixed.values == tuple(bounds.representatives_bound_exact(a, 0.25) for a in grid)
    assert bounds.bound_curve("upper", grid).values == (2 / 3, 1.0, 1.0)


@pytest.mark.parametrize(
    "call",
    [
        lambda: bounds.c3_bound(0.0),
        lambda: bounds.q_function(-1.0),
        lambda: bounds.c3_bound(float("nan")),
        lambda: bounds.representatives_bound(1.0, 0.0),
        lambda: bounds.representatives_bound(1.0, 1.0),
        lambda: bounds.c4_bound(1.0, 1.5),
        lambda: bounds.optimize_beta(1.0, "nonsense"),
        lambda: bounds.bound_curve("c3", [1.0, 0.5]),
        lambda: bounds.bound_curve("c4", [1.0]),
        lambda: bounds.expected_unique_exact(3, 2, [0.5, 0.5]),
    ],
)
def test_domain_errors(call):
    with pytest.raises(DomainError):
        call()


def test_reference_points():
    assert bounds.q_function(1.0) == pytest.approx(0.632121, abs=5e-7)
    assert bounds.q_function(2.0) == pytest.approx(0.432332, abs=5e-7)
    assert bounds.q_function(1e-12) == pytest.approx(1.0)
    assert bounds.expected_unique_exact(10, 10) == pytest.approx(10 - 10 * 0.9**10, rel=1e-14)
    assert bounds.expected_unique_exact(10, 10) == pytest.approx(6.5132, abs=5e-5)
    assert bounds.expected_unique_exact(37, 1) == pytest.approx(1.0, rel=1e-14)
    assert bounds.expected_unique_exact(1, 25) == 1.0
