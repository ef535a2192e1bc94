import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from labelfuse.errors import BudgetError, ConfigError
from labelfuse.graph import ContractionGraph
from labelfuse.problem import ground_truth_from_labels
from labelfuse.teachers import (
    NamingModel,
    ReplayPool,
    TeacherPool,
    budget_for,
    check_response,
    parse_replay_log,
)


def pool_for(labels, p=None, budget=10, seed=0, strict=True):
    truth = ground_truth_from_labels(labels)
    return TeacherPool(truth, NamingModel(p), budget, np.random.default_rng(seed), strict=strict)


def test_uncoordinated_names_follow_classes():
    pool = pool_for([7 - k for k in range(8)] + [7, 7, 2])
    a = pool.query([8, 9, 10])
    assert a[0] == a[1] != a[2]
    b = pool.query([8, 9, 10])
    assert set(a.tolist()).isdisjoint(b.tolist())
    assert all(x < 0 for x in a.tolist() + b.tolist())


def test_fully_consistent_names_are_true_ids():
    pool = pool_for(list(range(8)), p=1.0)
    assert pool.query([7, 2]).tolist() == [7, 2]


def test_duplicates_share_a_name():
    pool = pool_for([0, 1, 0])
    names = pool.query([0, 0, 2, 1])
    assert names[0] == names[1] == names[2] != names[3]


@given(
    st.lists(st.integers(0, 5), min_size=6, max_size=40),
    st.sampled_from([None, 0.0, 0.3, 1.0]),
    st.integers(0, 2**31),
)
def test_names_partition_batch_like_classes(labels, p, seed):
    used = sorted(set(labels))
    remap = {v: i for i, v in enumerate(used)}
    labels = [remap[v] for v in labels]
    pool = pool_for(labels, p=p, budget=len(labels), seed=seed)
    rng = np.random.default_rng(seed)
    for _ in range(5):
        batch = rng.integers(0, len(labels), int(rng.integers(1, len(labels) + 1)))
        names = pool.query(batch)
        y = np.asarray(labels)[batch]
        for i in range(batch.size):
            for j in range(batch.size):
                assert (names[i] == names[j]) == (y[i] == y[j])
            # a true id is only ever given to its own class
            assert names[i] < 0 or names[i] == y[i]


def test_aliases_never_repeat_across_teachers():
    pool = pool_for([0, 1, 2, 3] * 5, p=0.5, budget=20, seed=4)
    seen = {}
    for _ in range(500):
        batch = np.arange(20)
        names = pool.query(batch)
        for nm, y in zip(names.tolist(), (batch % 4).tolist()):
            if nm < 0:
                assert seen.setdefault(nm, (pool.teachers_used, y)) == (pool.teachers_used, y)


def test_true_name_rate_at_one_half():
    pool = pool_for([0, 1], p=0.5, budget=1, seed=11, strict=False)
    hits = sum(int(pool.query([0])[0] == 0) for _ in range(10_000))
    assert abs(hits / 10_000 - 0.5) <= 0.015


@pytest.mark.parametrize("p", [0.25, 0.5, 0.9])
def test_true_name_events_independent(p):
    c, teachers = 6, 6000
    pool = pool_for(list(range(c)), p=p, budget=c, seed=int(p * 100), strict=False)
    hits = np.array([pool.query(np.arange(c)) >= 0 for _ in range(teachers)], dtype=float)
    sigma = np.sqrt(p * (1 - p))
    # marginals
    assert np.all(np.abs(hits.mean(axis=0) - p) < 5 * sigma / np.sqrt(teachers))
    # across classes within a teacher, and across consecutive teachers
    limit = 5 / np.sqrt(teachers)
    corr = np.corrcoef(hits.T)
    assert np.max(np.abs(corr[np.triu_indices(c, 1)])) < limit
    lagged = np.corrcoef(hits[:-1].ravel(), hits[1:].ravel())[0, 1]
    assert abs(lagged) < limit


def test_zero_p_never_uses_true_names():
    pool = pool_for(list(range(5)), p=0.0, budget=5)
    assert np.all(pool.query(np.arange(5)) < 0)


def test_counts():
    pool = pool_for(list(range(4)) * 50, budget=100)
    assert (pool.labels_used, pool.teachers_used) == (0, 0)
    pool.query(np.arange(100))
    pool.query(np.arange(40))
    assert (pool.labels_used, pool.teachers_used) == (140, 2)
    for _ in range(3):
        pool.query(np.arange(100))
    assert pool.labels_used == 140 + 3 * 100


def test_query_errors_leave_counts_alone():
    pool = pool_for([0, 1, 0], budget=2)
    with pytest.raises(BudgetError):
        pool.query([0, 1, 2])
    with pytest.raises(ValueError):
        pool.query([])
    with pytest.raises(IndexError):
        pool.query([5])
    assert (pool.labels_used, pool.teachers_used) == (0, 0)


def test_check_response():
    check_response(np.array([1, 1, 2]), np.array([-5, -5, 3]))
    with pytest.raises(AssertionError):
        check_response(np.array([1, 1, 2]), np.array([-5, -6, 3]))
    with pytest.raises(AssertionError):
        check_response(np.array([1, 2]), np.array([4, 4]))


def test_naming_model():
    assert NamingModel.uncoordinated().true_name_prob == 0.0
    assert NamingModel.partially_consistent(0.4).p == 0.4
    assert str(NamingModel()) == "uncoordinated"
    with pytest.raises(ConfigError):
        NamingModel(1.5)


def test_budget_for_rounds_half_up():
    assert budget_for(1.0, 1000) == 1000
    assert budget_for(0.25, 10) == 3
    assert budget_for(0.15, 10) == 2
    with pytest.raises(ConfigError):
        budget_for(0.01, 10)


# -- replay logs

TOY = [
    "#l=3",
    "# a comment",
    "a\t0\tcat",
    "a\t1\tdog",
    "a\t2\tcat",
    "",
    "b\t2\tchat",
    "b\t3\tchien",
    "b\t1\tchien",
]


def test_replay_toy_log():
    log = parse_replay_log(TOY)
    assert (log.budget, log.n, log.label_count) == (3, 4, 6)
    assert [b.teacher for b in log.batches] == ["a", "b"]
    assert log.batches[1].lines.tolist() == [7, 8, 9]
    pool = ReplayPool(log)
    g = ContractionGraph(log.n)
    assert pool.apply_to(g) is None
    assert (pool.labels_used, pool.teachers_used) == (6, 2)
    assert g.components() == [[0, 2], [1, 3]]


def test_replay_reports_offending_lines():
    lines = TOY + ["c\t0\tx", "c\t3\tx"]
    pool = ReplayPool(parse_replay_log(lines))
    violation = pool.apply_to(ContractionGraph(4))
    assert violation.teacher == "c"
    assert violation.kind == "contract-separated"
    assert sorted(violation.lines) == [10, 11]
    assert str(violation).startswith("lines 10 and 11 (teacher c)")


def test_replay_same_instance_two_names():
    violation = ReplayPool(parse_replay_log(["#l=2", "t\t0\tx", "t\t0\ty"])).apply_to(ContractionGraph(1))
    assert violation.kind == "separate-same-node"
    assert violation.lines == (2, 3)


def test_replay_declared_n_and_interleaving():
    log = parse_replay_log(["#n=10", "#l=2", "x\t0\ta", "y\t5\tb", "x\t1\tb"])
    assert log.n == 10
    assert log.batches[0].instances.tolist() == [0, 1]


@pytest.mark.parametrize(
    "lines,err",
    [
        (["a\t0\tx"], ConfigError),
        (["#l=2", "a\t0"], ConfigError),
        (["#l=2", "a\tzero\tx"], ConfigError),
        (["#l=2", "a\t-1\tx"], ConfigError),
        (["#l=x"], ConfigError),
        (["#l=0"], ConfigError),
        (["#l=2", "#n=1", "a\t3\tx"], ConfigError),
        (["#l=1", "a\t0\tx", "a\t1\ty"], BudgetError),
    ],
)
def test_replay_parse_errors(lines, err):
    with pytest.raises(err):
        parse_replay_log(lines)


def test_replay_reads_files(tmp_path):
    path = tmp_path / "log.tsv"
    path.write_text("\n".join(TOY) + "\n")
    assert parse_replay_log(path).label_count == 6
    assert parse_replay_log(str(path)).n == 4
