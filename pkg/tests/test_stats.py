from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from locallife.benchmark import compute_distance
from locallife.errors import DataError
from locallife.harness import (
    correlation_analysis,
    load_published_table,
    pearson,
    verify_published_table,
)
from locallife.harness.scoring import ScoreTable


def test_pearson_perfect_positive():
    assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)


def test_pearson_perfect_negative():
    assert pearson([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)


def test_pearson_constant_vector_is_an_error():
    with pytest.raises(DataError, match="constant vector"):
        pearson([1.0, 1.0, 1.0], [1, 2, 3])


def test_pearson_length_mismatch():
    with pytest.raises(DataError, match="equal-length"):
        pearson([1, 2], [1, 2, 3])


@given(
    data=st.lists(
        st.tuples(
            st.floats(min_value=-1e6, max_value=1e6, allow_nan=False),
            st.floats(min_value=-1e6, max_value=1e6, allow_nan=False),
        ),
        min_size=2,
        max_size=60,
    )
)
@settings(max_examples=150, deadline=None)
def test_pearson_stays_within_unit_interval(data):
    x = [a for a, _ in data]
    y = [b for _, b in data]
    if len(set(x)) == 1 or len(set(y)) == 1:
        with pytest.raises(DataError):
            pearson(x, y)
        return
    try:
        r = pearson(x, y)
    except DataError:
        # Numerically degenerate (underflowed variance) counts as undefined.
        return
    assert -1.0 <= r <= 1.0


def test_pearson_matches_numpy_on_100_random_pairs():
    rng = np.random.default_rng(99)
    for _ in range(100):
        n = int(rng.integers(3, 40))
        x = rng.normal(size=n)
        y = 0.4 * x + rng.normal(size=n)
        expected = float(np.corrcoef(x, y)[0, 1])
        assert pearson(list(x), list(y)) == pytest.approx(expected, abs=1e-9)


def test_published_table_has_30_rows():
    rows = load_published_table()
    assert len(rows) == 30
    models = [r["model"] for r in rows]
    assert len(set(models)) == 30


def test_published_table_fixture_pearson_pinned():
    rows = load_published_table()
    sf = [r["categories"][0] for r in rows]
    swc = [r["categories"][1] for r in rows]
    # Pinned from an independent statistics run over the bundled fixture.
    assert pearson(sf, swc) == pytest.approx(0.9569719299336596, abs=1e-9)
    assert pearson(sf, swc) == pytest.approx(float(np.corrcoef(sf, swc)[0, 1]), abs=1e-9)


def test_published_category_matrix_symmetric_positive_and_numpy_matched():
    rows = load_published_table()
    columns = list(zip(*(r["categories"] for r in rows)))
    vectors = [list(c) for c in columns]
    matrix = [[pearson(a, b) if i != j else 1.0 for j, b in enumerate(vectors)]
              for i, a in enumerate(vectors)]
    oracle = np.corrcoef(np.array(vectors))
    for i in range(4):
        assert matrix[i][i] == 1.0
        for j in range(4):
            assert matrix[i][j] == pytest.approx(matrix[j][i], abs=1e-12)
            assert matrix[i][j] == pytest.approx(float(oracle[i][j]), abs=1e-9)
            if i != j:
                assert matrix[i][j] > 0.0


def test_verify_published_table_examples():
    rows = load_published_table()
    result = verify_published_table(rows, tolerance=0.5)
    by_model = {v["model"]: v for v in result["rows"]}
    claude = by_model["Claude 3.5 Sonnet-v2"]
    assert claude["weighted_mean"] == pytest.approx(68.86, abs=0.005)
    assert claude["passed"]
    qwen = by_model["Qwen2.5-0.5B"]
    assert qwen["weighted_mean"] == pytest.approx(45.85, abs=0.005)
    assert qwen["passed"]
    gpt4o = by_model["GPT-4o"]
    assert gpt4o["weighted_mean"] == pytest.approx(68.52, abs=0.005)
    assert gpt4o["passed"]


def test_verify_published_table_fails_synthetic_off_row():
    rows = [{"model_type": "t", "model": "synthetic", "categories": [50.0, 50.0, 50.0, 50.0],
             "overall": 52.0, "rank": 1}]
    result = verify_published_table(rows, tolerance=0.5)
    assert not result["all_passed"]
    assert result["worst"]["deviation"] == pytest.approx(2.0)


def _table(endpoint: str, per_task: dict[str, float]) -> ScoreTable:
    from locallife.benchmark.registry import TASKS_BY_ID

    categories: dict[str, list[float]] = {}
    for task_id, accuracy in per_task.items():
        categories.setdefault(TASKS_BY_ID[task_id].category, []).append(accuracy)
    return ScoreTable(
        endpoint_id=endpoint,
        benchmark_version="bench-x",
        strategy="zero_shot",
        per_task=per_task,
        per_category={c: sum(v) / len(v) for c, v in categories.items()},
        overall=sum(per_task.values()) / len(per_task),
    )


def test_correlation_requires_three_runs():
    tables = [_table("a", {"category_prediction": 50.0, "search": 60.0})] * 2
    with pytest.raises(DataError, match="at least 3 runs"):
        correlation_analysis(tables)


def test_correlation_excludes_constant_tasks_and_is_symmetric():
    tasks = {"category_prediction": [10.0, 50.0, 90.0],
             "attribute_mining": [20.0, 40.0, 80.0],
             "search": [90.0, 50.0, 30.0],
             "distance_estimation": [50.0, 50.0, 50.0]}  # constant across runs
    tables = [
        _table(f"m{i}", {task: values[i] for task, values in tasks.items()})
        for i in range(3)
    ]
    analysis = correlation_analysis(tables)
    assert analysis["excluded_constant_tasks"] == ["distance_estimation"]
    matrix = analysis["task_matrix"]
    size = len(analysis["tasks"])
    for i in range(size):
        assert matrix[i][i] == 1.0
        for j in range(size):
            assert matrix[i][j] == pytest.approx(matrix[j][i], abs=1e-12)
    stats = analysis["task_stats"]
    values = [matrix[i][j] for i in range(size) for j in range(i + 1, size)]
    assert stats["mean"] == pytest.approx(sum(values) / len(values), abs=1e-12)
    sd = math.sqrt(sum((v - stats["mean"]) ** 2 for v in values) / len(values))
    assert stats["sd"] == pytest.approx(sd, abs=1e-12)


def test_correlation_rejects_mixed_benchmark_versions():
    tables = [
        _table("a", {"category_prediction": 10.0, "search": 20.0}),
        _table("b", {"category_prediction": 30.0, "search": 10.0}),
        _table("c", {"category_prediction": 50.0, "search": 40.0}),
    ]
    tables[2].benchmark_version = "bench-y"
    with pytest.raises(DataError, match="multiple benchmark versions"):
        correlation_analysis(tables)


# -- independent haversine oracle -------------------------------------------------


def _oracle_haversine(a, b):
    # atan2 formulation, written independently of the package implementation
    lat1, lon1, lat2, lon2 = map(math.radians, (*a, *b))
    s = (math.sin((lat2 - lat1) / 2) ** 2
         + math.cos(lat1) * math.cos(lat2) * math.sin((lon2 - lon1) / 2) ** 2)
    return 6_371_000.0 * 2 * math.atan2(math.sqrt(s), math.sqrt(1 - s))


def test_distance_matches_independent_oracle_on_20_pairs():
    rng = np.random.default_rng(7)
    pairs = [
        ((float(rng.uniform(-80, 80)), float(rng.uniform(-179, 179))),
         (float(rng.uniform(-80, 80)), float(rng.uniform(-179, 179))))
        for _ in range(20)
    ]
    for a, b in pairs:
        expected = _oracle_haversine(a, b)
        assert compute_distance(a, b) == pytest.approx(expected, rel=0.001)


def test_distance_beijing_shanghai_pinned():
    # Pinned from an independent great-circle calculation (6371 km sphere).
    got = compute_distance((39.9042, 116.4074), (31.2304, 121.4737))
    assert got == pytest.approx(1_067_310.17, rel=0.001)
