"""Metrics, aggregation, correlations, robustness tables, rendering."""

from __future__ import annotations

import itertools
import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mgdetect.attacks import PerturbationSpec
from mgdetect.corpus import Label, Record, build_units
from mgdetect.detector import Hyperparams, train
from mgdetect.errors import EvalError
from mgdetect.evaluate import (
    ConfusionMatrix,
    EvalReport,
    _count_inversions,
    accuracy,
    aggregate_reports,
    aggregate_seeds,
    confusion,
    correlate_quality,
    correlations,
    prf1,
    render_report_json,
    render_rows_markdown,
    robustness_table,
)
from mgdetect.features import FeatureConfig
from mgdetect.synth import generate_corpus

H, M = Label.HUMAN, Label.MACHINE


def test_confusion_counts():
    # Predictions come first; the asymmetric example pins the argument order.
    cm = confusion([M, M, H], [H, M, H])
    assert (cm.tp, cm.fp, cm.tn, cm.fn) == (1, 1, 1, 0)
    cm = confusion([M, M, H, H, M], [M, H, H, M, M])
    assert (cm.tp, cm.fp, cm.tn, cm.fn) == (2, 1, 1, 1)
    assert cm.total == 5
    assert accuracy(cm) == pytest.approx(0.6)


def test_confusion_errors():
    with pytest.raises(EvalError, match="mismatch"):
        confusion([M], [M, H])
    with pytest.raises(EvalError, match="no predictions"):
        confusion([], [])


def test_prf1_human_positive_swaps_cells():
    cm = ConfusionMatrix(tp=6, fp=2, tn=10, fn=4)
    human = prf1(cm, positive_class=H)
    assert human["precision"] == pytest.approx(10 / 14)
    assert human["recall"] == pytest.approx(10 / 12)


def test_prf1_zero_division_policy():
    cm = ConfusionMatrix(tp=0, fp=0, tn=5, fn=0)
    stats = prf1(cm)
    assert stats["precision"] == 0.0
    assert stats["recall"] == 0.0
    assert stats["f1"] == 0.0
    assert stats["undefined_terms"] == ("precision", "recall", "f1")


def test_reported_scores_round_to_published_rows():
    # 8526/8700 = 0.98 precision with recall 8526/9800 = 0.87
    cm = ConfusionMatrix(tp=8526, fp=174, tn=0, fn=1274)
    stats = prf1(cm)
    assert stats["precision"] == pytest.approx(0.98)
    assert stats["recall"] == pytest.approx(0.87)
    assert abs(stats["f1"] - 0.92) <= 0.005

    cm = ConfusionMatrix(tp=8624, fp=1176, tn=0, fn=176)
    stats = prf1(cm)
    assert stats["precision"] == pytest.approx(0.88)
    assert stats["recall"] == pytest.approx(0.98)
    assert abs(stats["f1"] - 0.93) <= 0.005


@given(
    st.integers(min_value=0, max_value=500),
    st.integers(min_value=0, max_value=500),
    st.integers(min_value=0, max_value=500),
    st.integers(min_value=0, max_value=500),
)
def test_prf1_matches_fresh_formulas(tp, fp, tn, fn):
    cm = ConfusionMatrix(tp=tp, fp=fp, tn=tn, fn=fn)
    stats = prf1(cm)
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    assert stats["precision"] == pytest.approx(p)
    assert stats["recall"] == pytest.approx(r)
    assert stats["f1"] == pytest.approx(f)


# --- aggregation -------------------------------------------------------------


def test_aggregate_two_values():
    out = aggregate_seeds([0.8, 1.0])
    assert out["mean"] == pytest.approx(0.9)
    assert out["sample_std"] == pytest.approx(math.sqrt(0.02))


def test_aggregate_single_set_std_zero():
    assert aggregate_seeds([0.75]) == {"mean": 0.75, "sample_std": 0.0}


def test_aggregate_nested_dicts_and_dropped_keys():
    sets = [
        {"accuracy": 0.5, "classes": {"machine": {"f1": 0.4}}, "flags": ["x"]},
        {"accuracy": 0.7, "classes": {"machine": {"f1": 0.6}}, "flags": []},
    ]
    out = aggregate_seeds(sets)
    assert out["accuracy"]["mean"] == pytest.approx(0.6)
    assert out["classes"]["machine"]["f1"]["mean"] == pytest.approx(0.5)
    assert "flags" not in out


def test_aggregate_rejects_empty_and_non_numeric():
    with pytest.raises(EvalError):
        aggregate_seeds([])
    with pytest.raises(EvalError):
        aggregate_seeds(["high", "low"])


# --- correlations ------------------------------------------------------------


def _brute_pearson(xs, ys):
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    num = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    dx = math.sqrt(sum((x - mx) ** 2 for x in xs))
    dy = math.sqrt(sum((y - my) ** 2 for y in ys))
    return num / (dx * dy)


def _brute_ranks(xs):
    ranks = []
    for x in xs:
        less = sum(1 for v in xs if v < x)
        equal = sum(1 for v in xs if v == x)
        ranks.append(less + (equal + 1) / 2)
    return ranks


def _brute_kendall_tau_b(xs, ys):
    n = len(xs)
    concordant = discordant = 0
    for i, j in itertools.combinations(range(n), 2):
        prod = (xs[i] - xs[j]) * (ys[i] - ys[j])
        if prod > 0:
            concordant += 1
        elif prod < 0:
            discordant += 1
    n0 = n * (n - 1) // 2
    tx = sum(1 for i, j in itertools.combinations(range(n), 2) if xs[i] == xs[j])
    ty = sum(1 for i, j in itertools.combinations(range(n), 2) if ys[i] == ys[j])
    if n0 == tx or n0 == ty:
        return float("nan")
    return (concordant - discordant) / math.sqrt((n0 - tx) * (n0 - ty))


def test_correlations_against_brute_force():
    rng_vals = [
        (0.318, 2.0),
        (0.77, 1.0),
        (0.11, 4.0),
        (0.93, 4.0),
        (0.5, 3.0),
        (0.5, 1.0),
        (0.25, 5.0),
        (0.66, 2.0),
    ]
    xs = [a for a, _ in rng_vals]
    ys = [b for _, b in rng_vals]
    got = correlations(xs, ys)
    assert got["pearson"] == pytest.approx(_brute_pearson(xs, ys), abs=1e-12)
    assert got["spearman"] == pytest.approx(
        _brute_pearson(_brute_ranks(xs), _brute_ranks(ys)), abs=1e-12
    )
    assert got["kendall_tau_b"] == pytest.approx(
        _brute_kendall_tau_b(xs, ys), abs=1e-12
    )


@given(
    st.lists(
        st.tuples(
            st.integers(min_value=0, max_value=6), st.integers(min_value=0, max_value=6)
        ),
        min_size=2,
        max_size=40,
    )
)
def test_kendall_tau_b_property(pairs):
    xs = [float(a) for a, _ in pairs]
    ys = [float(b) for _, b in pairs]
    got = correlations(xs, ys)["kendall_tau_b"]
    expected = _brute_kendall_tau_b(xs, ys)
    if math.isnan(expected):
        assert math.isnan(got)
    else:
        assert got == pytest.approx(expected, abs=1e-12)
        assert -1.0 <= got <= 1.0


def test_constant_input_yields_nan():
    out = correlations([1.0, 1.0, 1.0], [0.2, 0.5, 0.9])
    assert all(math.isnan(v) for v in out.values())


def test_perfect_monotone_is_one():
    out = correlations([1, 2, 3, 4], [10, 20, 30, 40])
    for v in out.values():
        assert v == pytest.approx(1.0)
    out = correlations([1, 2, 3, 4], [4, 3, 2, 1])
    for v in out.values():
        assert v == pytest.approx(-1.0)


def test_correlations_errors():
    with pytest.raises(EvalError, match="mismatch"):
        correlations([1.0], [1.0, 2.0])
    with pytest.raises(EvalError, match="at least 2"):
        correlations([1.0], [1.0])


@given(st.lists(st.integers(min_value=-50, max_value=50), max_size=60))
def test_count_inversions_matches_quadratic(values):
    seq = [float(v) for v in values]
    brute = sum(
        1
        for i in range(len(seq))
        for j in range(i + 1, len(seq))
        if seq[i] > seq[j]
    )
    assert _count_inversions(seq) == brute


def _quality_records(n=6):
    return [
        Record(
            id=f"r{i}",
            question="q",
            human_answers=("a",),
            machine_answers=("b",),
            translation_quality=(i % 5) + 1,
        )
        for i in range(n)
    ]


def test_correlate_quality_skips_and_counts():
    records = _quality_records()
    records.append(
        Record(id="noq", question="q", human_answers=("a",), machine_answers=("b",))
    )
    scores = {f"r{i}": 0.1 * i for i in range(5)}  # r5 and noq missing
    result = correlate_quality(records, scores)
    assert result.used == 5
    assert result.skipped == 2
    assert set(result.coefficients) == {"pearson", "spearman", "kendall_tau_b"}


def test_correlate_quality_needs_two_points():
    with pytest.raises(EvalError, match="at least 2"):
        correlate_quality(_quality_records(1), {"r0": 0.5})


# --- robustness tables -------------------------------------------------------


@pytest.fixture(scope="module")
def tiny_model():
    config = FeatureConfig(hash_dimension=1 << 12)
    units = build_units(generate_corpus(40, seed=21), "full").units
    params = train(units, config, Hyperparams(seed=1))
    test_units = build_units(generate_corpus(12, seed=22), "full").units
    return params, config, test_units


def test_robustness_table_layout(tiny_model):
    params, config, units = tiny_model
    sets = {"in_domain": units, "tiny": units[:4]}
    attacks = [
        PerturbationSpec("misspelling", 0.3, 7),
        PerturbationSpec("homoglyph", 0.3, 7),
    ]
    report = robustness_table(params, config, sets, attacks)
    assert [(r["tag"], r["variant"]) for r in report.rows] == [
        ("in_domain", "raw"),
        ("in_domain", "+ms"),
        ("in_domain", "+hg"),
        ("tiny", "raw"),
        ("tiny", "+ms"),
        ("tiny", "+hg"),
    ]
    for row in report.rows:
        assert set(row["classes"]) == {"human", "machine"}
        assert 0.0 <= row["accuracy"] <= 1.0
        assert row["count"] == (12 * 2 if row["tag"] == "in_domain" else 4)


def test_robustness_table_explicit_tag_order_and_unknown(tiny_model):
    params, config, units = tiny_model
    sets = {"b": units[:4], "a": units[4:8]}
    report = robustness_table(params, config, sets, [], tags=["b", "a"])
    assert [r["tag"] for r in report.rows] == ["b", "a"]
    with pytest.raises(EvalError, match="unknown test-set tag"):
        robustness_table(params, config, sets, [], tags=["c"])


def test_robustness_table_single_label_set_flags(tiny_model):
    params, config, units = tiny_model
    machine_only = [u for u in units if u.label is M]
    report = robustness_table(params, config, {"adv": machine_only}, [])
    row = report.rows[0]
    assert row["accuracy"] == pytest.approx(row["classes"]["machine"]["recall"])
    assert any(flag.startswith("human.") for flag in row["flags"])


def test_aggregate_reports_single_passthrough(tiny_model):
    params, config, units = tiny_model
    report = robustness_table(params, config, {"t": units}, [])
    merged = aggregate_reports([report])
    assert merged[0]["accuracy"] == report.rows[0]["accuracy"]
    assert merged[0]["classes"] == report.rows[0]["classes"]


def test_aggregate_reports_multi_means(tiny_model):
    params, config, units = tiny_model
    r1 = robustness_table(params, config, {"t": units}, [])
    rows = [dict(r1.rows[0])]
    rows[0] = dict(rows[0], accuracy=rows[0]["accuracy"] - 0.1)
    r2 = EvalReport(rows=(rows[0],))
    merged = aggregate_reports([r1, r2])
    cell = merged[0]["accuracy"]
    assert cell["mean"] == pytest.approx(r1.rows[0]["accuracy"] - 0.05)
    assert cell["sample_std"] > 0.0


def test_aggregate_reports_layout_mismatch(tiny_model):
    params, config, units = tiny_model
    r1 = robustness_table(params, config, {"t": units}, [])
    r2 = robustness_table(params, config, {"other": units}, [])
    with pytest.raises(EvalError, match="mismatched row layouts"):
        aggregate_reports([r1, r2])
    with pytest.raises(EvalError, match="no reports"):
        aggregate_reports([])


# --- rendering ---------------------------------------------------------------


def test_render_report_json_deterministic_and_rounded():
    payload = {"b": 0.123456789, "a": {"x": [1 / 3]}}
    text = render_report_json(payload)
    assert text.endswith("\n")
    assert json.loads(text) == {"a": {"x": [0.3333]}, "b": 0.1235}
    assert text.index('"a"') < text.index('"b"')


def test_render_rows_markdown_single_and_aggregate():
    single_row = {
        "tag": "in_domain",
        "variant": "raw",
        "count": 24,
        "accuracy": 0.921875,
        "classes": {
            "machine": {"precision": 1.0, "recall": 0.875, "f1": 14 / 15},
            "human": {"precision": 0.9, "recall": 1.0, "f1": 18 / 19},
        },
        "flags": [],
    }
    text = render_rows_markdown([single_row])
    lines = text.splitlines()
    assert lines[0].startswith("| set | variant | n | accuracy |")
    assert lines[1] == "|---" * 11 + "|"
    assert "| in_domain | raw | 24 | 92.19 | 100.00 | 87.50 |" in lines[2]
    assert lines[2].endswith("| - |")

    agg_row = dict(
        single_row,
        accuracy={"mean": 0.9, "sample_std": 0.015},
        classes={
            name: {
                k: {"mean": v, "sample_std": 0.0}
                for k, v in stats.items()
            }
            for name, stats in single_row["classes"].items()
        },
        flags=["human.f1"],
    )
    text = render_rows_markdown([agg_row])
    assert "90.00 ± 1.50" in text
    assert "| human.f1 |" in text
