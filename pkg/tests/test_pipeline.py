import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from judgekit import (
    DataIntegrityError,
    InfeasibleConstructionError,
    InsufficientDataError,
    OrdinalScale,
    RunRecord,
    cohen_kappa,
    compare_systems,
    consolidate_runs,
    evaluate_judges,
    gwet_ac,
    krippendorff_alpha,
    majority_vote,
    metric_polarity,
    paradox_matrix,
    prevalence_sweep,
)

SCALE4 = OrdinalScale.from_k(4)


def runs_for(query, system, metric, ratings):
    return [
        RunRecord(query_id=query, system_id=system, metric=metric, run=i + 1, rating=r)
        for i, r in enumerate(ratings)
    ]


def consolidated_from_levels(levels_by_system, metric="Relevance"):
    """levels_by_system: {'A': [...], 'B': [...]} aligned by query index."""
    records = []
    for system, levels in levels_by_system.items():
        for q, level in enumerate(levels):
            records.extend(runs_for(f"q{q:03d}", system, metric, [level]))
    return consolidate_runs(records)


# ---------------------------------------------------------------------------
# majority vote + consolidation


def test_majority_vote_clear_majority():
    result = majority_vote([3, 3, 3, 2, 3, 3, 3, 3, 2, 3])
    assert result.level == 3
    assert not result.tie
    assert result.votes == 8


def test_majority_vote_tie_breaks_lower():
    result = majority_vote([2, 2, 3, 3])
    assert result.level == 2
    assert result.tie


def test_majority_vote_singleton():
    result = majority_vote([4])
    assert result.level == 4 and result.n_runs == 1 and not result.tie


def test_majority_vote_empty():
    with pytest.raises(InsufficientDataError):
        majority_vote([])


@given(st.lists(st.integers(1, 4), min_size=1, max_size=20), st.integers(0, 1000), st.integers(1, 10))
def test_majority_vote_properties(levels, seed, extra):
    base = majority_vote(levels)
    shuffled = list(levels)
    random.Random(seed).shuffle(shuffled)
    assert majority_vote(shuffled) == base
    reinforced = majority_vote(levels + [base.level] * extra)
    assert reinforced.level == base.level


def test_consolidate_counts():
    records = runs_for("q1", "A", "Relevance", [3] * 10) + runs_for("q2", "A", "Relevance", [2] * 10)
    consolidated = consolidate_runs(records)
    assert len(consolidated.entries) == 2
    assert consolidated.level("q1", "A", "Relevance") == 3


def test_consolidate_order_independent():
    records = runs_for("q1", "A", "Relevance", [1, 2, 2, 3]) + runs_for("q2", "B", "Correctness", [4, 4])
    shuffled = list(records)
    random.Random(3).shuffle(shuffled)
    assert consolidate_runs(records) == consolidate_runs(shuffled)


def test_consolidate_duplicate_run_names_offender():
    records = runs_for("q1", "A", "Relevance", [3, 3, 2])
    records.append(RunRecord("q1", "A", "Relevance", run=3, rating=4))
    with pytest.raises(DataIntegrityError, match=r"q1.*A.*Relevance.*3"):
        consolidate_runs(records)


def test_run_record_validation():
    with pytest.raises(DataIntegrityError):
        RunRecord("q1", "A", "Relevance", run=0, rating=2)
    with pytest.raises(DataIntegrityError):
        RunRecord("q1", "A", "Relevance", run=1, rating=0)


# ---------------------------------------------------------------------------
# compare_systems


def test_compare_uniform_improvement_rejects():
    rng = random.Random(7)
    a = [rng.randint(1, 3) for _ in range(30)]
    b = [min(4, v + 1) for v in a]
    report = compare_systems(consolidated_from_levels({"A": a, "B": b}), "A", "B")
    row = next(r for r in report.rows if r.direction == "greater")
    assert row.rejected and row.p_adjusted < 0.01
    assert report.verdicts["Relevance"] == "B-better"


def test_compare_identical_systems_no_difference():
    levels = [1, 2, 3, 4, 2, 3] * 5
    report = compare_systems(consolidated_from_levels({"A": levels, "B": levels}), "A", "B")
    assert all(v == "no-difference" for v in report.verdicts.values())
    for row in report.rows:
        assert row.no_signal
        assert row.p_raw == 1.0
        assert not row.rejected


def test_compare_swapped_systems_mirror():
    rng = random.Random(11)
    a = [rng.randint(1, 4) for _ in range(40)]
    b = [min(4, max(1, v + rng.choice((-1, 0, 0, 1)))) for v in a]
    consolidated = consolidated_from_levels({"A": a, "B": b})
    fwd = compare_systems(consolidated, "A", "B")
    rev = compare_systems(consolidated, "B", "A")
    fwd_by_dir = {r.direction: r for r in fwd.rows}
    rev_by_dir = {r.direction: r for r in rev.rows}
    assert fwd_by_dir["greater"].p_raw == rev_by_dir["less"].p_raw
    assert fwd_by_dir["less"].p_raw == rev_by_dir["greater"].p_raw
    assert sorted(r.p_adjusted for r in fwd.rows) == sorted(r.p_adjusted for r in rev.rows)
    flip = {"A-better": "B-better", "B-better": "A-better", "no-difference": "no-difference"}
    assert rev.verdicts["Relevance"] == flip[fwd.verdicts["Relevance"]]


def test_compare_rejection_sets_nest_across_corrections():
    rng = random.Random(13)
    systems = {"A": [], "B": []}
    records = []
    metrics = [f"m{i}" for i in range(6)]
    for metric in metrics:
        for q in range(25):
            a = rng.randint(1, 4)
            shift = 1 if metric in ("m1", "m4") and rng.random() < 0.5 else 0
            records.extend(runs_for(f"q{q}", "A", metric, [a]))
            records.extend(runs_for(f"q{q}", "B", metric, [min(4, a + shift)]))
    consolidated = consolidate_runs(records)
    rejected = {}
    for correction in ("bonferroni", "holm", "bh"):
        report = compare_systems(consolidated, "A", "B", correction=correction)
        rejected[correction] = {(r.metric, r.direction) for r in report.rows if r.rejected}
    assert rejected["bonferroni"] <= rejected["holm"] <= rejected["bh"]


def test_compare_polarity_flips_hallucination_verdict():
    assert metric_polarity("Extrinsic Hallucinations") == "lower"
    assert metric_polarity("Relevance") == "higher"
    rng = random.Random(17)
    a = [rng.randint(1, 3) for _ in range(30)]
    b = [min(4, v + 1) for v in a]
    consolidated = consolidated_from_levels({"A": a, "B": b}, metric="Extrinsic Hallucinations")
    report = compare_systems(consolidated, "A", "B")
    # B scores higher, but higher hallucination is worse, so A wins
    assert report.verdicts["Extrinsic Hallucinations"] == "A-better"
    override = compare_systems(consolidated, "A", "B", polarity={"Extrinsic Hallucinations": "higher"})
    assert override.verdicts["Extrinsic Hallucinations"] == "B-better"


def test_compare_misaligned_queries_error():
    records = runs_for("q1", "A", "Relevance", [2]) + runs_for("q2", "A", "Relevance", [2])
    records += runs_for("q1", "B", "Relevance", [3])
    with pytest.raises(DataIntegrityError, match="q2"):
        compare_systems(consolidate_runs(records), "A", "B")


def test_compare_per_direction_pooling():
    rng = random.Random(19)
    a = [rng.randint(1, 3) for _ in range(25)]
    b = [min(4, v + (1 if rng.random() < 0.6 else 0)) for v in a]
    consolidated = consolidated_from_levels({"A": a, "B": b})
    pooled = compare_systems(consolidated, "A", "B", pooling="pooled")
    split = compare_systems(consolidated, "A", "B", pooling="per-direction")
    # same raw p-values; the correction family differs
    assert [r.p_raw for r in pooled.rows] == [r.p_raw for r in split.rows]
    assert split.pooling == "per-direction"


# ---------------------------------------------------------------------------
# evaluate_judges


def test_evaluate_judges_perfect_judge():
    gold = {(f"q{i}", "S", "Relevance"): level for i, level in enumerate([1, 2, 3, 4, 2])}
    runs = {
        "good": [
            RunRecord(q, s, m, run=r, rating=level)
            for (q, s, m), level in gold.items()
            for r in range(1, 4)
        ]
    }
    report = evaluate_judges(runs, gold, SCALE4)
    assert report.judges == ("good",)
    for column in report.columns:
        assert report.rows["good"][column].value == 1.0
        assert report.best[column] == ("good",)


def test_evaluate_judges_identical_beats_reversed():
    gold = {(f"q{i}", "S", "Relevance"): level for i, level in enumerate([1, 2, 3, 4, 2, 3, 1, 4])}
    runs = {
        "faithful": [RunRecord(q, s, m, 1, level) for (q, s, m), level in gold.items()],
        "contrarian": [RunRecord(q, s, m, 1, 5 - level) for (q, s, m), level in gold.items()],
    }
    report = evaluate_judges(runs, gold, SCALE4)
    for column in report.columns:
        assert report.best[column] == ("faithful",)


def test_evaluate_judges_graded_noise_orders_percent_agreement():
    rng = random.Random(23)
    gold = {(f"q{i:03d}", "S", "Relevance"): rng.randint(1, 4) for i in range(200)}
    runs = {}
    for name, noise in (("five", 0.05), ("twenty", 0.20), ("forty", 0.40)):
        runs[name] = [
            RunRecord(q, s, m, 1, rng.randint(1, 4) if rng.random() < noise else level)
            for (q, s, m), level in gold.items()
        ]
    report = evaluate_judges(runs, gold, SCALE4)
    pct = {j: report.rows[j]["percent_agreement"].value for j in report.judges}
    assert pct["five"] > pct["twenty"] > pct["forty"]


def test_evaluate_judges_insufficient_overlap_marks_row():
    gold = {("q0", "S", "Relevance"): 2, ("q1", "S", "Relevance"): 3}
    runs = {"sparse": [RunRecord("q0", "S", "Relevance", 1, 2)]}
    report = evaluate_judges(runs, gold, SCALE4)
    for column in report.columns:
        cell = report.rows["sparse"][column]
        assert cell.value is None
        assert cell.error == "insufficient-data"
    assert all(report.best[c] == () for c in report.columns)


# ---------------------------------------------------------------------------
# prevalence sweep


def test_sweep_balanced_perfect_agreement():
    (row,) = prevalence_sweep([0.5], observed_agreement=1.0, n_items=100)
    assert row.kappa == 1.0
    assert row.alpha == 1.0
    assert row.ac1 == 1.0


def test_sweep_paradox_fixture():
    (row,) = prevalence_sweep([0.95], observed_agreement=0.90, n_items=100)
    assert row.kappa == pytest.approx(-0.0526, abs=1e-3)
    assert row.ac1 == pytest.approx(0.8895, abs=1e-3)
    assert row.observed_agreement == 0.90


def test_sweep_monotone_directions():
    shares = [0.55, 0.65, 0.75, 0.85, 0.95]
    rows = prevalence_sweep(shares, observed_agreement=0.90, n_items=100)
    kappas = [r.kappa for r in rows]
    alphas = [r.alpha for r in rows]
    ac1s = [r.ac1 for r in rows]
    assert all(a >= b for a, b in zip(kappas, kappas[1:]))
    assert all(a >= b for a, b in zip(alphas, alphas[1:]))
    assert all(a <= b for a, b in zip(ac1s, ac1s[1:]))
    assert rows[-1].ac1 - rows[-1].alpha >= 0.5


def test_sweep_matches_direct_reliability_calls():
    for share in (0.6, 0.8, 0.95):
        (row,) = prevalence_sweep([share], observed_agreement=0.90, n_items=100)
        matrix, _ = paradox_matrix(share, 0.90, 100)
        assert row.kappa == cohen_kappa(matrix).coefficient
        assert row.alpha == krippendorff_alpha(matrix, "nominal").coefficient
        assert row.ac1 == gwet_ac(matrix, "identity").coefficient
        assert row.ac2_linear == gwet_ac(matrix, "linear").coefficient
        assert row.ac2_quadratic == gwet_ac(matrix, "quadratic").coefficient


def test_sweep_infeasible_inputs():
    with pytest.raises(InfeasibleConstructionError):
        prevalence_sweep([0.99], observed_agreement=0.90, n_items=100)  # n_mm would go negative
    with pytest.raises(InfeasibleConstructionError):
        prevalence_sweep([1.2], observed_agreement=0.90, n_items=100)
    with pytest.raises(InfeasibleConstructionError):
        prevalence_sweep([0.75], observed_agreement=0.95, n_items=10)  # rounds to A_o = 1.0, off by 0.05
