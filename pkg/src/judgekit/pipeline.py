"""End-to-end workflows: run consolidation, system comparison, judge reports, prevalence sweep."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import (
    DataIntegrityError,
    InfeasibleConstructionError,
    InsufficientDataError,
    StatisticError,
    UnknownRaterError,
)
from .inference import PairedSamples, adjust_pvalues, wilcoxon_signed_rank
from .ratings import OrdinalScale, matrix_from_rows
from .reliability import PROFILE_COLUMNS, ProfileCell, cohen_kappa, gwet_ac, judge_profile, krippendorff_alpha

DIRECTIONS = ("greater", "less")
VERDICT_A = "A-better"
VERDICT_B = "B-better"
VERDICT_NONE = "no-difference"


@dataclass(frozen=True)
class RunRecord:
    """One judged rating: a (query, system, metric) cell observed on one run."""

    query_id: str
    system_id: str
    metric: str
    run: int
    rating: int

    def __post_init__(self):
        if self.run < 1:
            raise DataIntegrityError(f"run index must be >= 1, got {self.run}")
        if self.rating < 1:
            raise DataIntegrityError(f"rating must be a level >= 1, got {self.rating}")

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.query_id, self.system_id, self.metric)


@dataclass(frozen=True)
class VoteResult:
    level: int
    votes: int
    n_runs: int
    tie: bool


def majority_vote(levels: Sequence[int]) -> VoteResult:
    """Modal level of a run multiset; ties break deterministically toward the lower level."""
    if not levels:
        raise InsufficientDataError("majority_vote needs at least one run")
    counts = Counter(levels)
    top = max(counts.values())
    winners = sorted(level for level, c in counts.items() if c == top)
    return VoteResult(level=winners[0], votes=top, n_runs=len(levels), tie=len(winners) > 1)


@dataclass(frozen=True)
class ConsolidatedRatings:
    """One majority-voted level per (query, system, metric), with vote diagnostics."""

    entries: Mapping[tuple[str, str, str], VoteResult]

    def systems(self) -> list[str]:
        return sorted({k[1] for k in self.entries})

    def metrics(self) -> list[str]:
        return sorted({k[2] for k in self.entries})

    def queries(self, system_id: str, metric: str) -> set[str]:
        return {q for (q, s, m) in self.entries if s == system_id and m == metric}

    def level(self, query_id: str, system_id: str, metric: str) -> int:
        return self.entries[(query_id, system_id, metric)].level


def consolidate_runs(records: Iterable[RunRecord]) -> ConsolidatedRatings:
    """Collapse repeated runs by majority vote; order-independent; duplicate runs are an error."""
    by_key: dict[tuple[str, str, str], dict[int, int]] = {}
    duplicates = []
    for rec in records:
        runs = by_key.setdefault(rec.key, {})
        if rec.run in runs:
            duplicates.append((*rec.key, rec.run))
        runs[rec.run] = rec.rating
    if duplicates:
        listing = ", ".join(repr(d) for d in sorted(set(duplicates)))
        raise DataIntegrityError(f"duplicate (query, system, metric, run) records: {listing}")
    entries = {
        key: majority_vote([rating for _, rating in sorted(runs.items())])
        for key, runs in sorted(by_key.items())
    }
    return ConsolidatedRatings(entries=entries)


def metric_polarity(metric: str) -> str:
    """'higher' when larger levels are better; hallucination-type metrics invert by default."""
    return "lower" if "hallucination" in metric.lower() else "higher"


@dataclass(frozen=True)
class ComparisonRow:
    metric: str
    direction: str
    statistic: float
    p_raw: float
    p_adjusted: float
    rejected: bool
    no_signal: bool
    n_queries: int
    n_effective: int


@dataclass(frozen=True)
class ComparisonReport:
    system_a: str
    system_b: str
    rows: tuple[ComparisonRow, ...]
    verdicts: Mapping[str, str]
    alpha: float
    correction: str
    pooling: str
    zero_policy: str
    polarity: Mapping[str, str] = field(default_factory=dict)


def _paired_for_metric(
    consolidated: ConsolidatedRatings, system_a: str, system_b: str, metric: str
) -> PairedSamples:
    qa = consolidated.queries(system_a, metric)
    qb = consolidated.queries(system_b, metric)
    if qa != qb:
        missing_b = sorted(qa - qb)
        missing_a = sorted(qb - qa)
        parts = []
        if missing_b:
            parts.append(f"missing for {system_b!r}: {missing_b}")
        if missing_a:
            parts.append(f"missing for {system_a!r}: {missing_a}")
        raise DataIntegrityError(f"metric {metric!r}: misaligned query sets ({'; '.join(parts)})")
    if not qa:
        raise DataIntegrityError(f"metric {metric!r}: no queries for systems {system_a!r}/{system_b!r}")
    queries = sorted(qa)
    return PairedSamples(
        query_ids=tuple(queries),
        a=tuple(float(consolidated.level(q, system_a, metric)) for q in queries),
        b=tuple(float(consolidated.level(q, system_b, metric)) for q in queries),
    )


def compare_systems(
    consolidated: ConsolidatedRatings,
    system_a: str,
    system_b: str,
    metrics: Sequence[str] | None = None,
    alpha: float = 0.05,
    correction: str = "bh",
    pooling: str = "pooled",
    zero_policy: str = "drop",
    polarity: Mapping[str, str] | None = None,
) -> ComparisonReport:
    """Two-directional Wilcoxon comparison per metric with a multiplicity-corrected family.

    Differences are d = B - A; each metric is tested with alternative "greater"
    and "less". Pooling "pooled" corrects all metrics x both directions as one
    family (the conservative reading); "per-direction" corrects each direction
    separately. Verdicts come solely from adjusted p vs alpha, mapped through
    metric polarity so e.g. a drop in a hallucination score reads as a win.
    """
    if pooling not in ("pooled", "per-direction"):
        raise ValueError(f"pooling must be 'pooled' or 'per-direction', got {pooling!r}")
    metric_list = sorted(metrics) if metrics is not None else consolidated.metrics()
    if not metric_list:
        raise InsufficientDataError("no metrics to compare")
    polarity_map = {m: (polarity or {}).get(m, metric_polarity(m)) for m in metric_list}

    partial: dict[tuple[str, str], dict] = {}
    for metric in metric_list:
        samples = _paired_for_metric(consolidated, system_a, system_b, metric)
        for direction in DIRECTIONS:
            try:
                test = wilcoxon_signed_rank(samples, direction, zero_policy=zero_policy)
                entry = {
                    "statistic": test.statistic,
                    "p_raw": test.p_value,
                    "no_signal": False,
                    "n_effective": test.n_effective,
                }
            except StatisticError:
                entry = {"statistic": 0.0, "p_raw": 1.0, "no_signal": True, "n_effective": 0}
            entry["n_queries"] = len(samples.query_ids)
            partial[(metric, direction)] = entry

    hypotheses = [(metric, direction) for metric in metric_list for direction in DIRECTIONS]
    adjusted: dict[tuple[str, str], tuple[float, bool]] = {}
    if pooling == "pooled":
        families = [hypotheses]
    else:
        families = [[h for h in hypotheses if h[1] == d] for d in DIRECTIONS]
    for family in families:
        result = adjust_pvalues([partial[h]["p_raw"] for h in family], method=correction, alpha=alpha)
        for h, adj, rej in zip(family, result.adjusted, result.rejected):
            adjusted[h] = (adj, rej)

    rows = tuple(
        ComparisonRow(
            metric=metric,
            direction=direction,
            statistic=partial[(metric, direction)]["statistic"],
            p_raw=partial[(metric, direction)]["p_raw"],
            p_adjusted=adjusted[(metric, direction)][0],
            rejected=adjusted[(metric, direction)][1],
            no_signal=partial[(metric, direction)]["no_signal"],
            n_queries=partial[(metric, direction)]["n_queries"],
            n_effective=partial[(metric, direction)]["n_effective"],
        )
        for metric, direction in hypotheses
    )

    verdicts = {}
    for metric in metric_list:
        greater_hit = adjusted[(metric, "greater")][1]
        less_hit = adjusted[(metric, "less")][1]
        if greater_hit and less_hit:
            # only reachable at alpha >= 0.5; keep the smaller adjusted p
            greater_hit = adjusted[(metric, "greater")][0] <= adjusted[(metric, "less")][0]
            less_hit = not greater_hit
        if not greater_hit and not less_hit:
            verdicts[metric] = VERDICT_NONE
        elif greater_hit:
            verdicts[metric] = VERDICT_B if polarity_map[metric] == "higher" else VERDICT_A
        else:
            verdicts[metric] = VERDICT_A if polarity_map[metric] == "higher" else VERDICT_B

    return ComparisonReport(
        system_a=system_a,
        system_b=system_b,
        rows=rows,
        verdicts=verdicts,
        alpha=alpha,
        correction=correction,
        pooling=pooling,
        zero_policy=zero_policy,
        polarity=polarity_map,
    )


@dataclass(frozen=True)
class JudgeReport:
    """Table-3-shaped judge profiles: one seven-metric row per judge, best markers per column."""

    judges: tuple[str, ...]
    columns: tuple[str, ...]
    rows: Mapping[str, Mapping[str, ProfileCell]]
    best: Mapping[str, tuple[str, ...]]


def _best_per_column(judges, rows) -> dict[str, tuple[str, ...]]:
    best = {}
    for column in PROFILE_COLUMNS:
        defined = [(judge, rows[judge][column].value) for judge in judges if rows[judge][column].defined]
        if not defined:
            best[column] = ()
            continue
        top = max(value for _, value in defined)
        best[column] = tuple(judge for judge, value in defined if value == top)
    return best


def assemble_judge_report(rows: Mapping[str, Mapping[str, ProfileCell]]) -> JudgeReport:
    judges = tuple(sorted(rows))
    return JudgeReport(
        judges=judges,
        columns=PROFILE_COLUMNS,
        rows=dict(rows),
        best=_best_per_column(judges, rows),
    )


def evaluate_judges(
    runs_by_judge: Mapping[str, Iterable[RunRecord]],
    gold: ConsolidatedRatings | Mapping[tuple[str, str, str], int],
    scale: OrdinalScale,
    alpha_difference: str = "ordinal",
) -> JudgeReport:
    """Consolidate each judge's runs, then profile the judge against gold on the overlap.

    Judges with fewer than 3 overlapping items get a row of explicit
    insufficient-data markers instead of being dropped.
    """
    if isinstance(gold, ConsolidatedRatings):
        gold_levels = {key: vote.level for key, vote in gold.entries.items()}
    else:
        gold_levels = dict(gold)
    rows: dict[str, dict[str, ProfileCell]] = {}
    for judge in sorted(runs_by_judge):
        consolidated = consolidate_runs(runs_by_judge[judge])
        keys = sorted(set(consolidated.entries) & set(gold_levels))
        judge_col = [consolidated.entries[k].level for k in keys]
        gold_col = [gold_levels[k] for k in keys]
        try:
            rows[judge] = judge_profile(judge_col, gold_col, scale, alpha_difference=alpha_difference)
        except InsufficientDataError:
            rows[judge] = {col: ProfileCell(value=None, error="insufficient-data") for col in PROFILE_COLUMNS}
    return assemble_judge_report(rows)


def judge_report_from_matrix(
    matrix,
    gold_rater: str,
    alpha_difference: str = "ordinal",
    base_weights: str = "identity",
) -> JudgeReport:
    """Profile every non-gold rater column against the gold column of a ratings matrix."""
    if gold_rater not in matrix.raters:
        raise UnknownRaterError(f"gold rater {gold_rater!r} not in matrix (raters: {list(matrix.raters)})")
    gold_idx = matrix.raters.index(gold_rater)
    rows: dict[str, dict[str, ProfileCell]] = {}
    for judge_idx, judge in enumerate(matrix.raters):
        if judge_idx == gold_idx:
            continue
        judge_col = [row[judge_idx] for row in matrix.rows]
        gold_col = [row[gold_idx] for row in matrix.rows]
        try:
            rows[judge] = judge_profile(
                judge_col, gold_col, matrix.scale,
                alpha_difference=alpha_difference, base_weights=base_weights,
            )
        except InsufficientDataError:
            rows[judge] = {col: ProfileCell(value=None, error="insufficient-data") for col in PROFILE_COLUMNS}
    return assemble_judge_report(rows)


@dataclass(frozen=True)
class SweepRow:
    share: float
    observed_agreement: float
    kappa: float
    alpha: float
    ac1: float
    ac2_linear: float
    ac2_quadratic: float


def paradox_matrix(share: float, observed_agreement: float, n_items: int):
    """Two-rater binary matrix with agreement A_o whose dominant-category share is `share`.

    Cell counts solve share = (n_dd + n_dis/2) / n and A_o = (n_dd + n_mm) / n:
    agreements split between both-dominant and both-minor items, disagreements
    split evenly between the two off-diagonal patterns.
    """
    n_agree = round(n_items * observed_agreement)
    n_dis = n_items - n_agree
    n_dd = round(n_items * share - n_dis / 2.0)
    n_mm = n_agree - n_dd
    dis_a = n_dis // 2
    dis_b = n_dis - dis_a
    if min(n_dd, n_mm, dis_a, dis_b) < 0:
        raise InfeasibleConstructionError(
            f"share {share} with observed agreement {observed_agreement} over {n_items} items "
            f"needs cell counts ({n_dd}, {n_mm}, {dis_a}, {dis_b})"
        )
    realized = n_agree / n_items
    if abs(realized - observed_agreement) > 0.02:
        raise InfeasibleConstructionError(
            f"{n_items} items cannot hold observed agreement {observed_agreement} (rounds to {realized})"
        )
    rows = [(1, 1)] * n_dd + [(2, 2)] * n_mm + [(1, 2)] * dis_a + [(2, 1)] * dis_b
    return matrix_from_rows(OrdinalScale.from_k(2), ("rater_1", "rater_2"), rows), realized


def prevalence_sweep(
    shares: Sequence[float],
    observed_agreement: float = 0.90,
    n_items: int = 100,
) -> tuple[SweepRow, ...]:
    """Hold observed agreement fixed, sweep dominant-category prevalence, and watch
    kappa/alpha collapse while the AC family stays stable (the prevalence paradox).

    All coefficients are computed by the reliability module on the constructed
    matrices, never reimplemented here.
    """
    if not 0.0 < observed_agreement <= 1.0:
        raise InfeasibleConstructionError(f"observed agreement must be in (0, 1], got {observed_agreement}")
    rows = []
    for share in shares:
        if not 0.5 <= share < 1.0:
            raise InfeasibleConstructionError(f"shares must lie in [0.5, 1), got {share}")
        matrix, realized = paradox_matrix(share, observed_agreement, n_items)
        rows.append(
            SweepRow(
                share=share,
                observed_agreement=realized,
                kappa=cohen_kappa(matrix).coefficient,
                alpha=krippendorff_alpha(matrix, "nominal").coefficient,
                ac1=gwet_ac(matrix, "identity").coefficient,
                ac2_linear=gwet_ac(matrix, "linear").coefficient,
                ac2_quadratic=gwet_ac(matrix, "quadratic").coefficient,
            )
        )
    return tuple(rows)
