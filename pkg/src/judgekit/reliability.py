"""Chance-corrected agreement coefficients and rank correlations.

All coefficients share the generic form (A_o - A_e) / (1 - A_e); they differ in
how expected agreement is modeled, which is exactly what drives their behavior
under skewed category prevalence. Degenerate inputs raise typed errors instead
of returning 0.0 or NaN so reports can distinguish "no signal" from "disagreement".
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import (
    DataIntegrityError,
    DegenerateDistributionError,
    InsufficientDataError,
    StatisticError,
    UndefinedCorrelationError,
    UnsupportedDesignError,
)
from .ratings import OrdinalScale, RatingsMatrix, marginal_proportions, matrix_from_rows, weight_matrix

ALPHA_DIFFERENCES = ("nominal", "ordinal", "interval")

PROFILE_COLUMNS = (
    "percent_agreement",
    "cohen_kappa",
    "krippendorff_alpha",
    "gwet_ac2_linear",
    "gwet_ac2_quadratic",
    "spearman_rho",
    "kendall_tau_b",
)


@dataclass(frozen=True)
class AgreementResult:
    coefficient: float
    observed_agreement: float
    expected_agreement: float
    method: str
    weights: str
    n_items_used: int


def _generic(a_o: float, a_e: float, method: str, weights: str, n_used: int) -> AgreementResult:
    if a_e >= 1.0:
        raise DegenerateDistributionError(f"{method}: expected agreement is 1, coefficient undefined")
    return AgreementResult(
        coefficient=float((a_o - a_e) / (1.0 - a_e)),
        observed_agreement=float(a_o),
        expected_agreement=float(a_e),
        method=method,
        weights=weights,
        n_items_used=n_used,
    )


def _item_counts(m: RatingsMatrix) -> list[np.ndarray]:
    counts = [m.category_counts(i) for i in m.co_rated_indices()]
    if not counts:
        raise InsufficientDataError("no item has 2 or more ratings")
    return counts


def percent_agreement(m: RatingsMatrix, weights: str = "identity") -> AgreementResult:
    """Mean over co-rated items of the mean pairwise weight across rater pairs; no chance correction."""
    w = weight_matrix(weights, m.scale.k)
    total = 0.0
    counts = _item_counts(m)
    for r_ik in counts:
        r_i = r_ik.sum()
        # sum of w over unordered pairs of ratings = (r' W r - r_i) / 2 since diag(W) = 1
        pair_weight = (r_ik @ w @ r_ik - r_i) / 2.0
        total += pair_weight / (r_i * (r_i - 1) / 2.0)
    a_o = total / len(counts)
    return _generic(a_o, 0.0, "percent-agreement", weights, len(counts))


def cohen_kappa(m: RatingsMatrix, weights: str = "identity") -> AgreementResult:
    """Weighted kappa for exactly two raters; rejects missing cells rather than dropping them.

    Callers with partial coverage should pair-delete explicitly via paired_columns
    so the exclusion is visible in n_items_used.
    """
    if len(m.raters) != 2:
        raise UnsupportedDesignError(f"cohen_kappa needs exactly 2 raters, got {len(m.raters)}")
    if any(level is None for row in m.rows for level in row):
        raise DataIntegrityError(
            "cohen_kappa does not tolerate missing cells; drop incomplete items via paired_columns first"
        )
    if m.n == 0:
        raise InsufficientDataError("empty matrix")
    k = m.scale.k
    w = weight_matrix(weights, k)
    col_a = np.array([row[0] for row in m.rows]) - 1
    col_b = np.array([row[1] for row in m.rows]) - 1
    a_o = float(w[col_a, col_b].mean())
    p_a = np.bincount(col_a, minlength=k) / m.n
    p_b = np.bincount(col_b, minlength=k) / m.n
    a_e = float(p_a @ w @ p_b)
    return _generic(a_o, a_e, "cohen-kappa", weights, m.n)


def _coincidence_matrix(m: RatingsMatrix) -> np.ndarray:
    """o_ck: each ordered within-item pair contributes 1/(r_i - 1); row sums are the pairable counts."""
    k = m.scale.k
    o = np.zeros((k, k))
    for r_ik in _item_counts(m):
        r_i = r_ik.sum()
        pair_counts = np.outer(r_ik, r_ik) - np.diag(r_ik)
        o += pair_counts / (r_i - 1.0)
    return o


def _alpha_distances(difference: str, n_c: np.ndarray) -> np.ndarray:
    k = len(n_c)
    if difference == "nominal":
        return 1.0 - np.eye(k)
    if difference == "interval":
        idx = np.arange(k, dtype=float)
        return (idx[:, None] - idx[None, :]) ** 2
    if difference == "ordinal":
        cum = np.cumsum(n_c)
        delta = np.zeros((k, k))
        for c in range(k):
            for d in range(c + 1, k):
                span = cum[d] - (cum[c - 1] if c > 0 else 0.0)
                delta[c, d] = delta[d, c] = (span - (n_c[c] + n_c[d]) / 2.0) ** 2
        return delta
    raise ValueError(f"unknown difference {difference!r}, expected one of {ALPHA_DIFFERENCES}")


def krippendorff_alpha(m: RatingsMatrix, difference: str = "ordinal") -> AgreementResult:
    """alpha = 1 - D_o/D_e over the coincidence matrix of co-rated items; tolerates missing cells."""
    o = _coincidence_matrix(m)
    n_c = o.sum(axis=1)
    n_total = n_c.sum()
    delta = _alpha_distances(difference, n_c)
    d_o = float((o * delta).sum() / n_total)
    d_e = float((np.outer(n_c, n_c) * delta).sum() / (n_total * (n_total - 1.0)))
    if d_e <= 0.0:
        raise DegenerateDistributionError(
            "krippendorff_alpha: all ratings fall in one category, expected disagreement is 0"
        )
    return _generic(
        1.0 - d_o,
        1.0 - d_e,
        f"krippendorff-alpha-{difference}",
        difference,
        len(m.co_rated_indices()),
    )


def gwet_ac(m: RatingsMatrix, weights: str = "identity") -> AgreementResult:
    """Gwet's AC family: AC1 under identity weights, AC2-L / AC2-Q under linear / quadratic.

    The chance term scales with sum_k pi_k (1 - pi_k), which shrinks as one
    category dominates, so the coefficient stays stable under skewed prevalence
    where kappa and alpha collapse.
    """
    k = m.scale.k
    w = weight_matrix(weights, k)
    counts = _item_counts(m)
    pi = marginal_proportions(m)
    t_w = float(w.sum())
    a_e = (t_w / (k * (k - 1.0))) * float((pi * (1.0 - pi)).sum())
    a_o = 0.0
    for r_ik in counts:
        r_i = r_ik.sum()
        r_star = w @ r_ik
        a_o += float((r_ik * (r_star - 1.0)).sum()) / (r_i * (r_i - 1.0))
    a_o /= len(counts)
    method = {"identity": "gwet-ac1", "linear": "gwet-ac2-l", "quadratic": "gwet-ac2-q"}[weights]
    return _generic(a_o, a_e, method, weights, len(counts))


def _check_pair(x, y, min_len: int) -> tuple[np.ndarray, np.ndarray]:
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < min_len:
        raise InsufficientDataError(f"need at least {min_len} pairs, got {len(x)}")
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    for name, arr in (("x", xa), ("y", ya)):
        if np.unique(arr).size < 2:
            raise UndefinedCorrelationError(f"{name} is constant; rank correlation undefined")
    return xa, ya


def spearman_rho(x, y) -> float:
    """Pearson correlation of average-rank vectors."""
    xa, ya = _check_pair(x, y, min_len=3)
    rx = rankdata(xa, method="average")
    ry = rankdata(ya, method="average")
    # identical (or exactly mirrored) rank vectors are +/-1 by definition; skip
    # the dot products so perfect judges report exact unity
    if np.array_equal(rx, ry):
        return 1.0
    if np.array_equal(rx, len(rx) + 1.0 - ry):
        return -1.0
    rho = float(np.corrcoef(rx, ry)[0, 1])
    return max(-1.0, min(1.0, rho))


def kendall_tau_b(x, y) -> float:
    """Tie-corrected tau via contingency-table prefix sums (exact integer pair counts)."""
    xa, ya = _check_pair(x, y, min_len=2)
    _, xi = np.unique(xa, return_inverse=True)
    _, yi = np.unique(ya, return_inverse=True)
    table = np.zeros((xi.max() + 1, yi.max() + 1), dtype=np.int64)
    np.add.at(table, (xi, yi), 1)
    cum = table.cumsum(axis=0).cumsum(axis=1)
    total = int(cum[-1, -1])

    def rect(i0, i1, j0, j1) -> np.ndarray:
        # inclusive-bounds rectangle sums over the prefix table; callers keep indices in range
        s = cum[i1, j1].astype(np.int64)
        if i0 > 0:
            s = s - cum[i0 - 1, j1]
        if j0 > 0:
            s = s - cum[i1, j0 - 1]
        if i0 > 0 and j0 > 0:
            s = s + cum[i0 - 1, j0 - 1]
        return s

    n_rows, n_cols = table.shape
    concordant = discordant = 0
    for i in range(n_rows - 1):
        for j in range(n_cols):
            cell = int(table[i, j])
            if cell == 0:
                continue
            if j < n_cols - 1:
                concordant += cell * int(rect(i + 1, n_rows - 1, j + 1, n_cols - 1))
            if j > 0:
                discordant += cell * int(rect(i + 1, n_rows - 1, 0, j - 1))
    row_tot = table.sum(axis=1)
    col_tot = table.sum(axis=0)
    same_cell = int((table * (table - 1) // 2).sum())
    ties_x_only = int((row_tot * (row_tot - 1) // 2).sum()) - same_cell
    ties_y_only = int((col_tot * (col_tot - 1) // 2).sum()) - same_cell
    assert concordant + discordant + ties_x_only + ties_y_only + same_cell == total * (total - 1) // 2
    denom = (concordant + discordant + ties_x_only) * (concordant + discordant + ties_y_only)
    if denom == 0:
        raise UndefinedCorrelationError("no untied pairs in either margin; tau undefined")
    return (concordant - discordant) / math.sqrt(denom)


@dataclass(frozen=True)
class ProfileCell:
    """One judge-profile metric: a value, or an explicit reason it is undefined."""

    value: float | None
    error: str | None = None

    @property
    def defined(self) -> bool:
        return self.value is not None


def judge_profile(
    judge,
    gold,
    scale: OrdinalScale,
    alpha_difference: str = "ordinal",
    base_weights: str = "identity",
) -> dict[str, ProfileCell]:
    """Seven-column agreement/ranking profile of one judge against gold.

    Input columns are aligned by position; items missing on either side are
    dropped (pairwise-complete overlap). Metrics that are undefined on the
    overlap come back as explicit markers, never zeros.
    """
    if len(judge) != len(gold):
        raise ValueError(f"judge and gold columns differ in length: {len(judge)} vs {len(gold)}")
    pairs = [(j, g) for j, g in zip(judge, gold) if j is not None and g is not None]
    if len(pairs) < 3:
        raise InsufficientDataError(f"judge overlaps gold on {len(pairs)} items, need at least 3")
    judge_col = [p[0] for p in pairs]
    gold_col = [p[1] for p in pairs]
    m = matrix_from_rows(scale, ("judge", "gold"), list(zip(judge_col, gold_col)))

    def cell(fn) -> ProfileCell:
        try:
            out = fn()
        except StatisticError as exc:
            return ProfileCell(value=None, error=exc.tag)
        return ProfileCell(value=out.coefficient if isinstance(out, AgreementResult) else out)

    return {
        "percent_agreement": cell(lambda: percent_agreement(m, base_weights)),
        "cohen_kappa": cell(lambda: cohen_kappa(m, base_weights)),
        "krippendorff_alpha": cell(lambda: krippendorff_alpha(m, alpha_difference)),
        "gwet_ac2_linear": cell(lambda: gwet_ac(m, "linear")),
        "gwet_ac2_quadratic": cell(lambda: gwet_ac(m, "quadratic")),
        "spearman_rho": cell(lambda: spearman_rho(judge_col, gold_col)),
        "kendall_tau_b": cell(lambda: kendall_tau_b(judge_col, gold_col)),
    }
