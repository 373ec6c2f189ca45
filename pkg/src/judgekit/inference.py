"""Nonparametric paired/independent tests, multiplicity corrections, and the skewness diagnostic.

Exact modes compute the full permutation null (rank-sum distributions via dynamic
programming, binomial tails in integer arithmetic); approximate modes use normal
approximations with tie-variance and continuity corrections. Alternatives follow
the paired convention d = b - a: "greater" means b tends larger.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2, norm, rankdata

from .errors import (
    DataIntegrityError,
    DegenerateDistributionError,
    InsufficientDataError,
    NoSignalError,
    UnsupportedDesignError,
)

ALTERNATIVES = ("two-sided", "greater", "less")
CORRECTIONS = ("bonferroni", "holm", "bh")

# 2^25 sign assignments is the practical desk-scale ceiling for auto-exact mode.
WILCOXON_EXACT_LIMIT = 25
# auto-exact Mann-Whitney while the arrangement count stays enumerable.
MANN_WHITNEY_EXACT_LIMIT = 100_000


@dataclass(frozen=True)
class PairedSamples:
    """Per-query scores for two systems, aligned by query id."""

    query_ids: tuple[str, ...]
    a: tuple[float, ...]
    b: tuple[float, ...]

    def __post_init__(self):
        if not (len(self.query_ids) == len(self.a) == len(self.b)):
            raise DataIntegrityError(
                f"misaligned paired samples: {len(self.query_ids)} ids, {len(self.a)} a, {len(self.b)} b"
            )
        if len(self.a) < 1:
            raise InsufficientDataError("paired samples are empty")

    def differences(self) -> np.ndarray:
        return np.asarray(self.b, dtype=float) - np.asarray(self.a, dtype=float)


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    alternative: str
    method: str
    mode: str
    n_effective: int
    downgraded: bool = False


@dataclass(frozen=True)
class CorrectionResult:
    raw: tuple[float, ...]
    adjusted: tuple[float, ...]
    method: str
    alpha: float
    rejected: tuple[bool, ...]


def _check_alternative(alternative: str) -> None:
    if alternative not in ALTERNATIVES:
        raise ValueError(f"alternative must be one of {ALTERNATIVES}, got {alternative!r}")


def _signed_rank_counts(ranks: list[int]) -> list[int]:
    """counts[w] = number of sign assignments with positive-rank sum w (exact null of W+)."""
    total = sum(ranks)
    counts = [0] * (total + 1)
    counts[0] = 1
    for r in ranks:
        for w in range(total, r - 1, -1):
            counts[w] += counts[w - r]
    return counts


def _tail_p(count_le: int, count_ge: int, total: int, alternative: str) -> float:
    if alternative == "greater":
        return count_ge / total
    if alternative == "less":
        return count_le / total
    return min(1.0, 2 * min(count_le, count_ge) / total)


def wilcoxon_signed_rank(
    samples: PairedSamples,
    alternative: str = "two-sided",
    zero_policy: str = "drop",
    mode: str = "auto",
) -> TestResult:
    """Paired signed-rank test: rank |d|, sum the ranks of positive differences.

    Exact mode computes the 2^n sign-assignment null of W+ (valid only when the
    ranked |d| are untied); requesting it on tied data falls back to the normal
    approximation with an explicit `downgraded` flag, never silently.
    """
    _check_alternative(alternative)
    if zero_policy not in ("drop", "pratt"):
        raise ValueError(f"zero_policy must be 'drop' or 'pratt', got {zero_policy!r}")
    if mode not in ("exact", "approximate", "auto"):
        raise ValueError(f"mode must be exact|approximate|auto, got {mode!r}")
    d = samples.differences()
    nonzero = d[d != 0.0]
    n_eff = int(nonzero.size)
    if n_eff == 0:
        raise NoSignalError("all paired differences are zero")
    n_zero = int(d.size - n_eff)

    if zero_policy == "drop":
        ranked_abs = np.abs(nonzero)
        ranks = rankdata(ranked_abs, method="average")
        w_plus = float(ranks[nonzero > 0].sum())
        mu = n_eff * (n_eff + 1) / 4.0
        var = n_eff * (n_eff + 1) * (2 * n_eff + 1) / 24.0
    else:
        ranked_abs = np.abs(d)
        ranks = rankdata(ranked_abs, method="average")
        w_plus = float(ranks[d > 0].sum())
        n_all = int(d.size)
        mu = (n_all * (n_all + 1) - n_zero * (n_zero + 1)) / 4.0
        var = (n_all * (n_all + 1) * (2 * n_all + 1) - n_zero * (n_zero + 1) * (2 * n_zero + 1)) / 24.0
    tie_sizes = [t for t in Counter(np.abs(nonzero).tolist()).values() if t > 1]
    var -= sum(t**3 - t for t in tie_sizes) / 48.0

    untied = not tie_sizes
    exact_valid = untied and (zero_policy == "drop" or n_zero == 0)
    if mode == "auto":
        use_exact = exact_valid and n_eff <= WILCOXON_EXACT_LIMIT
        downgraded = False
    elif mode == "exact":
        use_exact = exact_valid
        downgraded = not exact_valid
    else:
        use_exact = False
        downgraded = False

    if use_exact:
        counts = _signed_rank_counts(sorted(int(round(r)) for r in ranks))
        w_int = int(round(w_plus))
        count_ge = sum(counts[w_int:])
        count_le = sum(counts[: w_int + 1])
        p = _tail_p(count_le, count_ge, 2**n_eff, alternative)
        return TestResult(w_plus, p, alternative, "wilcoxon-signed-rank", "exact", n_eff)

    sd = math.sqrt(var)
    if alternative == "greater":
        p = float(norm.sf((w_plus - 0.5 - mu) / sd))
    elif alternative == "less":
        p = float(norm.cdf((w_plus + 0.5 - mu) / sd))
    else:
        p = min(1.0, 2.0 * float(norm.sf((abs(w_plus - mu) - 0.5) / sd)))
    return TestResult(w_plus, p, alternative, "wilcoxon-signed-rank", "approximate", n_eff, downgraded)


def sign_test(samples: PairedSamples, alternative: str = "two-sided") -> TestResult:
    """Exact binomial test on the count of positive differences; zeros dropped."""
    _check_alternative(alternative)
    d = samples.differences()
    n_pos = int((d > 0).sum())
    n_neg = int((d < 0).sum())
    m = n_pos + n_neg
    if m == 0:
        raise NoSignalError("all paired differences are zero")
    count_ge = sum(math.comb(m, i) for i in range(n_pos, m + 1))
    count_le = sum(math.comb(m, i) for i in range(0, n_pos + 1))
    p = _tail_p(count_le, count_ge, 2**m, alternative)
    return TestResult(float(n_pos), p, alternative, "sign-test", "exact", m)


def _mann_whitney_two_u(x: np.ndarray, y: np.ndarray) -> int:
    """2*U_x as an exact integer (ties contribute 1 instead of 0.5)."""
    gt = int((x[:, None] > y[None, :]).sum())
    eq = int((x[:, None] == y[None, :]).sum())
    return 2 * gt + eq


def _mann_whitney_exact_distribution(pooled: np.ndarray, n_x: int) -> dict[int, int]:
    """Ways per 2U value over all C(N, n_x) assignments, by DP over sorted tie groups."""
    groups = sorted(Counter(pooled.tolist()).items())
    states: dict[tuple[int, int], int] = {(0, 0): 1}
    below = 0
    for _, g in groups:
        nxt: dict[tuple[int, int], int] = {}
        for (x_used, two_u), ways in states.items():
            for j in range(0, min(g, n_x - x_used) + 1):
                contrib = 2 * j * (below - x_used) + j * (g - j)
                key = (x_used + j, two_u + contrib)
                nxt[key] = nxt.get(key, 0) + ways * math.comb(g, j)
        states = nxt
        below += g
    return {two_u: ways for (x_used, two_u), ways in states.items() if x_used == n_x}


def mann_whitney_u(x, y, alternative: str = "two-sided", mode: str = "auto") -> TestResult:
    """Rank-sum test for two independent samples; U_x + U_y = |x|*|y|.

    Exact mode evaluates the full arrangement null (tie-aware); the approximation
    applies the tie-corrected variance and a continuity correction.
    """
    _check_alternative(alternative)
    if mode not in ("exact", "approximate", "auto"):
        raise ValueError(f"mode must be exact|approximate|auto, got {mode!r}")
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.size == 0 or ya.size == 0:
        raise InsufficientDataError("mann_whitney_u needs both samples nonempty")
    n_x, n_y = int(xa.size), int(ya.size)
    n_tot = n_x + n_y
    two_u = _mann_whitney_two_u(xa, ya)
    u_x = two_u / 2.0

    if mode == "auto":
        use_exact = math.comb(n_tot, n_x) <= MANN_WHITNEY_EXACT_LIMIT
    else:
        use_exact = mode == "exact"

    if use_exact:
        dist = _mann_whitney_exact_distribution(np.concatenate([xa, ya]), n_x)
        total = math.comb(n_tot, n_x)
        count_ge = sum(w for v, w in dist.items() if v >= two_u)
        count_le = sum(w for v, w in dist.items() if v <= two_u)
        p = _tail_p(count_le, count_ge, total, alternative)
        return TestResult(u_x, p, alternative, "mann-whitney-u", "exact", n_tot)

    mu = n_x * n_y / 2.0
    tie_sum = sum(t**3 - t for t in Counter(np.concatenate([xa, ya]).tolist()).values())
    var = n_x * n_y / 12.0 * ((n_tot + 1) - tie_sum / (n_tot * (n_tot - 1.0)))
    if var <= 0.0:
        # every pooled value identical: the test carries no information
        return TestResult(u_x, 1.0, alternative, "mann-whitney-u", "approximate", n_tot)
    sd = math.sqrt(var)
    if alternative == "greater":
        p = float(norm.sf((u_x - 0.5 - mu) / sd))
    elif alternative == "less":
        p = float(norm.cdf((u_x + 0.5 - mu) / sd))
    else:
        p = min(1.0, 2.0 * float(norm.sf((abs(u_x - mu) - 0.5) / sd)))
    return TestResult(u_x, p, alternative, "mann-whitney-u", "approximate", n_tot)


def friedman_test(scores) -> TestResult:
    """Tie-corrected Friedman test over a k-systems x n-queries score matrix."""
    k = len(scores)
    if k < 3:
        raise UnsupportedDesignError(f"friedman_test needs 3 or more systems, got {k}; use a paired test")
    lengths = {len(row) for row in scores}
    if len(lengths) != 1:
        raise DataIntegrityError(f"ragged score matrix: row lengths {sorted(lengths)}")
    n = lengths.pop()
    if n < 2:
        raise InsufficientDataError(f"friedman_test needs 2 or more queries, got {n}")
    if any(v is None for row in scores for v in row):
        raise DataIntegrityError("friedman_test does not tolerate missing cells")
    mat = np.asarray(scores, dtype=float)
    ranks = np.apply_along_axis(rankdata, 0, mat)
    rank_sums = ranks.sum(axis=1)
    squares = float((ranks**2).sum()) - n * k * (k + 1) ** 2 / 4.0
    if squares <= 1e-12:
        return TestResult(0.0, 1.0, "two-sided", "friedman", "approximate", n)
    spread = float(((rank_sums - n * (k + 1) / 2.0) ** 2).sum())
    stat = (k - 1) * spread / squares
    p = float(chi2.sf(stat, k - 1))
    return TestResult(stat, p, "two-sided", "friedman", "approximate", n)


def adjust_pvalues(pvalues, method: str = "bh", alpha: float = 0.05) -> CorrectionResult:
    """Bonferroni / Holm step-down / Benjamini-Hochberg step-up adjusted p-values."""
    if method not in CORRECTIONS:
        raise ValueError(f"method must be one of {CORRECTIONS}, got {method!r}")
    p = np.asarray(pvalues, dtype=float)
    if p.size == 0:
        raise ValueError("empty p-value vector")
    if np.any((p < 0.0) | (p > 1.0)) or np.any(np.isnan(p)):
        raise ValueError(f"p-values must lie in [0, 1]: {pvalues}")
    m = p.size
    if method == "bonferroni":
        adjusted = np.minimum(1.0, m * p)
    else:
        order = np.argsort(p, kind="stable")
        ranked = p[order]
        if method == "holm":
            factors = np.arange(m, 0, -1, dtype=float)
            stepped = np.maximum.accumulate(factors * ranked)
        else:
            # keep the (m * p) / i association of the step-up formula
            stepped = np.minimum.accumulate((m * ranked / np.arange(1, m + 1))[::-1])[::-1]
        adjusted = np.empty(m)
        adjusted[order] = np.minimum(1.0, stepped)
        # m * p / i can round one ulp below p at the top rank; adjusted >= raw is an invariant
        adjusted = np.maximum(adjusted, p)
    rejected = adjusted <= alpha
    return CorrectionResult(
        raw=tuple(float(v) for v in p),
        adjusted=tuple(float(v) for v in adjusted),
        method=method,
        alpha=alpha,
        rejected=tuple(bool(b) for b in rejected),
    )


def sample_skewness(values) -> float:
    """Adjusted Fisher-Pearson standardized moment coefficient G1."""
    x = np.asarray(values, dtype=float)
    n = int(x.size)
    if n < 3:
        raise InsufficientDataError(f"skewness needs at least 3 observations, got {n}")
    centered = x - x.mean()
    m2 = float((centered**2).mean())
    if m2 == 0.0:
        raise DegenerateDistributionError("constant sample has no skewness")
    m3 = float((centered**3).mean())
    return math.sqrt(n * (n - 1)) / (n - 2) * m3 / m2**1.5
