"""Ordinal scales, ratings matrices, and weighting schemes shared by every metric."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataIntegrityError, InsufficientDataError, InvalidScaleError, UnknownRaterError

WEIGHT_SCHEMES = ("identity", "linear", "quadratic")


@dataclass(frozen=True)
class OrdinalScale:
    """Ordered category set; levels are the integers 1..K, labels are display-only."""

    labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.labels) < 2:
            raise InvalidScaleError(f"scale needs at least 2 categories, got {len(self.labels)}")
        if len(set(self.labels)) != len(self.labels):
            raise InvalidScaleError(f"scale labels must be unique: {self.labels}")

    @property
    def k(self) -> int:
        return len(self.labels)

    @classmethod
    def from_k(cls, k: int) -> "OrdinalScale":
        if k < 2:
            raise InvalidScaleError(f"scale needs at least 2 categories, got {k}")
        return cls(tuple(str(level) for level in range(1, k + 1)))


def weight_matrix(scheme: str, k: int) -> np.ndarray:
    """K x K agreement weights in [0, 1]; diagonal 1, symmetric.

    identity: 1 if k == l else 0
    linear:   1 - |k - l| / (K - 1)
    quadratic: 1 - (k - l)^2 / (K - 1)^2
    """
    if k < 2:
        raise InvalidScaleError(f"weight matrix needs K >= 2, got {k}")
    if scheme not in WEIGHT_SCHEMES:
        raise InvalidScaleError(f"unknown weight scheme {scheme!r}, expected one of {WEIGHT_SCHEMES}")
    levels = np.arange(k, dtype=float)
    dist = np.abs(levels[:, None] - levels[None, :])
    if scheme == "identity":
        return (dist == 0).astype(float)
    if scheme == "linear":
        return 1.0 - dist / (k - 1)
    return 1.0 - dist**2 / (k - 1) ** 2


@dataclass(frozen=True)
class RatingsMatrix:
    """Items x raters grid of optional levels in 1..K.

    Missing cells are None, never sentinel levels. Construction checks shape only;
    invariant violations (out-of-range cells, no co-rated items) are reported by
    validate_matrix so diagnostics can list them instead of exploding.
    """

    scale: OrdinalScale
    raters: tuple[str, ...]
    items: tuple[str, ...]
    rows: tuple[tuple[int | None, ...], ...]

    def __post_init__(self):
        if len(set(self.raters)) != len(self.raters):
            raise DataIntegrityError(f"duplicate rater ids: {self.raters}")
        if len(set(self.items)) != len(self.items):
            raise DataIntegrityError("duplicate item ids")
        if len(self.rows) != len(self.items):
            raise DataIntegrityError(f"{len(self.rows)} rows for {len(self.items)} items")
        for item, row in zip(self.items, self.rows):
            if len(row) != len(self.raters):
                raise DataIntegrityError(f"item {item!r}: {len(row)} cells for {len(self.raters)} raters")

    @property
    def n(self) -> int:
        return len(self.items)

    def item_levels(self, index: int) -> list[int]:
        """Present levels on one item, in rater order."""
        return [level for level in self.rows[index] if level is not None]

    def co_rated_indices(self) -> list[int]:
        """Indices of items carrying at least 2 ratings; only these inform agreement."""
        return [i for i in range(self.n) if len(self.item_levels(i)) >= 2]

    def category_counts(self, index: int) -> np.ndarray:
        """r_ik: how many raters put item `index` into each category."""
        counts = np.zeros(self.scale.k, dtype=float)
        for level in self.item_levels(index):
            counts[level - 1] += 1
        return counts


def matrix_from_rows(scale, raters, rows, items=None) -> RatingsMatrix:
    """Convenience builder from a list of per-item level tuples."""
    items = tuple(items) if items is not None else tuple(str(i + 1) for i in range(len(rows)))
    return RatingsMatrix(
        scale=scale,
        raters=tuple(raters),
        items=items,
        rows=tuple(tuple(row) for row in rows),
    )


@dataclass(frozen=True)
class MatrixDiagnostics:
    n_items: int
    n_raters: int
    n_missing: int
    n_co_rated: int
    category_totals: tuple[int, ...]
    violations: tuple[str, ...] = field(default=())

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_matrix(m: RatingsMatrix) -> MatrixDiagnostics:
    """Report every invariant violation without mutating the input."""
    violations = []
    n_missing = 0
    totals = [0] * m.scale.k
    for i, row in enumerate(m.rows):
        for j, level in enumerate(row):
            if level is None:
                n_missing += 1
            elif not 1 <= level <= m.scale.k:
                violations.append(
                    f"item {m.items[i]!r}, rater {m.raters[j]!r}: level {level} outside 1..{m.scale.k}"
                )
            else:
                totals[level - 1] += 1
    co_rated = m.co_rated_indices()
    if not co_rated:
        violations.append("no co-rated items: every item has fewer than 2 ratings")
    return MatrixDiagnostics(
        n_items=m.n,
        n_raters=len(m.raters),
        n_missing=n_missing,
        n_co_rated=len(co_rated),
        category_totals=tuple(totals),
        violations=tuple(violations),
    )


def marginal_proportions(m: RatingsMatrix) -> np.ndarray:
    """Item-averaged category proportions pi_k = mean over co-rated items of r_ik / r_i."""
    co_rated = m.co_rated_indices()
    if not co_rated:
        raise InsufficientDataError("no item has 2 or more ratings")
    pi = np.zeros(m.scale.k)
    for i in co_rated:
        counts = m.category_counts(i)
        pi += counts / counts.sum()
    return pi / len(co_rated)


def paired_columns(m: RatingsMatrix, rater_a: str, rater_b: str) -> tuple[list[int], list[int]]:
    """Aligned level vectors for two raters over the items both rated, item order preserved."""
    for rater in (rater_a, rater_b):
        if rater not in m.raters:
            raise UnknownRaterError(f"rater {rater!r} not in matrix (raters: {list(m.raters)})")
    col_a = m.raters.index(rater_a)
    col_b = m.raters.index(rater_b)
    xs, ys = [], []
    for row in m.rows:
        if row[col_a] is not None and row[col_b] is not None:
            xs.append(row[col_a])
            ys.append(row[col_b])
    if not xs:
        raise InsufficientDataError(f"raters {rater_a!r} and {rater_b!r} share no rated items")
    return xs, ys
