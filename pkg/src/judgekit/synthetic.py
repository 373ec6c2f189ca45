"""Seeded synthetic judged-run generator so demos and acceptance tests need no proprietary data."""

from __future__ import annotations

import random
from typing import Mapping

from .pipeline import RunRecord

METRICS = (
    "Relevance",
    "Completeness",
    "Extrinsic Hallucinations",
    "Readability",
    "Correctness",
    "Inaccurate Hallucinations",
)

# metric -> weights over levels 1..K (skew shapes loosely echo judged-data practice:
# hallucination-type metrics pile up at the clean end).
_BASE_WEIGHTS = {
    "Relevance": (0.05, 0.15, 0.45, 0.35),
    "Completeness": (0.10, 0.45, 0.35, 0.10),
    "Extrinsic Hallucinations": (0.75, 0.15, 0.07, 0.03),
    "Readability": (0.08, 0.22, 0.45, 0.25),
    "Correctness": (0.15, 0.30, 0.30, 0.25),
    "Inaccurate Hallucinations": (0.85, 0.10, 0.04, 0.01),
}

# the two planted system effects: direction is the Wilcoxon alternative (on d = B - A)
# that a comparison run should reject.
PLANTED_EFFECTS: Mapping[str, str] = {"Completeness": "greater", "Readability": "less"}

_EFFECT_PROB = {"Completeness": 0.70, "Readability": 0.35}
_RUN_NOISE = 0.20


def _clip(level: int, k: int) -> int:
    return max(1, min(k, level))


def generate_runs(
    seed: int,
    n_queries: int = 117,
    n_runs: int = 10,
    systems: tuple[str, str] = ("A", "B"),
    k: int = 4,
) -> list[RunRecord]:
    """Deterministic run records for two systems over the six standard metrics.

    Non-planted metrics share one latent level per (query, metric) across both
    systems, so their consolidated differences are null by construction; planted
    metrics shift system B's latent level in the planted direction on a seeded
    subset of queries.
    """
    rng = random.Random(seed)
    width = len(str(n_queries))
    records = []
    for q in range(1, n_queries + 1):
        query_id = f"q{q:0{width}d}"
        for metric in METRICS:
            weights = _BASE_WEIGHTS.get(metric, (1.0,) * k)[:k]
            base = rng.choices(range(1, k + 1), weights=weights)[0]
            latent = {systems[0]: base, systems[1]: base}
            direction = PLANTED_EFFECTS.get(metric)
            if direction is not None and rng.random() < _EFFECT_PROB[metric]:
                shift = 1 if direction == "greater" else -1
                latent[systems[1]] = _clip(base + shift, k)
            for system in systems:
                for run in range(1, n_runs + 1):
                    rating = latent[system]
                    if rng.random() < _RUN_NOISE:
                        rating = _clip(rating + rng.choice((-1, 1)), k)
                    records.append(
                        RunRecord(
                            query_id=query_id,
                            system_id=system,
                            metric=metric,
                            run=run,
                            rating=rating,
                        )
                    )
    return records
