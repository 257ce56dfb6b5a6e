"""Candidate objective functions mapping model performance to fitness.

Every objective returns g >= 0, with stronger models scoring higher;
selection probabilities are fitnesses normalised over the surviving pool.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .comparison import ComparisonRecord

FITNESS_CAP = 1e9
LOG10_BF_CLAMP = 300.0
INITIAL_RATING = 1000.0

OBJECTIVES = (
    "elo",
    "inverse-ll",
    "aicc",
    "bic",
    "bf-points",
    "rank",
    "residual",
)


def g_inverse_ll(tll: float) -> float:
    """-1/TLL; generous to poor models but monotone in TLL."""
    if tll > 0:
        raise ValueError("total log-likelihood must be <= 0")
    if tll == 0:
        return FITNESS_CAP
    return -1.0 / tll


def aicc(tll: float, k: int, n: int) -> float:
    """Sample-size-corrected Akaike information criterion."""
    if n <= k + 1:
        raise ValueError(f"AICc undefined for n={n}, k={k} (need n > k+1)")
    aic = 2 * k - 2 * tll
    return aic + 2 * k * (k + 1) / (n - k - 1)


def g_aicc(tll: float, k: int, n: int) -> float:
    value = aicc(tll, k, n)
    if value == 0:
        return FITNESS_CAP
    return (1.0 / value) ** 2


def akaike_weight(aicc_i: float, aicc_min: float) -> float:
    return math.exp((aicc_min - aicc_i) / 2.0)


def bic(tll: float, k: int, n: int) -> float:
    if n < 1:
        raise ValueError("BIC needs at least one sample")
    return k * math.log(n) - 2 * tll


def g_bic(tll: float, k: int, n: int) -> float:
    value = bic(tll, k, n)
    if value == 0:
        return FITNESS_CAP
    return (1.0 / value) ** 2


def bayes_weight(tll: float, k: int, n: int) -> float:
    return math.exp(-bic(tll, k, n) / 2.0)


def g_rank(
    points: dict[int, float],
    keep: int,
    tiebreak: dict[int, float] | None = None,
) -> dict[int, float]:
    """Truncate to the `keep` strongest models and assign rank fitnesses
    (best rank 1) that sum to 1. Ties resolve by the tiebreak value, then id."""
    if keep < 1 or keep > len(points):
        raise ValueError("keep must be within the pool size")
    tiebreak = tiebreak or {}
    order = sorted(points, key=lambda i: (-points[i], -tiebreak.get(i, 0.0), i))
    survivors = order[:keep]
    total = keep * (keep + 1) // 2
    return {
        model_id: (keep - rank) / total for rank, model_id in enumerate(survivors)
    }


def g_residual(mean_residuals: list[float]) -> float:
    """|1 - mean residual|^2: rewards clouds that reproduce system dynamics."""
    if not mean_residuals:
        raise ValueError("no residuals supplied")
    avg = sum(mean_residuals) / len(mean_residuals)
    return abs(1.0 - avg) ** 2


# ---------------------------------------------------------------------------
# Bayes-factor enhanced Elo ratings


def elo_expected_score(r_i: float, r_j: float) -> float:
    return 1.0 / (1.0 + 10 ** ((r_j - r_i) / 400.0))


def elo_update(r_i: float, r_j: float, log10_bf: float) -> tuple[float, float]:
    """Transfer rating from loser to winner, weighted by the evidence.

    The transfer weight is |log10 B_ij| (clamped), scaled by how surprising
    the outcome was given current ratings. Zero-sum by construction; a tie
    (B_ij = 1) is a no-op.
    """
    eta = min(abs(log10_bf), LOG10_BF_CLAMP)
    if eta == 0.0:
        return r_i, r_j
    s_i = 1.0 if log10_bf > 0 else 0.0
    delta = eta * (s_i - elo_expected_score(r_i, r_j))
    return r_i + delta, r_j - delta


@dataclass
class EloState:
    """Per-generation ratings. Every model, elites included, starts fresh at
    the same initial rating each generation."""

    ratings: dict[int, float]
    initial_rating: float = INITIAL_RATING
    update_log: list[tuple[int, int, float]] = field(default_factory=list)

    @classmethod
    def fresh(cls, ids, initial_rating: float = INITIAL_RATING) -> "EloState":
        return cls({i: initial_rating for i in ids}, initial_rating)

    def apply(self, record: ComparisonRecord) -> None:
        log10_bf = record.log_bf / math.log(10.0)
        r_i, r_j = self.ratings[record.id_i], self.ratings[record.id_j]
        self.ratings[record.id_i], self.ratings[record.id_j] = elo_update(
            r_i, r_j, log10_bf
        )
        self.update_log.append((record.id_i, record.id_j, log10_bf))

    def fitnesses(self) -> dict[int, float]:
        """Ratings grounded by the generation minimum; the weakest model gets
        exactly 0. Applied before truncation."""
        r_min = min(self.ratings.values())
        return {i: r - r_min for i, r in self.ratings.items()}


@dataclass
class FitnessRecord:
    model_id: int
    fitness: float
    selection_probability: float
    raw: dict = field(default_factory=dict)


def selection_probabilities(fitnesses: dict[int, float]) -> dict[int, float]:
    total = sum(fitnesses.values())
    if total <= 0:
        # Degenerate pool: fall back to uniform over the survivors.
        return {i: 1.0 / len(fitnesses) for i in fitnesses}
    return {i: g / total for i, g in fitnesses.items()}
