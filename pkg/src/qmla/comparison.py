"""Pairwise Bayes factors, branch points, and sparse comparison graphs.

All arithmetic stays in the log domain: a ratio like e^90 overflows naive
floats, while the log Bayes factor is just a difference of total
log-likelihoods.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .smc import ExperimentRecord, ModelEvaluator, TrainingResult, total_log_likelihood
from .terms import Model

STRATEGIES = ("union", "burn-in", "validation")
DEFAULT_STRATEGY = "burn-in"


@dataclass(frozen=True)
class ComparisonRecord:
    id_i: int
    id_j: int
    strategy: str
    tll_i: float
    tll_j: float

    @property
    def log_bf(self) -> float:
        """ln B_ij: positive means model i is favoured."""
        return self.tll_i - self.tll_j

    def favours(self) -> int:
        return self.id_i if self.log_bf > 0 else self.id_j

    def swapped(self) -> "ComparisonRecord":
        return ComparisonRecord(self.id_j, self.id_i, self.strategy, self.tll_j, self.tll_i)


def comparison_experiments(
    strategy: str,
    result_i: TrainingResult,
    result_j: TrainingResult,
    validation: list[ExperimentRecord] | None = None,
) -> list[ExperimentRecord]:
    """The shared experiment set both models are evaluated on.

    union: both models' full training experiments; burn-in: only the latter
    half of each training run, discarding the noisy early segment;
    validation: a fixed model-independent set.
    """
    if strategy == "union":
        exps = result_i.experiments + result_j.experiments
    elif strategy == "burn-in":
        half_i = result_i.experiments[len(result_i.experiments) // 2 :]
        half_j = result_j.experiments[len(result_j.experiments) // 2 :]
        exps = half_i + half_j
    elif strategy == "validation":
        if validation is None:
            raise ValueError("validation strategy needs a validation set")
        exps = list(validation)
    else:
        raise ValueError(f"unknown comparison strategy {strategy!r}")
    if not exps:
        raise ValueError("empty experiment set for comparison")
    return exps


def bayes_factor(
    id_i: int,
    id_j: int,
    trained_i: tuple[Model, TrainingResult, ModelEvaluator],
    trained_j: tuple[Model, TrainingResult, ModelEvaluator],
    strategy: str,
    n_particles: int,
    rng_for_model,
    validation: list[ExperimentRecord] | None = None,
) -> ComparisonRecord:
    """Compare two trained models on one shared experiment set.

    `rng_for_model(model_id)` must return a fresh seeded generator per model,
    independent of argument order, so swapping i and j exactly negates the
    log Bayes factor.
    """
    if id_i > id_j:
        # Canonical pair order keeps the shared experiment list identical for
        # both call orders, so swapping exactly negates the log Bayes factor.
        return bayes_factor(
            id_j, id_i, trained_j, trained_i, strategy, n_particles,
            rng_for_model, validation,
        ).swapped()
    model_i, result_i, eval_i = trained_i
    model_j, result_j, eval_j = trained_j
    experiments = comparison_experiments(strategy, result_i, result_j, validation)
    tll_i = total_log_likelihood(
        model_i, result_i, experiments, eval_i, n_particles, rng_for_model(id_i)
    )
    tll_j = total_log_likelihood(
        model_j, result_j, experiments, eval_j, n_particles, rng_for_model(id_j)
    )
    return ComparisonRecord(id_i, id_j, strategy, tll_i, tll_j)


def bf_points(records: list[ComparisonRecord], ids: list[int]) -> dict[int, int]:
    """One point per comparison won."""
    points = {i: 0 for i in ids}
    for rec in records:
        points[rec.favours()] += 1
    return points


def sum_log_bf(records: list[ComparisonRecord], ids: list[int]) -> dict[int, float]:
    totals = {i: 0.0 for i in ids}
    for rec in records:
        totals[rec.id_i] += rec.log_bf
        totals[rec.id_j] -= rec.log_bf
    return totals


def branch_champion(records: list[ComparisonRecord], ids: list[int]) -> int:
    """Max-points model; ties broken by total log Bayes factor, then by the
    lower model id."""
    if len(ids) == 1:
        return ids[0]
    points = bf_points(records, ids)
    totals = sum_log_bf(records, ids)
    return min(ids, key=lambda i: (-points[i], -totals[i], i))


@dataclass(frozen=True)
class ComparisonGraph:
    n_nodes: int
    edges: tuple[tuple[int, int], ...]

    def degree(self, node: int) -> int:
        return sum(1 for a, b in self.edges if node in (a, b))

    def is_connected(self) -> bool:
        if self.n_nodes <= 1:
            return True
        adjacency = {i: set() for i in range(self.n_nodes)}
        for a, b in self.edges:
            adjacency[a].add(b)
            adjacency[b].add(a)
        seen = {0}
        frontier = [0]
        while frontier:
            node = frontier.pop()
            for nxt in adjacency[node]:
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        return len(seen) == self.n_nodes


def build_comparison_graph(n_nodes: int) -> ComparisonGraph:
    """Near-regular sparse comparison schedule.

    Complete graph up to 7 nodes; beyond that a circulant with offsets
    {1, 2, 3}, giving every node degree 6 while staying connected.
    """
    if n_nodes < 2:
        raise ValueError("graph needs at least 2 nodes")
    edges = set()
    if n_nodes <= 7:
        for a in range(n_nodes):
            for b in range(a + 1, n_nodes):
                edges.add((a, b))
    else:
        for offset in (1, 2, 3):
            for a in range(n_nodes):
                b = (a + offset) % n_nodes
                edges.add((min(a, b), max(a, b)))
    return ComparisonGraph(n_nodes, tuple(sorted(edges)))
