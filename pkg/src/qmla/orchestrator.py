"""Top-level run orchestration: build the target system, execute each
exploration strategy, consolidate champions, and score the outcome.

Every run emits an append-only newline-delimited JSON ledger of typed
records (models, trainings, comparisons, generations, champions), which the
reporting layer aggregates into CSV summaries.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import comparison as cmp
from .exploration import SearchContext, StrategyConfig, StrategyOutcome, run_strategy
from .genome import f1_metrics
from .smc import ExperimentRecord, TargetSystem, build_probes, default_prior
from .terms import LatticeSpec, Model, TermLabel, lattice_to_model, single_term
from .utils import rng_for

VALIDATION_SIZE = 100
VALIDATION_T_RANGE = (1.0, 100.0)
N_PROBES = 20


@dataclass(frozen=True)
class TrueModelSpec:
    """The hidden system: either a family on a lattice, or explicit terms.

    When `parameters` is omitted, the true parameters are drawn from the
    default training prior with the run's seeded generator, so instances of a
    study differ only by seed."""

    parameters: tuple[float, ...] | None = None
    family: str | None = None
    lattice: LatticeSpec | None = None
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        by_family = self.family is not None and self.lattice is not None
        by_labels = bool(self.labels)
        if by_family == by_labels:
            raise ValueError("specify exactly one of family+lattice or labels")

    def build(self, rng: np.random.Generator | None = None) -> Model:
        if self.labels:
            terms = tuple(single_term(TermLabel.from_string(s)) for s in self.labels)
            n_qubits = max(t.n_qubits for t in terms)
            model = Model(terms, n_qubits, name="truth")
        else:
            model = lattice_to_model(self.family, self.lattice)
        if self.parameters is not None:
            return model.with_parameters(self.parameters)
        if rng is None:
            raise ValueError("random true parameters need a generator")
        return model.with_parameters(default_prior(model.k).sample(1, rng)[0])


@dataclass(frozen=True)
class RunConfig:
    seed: int
    truth: TrueModelSpec
    strategies: tuple[StrategyConfig, ...]
    workers: int = 1
    n_probes: int = N_PROBES
    validation_size: int = VALIDATION_SIZE

    def __post_init__(self):
        if not self.strategies:
            raise ValueError("run needs at least one strategy")


class RunLedger:
    """Append-only typed event log, optionally mirrored to an ndjson file."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self.records: list[dict] = []
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.write_text("")

    @staticmethod
    def _jsonify(value):
        if isinstance(value, (np.integer,)):
            return int(value)
        if isinstance(value, (np.floating,)):
            return float(value)
        if isinstance(value, np.ndarray):
            return value.tolist()
        raise TypeError(f"not JSON serialisable: {type(value)}")

    def append(self, record_type: str, **fields) -> dict:
        record = {"type": record_type, **fields}
        self.records.append(record)
        if self.path is not None:
            with self.path.open("a") as fh:
                fh.write(json.dumps(record, default=self._jsonify) + "\n")
        return record

    def of_type(self, record_type: str) -> list[dict]:
        return [r for r in self.records if r["type"] == record_type]

    @classmethod
    def load(cls, path: str | Path) -> "RunLedger":
        ledger = cls()
        with Path(path).open() as fh:
            ledger.records = [json.loads(line) for line in fh if line.strip()]
        return ledger


@dataclass
class RunResult:
    champion_id: int
    champion_name: str
    champion_terms: list[str]
    precision: float
    sensitivity: float
    f1: float
    exact: bool
    family: str | None
    family_match: bool
    term_hits: dict[str, bool]
    outcomes: list[StrategyOutcome]
    elapsed: float
    ledger: RunLedger = field(repr=False, default=None)
    context: SearchContext = field(repr=False, default=None)


def simulation_qubits(truth: Model, strategies) -> int:
    """Shared simulation register size: every candidate and the target are
    padded with identity factors up to the largest model, so all share one
    probe set."""
    sizes = [truth.n_qubits]
    for strat in strategies:
        if strat.lattices and strat.family:
            sizes.extend(
                lattice_to_model(strat.family, lat).n_qubits for lat in strat.lattices
            )
        for family, lattices in strat.forest:
            sizes.extend(lattice_to_model(family, lat).n_qubits for lat in lattices)
        if strat.gene_map is not None:
            sizes.append(strat.gene_map.n_qubits)
    return max(sizes)


def build_validation_set(
    target: TargetSystem, size: int, rng: np.random.Generator
) -> list[ExperimentRecord]:
    """Model-independent held-out experiments: probes cycle round-robin,
    evolution times are log-uniform over a fixed window, data come from the
    target."""
    lo, hi = VALIDATION_T_RANGE
    times = np.exp(rng.uniform(np.log(lo), np.log(hi), size=size))
    return [
        ExperimentRecord(i % target.n_probes, float(t), target.measure(i % target.n_probes, float(t), rng))
        for i, t in enumerate(times)
    ]


def consolidate_champions(
    champions: list[int], ctx: SearchContext, n_particles: int
) -> int:
    """Final cross-strategy branch: all-pairs Bayes-factor points on the
    shared validation set."""
    champions = list(dict.fromkeys(champions))
    if len(champions) == 1:
        return champions[0]
    pairs = [
        (a, b) for idx, a in enumerate(champions) for b in champions[idx + 1 :]
    ]
    records = ctx.compare_pairs(pairs, "validation", n_particles)
    winner = cmp.branch_champion(records, champions)
    ctx._log("global_champion", champion_id=winner,
             candidates=champions)
    return winner


def evaluate_champion(ctx: SearchContext, champion_id: int) -> dict:
    model = ctx.models[champion_id]
    truth = ctx.truth_labels
    precision, sensitivity, f1 = f1_metrics(model.label_set, truth)
    term_hits = {lbl.to_string(): lbl in model.label_set for lbl in sorted(truth)}
    return {
        "precision": precision,
        "sensitivity": sensitivity,
        "f1": f1,
        "exact": model.label_set == frozenset(truth),
        "term_hits": term_hits,
    }


def run_qmla(config: RunConfig, ledger_path: str | Path | None = None) -> RunResult:
    """Execute one full model-learning run and score its champion."""
    start = time.perf_counter()
    truth = config.truth.build(rng_for(config.seed, "truth"))
    sim_qubits = simulation_qubits(truth, config.strategies)
    probes = build_probes(sim_qubits, rng_for(config.seed, "probes"),
                          n_probes=config.n_probes)
    target = TargetSystem(truth, probes, sim_qubits)
    validation = build_validation_set(
        target, config.validation_size, rng_for(config.seed, "validation")
    )
    ledger = RunLedger(ledger_path)
    ledger.append(
        "run",
        seed=config.seed,
        truth=sorted(lbl.to_string() for lbl in truth.label_set),
        parameters=list(truth.parameters),
        sim_qubits=sim_qubits,
        strategies=[s.kind for s in config.strategies],
    )
    ctx = SearchContext(
        config.seed, target, probes, sim_qubits,
        ledger=ledger, truth_labels=truth.label_set,
        validation=validation, workers=config.workers,
    )
    outcomes = []
    champions = []
    for strat in config.strategies:
        outcome = run_strategy(strat, ctx)
        outcomes.append(outcome)
        champions.append(outcome.champion_id)
        ledger.append("strategy_champion", strategy=strat.kind,
                      name=strat.name, champion_id=outcome.champion_id)
    eval_particles = max(s.resources.eval_particles for s in config.strategies)
    champion_id = consolidate_champions(champions, ctx, eval_particles)
    scores = evaluate_champion(ctx, champion_id)
    champion = ctx.models[champion_id]
    family_match = (
        champion.family is not None and champion.family == truth.family
    )
    elapsed = time.perf_counter() - start
    ledger.append(
        "result",
        champion_id=champion_id,
        champion=champion.name,
        f1=scores["f1"],
        exact=scores["exact"],
        family=champion.family,
        family_match=family_match,
        elapsed=elapsed,
    )
    return RunResult(
        champion_id=champion_id,
        champion_name=champion.name,
        champion_terms=sorted(lbl.to_string() for lbl in champion.label_set),
        precision=scores["precision"],
        sensitivity=scores["sensitivity"],
        f1=scores["f1"],
        exact=scores["exact"],
        family=champion.family,
        family_match=family_match,
        term_hits=scores["term_hits"],
        outcomes=outcomes,
        elapsed=elapsed,
        ledger=ledger,
        context=ctx,
    )
