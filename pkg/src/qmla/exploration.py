"""Exploration strategies: fixed candidate sets, per-family forests, and the
genetic model search.

A strategy proposes branches of candidate models, has them trained and
compared through the shared search context, and nominates a tree champion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import comparison as cmp
from . import objectives as obj
from . import smc
from .genome import Chromosome, GeneMap, decode, f1_metrics
from .terms import LatticeSpec, Model, lattice_to_model
from .utils import parallel_map, rng_for


@dataclass(frozen=True)
class Resources:
    n_experiments: int = 100
    n_particles: int = 500
    n_eval_particles: int | None = None  # default: half the training particles
    n_restarts: int = 1
    prior: str = "normal"

    def __post_init__(self):
        if self.n_restarts < 1:
            raise ValueError("n_restarts must be >= 1")
        if self.prior not in ("normal", "uniform"):
            raise ValueError(f"unknown prior {self.prior!r}")

    @property
    def eval_particles(self) -> int:
        if self.n_eval_particles is not None:
            return self.n_eval_particles
        return max(2, self.n_particles // 2)

    def build_prior(self, dim: int) -> smc.Prior:
        if self.prior == "uniform":
            return smc.Prior(
                tuple(smc.PriorSpec("uniform", 0.0, 1.0) for _ in range(dim))
            )
        return smc.default_prior(dim)


@dataclass(frozen=True)
class GAConfig:
    n_models: int = 12
    n_generations: int = 16
    mutation_prob: float = 0.25
    truncation_fraction: float = 1 / 3
    elite_count: int = 2
    stagnation_window: int = 5
    objective: str = "elo"
    initial_gene_prob: float | None = None

    def __post_init__(self):
        if self.n_models % 2 != 0:
            raise ValueError("n_models must be even")
        if not 0 < self.truncation_fraction <= 1:
            raise ValueError("truncation_fraction must be in (0, 1]")
        if not 0 <= self.mutation_prob <= 1:
            raise ValueError("mutation_prob must be in [0, 1]")
        if self.initial_gene_prob is not None and not 0 < self.initial_gene_prob < 1:
            raise ValueError("initial_gene_prob must be in (0, 1)")
        if self.objective not in obj.OBJECTIVES:
            raise ValueError(f"unknown objective {self.objective!r}")


@dataclass(frozen=True)
class StrategyConfig:
    kind: str  # fixed-set | family-forest | genetic
    name: str = ""
    family: str | None = None
    lattices: tuple[LatticeSpec, ...] = ()
    forest: tuple[tuple[str, tuple[LatticeSpec, ...]], ...] = ()
    gene_map: GeneMap | None = None
    resources: Resources = Resources()
    ga: GAConfig = GAConfig()
    comparison_strategy: str = cmp.DEFAULT_STRATEGY

    def __post_init__(self):
        if self.kind not in ("fixed-set", "family-forest", "genetic"):
            raise ValueError(f"unknown strategy kind {self.kind!r}")


@dataclass
class BranchState:
    branch_index: int
    model_ids: list[int]
    records: list[cmp.ComparisonRecord]
    fitnesses: dict[int, float]
    champion_id: int


@dataclass
class StrategyOutcome:
    champion_id: int
    branches: list[BranchState]
    family: str | None = None


class SearchContext:
    """Shared machinery for one run: model registry, training cache,
    comparison cache, and the ledger hook.

    Training and comparisons are seeded by model name, so duplicate models
    (e.g. GA chromosomes revisited across generations) reuse cached results.
    """

    def __init__(self, seed, target, probes, sim_qubits, ledger=None,
                 truth_labels=None, validation=None, workers: int = 1):
        self.seed = seed
        self.target = target
        self.probes = probes
        self.sim_qubits = sim_qubits
        self.ledger = ledger
        self.truth_labels = truth_labels
        self.validation = validation
        self.workers = workers
        self.models: dict[int, Model] = {}
        self._ids_by_name: dict[str, int] = {}
        self.trained: dict[int, smc.TrainingResult] = {}
        self.evaluators: dict[int, smc.ModelEvaluator] = {}
        self.eliminated: set[int] = set()
        self._comparisons: dict[tuple, cmp.ComparisonRecord] = {}
        self._validation_tlls: dict[tuple[int, int], float] = {}

    def _log(self, record_type: str, **fields) -> None:
        if self.ledger is not None:
            self.ledger.append(record_type, **fields)

    def model_f1(self, model_id: int) -> float | None:
        if self.truth_labels is None:
            return None
        _, _, f1 = f1_metrics(self.models[model_id].label_set, self.truth_labels)
        return f1

    def register(self, model: Model) -> int:
        if model.name in self._ids_by_name:
            return self._ids_by_name[model.name]
        model_id = len(self.models)
        self.models[model_id] = model
        self._ids_by_name[model.name] = model_id
        self._log(
            "model",
            model_id=model_id,
            name=model.name,
            terms=[t.name for t in model.terms],
            n_qubits=model.n_qubits,
            f1=self.model_f1(model_id),
        )
        return model_id

    def evaluator(self, model_id: int) -> smc.ModelEvaluator:
        if model_id not in self.evaluators:
            self.evaluators[model_id] = smc.ModelEvaluator(
                self.models[model_id], self.probes, self.sim_qubits
            )
        return self.evaluators[model_id]

    def train_many(self, model_ids: list[int], resources: Resources) -> None:
        pending = [m for m in dict.fromkeys(model_ids) if m not in self.trained
                   and m not in self.eliminated]

        def run_one(model_id: int) -> tuple[int, smc.TrainingResult | None]:
            # Train up to n_restarts independent filters and keep the one
            # whose posterior explains the held-out validation set best;
            # a single SMC run can settle confidently on a wrong mode.
            model = self.models[model_id]
            prior = resources.build_prior(model.k)
            best: smc.TrainingResult | None = None
            best_score = -np.inf
            for restart in range(resources.n_restarts):
                key = ((self.seed, "train", model.name) if restart == 0
                       else (self.seed, "train", model.name, restart))
                try:
                    result = smc.train(
                        model, self.target, resources.n_experiments,
                        resources.n_particles, prior, rng_for(*key),
                        evaluator=self.evaluator(model_id),
                    )
                except smc.DegenerateUpdateError:
                    continue
                if resources.n_restarts == 1:
                    return model_id, result
                score = smc.total_log_likelihood(
                    model, result, self.validation, self.evaluator(model_id),
                    resources.eval_particles,
                    rng_for(self.seed, "train-select", model.name, restart),
                )
                if score > best_score:
                    best, best_score = result, score
            return model_id, best

        for model_id, result in parallel_map(run_one, pending, self.workers):
            if result is None:
                # Unrecoverable training failure: mark eliminated, fitness 0.
                self.eliminated.add(model_id)
                self._log("training_failed", model_id=model_id)
                continue
            self.trained[model_id] = result
            self._log(
                "training",
                model_id=model_id,
                posterior_mean=list(result.posterior_mean),
                posterior_std=list(np.sqrt(np.diag(result.posterior_cov)))
                if result.posterior_cov.size else [],
                resample_count=result.resample_count,
                n_experiments=result.n_experiments,
            )

    def _trained_triple(self, model_id: int):
        return self.models[model_id], self.trained[model_id], self.evaluator(model_id)

    def compare(self, id_i: int, id_j: int, strategy: str,
                n_particles: int) -> cmp.ComparisonRecord:
        records = self.compare_pairs([(id_i, id_j)], strategy, n_particles)
        return records[0]

    def compare_pairs(self, pairs, strategy: str, n_particles: int):
        """Pairwise comparisons, cached by canonical pair order. Fresh pairs
        run independently (optionally in parallel); results merge into the
        cache in deterministic order."""
        keys = [(min(p), max(p), strategy) for p in pairs]
        fresh = [k for k in dict.fromkeys(keys) if k not in self._comparisons]

        def compute(key: tuple) -> cmp.ComparisonRecord:
            id_a, id_b, _ = key
            if strategy == "validation":
                # The validation set is pair-independent, so each model's
                # total log likelihood is evaluated once and shared by all
                # its comparisons; every log Bayes factor is then exactly
                # tll_i - tll_j and the pairwise outcomes are transitive.
                if not self.validation:
                    raise ValueError(
                        "validation comparisons need a validation set"
                    )
                return cmp.ComparisonRecord(
                    id_a, id_b, strategy,
                    self.validation_tll(id_a, n_particles),
                    self.validation_tll(id_b, n_particles),
                )
            names = sorted(self.models[m].name for m in (id_a, id_b))

            def rng_for_model(model_id: int):
                return rng_for(self.seed, "tll", strategy, *names,
                               self.models[model_id].name)

            return cmp.bayes_factor(
                id_a, id_b, self._trained_triple(id_a), self._trained_triple(id_b),
                strategy, n_particles, rng_for_model, validation=self.validation,
            )

        for key, record in zip(fresh, parallel_map(compute, fresh, self.workers)):
            self._comparisons[key] = record
            self._log(
                "comparison",
                id_i=record.id_i, id_j=record.id_j, strategy=record.strategy,
                tll_i=record.tll_i, tll_j=record.tll_j, log_bf=record.log_bf,
            )
        out = []
        for (id_i, _), key in zip(pairs, keys):
            record = self._comparisons[key]
            out.append(record if record.id_i == id_i else record.swapped())
        return out

    def validation_tll(self, model_id: int, n_particles: int) -> float:
        key = (model_id, n_particles)
        if key not in self._validation_tlls:
            model, result, evaluator = self._trained_triple(model_id)
            rng = rng_for(self.seed, "tll", "validation", model.name)
            self._validation_tlls[key] = smc.total_log_likelihood(
                model, result, self.validation, evaluator, n_particles, rng
            )
        return self._validation_tlls[key]

    def validation_residuals(self, model_id: int, n_particles: int) -> list[float]:
        model, result, evaluator = self._trained_triple(model_id)
        rng = rng_for(self.seed, "residual", model.name)
        cloud = smc.sample_posterior_cloud(result, n_particles, rng)
        cache = evaluator.diagonalize(cloud.positions)
        return [
            smc.mean_residual(
                cloud, cache.p0(e.probe_id, e.t),
                self.target.true_p0(e.probe_id, e.t),
            )
            for e in self.validation
        ]


# ---------------------------------------------------------------------------
# Genetic operators


def roulette_select_pair(
    probabilities: np.ndarray, rng: np.random.Generator
) -> tuple[int, int]:
    """Unordered parent pair (i, j), i != j, drawn with probability
    proportional to s_i * s_j. Falls back to a uniform pair when fewer than
    two models carry nonzero probability."""
    s = np.asarray(probabilities, float)
    n = len(s)
    if n < 2:
        raise ValueError("need at least 2 selectable models")
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    pair_weights = np.array([s[i] * s[j] for i, j in pairs])
    total = pair_weights.sum()
    if total <= 0 or np.count_nonzero(s) < 2:
        choice = rng.integers(len(pairs))
    else:
        choice = rng.choice(len(pairs), p=pair_weights / total)
    return pairs[choice]


def crossover(
    pa: Chromosome, pb: Chromosome, rng: np.random.Generator
) -> tuple[Chromosome, Chromosome]:
    """One-point crossover with the cut drawn from the open middle-half
    interval (n/4, 3n/4); short chromosomes always cut at the midpoint."""
    n = len(pa)
    if len(pb) != n:
        raise ValueError("parents must have equal length")
    if n < 4:
        kappa = n // 2
    else:
        lo = math.floor(n / 4) + 1
        hi = math.ceil(3 * n / 4) - 1
        kappa = int(rng.integers(lo, hi + 1))
    ca = Chromosome(pa.bits[:kappa] + pb.bits[kappa:])
    cb = Chromosome(pb.bits[:kappa] + pa.bits[kappa:])
    return ca, cb


def mutate(c: Chromosome, p: float, rng: np.random.Generator) -> Chromosome:
    """Flip each gene independently with probability p."""
    flips = rng.random(len(c)) < p
    bits = "".join(
        ("1" if b == "0" else "0") if flip else b for b, flip in zip(c.bits, flips)
    )
    return Chromosome(bits)


def random_chromosome(
    n_genes: int, rng: np.random.Generator, gene_prob: float = 0.5
) -> Chromosome:
    while True:
        bits = "".join(
            "1" if b else "0" for b in rng.random(size=n_genes) < gene_prob
        )
        if "1" in bits:
            return Chromosome(bits)


def ga_generate(
    previous: list[Chromosome],
    fitnesses: list[float],
    config: GAConfig,
    rng: np.random.Generator,
) -> list[Chromosome]:
    """Next generation: elites carried forward, the rest filled by roulette
    selection over the truncated pool, crossover, and mutation. All models in
    a generation are distinct and non-empty; previously seen models may recur."""
    n_models = config.n_models
    order = sorted(
        range(len(previous)), key=lambda i: (-fitnesses[i], previous[i].bits)
    )
    elites = [previous[i] for i in order[: config.elite_count]]
    keep = max(2, round(n_models * config.truncation_fraction))
    survivors = order[:keep]
    pool = [previous[i] for i in survivors]
    probs = obj.selection_probabilities(
        {idx: fitnesses[i] for idx, i in enumerate(survivors)}
    )
    s = np.array([probs[idx] for idx in range(len(survivors))])

    next_gen: list[Chromosome] = []
    seen: set[str] = set()

    def admit(child: Chromosome) -> bool:
        if child.cardinality == 0 or child.bits in seen:
            return False
        next_gen.append(child)
        seen.add(child.bits)
        return True

    for elite in elites:
        admit(elite)
    while len(next_gen) < n_models:
        i, j = roulette_select_pair(s, rng)
        children = crossover(pool[i], pool[j], rng)
        for child in children:
            if len(next_gen) >= n_models:
                break
            candidate = mutate(child, config.mutation_prob, rng)
            retries = 0
            while not admit(candidate):
                retries += 1
                if retries > 100:
                    while not admit(random_chromosome(len(child), rng)):
                        pass
                    break
                candidate = mutate(child, config.mutation_prob, rng)
    return next_gen


def ga_terminate(
    champion_history: list[int], generation_index: int, config: GAConfig
) -> bool:
    """Stop at the generation cap, or when the champion has not changed for a
    full stagnation window."""
    if not champion_history:
        raise ValueError("champion history must be nonempty")
    if generation_index >= config.n_generations:
        return True
    window = config.stagnation_window
    if len(champion_history) >= window:
        tail = champion_history[-window:]
        if len(set(tail)) == 1:
            return True
    return False


# ---------------------------------------------------------------------------
# Strategies


def _all_pairs(ids: list[int]) -> list[tuple[int, int]]:
    return [(a, b) for idx, a in enumerate(ids) for b in ids[idx + 1 :]]


def fixed_set_generate(
    lattices, family: str, config: StrategyConfig, ctx: SearchContext,
    branch_index: int = 0,
) -> BranchState:
    """Single branch of prescribed lattice models, consolidated by all-pairs
    Bayes-factor points."""
    if not lattices:
        raise ValueError("fixed set needs at least one lattice")
    ids = [ctx.register(lattice_to_model(family, lat)) for lat in lattices]
    ctx.train_many(ids, config.resources)
    live = [i for i in ids if i in ctx.trained]
    records = ctx.compare_pairs(
        _all_pairs(live), config.comparison_strategy, config.resources.eval_particles
    )
    champion = cmp.branch_champion(records, live)
    points = cmp.bf_points(records, live)
    fitnesses = {i: float(points.get(i, 0)) for i in ids}
    branch = BranchState(branch_index, ids, records, fitnesses, champion)
    ctx._log("branch_champion", branch=branch_index, champion_id=champion,
             points={str(i): points.get(i, 0) for i in ids})
    return branch


def _objective_fitnesses(
    ids: list[int], config: StrategyConfig, ctx: SearchContext, generation: int = 0
) -> tuple[dict[int, float], list[cmp.ComparisonRecord]]:
    ga = config.ga
    n_eval = config.resources.eval_particles
    live = [i for i in ids if i in ctx.trained]
    records: list[cmp.ComparisonRecord] = []
    if ga.objective == "elo":
        if config.comparison_strategy == "validation" and len(live) > 1:
            # Place models on the comparison ring in evidence order. The
            # circulant topology makes node 0 adjacent to both the closest
            # rivals and the weakest candidates, so the strongest model
            # collects the largest rating stakes and a single rating pass
            # stays consistent with the evidence ordering; with arbitrary
            # placement the margin-weighted stakes let a mid-rank model
            # adjacent to weak ones outrate the evidence leader.
            live = sorted(
                live, key=lambda i: (-ctx.validation_tll(i, n_eval), i)
            )
        graph = cmp.build_comparison_graph(len(live))
        pairs = [(live[a], live[b]) for a, b in graph.edges]
        records = ctx.compare_pairs(pairs, config.comparison_strategy, n_eval)
        elo = obj.EloState.fresh(live)
        for record in records:  # deterministic edge order; updates don't commute
            elo.apply(record)
        fitnesses = elo.fitnesses()
        for model_id in live:
            ctx._log("rating", generation=generation, model_id=model_id,
                     model=ctx.models[model_id].name,
                     rating=elo.ratings[model_id])
    elif ga.objective in ("bf-points", "rank"):
        records = ctx.compare_pairs(
            _all_pairs(live), config.comparison_strategy, n_eval
        )
        points = cmp.bf_points(records, live)
        if ga.objective == "bf-points":
            fitnesses = {i: float(points[i]) for i in live}
        else:
            keep = max(1, round(len(live) * ga.truncation_fraction))
            fitnesses = obj.g_rank(
                {i: float(points[i]) for i in live}, keep,
                tiebreak=cmp.sum_log_bf(records, live),
            )
            fitnesses = {i: fitnesses.get(i, 0.0) for i in live}
    elif ga.objective == "residual":
        fitnesses = {
            i: obj.g_residual(ctx.validation_residuals(i, n_eval)) for i in live
        }
    else:
        n = len(ctx.validation)
        tlls = {i: ctx.validation_tll(i, n_eval) for i in live}
        if ga.objective == "inverse-ll":
            fitnesses = {i: obj.g_inverse_ll(min(t, 0.0)) for i, t in tlls.items()}
        elif ga.objective == "aicc":
            fitnesses = {
                i: obj.g_aicc(tlls[i], ctx.models[i].k, n) for i in live
            }
        else:  # bic
            fitnesses = {i: obj.g_bic(tlls[i], ctx.models[i].k, n) for i in live}
    for i in ids:
        fitnesses.setdefault(i, 0.0)
    return fitnesses, records


def run_genetic(config: StrategyConfig, ctx: SearchContext) -> StrategyOutcome:
    """Genetic model search over a chromosome space."""
    gene_map = config.gene_map
    if gene_map is None:
        raise ValueError("genetic strategy needs a gene map")
    ga = config.ga
    rng = rng_for(ctx.seed, "ga", config.name)
    population = []
    seen: set[str] = set()
    # Low-cardinality chromosomes train far more reliably at fixed resources,
    # so a sparse initial generation gives high-fidelity early fitness signals
    # and lets the search assemble larger models from well-ranked fragments.
    gene_prob = 0.5 if ga.initial_gene_prob is None else ga.initial_gene_prob
    while len(population) < ga.n_models:
        c = random_chromosome(len(gene_map), rng, gene_prob)
        if c.bits not in seen:
            population.append(c)
            seen.add(c.bits)

    branches: list[BranchState] = []
    champion_history: list[int] = []
    generation = 0
    while True:
        generation += 1
        ids = [ctx.register(decode(c, gene_map)) for c in population]
        ctx.train_many(ids, config.resources)
        fitnesses, records = _objective_fitnesses(ids, config, ctx, generation)
        champion = min(ids, key=lambda i: (-fitnesses[i], i))
        champion_history.append(champion)
        branches.append(BranchState(generation, ids, records, fitnesses, champion))
        ctx._log(
            "generation",
            strategy=config.name,
            generation=generation,
            models=[
                {
                    "model_id": i,
                    "chromosome": c.bits,
                    "fitness": fitnesses[i],
                    "f1": ctx.model_f1(i),
                }
                for i, c in zip(ids, population)
            ],
            champion_id=champion,
        )
        if ga_terminate(champion_history, generation, ga):
            break
        fitness_list = [fitnesses[i] for i in ids]
        population = ga_generate(population, fitness_list, ga, rng)
    return StrategyOutcome(champion_history[-1], branches)


def run_fixed_set(config: StrategyConfig, ctx: SearchContext) -> StrategyOutcome:
    branch = fixed_set_generate(config.lattices, config.family, config, ctx)
    return StrategyOutcome(branch.champion_id, [branch], family=config.family)


def family_forest(config: StrategyConfig, ctx: SearchContext) -> StrategyOutcome:
    """One fixed-set tree per family; tree champions meet on a final branch
    consolidated by all-pairs Bayes-factor points over the shared validation
    set."""
    if len(config.forest) < 2:
        raise ValueError("family forest needs at least 2 family trees")
    branches: list[BranchState] = []
    champions: list[int] = []
    for index, (family, lattices) in enumerate(config.forest):
        branch = fixed_set_generate(lattices, family, config, ctx, branch_index=index)
        branches.append(branch)
        champions.append(branch.champion_id)
        ctx._log("tree_champion", family=family, champion_id=branch.champion_id)
    records = ctx.compare_pairs(
        _all_pairs(champions), "validation", config.resources.eval_particles
    )
    winner = cmp.branch_champion(records, champions)
    points = cmp.bf_points(records, champions)
    final = BranchState(
        len(config.forest), champions, records,
        {i: float(points[i]) for i in champions}, winner,
    )
    branches.append(final)
    family = ctx.models[winner].family
    ctx._log("forest_champion", champion_id=winner, family=family)
    return StrategyOutcome(winner, branches, family=family)


def run_strategy(config: StrategyConfig, ctx: SearchContext) -> StrategyOutcome:
    if config.kind == "fixed-set":
        return run_fixed_set(config, ctx)
    if config.kind == "family-forest":
        return family_forest(config, ctx)
    return run_genetic(config, ctx)
