"""Exploration strategies: GA operators and the fixed-set branch machinery."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from qmla import exploration as ex
from qmla.genome import Chromosome
from qmla.utils import rng_for

bits_st = st.text(alphabet="01", min_size=4, max_size=12)


class TestStrategyConfig:
    def test_odd_population_rejected(self):
        with pytest.raises(ValueError):
            ex.GAConfig(n_models=13)

    def test_truncation_bounds(self):
        with pytest.raises(ValueError):
            ex.GAConfig(truncation_fraction=0.0)
        with pytest.raises(ValueError):
            ex.GAConfig(truncation_fraction=1.2)

    def test_mutation_bounds(self):
        with pytest.raises(ValueError):
            ex.GAConfig(mutation_prob=1.5)

    def test_unknown_objective(self):
        with pytest.raises(ValueError):
            ex.GAConfig(objective="chess")

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            ex.StrategyConfig(kind="simulated-annealing")

    def test_restarts_must_be_positive(self):
        with pytest.raises(ValueError):
            ex.Resources(n_restarts=0)

    def test_unknown_prior(self):
        with pytest.raises(ValueError):
            ex.Resources(prior="cauchy")

    def test_uniform_prior_built_on_request(self):
        prior = ex.Resources(prior="uniform").build_prior(3)
        assert prior.dim == 3
        assert all(s.kind == "uniform" for s in prior.specs)
        assert ex.Resources().build_prior(2).specs[0].kind == "normal"


class TestRouletteSelectPair:
    def test_never_selects_same_model(self):
        rng = rng_for("roulette-distinct")
        s = np.array([0.5, 0.3, 0.2])
        for _ in range(2_000):
            i, j = ex.roulette_select_pair(s, rng)
            assert i != j

    def test_degenerate_fitness_falls_back_to_uniform(self):
        rng = rng_for("roulette-degenerate")
        s = np.array([1.0, 0.0, 0.0, 0.0])
        pairs = [ex.roulette_select_pair(s, rng) for _ in range(1_000)]
        # fallback: all 6 pairs occur, not only those containing model 0
        assert {p for p in pairs} == {(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)}

    def test_pair_distribution_chi_square(self):
        rng = rng_for("roulette-chi2")
        s = np.array([0.5, 0.3, 0.2])
        pairs = [(0, 1), (0, 2), (1, 2)]
        weights = np.array([s[i] * s[j] for i, j in pairs])
        expected_probs = weights / weights.sum()
        n = 10_000
        counts = {p: 0 for p in pairs}
        for _ in range(n):
            counts[ex.roulette_select_pair(s, rng)] += 1
        observed = np.array([counts[p] for p in pairs])
        result = stats.chisquare(observed, f_exp=expected_probs * n)
        assert result.pvalue > 0.01

    def test_needs_two_models(self):
        with pytest.raises(ValueError):
            ex.roulette_select_pair(np.array([1.0]), rng_for("r"))


class TestCrossover:
    def test_block_structure(self):
        pa, pb = Chromosome("111111"), Chromosome("000000")
        rng = rng_for("xo")
        ca, cb = ex.crossover(pa, pb, rng)
        # one-point: children are a prefix of one parent + suffix of the other
        kappa = ca.bits.index("0") if "0" in ca.bits else len(ca)
        assert ca.bits == "1" * kappa + "0" * (6 - kappa)
        assert cb.bits == "0" * kappa + "1" * (6 - kappa)

    def test_identical_parents_fixed_point(self):
        p = Chromosome("101010101")
        ca, cb = ex.crossover(p, p, rng_for("xo2"))
        assert ca.bits == p.bits and cb.bits == p.bits

    def test_short_chromosome_cuts_midpoint(self):
        pa, pb = Chromosome("110"), Chromosome("001")
        ca, cb = ex.crossover(pa, pb, rng_for("xo3"))
        assert (ca.bits, cb.bits) == ("101", "010")

    def test_cut_stays_in_middle_half(self):
        pa, pb = Chromosome("1" * 9), Chromosome("0" * 9)
        rng = rng_for("xo4")
        for _ in range(500):
            ca, _ = ex.crossover(pa, pb, rng)
            kappa = ca.bits.count("1")
            assert 9 / 4 < kappa < 27 / 4  # open interval (n/4, 3n/4)

    @given(bits_st, st.integers(0, 2**32 - 1))
    @settings(max_examples=60, deadline=None)
    def test_positional_provenance(self, bits, seed):
        rng = np.random.default_rng(seed)
        pa = Chromosome(bits)
        pb_bits = "".join(
            "1" if b else "0" for b in np.random.default_rng(seed + 1).integers(0, 2, len(bits))
        )
        pb = Chromosome(pb_bits)
        ca, cb = ex.crossover(pa, pb, rng)
        assert len(ca) == len(cb) == len(pa)
        for pos in range(len(pa)):
            assert ca.bits[pos] in (pa.bits[pos], pb.bits[pos])
            assert cb.bits[pos] in (pa.bits[pos], pb.bits[pos])

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            ex.crossover(Chromosome("11"), Chromosome("111"), rng_for("xo5"))


class TestMutate:
    def test_zero_probability_unchanged(self):
        c = Chromosome("10110")
        assert ex.mutate(c, 0.0, rng_for("m")).bits == c.bits

    def test_unit_probability_complements(self):
        c = Chromosome("10110")
        assert ex.mutate(c, 1.0, rng_for("m2")).bits == "01001"

    def test_empirical_flip_rate_binomial(self):
        rng = rng_for("m3")
        p = 0.25
        n_genes = 100_000
        c = Chromosome("0" * 100)
        flips = 0
        for _ in range(n_genes // 100):
            flips += ex.mutate(c, p, rng).cardinality
        sigma = np.sqrt(n_genes * p * (1 - p))
        assert abs(flips - n_genes * p) < 3 * sigma

    @given(bits_st, st.floats(0, 1), st.integers(0, 2**32 - 1))
    @settings(max_examples=60, deadline=None)
    def test_length_preserved(self, bits, p, seed):
        out = ex.mutate(Chromosome(bits), p, np.random.default_rng(seed))
        assert len(out) == len(bits)


class TestGaGenerate:
    def _population(self, rng, n, length=8):
        pop, seen = [], set()
        while len(pop) < n:
            c = ex.random_chromosome(length, rng)
            if c.bits not in seen:
                pop.append(c)
                seen.add(c.bits)
        return pop

    def test_output_size_and_distinctness(self):
        rng = rng_for("gen")
        pop = self._population(rng, 12)
        fitness = list(np.linspace(12, 1, 12))
        out = ex.ga_generate(pop, fitness, ex.GAConfig(n_models=12), rng)
        assert len(out) == 12
        assert len({c.bits for c in out}) == 12
        assert all(c.cardinality > 0 for c in out)

    def test_elites_carried_forward(self):
        rng = rng_for("gen2")
        pop = self._population(rng, 12)
        fitness = list(np.linspace(12, 1, 12))
        out = ex.ga_generate(pop, fitness, ex.GAConfig(n_models=12), rng)
        top_two = {pop[0].bits, pop[1].bits}
        assert top_two <= {c.bits for c in out}

    def test_truncation_pool_excluded_from_parenthood(self):
        # 60 models, truncation 1/3: only the top 20 may parent offspring.
        # Non-survivors carry a marker gene the survivors never have, and
        # with mutation off no child can acquire it.
        rng = rng_for("gen3")

        def middle(r):
            return "".join("1" if b else "0" for b in r.integers(0, 2, 28))

        seed_rng = rng_for("gen3-pop")
        middles = []
        while len(middles) < 60:
            m = middle(seed_rng)
            if m not in middles:
                middles.append(m)
        survivors = [Chromosome("1" + m + "0") for m in middles[:20]]
        others = [Chromosome("0" + m + "1") for m in middles[20:]]
        pop = survivors + others
        fitness = list(np.linspace(60, 41, 20)) + list(np.linspace(40, 1, 40))
        config = ex.GAConfig(
            n_models=60, truncation_fraction=1 / 3, mutation_prob=0.0
        )
        out = ex.ga_generate(pop, fitness, config, rng)
        assert all(c.bits[-1] == "0" for c in out)

    def test_half_truncation_selectable(self):
        config = ex.GAConfig(truncation_fraction=1 / 2)
        assert config.truncation_fraction == 0.5


class TestGaTerminate:
    def _config(self):
        return ex.GAConfig(n_generations=16, stagnation_window=5)

    def test_stagnation_window(self):
        assert ex.ga_terminate([1, 1, 1, 1, 1], 5, self._config())

    def test_alternating_continues(self):
        assert not ex.ga_terminate([1, 2, 1, 2, 1], 5, self._config())

    def test_generation_cap(self):
        assert ex.ga_terminate([1, 2, 3], 16, self._config())

    def test_short_history_continues(self):
        assert not ex.ga_terminate([1, 1], 2, self._config())

    def test_empty_history_rejected(self):
        with pytest.raises(ValueError):
            ex.ga_terminate([], 0, self._config())
