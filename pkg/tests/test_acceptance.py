"""End-to-end acceptance suite.

Each test prints a single PASS/FAIL line for its criterion before asserting,
so a full run yields one status line per criterion:

    pytest tests/test_acceptance.py -s
"""

import math

import numpy as np
import pytest
import scipy.linalg
from scipy import stats

from qmla import comparison as cmp
from qmla import exploration as ex
from qmla import objectives as obj
from qmla import orchestrator as orch
from qmla import smc
from qmla.config import SCHEMA_VERSION, parse_config
from qmla.genome import Chromosome, decode, f1_metrics, xyz_gene_map
from qmla.linalg import expm_unitary, jordan_wigner_ladder
from qmla.terms import Model, TermLabel, named_lattice, lattice_to_model, single_term
from qmla.utils import rng_for

WORKERS = 4


def report(number: int, ok: bool, detail: str) -> None:
    status = "PASS" if ok else "FAIL"
    print(f"\ncriterion {number}: {status} ({detail})")
    assert ok, f"criterion {number} failed: {detail}"


def test_criterion_1_bayes_factor_example():
    record = cmp.ComparisonRecord(0, 1, "union", -10.0, -100.0)
    ok = abs(record.log_bf - 90.0) <= 1e-12
    report(1, ok, f"log Bayes factor {record.log_bf!r}, expected 90 within 1e-12")


def test_criterion_2_fixed_set_lattice_selection():
    lattices = ["chain-2", "chain-3", "chain-4", "ring-4"]
    exact_counts = {}
    for true_lattice in lattices:
        exact = 0
        for seed in range(10):
            raw = {
                "schema_version": SCHEMA_VERSION,
                "seed": seed,
                "truth": {"family": "ising", "lattice": true_lattice},
                "workers": WORKERS,
                "strategies": [
                    {
                        "kind": "fixed-set",
                        "name": "ising-sets",
                        "family": "ising",
                        "lattices": lattices,
                        "resources": {"n_experiments": 250, "n_particles": 1000},
                    }
                ],
            }
            exact += orch.run_qmla(parse_config(raw)).exact
        exact_counts[true_lattice] = exact
    passing = sum(1 for v in exact_counts.values() if v >= 6)
    ok = passing >= 3
    report(2, ok, f"exact/10 per lattice {exact_counts}, {passing}/4 at >=6")


GA_TRUTH_BITS = "101010011"


def _ga_run(seed: int) -> orch.RunResult:
    gene_map = xyz_gene_map(3)
    labels = [
        label.to_string()
        for bit, label in zip(GA_TRUTH_BITS, gene_map.labels)
        if bit == "1"
    ]
    raw = {
        "schema_version": SCHEMA_VERSION,
        "seed": seed,
        "truth": {"labels": labels},
        "validation_size": 400,
        "workers": WORKERS,
        "strategies": [
            {
                "kind": "genetic",
                "name": "ga-xyz-3",
                "gene_map": {"type": "xyz", "n_sites": 3},
                "resources": {
                    "n_experiments": 1000,
                    "n_particles": 1000,
                    "n_restarts": 2,
                    "prior": "uniform",
                },
                "ga": {"n_models": 12, "n_generations": 8, "objective": "elo"},
                "comparison_strategy": "validation",
            }
        ],
    }
    return orch.run_qmla(parse_config(raw))


@pytest.fixture(scope="module")
def ga_runs():
    return [_ga_run(seed) for seed in range(10)]


def test_criterion_3_genetic_search(ga_runs):
    f1s = [r.f1 for r in ga_runs]
    exact = sum(r.exact for r in ga_runs)
    median = float(np.median(f1s))
    ok = median >= 0.8 and exact >= 5
    report(3, ok, f"median F1 {median:.3f} (>=0.8), exact {exact}/10 (>=5)")


def test_criterion_4_random_chromosome_f1():
    gene_map = xyz_gene_map(4)
    truth = decode(Chromosome("011001010110100101"), gene_map).label_set
    rng = rng_for("acceptance", "f1")
    draws = rng.integers(0, 2, size=(10_000, 18))
    scores = [
        f1_metrics(
            decode(Chromosome("".join("1" if b else "0" for b in row)), gene_map).label_set,
            truth,
        )[2]
        for row in draws
    ]
    mean = float(np.mean(scores))
    ok = 0.45 <= mean <= 0.55
    report(4, ok, f"mean F1 of 10^4 random 18-bit chromosomes {mean:.4f} in [0.45, 0.55]")


def test_criterion_5_smc_convergence():
    model = Model(
        (single_term(TermLabel("pauli-field", "x", (1,))),), 1, name="sx"
    )
    truth = model.with_parameters([0.9])
    prior = smc.Prior((smc.PriorSpec("uniform", 0.0, 1.0),))
    initial_std = prior.specs[0].std
    close = 0
    shrunk = 0
    errors = []
    for seed in range(10):
        probes = smc.build_probes(1, rng_for("acceptance", "c5-probes", seed))
        target = smc.TargetSystem(truth, probes)
        result = smc.train(
            model, target, 100, 500, prior, rng_for("acceptance", "c5", seed)
        )
        mean = float(result.posterior_mean[0])
        std = float(np.sqrt(result.posterior_cov[0, 0]))
        errors.append(abs(mean - 0.9))
        close += abs(mean - 0.9) < 0.05
        shrunk += std < initial_std / 10
    ok = close >= 9 and shrunk == 10
    report(
        5,
        ok,
        f"|mean-0.9|<0.05 in {close}/10 (>=9), std<initial/10 in {shrunk}/10 (=10), "
        f"max error {max(errors):.4f}",
    )


def _fermionic_oracle_hubbard_2site(t_up, t_down, u1, u2):
    """2-site Hubbard Hamiltonian built directly in the occupation basis.

    Mode order (site, spin): (1,up), (1,down), (2,up), (2,down); the first
    mode is the most significant bit of the basis index.
    """
    n_modes = 4
    dim = 2**n_modes

    def occ(state, mode):
        return (state >> (n_modes - 1 - mode)) & 1

    def annihilate(state, mode):
        if not occ(state, mode):
            return None, 0.0
        sign = (-1.0) ** sum(occ(state, m) for m in range(mode))
        return state & ~(1 << (n_modes - 1 - mode)), sign

    def create(state, mode):
        if occ(state, mode):
            return None, 0.0
        sign = (-1.0) ** sum(occ(state, m) for m in range(mode))
        return state | (1 << (n_modes - 1 - mode)), sign

    h = np.zeros((dim, dim))
    hops = [(t_up, 0, 2), (t_down, 1, 3)]
    for state in range(dim):
        # hopping c†_l c_k + c†_k c_l between sites 1 and 2 per spin
        for amp, mode_k, mode_l in hops:
            for src, dst in [(mode_k, mode_l), (mode_l, mode_k)]:
                mid, s1 = annihilate(state, src)
                if mid is None:
                    continue
                out, s2 = create(mid, dst)
                if out is None:
                    continue
                h[out, state] += amp * s1 * s2
        # on-site interaction n_up n_down per site
        h[state, state] += u1 * occ(state, 0) * occ(state, 1)
        h[state, state] += u2 * occ(state, 2) * occ(state, 3)
    return h


def test_criterion_6_numerical_oracles():
    rng = rng_for("acceptance", "oracles")
    max_expm_err = 0.0
    for _ in range(400):
        dim = int(rng.integers(2, 17))
        a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        h = (a + a.conj().T) / 2
        t = float(rng.uniform(0.0, 5.0))
        err = float(np.max(np.abs(expm_unitary(h, t) - scipy.linalg.expm(-1j * h * t))))
        max_expm_err = max(max_expm_err, err)

    model = lattice_to_model("hubbard", named_lattice("chain-2"))
    params = rng.uniform(0.2, 1.0, size=model.k)
    built = model.with_parameters(params).hamiltonian()
    by_name = {t.name: p for t, p in zip(model.terms, params)}
    oracle = _fermionic_oracle_hubbard_2site(
        by_name["up-hopping"], by_name["down-hopping"],
        by_name["onsite-interaction"], by_name["onsite-interaction"],
    )
    jw_err = float(np.max(np.abs(built - oracle)))

    max_acomm_err = 0.0
    n_modes = 4
    eye = np.eye(2**n_modes)
    for m1 in range(n_modes):
        for m2 in range(n_modes):
            c1 = jordan_wigner_ladder(m1, n_modes, "annihilate")
            c2 = jordan_wigner_ladder(m2, n_modes, "annihilate")
            c2_dag = jordan_wigner_ladder(m2, n_modes, "create")
            acomm = c1 @ c2 + c2 @ c1
            max_acomm_err = max(max_acomm_err, float(np.max(np.abs(acomm))))
            mixed = c1 @ c2_dag + c2_dag @ c1
            expected = eye if m1 == m2 else 0.0
            max_acomm_err = max(
                max_acomm_err, float(np.max(np.abs(mixed - expected)))
            )

    ok = max_expm_err <= 1e-10 and jw_err <= 1e-12 and max_acomm_err <= 1e-12
    report(
        6,
        ok,
        f"expm err {max_expm_err:.2e} (<=1e-10), JW Hubbard err {jw_err:.2e} "
        f"(<=1e-12), anticommutator err {max_acomm_err:.2e} (<=1e-12)",
    )


def test_criterion_7_invariant_suites():
    failures = []
    rng = rng_for("acceptance", "invariants")

    # Elo zero-sum
    for _ in range(200):
        r_i, r_j = rng.uniform(500, 1500, size=2)
        log10_bf = float(rng.uniform(-200, 200))
        new_i, new_j = obj.elo_update(r_i, r_j, log10_bf)
        if abs((new_i + new_j) - (r_i + r_j)) > 1e-9:
            failures.append("elo zero-sum")
            break

    # Bayes-factor antisymmetry (synthetic records)
    record = cmp.ComparisonRecord(3, 9, "union", -12.5, -40.0)
    if record.swapped().log_bf != -record.log_bf:
        failures.append("bf antisymmetry")

    # weight normalisation through updates
    cloud = smc.ParticleCloud(rng.random((200, 2)), np.full(200, 1 / 200))
    for _ in range(20):
        p0 = rng.random(200)
        cloud, _ = smc.bayes_update(cloud, int(rng.integers(0, 2)), p0)
        if abs(cloud.weights.sum() - 1.0) > 1e-9:
            failures.append("weight normalisation")
            break

    # likelihood bounds
    probes = smc.build_probes(1, rng_for("acceptance", "c7-probes"))
    target = smc.TargetSystem(
        Model(
            (single_term(TermLabel("pauli-field", "x", (1,))),), 1, name="sx"
        ).with_parameters([0.7]),
        probes,
    )
    for _ in range(100):
        p0 = target.true_p0(int(rng.integers(0, len(probes))), float(rng.uniform(0, 50)))
        if not 0.0 <= p0 <= 1.0:
            failures.append("likelihood bounds")
            break

    # crossover positional provenance
    for _ in range(100):
        bits_a = "".join(str(b) for b in rng.integers(0, 2, 10))
        bits_b = "".join(str(b) for b in rng.integers(0, 2, 10))
        ca, cb = ex.crossover(Chromosome(bits_a), Chromosome(bits_b), rng)
        for pos in range(10):
            if ca.bits[pos] not in (bits_a[pos], bits_b[pos]) or cb.bits[pos] not in (
                bits_a[pos], bits_b[pos]
            ):
                failures.append("crossover provenance")
                break

    # mutation rate binomial (3 sigma)
    flips = sum(
        ex.mutate(Chromosome("0" * 100), 0.25, rng).cardinality for _ in range(1000)
    )
    n_genes, p = 100_000, 0.25
    if abs(flips - n_genes * p) > 3 * math.sqrt(n_genes * p * (1 - p)):
        failures.append("mutation binomial")

    # roulette pair distribution chi-square at 10^4 draws
    s = np.array([0.5, 0.3, 0.2])
    pairs = [(0, 1), (0, 2), (1, 2)]
    weights = np.array([s[i] * s[j] for i, j in pairs])
    counts = {pair: 0 for pair in pairs}
    for _ in range(10_000):
        counts[ex.roulette_select_pair(s, rng)] += 1
    observed = np.array([counts[pair] for pair in pairs])
    expected = weights / weights.sum() * 10_000
    if stats.chisquare(observed, f_exp=expected).pvalue <= 0.01:
        failures.append("roulette chi-square")

    # g_rank normalisation
    for keep in range(1, 8):
        points = {i: float(rng.integers(0, 30)) for i in range(8)}
        if abs(sum(obj.g_rank(points, keep=keep).values()) - 1.0) > 1e-12:
            failures.append("g_rank normalisation")
            break

    # determinism: full search replay
    def small_run():
        raw = {
            "schema_version": SCHEMA_VERSION,
            "seed": 21,
            "validation_size": 30,
            "truth": {"family": "ising", "lattice": "chain-2"},
            "strategies": [
                {
                    "kind": "fixed-set",
                    "name": "ising-sets",
                    "family": "ising",
                    "lattices": ["chain-2", "chain-3"],
                    "resources": {"n_experiments": 15, "n_particles": 60},
                }
            ],
        }
        result = orch.run_qmla(parse_config(raw))
        return [
            {k: v for k, v in r.items() if k != "elapsed"}
            for r in result.ledger.records
        ]

    if small_run() != small_run():
        failures.append("determinism replay")

    ok = not failures
    report(7, ok, "all invariant suites hold" if ok else f"failed: {failures}")


def test_criterion_8_bf_f1_alignment(ga_runs):
    # Pairs sampled from the comparisons performed during the ten genetic
    # searches: every compared pair involves two trained models in the
    # 9-gene space.
    rng = rng_for("acceptance", "c8-sample")
    candidates = []
    for run in ga_runs:
        ctx = run.context
        for record in run.ledger.of_type("comparison"):
            f_i = ctx.model_f1(record["id_i"])
            f_j = ctx.model_f1(record["id_j"])
            if f_i is None or f_j is None or f_i == f_j:
                continue
            higher = record["id_i"] if f_i > f_j else record["id_j"]
            favoured = record["id_i"] if record["log_bf"] > 0 else record["id_j"]
            candidates.append(higher == favoured)
    picks = rng.choice(len(candidates), size=50, replace=False)
    wins = int(sum(candidates[i] for i in picks))
    ok = wins >= 35
    report(8, ok, f"higher-F1 model favoured in {wins}/50 (>=35) sampled comparisons")
