"""Sequential-Monte-Carlo parameter learning for candidate Hamiltonians.

A particle is one sampled parameter hypothesis with a weight. Training runs
adaptive experiments against the target system: design a (probe, time) pair,
measure a binary datum, reweight particles by their likelihood of that datum,
and resample with the Liu-West rule when the effective sample size collapses.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .terms import Model

LIKELIHOOD_FLOOR = 1e-300
TIME_CAP = 1e4
LIU_WEST_A = 0.98


class DegenerateUpdateError(RuntimeError):
    """Every particle assigned zero likelihood to the observed datum."""


# ---------------------------------------------------------------------------
# Priors


@dataclass(frozen=True)
class PriorSpec:
    """Distribution for one parameter, truncated to (lo, hi)."""

    kind: str  # normal | uniform
    a: float  # mean | lo
    b: float  # std  | hi
    lo: float = -np.inf
    hi: float = np.inf

    def __post_init__(self):
        if self.kind == "normal" and self.b <= 0:
            raise ValueError("std must be positive")
        if self.kind == "uniform" and self.a >= self.b:
            raise ValueError("uniform needs lo < hi")
        if self.lo >= self.hi:
            raise ValueError("truncation needs lo < hi")

    def _frozen(self):
        if self.kind == "uniform":
            lo = max(self.a, self.lo)
            hi = min(self.b, self.hi)
            return stats.uniform(loc=lo, scale=hi - lo)
        if self.kind == "normal":
            alpha = (self.lo - self.a) / self.b
            beta = (self.hi - self.a) / self.b
            return stats.truncnorm(alpha, beta, loc=self.a, scale=self.b)
        raise ValueError(f"unknown prior kind {self.kind!r}")

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return self._frozen().rvs(size=n, random_state=rng)

    @property
    def mean(self) -> float:
        return float(self._frozen().mean())

    @property
    def std(self) -> float:
        return float(self._frozen().std())


@dataclass(frozen=True)
class Prior:
    specs: tuple[PriorSpec, ...]

    @property
    def dim(self) -> int:
        return len(self.specs)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.dim == 0:
            return np.zeros((n, 0))
        return np.column_stack([s.sample(n, rng) for s in self.specs])

    @property
    def mean(self) -> np.ndarray:
        return np.array([s.mean for s in self.specs])

    @property
    def cov(self) -> np.ndarray:
        return np.diag([s.std**2 for s in self.specs])


def default_prior(dim: int) -> Prior:
    """Normal(0.5, 0.15) truncated to (0, 1) per parameter."""
    return Prior(tuple(PriorSpec("normal", 0.5, 0.15, 0.0, 1.0) for _ in range(dim)))


# ---------------------------------------------------------------------------
# Probes


def haar_product_state(n_qubits: int, rng: np.random.Generator) -> np.ndarray:
    state = np.ones(1, dtype=complex)
    for _ in range(n_qubits):
        z = rng.normal(size=2) + 1j * rng.normal(size=2)
        z /= np.linalg.norm(z)
        state = np.kron(state, z)
    return state


def build_probes(
    n_qubits: int, rng: np.random.Generator, n_probes: int = 20, n_basis: int = 10
) -> np.ndarray:
    """Fiducial probe set: a few computational-basis states, topped up with
    seeded Haar-random product states. Cycled round-robin during training."""
    dim = 2**n_qubits
    probes = []
    for idx in range(min(dim, n_basis, n_probes)):
        e = np.zeros(dim, dtype=complex)
        e[idx] = 1.0
        probes.append(e)
    while len(probes) < n_probes:
        probes.append(haar_product_state(n_qubits, rng))
    return np.stack(probes)


# ---------------------------------------------------------------------------
# Particle clouds


@dataclass
class ParticleCloud:
    positions: np.ndarray  # (n, dim)
    weights: np.ndarray  # (n,), sums to 1

    def __post_init__(self):
        self.positions = np.atleast_2d(np.asarray(self.positions, float))
        self.weights = np.asarray(self.weights, float)
        if self.positions.shape[0] < 2:
            raise ValueError("cloud needs at least 2 particles")
        if self.weights.shape != (self.positions.shape[0],):
            raise ValueError("one weight per particle required")
        if np.any(self.weights < 0):
            raise ValueError("weights must be nonnegative")
        if abs(self.weights.sum() - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")

    @property
    def n_particles(self) -> int:
        return self.positions.shape[0]

    def ess(self) -> float:
        return float(1.0 / np.sum(self.weights**2))

    def mean(self) -> np.ndarray:
        return self.weights @ self.positions

    def cov(self) -> np.ndarray:
        mu = self.mean()
        centred = self.positions - mu
        return (centred * self.weights[:, None]).T @ centred


def sample_prior(prior: Prior, n_particles: int, rng: np.random.Generator) -> ParticleCloud:
    if n_particles < 2:
        raise ValueError("need at least 2 particles")
    positions = prior.sample(n_particles, rng)
    weights = np.full(n_particles, 1.0 / n_particles)
    return ParticleCloud(positions, weights)


def should_resample(cloud: ParticleCloud) -> bool:
    """Resample when the effective sample size drops strictly below n/2."""
    return cloud.ess() < cloud.n_particles / 2


def resample(
    cloud: ParticleCloud, a: float = LIU_WEST_A, rng: np.random.Generator = None
) -> ParticleCloud:
    """Liu-West resampling: contract resampled parents towards the cloud mean
    and add noise with covariance (1 - a^2) * cov."""
    n = cloud.n_particles
    parents = rng.choice(n, size=n, p=cloud.weights)
    mu = cloud.mean()
    positions = a * cloud.positions[parents] + (1 - a) * mu
    spread = 1 - a**2
    if spread > 0:
        cov = spread * cloud.cov()
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            jitter = 1e-12 * max(np.trace(cov), 1e-30)
            chol = np.linalg.cholesky(cov + jitter * np.eye(cov.shape[0]))
        positions = positions + rng.normal(size=positions.shape) @ chol.T
    weights = np.full(n, 1.0 / n)
    return ParticleCloud(positions, weights)


# ---------------------------------------------------------------------------
# Likelihood machinery


class EigenCache:
    """Batched eigendecompositions of H(alpha_p) for a fixed particle set.

    Survival amplitudes are <psi|e^{-iHt}|psi> = sum_m |<v_m|psi>|^2
    e^{-i lambda_m t}, so once the spectra are cached each new evolution
    time costs only a phase sum.
    """

    def __init__(self, term_mats: np.ndarray, positions: np.ndarray, probes: np.ndarray):
        n, dim = positions.shape[0], term_mats.shape[-1]
        if term_mats.shape[0] == 0:
            hams = np.zeros((n, dim, dim), dtype=complex)
        else:
            hams = np.tensordot(positions, term_mats, axes=([1], [0]))
        self.evals, evecs = np.linalg.eigh(hams)
        self._evecs = evecs
        self._probes = probes
        self._overlaps: dict[int, np.ndarray] = {}

    def _probe_overlaps(self, probe_id: int) -> np.ndarray:
        if probe_id not in self._overlaps:
            psi = self._probes[probe_id]
            amps = np.einsum("pdm,d->pm", self._evecs.conj(), psi)
            self._overlaps[probe_id] = np.abs(amps) ** 2
        return self._overlaps[probe_id]

    def p0(self, probe_id: int, t: float) -> np.ndarray:
        """Survival probability per particle."""
        c = self._probe_overlaps(probe_id)
        amp = np.sum(c * np.exp(-1j * self.evals * t), axis=1)
        return np.clip(np.abs(amp) ** 2, 0.0, 1.0)


class ModelEvaluator:
    """Likelihood engine for one model structure at a fixed simulation size."""

    def __init__(self, model: Model, probes: np.ndarray, n_qubits: int | None = None):
        self.model = model
        self.n_qubits = model.n_qubits if n_qubits is None else n_qubits
        if probes.shape[1] != 2**self.n_qubits:
            raise ValueError("probe dimension does not match simulation size")
        self.probes = probes
        self.term_mats = model.term_matrices(self.n_qubits)

    def diagonalize(self, positions: np.ndarray) -> EigenCache:
        return EigenCache(self.term_mats, np.atleast_2d(positions), self.probes)


class TargetSystem:
    """The simulated system under study: answers datum and expectation queries
    for its (hidden) true Hamiltonian."""

    def __init__(self, true_model: Model, probes: np.ndarray, n_qubits: int | None = None):
        if true_model.parameters is None:
            raise ValueError("true model must be fully parameterised")
        self.model = true_model
        self.n_qubits = true_model.n_qubits if n_qubits is None else n_qubits
        self.probes = probes
        evaluator = ModelEvaluator(true_model, probes, self.n_qubits)
        self._cache = evaluator.diagonalize(true_model.parameters[None, :])

    @property
    def n_probes(self) -> int:
        return self.probes.shape[0]

    def true_p0(self, probe_id: int, t: float) -> float:
        return float(self._cache.p0(probe_id, t)[0])

    def measure(self, probe_id: int, t: float, rng: np.random.Generator) -> int:
        """Single-shot projective measurement: 0 with probability p0."""
        return int(rng.random() >= self.true_p0(probe_id, t))


# ---------------------------------------------------------------------------
# Experiment design and updates


@dataclass(frozen=True)
class ExperimentRecord:
    probe_id: int
    t: float
    datum: int


def design_experiment(
    cloud: ParticleCloud,
    rng: np.random.Generator,
    n_probes: int,
    experiment_index: int,
    t_cap: float = TIME_CAP,
) -> tuple[int, float]:
    """Multi-particle guess heuristic: evolution time is the inverse distance
    between two weight-sampled particles; probes cycle round-robin."""
    probe_id = experiment_index % n_probes
    i, j = rng.choice(cloud.n_particles, size=2, replace=False, p=cloud.weights)
    distance = float(np.linalg.norm(cloud.positions[i] - cloud.positions[j]))
    t = t_cap if distance < 1e-9 else min(1.0 / distance, t_cap)
    return probe_id, t


def bayes_update(
    cloud: ParticleCloud, datum: int, p0_per_particle: np.ndarray
) -> tuple[ParticleCloud, float]:
    """One Bayesian reweighting step.

    Returns the updated cloud and the experiment likelihood: the
    pre-normalisation sum of new weights, always in (0, 1].
    """
    ell = p0_per_particle if datum == 0 else 1.0 - p0_per_particle
    raw = ell * cloud.weights
    likelihood = float(raw.sum())
    if likelihood <= LIKELIHOOD_FLOOR:
        raise DegenerateUpdateError("all particles assign zero likelihood")
    return ParticleCloud(cloud.positions, raw / likelihood), likelihood


def mean_residual(
    cloud: ParticleCloud, p0_per_particle: np.ndarray, true_p0: float
) -> float:
    """Weighted mean absolute gap between particle and system expectations."""
    return float(cloud.weights @ np.abs(p0_per_particle - true_p0))


# ---------------------------------------------------------------------------
# Training


@dataclass
class TrainingResult:
    posterior_mean: np.ndarray
    posterior_cov: np.ndarray
    experiments: list[ExperimentRecord]
    likelihoods: list[float]
    resample_count: int
    prior: Prior = None
    residuals: list[float] = field(default_factory=list)

    @property
    def n_experiments(self) -> int:
        return len(self.experiments)


def train(
    model: Model,
    target: TargetSystem,
    n_experiments: int,
    n_particles: int,
    prior: Prior,
    rng: np.random.Generator,
    evaluator: ModelEvaluator | None = None,
    track_residuals: bool = False,
    trace: list | None = None,
) -> TrainingResult:
    """Run the full SMC learning loop for one candidate model.

    Experiments are strictly sequential (each design depends on the current
    posterior). A single degenerate update triggers one reset to the prior;
    a second degenerate update propagates.
    """
    if evaluator is None:
        evaluator = ModelEvaluator(model, target.probes, target.n_qubits)
    cloud = sample_prior(prior, n_particles, rng)
    cache = evaluator.diagonalize(cloud.positions)
    experiments: list[ExperimentRecord] = []
    likelihoods: list[float] = []
    residuals: list[float] = []
    resample_count = 0
    reset_used = False
    for e_idx in range(n_experiments):
        probe_id, t = design_experiment(cloud, rng, target.n_probes, e_idx)
        datum = target.measure(probe_id, t, rng)
        p0 = cache.p0(probe_id, t)
        try:
            cloud, likelihood = bayes_update(cloud, datum, p0)
        except DegenerateUpdateError:
            if reset_used:
                raise
            reset_used = True
            cloud = sample_prior(prior, n_particles, rng)
            cache = evaluator.diagonalize(cloud.positions)
            p0 = cache.p0(probe_id, t)
            cloud, likelihood = bayes_update(cloud, datum, p0)
        if track_residuals:
            residuals.append(mean_residual(cloud, p0, target.true_p0(probe_id, t)))
        experiments.append(ExperimentRecord(probe_id, t, datum))
        likelihoods.append(likelihood)
        if trace is not None:
            trace.append(
                {
                    "experiment": e_idx,
                    "probe_id": probe_id,
                    "t": t,
                    "datum": datum,
                    "likelihood": likelihood,
                    "mean": cloud.mean().tolist(),
                    "std": np.sqrt(np.diag(cloud.cov())).tolist(),
                }
            )
        if should_resample(cloud):
            cloud = resample(cloud, LIU_WEST_A, rng)
            cache = evaluator.diagonalize(cloud.positions)
            resample_count += 1
    return TrainingResult(
        posterior_mean=cloud.mean(),
        posterior_cov=cloud.cov(),
        experiments=experiments,
        likelihoods=likelihoods,
        resample_count=resample_count,
        prior=prior,
        residuals=residuals,
    )


def sample_posterior_cloud(
    result: TrainingResult, n_particles: int, rng: np.random.Generator
) -> ParticleCloud:
    """Fresh uniform-weight cloud drawn from the Gaussian posterior summary."""
    dim = result.posterior_mean.shape[0]
    if dim == 0:
        return ParticleCloud(np.zeros((max(n_particles, 2), 0)),
                             np.full(max(n_particles, 2), 1.0 / max(n_particles, 2)))
    cov = np.array(result.posterior_cov, float)
    jitter = 1e-12 * max(np.trace(cov), 1e-30)
    cov = cov + jitter * np.eye(dim)
    positions = rng.multivariate_normal(result.posterior_mean, cov, size=n_particles,
                                        method="cholesky")
    return ParticleCloud(positions, np.full(n_particles, 1.0 / n_particles))


def total_log_likelihood(
    model: Model,
    result: TrainingResult,
    experiments: list[ExperimentRecord],
    evaluator: ModelEvaluator,
    n_particles: int,
    rng: np.random.Generator,
) -> float:
    """Sum of log experiment likelihoods over a supplied experiment set.

    Evaluated with a fresh cloud from the trained posterior; weights carry
    over from one experiment to the next. Degenerate experiments are floored
    rather than raised, so cross-evaluations always complete.
    """
    cloud = sample_posterior_cloud(result, n_particles, rng)
    cache = evaluator.diagonalize(cloud.positions)
    tll = 0.0
    for exp in experiments:
        p0 = cache.p0(exp.probe_id, exp.t)
        try:
            cloud, likelihood = bayes_update(cloud, exp.datum, p0)
        except DegenerateUpdateError:
            likelihood = LIKELIHOOD_FLOOR
            cloud = ParticleCloud(
                cloud.positions, np.full(cloud.n_particles, 1.0 / cloud.n_particles)
            )
        tll += float(np.log(likelihood))
    return tll
