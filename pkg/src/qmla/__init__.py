"""Agent-based search for the Hamiltonian model that best explains a quantum
system, combining sequential-Monte-Carlo parameter learning, Bayes-factor
model comparison, Elo-style ratings, and genetic exploration."""

from .comparison import ComparisonRecord, bayes_factor, build_comparison_graph
from .config import load_config, parse_config, preset
from .exploration import GAConfig, Resources, SearchContext, StrategyConfig, run_strategy
from .genome import Chromosome, GeneMap, decode, encode, f1_metrics, xyz_gene_map
from .orchestrator import RunConfig, RunLedger, RunResult, TrueModelSpec, run_qmla
from .smc import Prior, PriorSpec, TargetSystem, default_prior, train
from .terms import LatticeSpec, Model, TermLabel, lattice_to_model, named_lattice

__all__ = [
    "ComparisonRecord",
    "bayes_factor",
    "build_comparison_graph",
    "load_config",
    "parse_config",
    "preset",
    "GAConfig",
    "Resources",
    "SearchContext",
    "StrategyConfig",
    "run_strategy",
    "Chromosome",
    "GeneMap",
    "decode",
    "encode",
    "f1_metrics",
    "xyz_gene_map",
    "RunConfig",
    "RunLedger",
    "RunResult",
    "TrueModelSpec",
    "run_qmla",
    "Prior",
    "PriorSpec",
    "TargetSystem",
    "default_prior",
    "train",
    "LatticeSpec",
    "Model",
    "TermLabel",
    "lattice_to_model",
    "named_lattice",
]

__version__ = "0.1.0"
