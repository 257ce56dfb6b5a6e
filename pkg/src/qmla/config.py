"""YAML run configuration: schema validation, parsing, and named presets."""

from __future__ import annotations

from pathlib import Path

import jsonschema
import yaml

from .exploration import GAConfig, Resources, StrategyConfig
from .genome import xyz_gene_map
from .orchestrator import RunConfig, TrueModelSpec
from .terms import FAMILIES, named_lattice

SCHEMA_VERSION = 1

_RESOURCES_SCHEMA = {
    "type": "object",
    "properties": {
        "n_experiments": {"type": "integer", "minimum": 1},
        "n_particles": {"type": "integer", "minimum": 2},
        "n_eval_particles": {"type": "integer", "minimum": 2},
        "n_restarts": {"type": "integer", "minimum": 1},
        "prior": {"enum": ["normal", "uniform"]},
    },
    "additionalProperties": False,
}

_GA_SCHEMA = {
    "type": "object",
    "properties": {
        "n_models": {"type": "integer", "minimum": 4},
        "n_generations": {"type": "integer", "minimum": 1},
        "mutation_prob": {"type": "number", "minimum": 0, "maximum": 1},
        "truncation_fraction": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "elite_count": {"type": "integer", "minimum": 0},
        "stagnation_window": {"type": "integer", "minimum": 2},
        "initial_gene_prob": {
            "type": "number",
            "exclusiveMinimum": 0,
            "exclusiveMaximum": 1,
        },
        "objective": {
            "enum": ["elo", "inverse-ll", "aicc", "bic", "bf-points", "rank", "residual"]
        },
    },
    "additionalProperties": False,
}

_STRATEGY_SCHEMA = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["fixed-set", "family-forest", "genetic"]},
        "name": {"type": "string"},
        "family": {"enum": list(FAMILIES)},
        "lattices": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "forest": {
            "type": "object",
            "additionalProperties": {
                "type": "array", "items": {"type": "string"}, "minItems": 1
            },
        },
        "gene_map": {
            "type": "object",
            "required": ["type", "n_sites"],
            "properties": {
                "type": {"enum": ["xyz"]},
                "n_sites": {"type": "integer", "minimum": 2},
            },
            "additionalProperties": False,
        },
        "resources": _RESOURCES_SCHEMA,
        "ga": _GA_SCHEMA,
        "comparison_strategy": {"enum": ["union", "burn-in", "validation"]},
    },
    "additionalProperties": False,
}

SCHEMA = {
    "type": "object",
    "required": ["schema_version", "seed", "truth", "strategies"],
    "properties": {
        "schema_version": {"type": "integer"},
        "seed": {"type": "integer"},
        "workers": {"type": "integer", "minimum": 1},
        "n_probes": {"type": "integer", "minimum": 1},
        "validation_size": {"type": "integer", "minimum": 1},
        "truth": {
            "type": "object",
            "properties": {
                "family": {"enum": list(FAMILIES)},
                "lattice": {"type": "string"},
                "labels": {"type": "array", "items": {"type": "string"}, "minItems": 1},
                "parameters": {"type": "array", "items": {"type": "number"}},
            },
            "additionalProperties": False,
        },
        "strategies": {"type": "array", "items": _STRATEGY_SCHEMA, "minItems": 1},
    },
    "additionalProperties": False,
}


class ConfigError(ValueError):
    pass


def _build_strategy(raw: dict, index: int) -> StrategyConfig:
    kind = raw["kind"]
    resources = Resources(**raw.get("resources", {}))
    ga = GAConfig(**raw.get("ga", {}))
    gene_map = None
    if "gene_map" in raw:
        gene_map = xyz_gene_map(raw["gene_map"]["n_sites"])
    lattices = tuple(named_lattice(s) for s in raw.get("lattices", ()))
    forest = tuple(
        (family, tuple(named_lattice(s) for s in names))
        for family, names in sorted(raw.get("forest", {}).items())
    )
    if kind == "fixed-set" and (not lattices or "family" not in raw):
        raise ConfigError("fixed-set strategy needs 'family' and 'lattices'")
    if kind == "family-forest" and len(forest) < 2:
        raise ConfigError("family-forest strategy needs >= 2 'forest' entries")
    if kind == "genetic" and gene_map is None:
        raise ConfigError("genetic strategy needs 'gene_map'")
    return StrategyConfig(
        kind=kind,
        name=raw.get("name", f"{kind}-{index}"),
        family=raw.get("family"),
        lattices=lattices,
        forest=forest,
        gene_map=gene_map,
        resources=resources,
        ga=ga,
        comparison_strategy=raw.get("comparison_strategy", "burn-in"),
    )


def parse_config(raw: dict) -> RunConfig:
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid configuration: {exc.message}") from exc
    if raw["schema_version"] != SCHEMA_VERSION:
        raise ConfigError(
            f"unsupported schema_version {raw['schema_version']} "
            f"(this build reads version {SCHEMA_VERSION})"
        )
    truth_raw = raw["truth"]
    params = truth_raw.get("parameters")
    truth = TrueModelSpec(
        parameters=tuple(params) if params is not None else None,
        family=truth_raw.get("family"),
        lattice=named_lattice(truth_raw["lattice"]) if "lattice" in truth_raw else None,
        labels=tuple(truth_raw.get("labels", ())),
    )
    strategies = tuple(
        _build_strategy(s, i) for i, s in enumerate(raw["strategies"])
    )
    return RunConfig(
        seed=raw["seed"],
        truth=truth,
        strategies=strategies,
        workers=raw.get("workers", 1),
        n_probes=raw.get("n_probes", 20),
        validation_size=raw.get("validation_size", 100),
    )


def load_config(path: str | Path) -> RunConfig:
    raw = yaml.safe_load(Path(path).read_text())
    if not isinstance(raw, dict):
        raise ConfigError(f"configuration root must be a mapping: {path}")
    return parse_config(raw)


# ---------------------------------------------------------------------------
# Presets


def _fixed_set_preset(family: str, lattices, truth_lattice: str, seed: int) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "seed": seed,
        "truth": {"family": family, "lattice": truth_lattice},
        "strategies": [
            {
                "kind": "fixed-set",
                "name": f"{family}-sets",
                "family": family,
                "lattices": list(lattices),
                "resources": {"n_experiments": 250, "n_particles": 1000},
            }
        ],
    }


def preset(name: str, seed: int = 1) -> dict:
    """Raw configuration dictionaries for the bundled study presets."""
    spin_lattices = ["chain-2", "chain-3", "chain-4", "ring-4"]
    if name == "fig2-ising":
        return _fixed_set_preset("ising", spin_lattices, "chain-3", seed)
    if name == "fig2-heisenberg":
        return _fixed_set_preset("heisenberg", spin_lattices, "chain-3", seed)
    if name == "fig2-hubbard":
        return _fixed_set_preset("hubbard", ["chain-2", "chain-3"], "chain-2", seed)
    if name == "fig3-family":
        return {
            "schema_version": SCHEMA_VERSION,
            "seed": seed,
            "truth": {"family": "heisenberg", "lattice": "chain-3"},
            "strategies": [
                {
                    "kind": "family-forest",
                    "name": "family-forest",
                    "forest": {
                        "ising": ["chain-2", "chain-3"],
                        "heisenberg": ["chain-2", "chain-3"],
                        "hubbard": ["chain-2"],
                    },
                    "resources": {"n_experiments": 150, "n_particles": 600},
                }
            ],
        }
    if name == "fig4-ga":
        return {
            "schema_version": SCHEMA_VERSION,
            "seed": seed,
            "truth": {
                "labels": [
                    "pauli:x:(1,2)", "pauli:z:(1,2)",
                    "pauli:y:(1,3)", "pauli:y:(2,3)", "pauli:z:(2,3)",
                ]
            },
            "strategies": [
                {
                    "kind": "genetic",
                    "name": "ga-xyz-3",
                    "gene_map": {"type": "xyz", "n_sites": 3},
                    "resources": {"n_experiments": 100, "n_particles": 500},
                    "ga": {"n_models": 12, "n_generations": 8, "objective": "elo"},
                }
            ],
        }
    raise ConfigError(f"unknown preset {name!r}")


PRESETS = ("fig2-ising", "fig2-heisenberg", "fig2-hubbard", "fig3-family", "fig4-ga")
