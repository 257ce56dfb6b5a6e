"""Command-line entry points.

Subcommands: `search` runs a full model search, `train` runs parameter
learning for one known model structure, `compare` computes a Bayes factor,
and `report` rebuilds CSV summaries from existing ledgers.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import comparison as cmp
from . import config as cfg
from . import reports, smc
from .orchestrator import RunLedger, run_qmla
from .utils import resolve_workers, rng_for

log = logging.getLogger("qmla")


def _load_run_config(args) -> "cfg.RunConfig":
    if args.preset and args.config:
        raise SystemExit("give either --config or --preset, not both")
    if args.preset:
        raw = cfg.preset(args.preset, seed=args.seed_override or 1)
        run_config = cfg.parse_config(raw)
    elif args.config:
        run_config = cfg.load_config(args.config)
    else:
        raise SystemExit("one of --config or --preset is required")
    updates = {}
    if args.seed_override is not None:
        updates["seed"] = args.seed_override
    updates["workers"] = resolve_workers(args.workers or run_config.workers)
    return cfg.RunConfig(
        seed=updates.get("seed", run_config.seed),
        truth=run_config.truth,
        strategies=run_config.strategies,
        workers=updates["workers"],
        n_probes=run_config.n_probes,
        validation_size=run_config.validation_size,
    )


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_search(args) -> int:
    run_config = _load_run_config(args)
    out = _out_dir(args)
    result = run_qmla(run_config, ledger_path=out / "ledger.ndjson")
    ledger = result.ledger
    if ledger.of_type("rating"):
        reports.ratings_csv(ledger, out / "ratings.csv")
    if ledger.of_type("generation"):
        reports.gene_pool_csv(ledger, out / "gene_pool.csv")
        reports.f1_hist_csv(ledger, out / "f1_hist.csv")
    reports.term_frequency_csv([ledger], out / "term_frequency.csv")
    reports.success_rates_csv({"run": [ledger]}, out / "success_rates.csv")
    print(f"champion: {result.champion_name}")
    print(f"terms: {', '.join(result.champion_terms)}")
    print(f"f1: {reports.fmt(result.f1)}  exact: {result.exact}")
    print(f"ledger: {out / 'ledger.ndjson'}")
    return 0


def cmd_train(args) -> int:
    run_config = _load_run_config(args)
    out = _out_dir(args)
    truth = run_config.truth.build(rng_for(run_config.seed, "truth"))
    probes = smc.build_probes(
        truth.n_qubits, rng_for(run_config.seed, "probes"), n_probes=run_config.n_probes
    )
    target = smc.TargetSystem(truth, probes)
    prior = smc.default_prior(truth.k)
    trace: list[dict] = []
    result = smc.train(
        truth,
        target,
        args.experiments,
        args.particles,
        prior,
        rng_for(run_config.seed, "train", truth.name),
        trace=trace,
    )
    trace_path = out / "trace.ndjson"
    with trace_path.open("w") as fh:
        for row in trace:
            fh.write(json.dumps(row) + "\n")
    print(f"true parameters: {[round(p, 6) for p in truth.parameters]}")
    print(f"posterior mean: {[round(m, 6) for m in result.posterior_mean]}")
    print(f"resamplings: {result.resample_count}")
    print(f"trace: {trace_path}")
    return 0


def cmd_compare(args) -> int:
    if args.synthetic_tll:
        payload = json.loads(Path(args.synthetic_tll).read_text())
        record = cmp.ComparisonRecord(
            payload.get("id_i", 0),
            payload.get("id_j", 1),
            payload.get("strategy", "synthetic"),
            payload["tll_i"],
            payload["tll_j"],
        )
        print(f"log_bf: {reports.fmt(record.log_bf)}")
        print(f"favours: model {record.favours()}")
        return 0
    run_config = _load_run_config(args)
    result = run_qmla(run_config)
    comparisons = result.ledger.of_type("comparison")
    for record in comparisons:
        print(
            f"model {record['id_i']} vs model {record['id_j']} "
            f"[{record['strategy']}]: log_bf = {reports.fmt(record['log_bf'])}"
        )
    print(f"champion: {result.champion_name}")
    return 0


def cmd_report(args) -> int:
    out = _out_dir(args)
    ledgers = [RunLedger.load(p) for p in args.ledger]
    grouped: dict[str, list[RunLedger]] = {}
    for path, ledger in zip(args.ledger, ledgers):
        grouped.setdefault(Path(path).parent.name or "run", []).append(ledger)
    reports.success_rates_csv(grouped, out / "success_rates.csv")
    reports.term_frequency_csv(ledgers, out / "term_frequency.csv")
    primary = ledgers[0]
    if primary.of_type("rating"):
        reports.ratings_csv(primary, out / "ratings.csv")
    if primary.of_type("generation"):
        reports.gene_pool_csv(primary, out / "gene_pool.csv")
        reports.f1_hist_csv(primary, out / "f1_hist.csv")
    print(f"reports written to {out}")
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="YAML run configuration")
    parser.add_argument(
        "--preset", choices=cfg.PRESETS, help="bundled study configuration"
    )
    parser.add_argument("--out", default="qmla-out", help="output directory")
    parser.add_argument(
        "--seed-override", type=int, default=None, help="replace the configured seed"
    )
    parser.add_argument(
        "--workers", type=int, default=None,
        help="worker threads (QMLA_WORKERS env var wins)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmla", description="Bayesian Hamiltonian model search"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_search = sub.add_parser("search", help="run a full model search")
    _add_common(p_search)
    p_search.set_defaults(func=cmd_search)

    p_train = sub.add_parser("train", help="learn parameters of the true model")
    _add_common(p_train)
    p_train.add_argument("--experiments", type=int, default=100)
    p_train.add_argument("--particles", type=int, default=500)
    p_train.set_defaults(func=cmd_train)

    p_compare = sub.add_parser("compare", help="Bayes-factor comparisons")
    _add_common(p_compare)
    p_compare.add_argument(
        "--synthetic-tll",
        help="JSON file with tll_i/tll_j; prints the log Bayes factor",
    )
    p_compare.set_defaults(func=cmd_compare)

    p_report = sub.add_parser("report", help="rebuild CSVs from ledgers")
    p_report.add_argument("--ledger", nargs="+", required=True)
    p_report.add_argument("--out", default="qmla-out")
    p_report.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (cfg.ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
