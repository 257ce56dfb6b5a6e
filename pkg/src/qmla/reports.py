"""CSV summaries aggregated from run ledgers.

All floating-point values are written with 12 significant digits so reports
are reproducible byte-for-byte across runs of the same seed.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .orchestrator import RunLedger

F1_BINS = 10


def fmt(value) -> str:
    """12-significant-digit rendering for floats; everything else verbatim."""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    return str(value)


def write_csv(path: str | Path, header: list[str], rows: list[tuple]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    return path


def _results(ledgers: list[RunLedger]) -> list[dict]:
    out = []
    for ledger in ledgers:
        records = ledger.of_type("result")
        if not records:
            raise ValueError("ledger has no result record")
        out.append(records[-1])
    return out


def success_rates_csv(
    grouped: dict[str, list[RunLedger]], path: str | Path
) -> Path:
    """Exact-identification rate per study group over its run instances."""
    rows = []
    for label in sorted(grouped):
        results = _results(grouped[label])
        n = len(results)
        exact = sum(1 for r in results if r["exact"])
        median_f1 = float(np.median([r["f1"] for r in results]))
        rows.append((label, n, exact, exact / n, median_f1))
    return write_csv(
        path,
        ["group", "n_instances", "n_exact", "success_rate", "median_f1"],
        rows,
    )


def ratings_csv(ledger: RunLedger, path: str | Path) -> Path:
    """Per-generation Elo rating trajectory of every rated model."""
    rows = [
        (r["generation"], r["model_id"], r["model"], r["rating"])
        for r in ledger.of_type("rating")
    ]
    return write_csv(path, ["generation", "model_id", "model", "rating"], rows)


def gene_pool_csv(ledger: RunLedger, path: str | Path) -> Path:
    """Every chromosome visited by the genetic search, with its fitness."""
    rows = []
    for record in ledger.of_type("generation"):
        for entry in record["models"]:
            rows.append(
                (
                    record["generation"],
                    entry["chromosome"],
                    entry["model_id"],
                    entry["fitness"],
                    "" if entry["f1"] is None else entry["f1"],
                )
            )
    return write_csv(
        path, ["generation", "chromosome", "model_id", "fitness", "f1"], rows
    )


def f1_hist_csv(ledger: RunLedger, path: str | Path, bins: int = F1_BINS) -> Path:
    """Histogram of model F1 scores per genetic generation."""
    edges = np.linspace(0.0, 1.0, bins + 1)
    rows = []
    for record in ledger.of_type("generation"):
        scores = [e["f1"] for e in record["models"] if e["f1"] is not None]
        counts, _ = np.histogram(scores, bins=edges)
        for lo, hi, count in zip(edges[:-1], edges[1:], counts):
            rows.append((record["generation"], lo, hi, int(count)))
    return write_csv(path, ["generation", "bin_low", "bin_high", "count"], rows)


def term_frequency_csv(ledgers: list[RunLedger], path: str | Path) -> Path:
    """How often each term appears in the champion model, across runs."""
    counts: dict[str, int] = {}
    results = _results(ledgers)
    for ledger in ledgers:
        champion_id = ledger.of_type("result")[-1]["champion_id"]
        models = {m["model_id"]: m for m in ledger.of_type("model")}
        for term in models[champion_id]["terms"]:
            counts[term] = counts.get(term, 0) + 1
    n = len(results)
    rows = [(term, counts[term], counts[term] / n) for term in sorted(counts)]
    return write_csv(path, ["term", "count", "frequency"], rows)
